#include "cadoc/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "cadoc/corpus.hpp"

namespace cadoc {

bool EmbeddingTable::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::optional<std::size_t> EmbeddingTable::find_key(std::string_view key) const {
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (keys_[i] == key) return i;
  }
  return std::nullopt;
}

void write_vectors(const EmbeddingTable& table, const std::filesystem::path& path) {
  if (!table.keys().empty() && table.keys().size() != table.rows()) {
    throw std::invalid_argument("write_vectors: key count does not match row count");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << table.rows() << ' ' << table.dimension() << '\n';
  char buf[32];
  for (std::size_t i = 0; i < table.rows(); ++i) {
    if (table.keys().empty()) {
      out << i;
    } else {
      const auto& key = table.keys()[i];
      if (key.empty() || key.find_first_of(" \t\n") != std::string::npos) {
        throw std::invalid_argument("write_vectors: key '" + key + "' is empty or has whitespace");
      }
      out << key;
    }
    for (double v : table.row(i)) {
      const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ' ';
      out.write(buf, n);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("error writing " + path.string());
}

EmbeddingTable read_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": missing header");
  const auto header = split_whitespace(line);
  if (header.size() != 2) throw std::runtime_error(path.string() + ": header must be 'count dimension'");
  const std::size_t rows = std::stoull(header[0]);
  const std::size_t dim = std::stoull(header[1]);

  EmbeddingTable table(rows, dim);
  table.keys().reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) {
      throw std::runtime_error(path.string() + ": expected " + std::to_string(rows) + " rows, got " +
                               std::to_string(i));
    }
    const auto fields = split_whitespace(line);
    if (fields.size() != dim + 1) {
      throw std::runtime_error(path.string() + ":" + std::to_string(i + 2) + ": expected " +
                               std::to_string(dim) + " values");
    }
    table.keys().push_back(fields[0]);
    auto row = table.row(i);
    for (std::size_t k = 0; k < dim; ++k) {
      const auto& f = fields[k + 1];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[k]);
      if (ec != std::errc{} || ptr != f.data() + f.size()) {
        throw std::runtime_error(path.string() + ":" + std::to_string(i + 2) + ": bad number '" + f + "'");
      }
    }
  }
  return table;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine of a zero vector");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  return 1.0 - cosine_similarity(a, b);
}

}  // namespace cadoc
