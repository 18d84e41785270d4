#include "cadoc/weights.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace cadoc {

WeightSet::WeightSet(std::vector<std::vector<OccurrenceWeight>> docs, bool normalized,
                     std::optional<double> temperature)
    : docs_(std::move(docs)), normalized_(normalized), temperature_(temperature) {
  for (const auto& doc : docs_) {
    for (const auto& entry : doc) {
      if (!std::isfinite(entry.weight) || entry.weight < 0.0) {
        throw std::invalid_argument("weights must be finite and non-negative");
      }
    }
  }
}

WeightSet WeightSet::uniform(const Corpus& corpus, double value) {
  std::vector<std::vector<OccurrenceWeight>> docs(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (const auto& occ : corpus.occurrences(i)) docs[i].push_back({occ.position, value});
  }
  return WeightSet(std::move(docs));
}

std::size_t WeightSet::total() const {
  std::size_t n = 0;
  for (const auto& doc : docs_) n += doc.size();
  return n;
}

bool WeightSet::matches(const Corpus& corpus) const {
  if (docs_.size() != corpus.size()) return false;
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    const auto occ = corpus.occurrences(i);
    if (occ.size() != docs_[i].size()) return false;
    for (std::size_t k = 0; k < occ.size(); ++k) {
      if (occ[k].position != docs_[i][k].position) return false;
    }
  }
  return true;
}

std::vector<double> WeightSet::values() const {
  std::vector<double> out;
  out.reserve(total());
  for (const auto& doc : docs_) {
    for (const auto& entry : doc) out.push_back(entry.weight);
  }
  return out;
}

double WeightSet::mean() const {
  const auto v = values();
  if (v.empty()) throw std::invalid_argument("mean of an empty weight set");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void write_weights(const WeightSet& weights, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  char buf[64];
  out << "# normalized=" << (weights.normalized() ? 1 : 0);
  if (weights.temperature()) {
    std::snprintf(buf, sizeof buf, "%.17g", *weights.temperature());
    out << " temperature=" << buf;
  }
  out << '\n';
  for (std::size_t i = 0; i < weights.num_docs(); ++i) {
    out << i;
    for (const auto& entry : weights.doc(i)) {
      std::snprintf(buf, sizeof buf, "%.17g", entry.weight);
      out << ' ' << entry.position << ':' << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("error writing " + path.string());
}

namespace {

template <typename T>
T parse_number(std::string_view text, const std::string& where) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::runtime_error(where + ": bad number '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

WeightSet read_weights(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  bool normalized = false;
  std::optional<double> temperature;
  std::vector<std::vector<OccurrenceWeight>> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (fields[0] == "#") {
      for (std::size_t k = 1; k < fields.size(); ++k) {
        const auto eq = fields[k].find('=');
        if (eq == std::string::npos) continue;
        const std::string_view key(fields[k].data(), eq);
        const std::string_view value(fields[k].data() + eq + 1, fields[k].size() - eq - 1);
        if (key == "normalized") normalized = value == "1";
        if (key == "temperature") temperature = parse_number<double>(value, where);
      }
      continue;
    }
    const auto doc = parse_number<std::size_t>(fields[0], where);
    if (doc != docs.size()) throw std::runtime_error(where + ": documents must be listed in order");
    std::vector<OccurrenceWeight> entries;
    entries.reserve(fields.size() - 1);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      const auto colon = fields[k].find(':');
      if (colon == std::string::npos) throw std::runtime_error(where + ": expected position:weight");
      const std::string_view f = fields[k];
      entries.push_back({parse_number<std::size_t>(f.substr(0, colon), where),
                         parse_number<double>(f.substr(colon + 1), where)});
    }
    docs.push_back(std::move(entries));
  }
  return WeightSet(std::move(docs), normalized, temperature);
}

}  // namespace cadoc
