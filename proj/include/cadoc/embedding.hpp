#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cadoc {

// Row-major table of equally sized real vectors, optionally keyed.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::size_t rows, std::size_t dimension)
      : rows_(rows), dimension_(dimension), data_(rows * dimension, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t dimension() const { return dimension_; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * dimension_, dimension_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dimension_, dimension_};
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool all_finite() const;

  // Keys are only used for the text format; when empty, rows are written as
  // their index.
  std::vector<std::string>& keys() { return keys_; }
  const std::vector<std::string>& keys() const { return keys_; }
  std::optional<std::size_t> find_key(std::string_view key) const;

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dimension_ = 0;
  std::vector<double> data_;
  std::vector<std::string> keys_;
};

inline std::string doc_key(std::size_t doc_id) { return "doc:" + std::to_string(doc_id); }

// Text vector format: a "count dimension" header, then one "key v1 ... vD"
// line per row. Values are written with 17 significant digits so a read
// after write reproduces every double exactly.
void write_vectors(const EmbeddingTable& table, const std::filesystem::path& path);
EmbeddingTable read_vectors(const std::filesystem::path& path);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
// 1 - cosine similarity; throws on a zero vector.
double cosine_distance(std::span<const double> a, std::span<const double> b);
double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace cadoc
