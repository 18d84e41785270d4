#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "cadoc/corpus.hpp"

namespace cadoc {

struct OccurrenceWeight {
  std::size_t position = 0;
  double weight = 0.0;

  friend bool operator==(const OccurrenceWeight&, const OccurrenceWeight&) = default;
};

// One weight per retained word occurrence, addressed by (document index,
// token position).
class WeightSet {
 public:
  WeightSet() = default;
  explicit WeightSet(std::vector<std::vector<OccurrenceWeight>> docs, bool normalized = false,
                     std::optional<double> temperature = std::nullopt);

  // Every occurrence of the corpus, all carrying `value`.
  static WeightSet uniform(const Corpus& corpus, double value);

  std::size_t num_docs() const { return docs_.size(); }
  std::span<const OccurrenceWeight> doc(std::size_t i) const { return docs_.at(i); }
  std::span<OccurrenceWeight> doc(std::size_t i) { return docs_.at(i); }
  std::size_t total() const;

  bool normalized() const { return normalized_; }
  std::optional<double> temperature() const { return temperature_; }

  // True when the entries are exactly the corpus occurrences, in order.
  bool matches(const Corpus& corpus) const;
  // Flattened weights in (doc, position) order.
  std::vector<double> values() const;
  double mean() const;

  friend bool operator==(const WeightSet&, const WeightSet&) = default;

 private:
  std::vector<std::vector<OccurrenceWeight>> docs_;
  bool normalized_ = false;
  std::optional<double> temperature_;
};

// One line per document: "<doc index> <pos>:<weight> ...", preceded by a
// "#" metadata line carrying the normalized flag and temperature.
void write_weights(const WeightSet& weights, const std::filesystem::path& path);
WeightSet read_weights(const std::filesystem::path& path);

}  // namespace cadoc
