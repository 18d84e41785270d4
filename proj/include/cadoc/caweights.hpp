#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cadoc/corpus.hpp"
#include "cadoc/embedding.hpp"
#include "cadoc/nnet.hpp"
#include "cadoc/random.hpp"
#include "cadoc/weights.hpp"

namespace cadoc {

inline constexpr double kDefaultCaTemperature = 1.0 / 14.5;
inline constexpr double kDefaultIdfTemperature = 5.5;

enum class SamplingVariant {
  kGlobalTf,  // p(w) proportional to term frequency
  kPosTf,     // term frequency among words carrying the substituted tag
};

std::string_view to_string(SamplingVariant variant);
SamplingVariant parse_sampling_variant(std::string_view name);

struct SamplingStrategy {
  SamplingVariant variant = SamplingVariant::kGlobalTf;
  std::size_t sample_count = 50;

  static SamplingStrategy global(std::size_t samples = 50) { return {SamplingVariant::kGlobalTf, samples}; }
  static SamplingStrategy pos(std::size_t samples = 10) { return {SamplingVariant::kPosTf, samples}; }
};

// Draws replacement words for an occurrence. Draws equal to the original
// word are repeated a bounded number of times.
class SubstitutionSampler {
 public:
  SubstitutionSampler(const Corpus& corpus, SamplingVariant variant);

  WordId draw(Rng& rng, WordId original, std::string_view pos_tag = {}) const;

  // Tags whose class has fewer than two distinct words draw from the global
  // distribution.
  bool uses_global_fallback(std::string_view pos_tag) const;

 private:
  struct TagClass {
    std::vector<WordId> members;
    DiscreteSampler sampler;
  };

  WordId draw_once(Rng& rng, std::string_view pos_tag) const;

  SamplingVariant variant_;
  DiscreteSampler global_;
  std::unordered_map<std::string, TagClass> by_tag_;
};

// Temperature softmax scaled by the set size, so the mean weight is 1:
//   psi(w) = |W| exp(w / T) / sum_v exp(v / T).
WeightSet normalize(const WeightSet& raw, double temperature);

// For every occurrence, the mean cosine distance between the stored
// document vector and the aux model's prediction for the document with that
// occurrence substituted. Documents are independent; each uses an RNG stream
// derived from (seed, doc index), so results do not depend on `threads`.
WeightSet generate_ca_weights(const nnet::AuxModel& aux, const Corpus& corpus, const EmbeddingTable& doc_vectors,
                              const EmbeddingTable& word_vectors, const SamplingStrategy& strategy,
                              std::uint64_t seed, std::size_t threads = 1);

// Raw weight of each occurrence = idf of its word.
WeightSet idf_weight_set(const Corpus& corpus);

// Pearson correlation over paired occurrences; both sets must index the same
// occurrences.
double weight_idf_correlation(const WeightSet& ca, const WeightSet& idf);

// Aux-model training pairs: each document's padded word-vector sequence and
// its trained document vector.
std::vector<nnet::TrainingExample> aux_training_examples(const Corpus& corpus, const EmbeddingTable& doc_vectors,
                                                         const EmbeddingTable& word_vectors, std::size_t timesteps);

// Longest document, counted in retained occurrences.
std::size_t longest_document(const Corpus& corpus);

std::vector<WordId> occurrence_ids(const Corpus& corpus, std::size_t doc);

}  // namespace cadoc
