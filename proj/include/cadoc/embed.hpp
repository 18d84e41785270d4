#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>

#include "cadoc/corpus.hpp"
#include "cadoc/embedding.hpp"
#include "cadoc/random.hpp"

namespace cadoc {

class WeightSet;

// Logistic function, clamped away from 0 and 1 so its log stays finite.
double sigmoid(double x);
// Numerically stable log(sigmoid(x)).
double log_sigmoid(double x);

inline constexpr double kSigmoidFloor = 1e-300;

class NegativeSamplingDistribution {
 public:
  NegativeSamplingDistribution() = default;
  NegativeSamplingDistribution(const Vocabulary& vocab, double exponent = 0.75);

  WordId sample(Rng& rng) const { return static_cast<WordId>(sampler_.sample(rng)); }
  std::span<const double> probabilities() const { return sampler_.probabilities(); }
  std::span<const double> cumulative() const { return sampler_.cumulative(); }

 private:
  DiscreteSampler sampler_;
};

inline NegativeSamplingDistribution build_negative_distribution(const Vocabulary& vocab,
                                                                double exponent = 0.75) {
  return NegativeSamplingDistribution(vocab, exponent);
}

struct TrainConfig {
  std::size_t dimension = 300;
  std::size_t window = 15;
  std::size_t min_count = 1;
  double subsample_threshold = 1e-5;  // <= 0 disables subsampling
  std::size_t negatives = 5;
  std::size_t epochs = 400;
  double initial_lr = 0.025;
  double final_lr = 0.0001;
  double negative_exponent = 0.75;
  std::uint64_t seed = 1;
  bool joint_word_training = false;
  // 1 is the deterministic mode; more threads train lock-free and are not
  // reproducible.
  std::size_t threads = 1;

  void validate() const;
};

// The per-occurrence term of the weighted objective, to be maximized:
//   weight * [ log s(c.d) + sum_k log s(-c'_k.d) ]
// where s is the logistic function.
double pair_objective(std::span<const double> input, std::span<const double> context,
                      std::span<const std::span<const double>> negatives, double weight);

// One stochastic ascent step on pair_objective. All gradients are taken at
// the incoming values and applied together, so the parameter delta is
// exactly lr times the gradient. Negative spans may alias each other (a word
// drawn twice) but not input or context.
void wdbow_pair_step(std::span<double> input, std::span<double> context,
                     std::span<const std::span<double>> negatives, double lr, double weight);

struct DbowResult {
  EmbeddingTable doc_vectors;
  EmbeddingTable word_vectors;     // input vectors, trained only in joint mode
  EmbeddingTable context_vectors;  // output vectors used by negative sampling
};

// Optional per-epoch hook for tests and progress reporting.
using EpochCallback = std::function<void(std::size_t epoch, const DbowResult&)>;

// Trains document vectors over every surviving occurrence. Weights, when
// given, scale each occurrence's term; without them every weight is 1.
// word_init rows are matched to the vocabulary by key.
DbowResult train_dbow(const Corpus& corpus, const TrainConfig& cfg,
                      const WeightSet* weights = nullptr,
                      const EmbeddingTable* word_init = nullptr,
                      const EpochCallback& on_epoch = {});

EmbeddingTable train_skipgram(const Corpus& corpus, const TrainConfig& cfg,
                              const EpochCallback& on_epoch = {});

// Mean input vector over the document's in-vocabulary tokens.
std::vector<double> average_word_vectors(const TokenizedDocument& doc, const Vocabulary& vocab,
                                         const EmbeddingTable& word_vectors);

}  // namespace cadoc
