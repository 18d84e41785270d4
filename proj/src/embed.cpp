#include "cadoc/embed.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "cadoc/weights.hpp"

namespace cadoc {

namespace {

constexpr double kSigmoidCeil = 1.0 - 0x1.0p-53;
constexpr int kCollisionRetries = 10;

}  // namespace

double sigmoid(double x) {
  double s;
  if (x >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    s = e / (1.0 + e);
  }
  return std::clamp(s, kSigmoidFloor, kSigmoidCeil);
}

double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

NegativeSamplingDistribution::NegativeSamplingDistribution(const Vocabulary& vocab, double exponent) {
  if (vocab.empty()) throw std::invalid_argument("negative distribution: empty vocabulary");
  if (!(exponent > 0.0)) throw std::invalid_argument("negative distribution: exponent must be positive");
  std::vector<double> masses(vocab.size());
  for (std::size_t i = 0; i < masses.size(); ++i) {
    masses[i] = std::pow(static_cast<double>(vocab.term_freqs()[i]), exponent);
  }
  sampler_ = DiscreteSampler(masses);
}

void TrainConfig::validate() const {
  if (dimension == 0) throw std::invalid_argument("dimension must be positive");
  if (window == 0) throw std::invalid_argument("window must be positive");
  if (negatives < 1) throw std::invalid_argument("negatives must be >= 1");
  if (!(final_lr > 0.0) || final_lr > initial_lr) {
    throw std::invalid_argument("learning rates must satisfy 0 < final <= initial");
  }
  if (!(negative_exponent > 0.0)) throw std::invalid_argument("negative exponent must be positive");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

double pair_objective(std::span<const double> input, std::span<const double> context,
                      std::span<const std::span<const double>> negatives, double weight) {
  double value = log_sigmoid(dot(context, input));
  for (const auto& neg : negatives) value += log_sigmoid(-dot(neg, input));
  return weight * value;
}

void wdbow_pair_step(std::span<double> input, std::span<double> context,
                     std::span<const std::span<double>> negatives, double lr, double weight) {
  const std::size_t dim = input.size();
  if (context.size() != dim) throw std::invalid_argument("pair step: dimension mismatch");
  for (const auto& neg : negatives) {
    if (neg.size() != dim) throw std::invalid_argument("pair step: dimension mismatch");
  }
  if (weight == 0.0) return;

  thread_local std::vector<double> coeffs;
  thread_local std::vector<double> grad_input;
  coeffs.resize(negatives.size());
  grad_input.assign(dim, 0.0);

  // d/df of w*log s(f) is w*(1 - s(f)); of w*log s(-f) it is -w*s(f).
  const double pos = weight * (1.0 - sigmoid(dot(context, input)));
  for (std::size_t k = 0; k < negatives.size(); ++k) {
    coeffs[k] = -weight * sigmoid(dot(negatives[k], input));
  }
  for (std::size_t i = 0; i < dim; ++i) grad_input[i] = pos * context[i];
  for (std::size_t k = 0; k < negatives.size(); ++k) {
    const auto neg = negatives[k];
    for (std::size_t i = 0; i < dim; ++i) grad_input[i] += coeffs[k] * neg[i];
  }

  for (std::size_t i = 0; i < dim; ++i) context[i] += lr * pos * input[i];
  for (std::size_t k = 0; k < negatives.size(); ++k) {
    const auto neg = negatives[k];
    const double step = lr * coeffs[k];
    for (std::size_t i = 0; i < dim; ++i) neg[i] += step * input[i];
  }
  for (std::size_t i = 0; i < dim; ++i) input[i] += lr * grad_input[i];
}

namespace {

void init_uniform(EmbeddingTable& table, Rng& rng) {
  const double half = 0.5 / static_cast<double>(table.dimension());
  for (double& v : table.data()) v = rng.uniform(-half, half);
}

struct TrainingTables {
  EmbeddingTable* docs = nullptr;     // null: no DBOW component
  EmbeddingTable* words = nullptr;    // input vectors
  EmbeddingTable* context = nullptr;  // output vectors
  bool skipgram = false;
};

class Worker {
 public:
  Worker(const Corpus& corpus, const TrainConfig& cfg, const WeightSet* weights,
         const NegativeSamplingDistribution& negatives, std::span<const double> keep,
         TrainingTables tables, std::atomic<std::uint64_t>& processed, std::uint64_t total_steps,
         std::uint64_t seed)
      : corpus_(corpus),
        cfg_(cfg),
        weights_(weights),
        negatives_(negatives),
        keep_(keep),
        tables_(tables),
        processed_(processed),
        total_steps_(total_steps),
        rng_(seed) {
    neg_spans_.reserve(cfg.negatives);
  }

  void train_document(std::size_t doc) {
    const auto occurrences = corpus_.occurrences(doc);
    surviving_.clear();
    for (std::size_t k = 0; k < occurrences.size(); ++k) {
      const double p = keep_[static_cast<std::size_t>(occurrences[k].word)];
      if (p >= 1.0 || rng_.uniform() < p) surviving_.push_back(k);
    }

    const std::uint64_t start = processed_.fetch_add(occurrences.size(), std::memory_order_relaxed);

    for (std::size_t s = 0; s < surviving_.size(); ++s) {
      const std::size_t k = surviving_[s];
      const double lr = learning_rate(start + k);
      const WordId target = occurrences[k].word;
      if (tables_.docs != nullptr) {
        const double weight = weights_ != nullptr ? weights_->doc(doc)[k].weight : 1.0;
        draw_negatives(target);
        wdbow_pair_step(tables_.docs->row(doc), context_row(target), neg_spans_, lr, weight);
      }
      if (tables_.skipgram) skipgram_center(occurrences, s, lr);
    }
  }

 private:
  double learning_rate(std::uint64_t processed) const {
    if (total_steps_ == 0) return cfg_.initial_lr;
    const double frac = std::min(1.0, static_cast<double>(processed) / static_cast<double>(total_steps_));
    return std::max(cfg_.final_lr, cfg_.initial_lr - (cfg_.initial_lr - cfg_.final_lr) * frac);
  }

  std::span<double> context_row(WordId w) { return tables_.context->row(static_cast<std::size_t>(w)); }

  void draw_negatives(WordId target) {
    neg_spans_.clear();
    for (std::size_t k = 0; k < cfg_.negatives; ++k) {
      for (int attempt = 0; attempt < kCollisionRetries; ++attempt) {
        const WordId w = negatives_.sample(rng_);
        if (w != target) {
          neg_spans_.push_back(context_row(w));
          break;
        }
      }
    }
  }

  // The center word's output vector is predicted from each context word's
  // input vector inside a randomly shrunk window.
  void skipgram_center(std::span<const Occurrence> occurrences, std::size_t s, double lr) {
    const WordId center = occurrences[surviving_[s]].word;
    const std::size_t radius = 1 + rng_.below(cfg_.window);
    const std::size_t lo = s >= radius ? s - radius : 0;
    const std::size_t hi = std::min(surviving_.size() - 1, s + radius);
    for (std::size_t c = lo; c <= hi; ++c) {
      if (c == s) continue;
      const WordId ctx = occurrences[surviving_[c]].word;
      draw_negatives(center);
      wdbow_pair_step(tables_.words->row(static_cast<std::size_t>(ctx)), context_row(center),
                      neg_spans_, lr, 1.0);
    }
  }

  const Corpus& corpus_;
  const TrainConfig& cfg_;
  const WeightSet* weights_;
  const NegativeSamplingDistribution& negatives_;
  std::span<const double> keep_;
  TrainingTables tables_;
  std::atomic<std::uint64_t>& processed_;
  std::uint64_t total_steps_;
  Rng rng_;
  std::vector<std::size_t> surviving_;
  std::vector<std::span<double>> neg_spans_;
};

std::vector<double> keep_table(const Vocabulary& vocab, double threshold) {
  std::vector<double> keep(vocab.size(), 1.0);
  if (threshold <= 0.0) return keep;
  const double total = static_cast<double>(vocab.total_tokens());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    keep[i] = keep_probability(static_cast<double>(vocab.term_freqs()[i]) / total, threshold);
  }
  return keep;
}

void run_training(const Corpus& corpus, const TrainConfig& cfg, const WeightSet* weights,
                  TrainingTables tables, DbowResult& result, const EpochCallback& on_epoch) {
  const NegativeSamplingDistribution negatives(corpus.vocabulary(), cfg.negative_exponent);
  const auto keep = keep_table(corpus.vocabulary(), cfg.subsample_threshold);
  const std::uint64_t total_steps = static_cast<std::uint64_t>(cfg.epochs) * corpus.total_occurrences();
  std::atomic<std::uint64_t> processed{0};

  if (cfg.threads <= 1) {
    Worker worker(corpus, cfg, weights, negatives, keep, tables, processed, total_steps,
                  derive_seed(cfg.seed, 1));
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      for (std::size_t doc = 0; doc < corpus.size(); ++doc) worker.train_document(doc);
      if (on_epoch) on_epoch(epoch, result);
    }
    return;
  }

  // Lock-free mode: workers own disjoint document subsets and update the
  // shared tables without synchronization.
  std::vector<std::thread> pool;
  pool.reserve(cfg.threads);
  for (std::size_t t = 0; t < cfg.threads; ++t) {
    pool.emplace_back([&, t] {
      Worker worker(corpus, cfg, weights, negatives, keep, tables, processed, total_steps,
                    derive_seed(cfg.seed, 1 + t));
      for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t doc = t; doc < corpus.size(); doc += cfg.threads) worker.train_document(doc);
      }
    });
  }
  for (auto& th : pool) th.join();
  if (on_epoch && cfg.epochs > 0) on_epoch(cfg.epochs - 1, result);
}

EmbeddingTable init_word_table(const Vocabulary& vocab, std::size_t dim, Rng& rng) {
  EmbeddingTable words(vocab.size(), dim);
  init_uniform(words, rng);
  words.keys().assign(vocab.words().begin(), vocab.words().end());
  return words;
}

EmbeddingTable zero_context_table(const Vocabulary& vocab, std::size_t dim) {
  EmbeddingTable context(vocab.size(), dim);
  context.keys().assign(vocab.words().begin(), vocab.words().end());
  return context;
}

}  // namespace

DbowResult train_dbow(const Corpus& corpus, const TrainConfig& cfg, const WeightSet* weights,
                      const EmbeddingTable* word_init, const EpochCallback& on_epoch) {
  cfg.validate();
  if (weights != nullptr && !weights->matches(corpus)) {
    throw std::invalid_argument("weight count mismatch: weight set does not cover the corpus occurrences");
  }
  const Vocabulary& vocab = corpus.vocabulary();
  Rng init_rng(cfg.seed);

  DbowResult result;
  result.word_vectors = init_word_table(vocab, cfg.dimension, init_rng);
  result.doc_vectors = EmbeddingTable(corpus.size(), cfg.dimension);
  init_uniform(result.doc_vectors, init_rng);
  for (const auto& doc : corpus.documents()) result.doc_vectors.keys().push_back(doc_key(doc.doc_id));
  result.context_vectors = zero_context_table(vocab, cfg.dimension);

  if (word_init != nullptr) {
    if (word_init->dimension() != cfg.dimension) {
      throw std::invalid_argument("pretrained word vectors have dimension " +
                                  std::to_string(word_init->dimension()) + ", expected " +
                                  std::to_string(cfg.dimension));
    }
    for (std::size_t r = 0; r < word_init->rows() && r < word_init->keys().size(); ++r) {
      if (auto id = vocab.find(word_init->keys()[r])) {
        std::ranges::copy(word_init->row(r), result.word_vectors.row(static_cast<std::size_t>(*id)).begin());
      }
    }
  }

  TrainingTables tables{&result.doc_vectors, &result.word_vectors, &result.context_vectors,
                        cfg.joint_word_training};
  run_training(corpus, cfg, weights, tables, result, on_epoch);
  return result;
}

EmbeddingTable train_skipgram(const Corpus& corpus, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  const Vocabulary& vocab = corpus.vocabulary();
  Rng init_rng(cfg.seed);

  DbowResult result;
  result.word_vectors = init_word_table(vocab, cfg.dimension, init_rng);
  result.context_vectors = zero_context_table(vocab, cfg.dimension);
  TrainingTables tables{nullptr, &result.word_vectors, &result.context_vectors, true};
  run_training(corpus, cfg, nullptr, tables, result, on_epoch);
  return std::move(result.word_vectors);
}

std::vector<double> average_word_vectors(const TokenizedDocument& doc, const Vocabulary& vocab,
                                         const EmbeddingTable& word_vectors) {
  std::vector<double> mean(word_vectors.dimension(), 0.0);
  std::size_t count = 0;
  for (const auto& token : doc.tokens) {
    const auto id = vocab.find(token);
    if (!id) continue;
    const auto row = word_vectors.row(static_cast<std::size_t>(*id));
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += row[i];
    ++count;
  }
  if (count == 0) throw std::invalid_argument("document has no in-vocabulary tokens");
  for (double& v : mean) v /= static_cast<double>(count);
  return mean;
}

}  // namespace cadoc
