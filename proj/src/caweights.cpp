#include "cadoc/caweights.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>

#include "cadoc/stats.hpp"

namespace cadoc {

namespace {

constexpr int kCollisionRetries = 32;

}  // namespace

std::string_view to_string(SamplingVariant variant) {
  return variant == SamplingVariant::kGlobalTf ? "global" : "pos";
}

SamplingVariant parse_sampling_variant(std::string_view name) {
  if (name == "global") return SamplingVariant::kGlobalTf;
  if (name == "pos") return SamplingVariant::kPosTf;
  throw std::invalid_argument("unknown sampling distribution '" + std::string(name) + "' (expected global or pos)");
}

SubstitutionSampler::SubstitutionSampler(const Corpus& corpus, SamplingVariant variant) : variant_(variant) {
  const Vocabulary& vocab = corpus.vocabulary();
  if (vocab.empty()) throw std::invalid_argument("substitution sampler: empty vocabulary");
  std::vector<double> tf(vocab.term_freqs().begin(), vocab.term_freqs().end());
  global_ = DiscreteSampler(tf);
  if (variant_ != SamplingVariant::kPosTf) return;
  if (!corpus.has_pos_tags()) throw std::invalid_argument("POS sampling requires POS tags on every document");

  // Ordered map keeps member order independent of hashing.
  std::map<std::string, std::map<WordId, double>> counts;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& tags = *corpus.document(i).pos_tags;
    for (const auto& occ : corpus.occurrences(i)) counts[tags[occ.position]][occ.word] += 1.0;
  }
  for (auto& [tag, words] : counts) {
    TagClass cls;
    std::vector<double> masses;
    for (const auto& [word, count] : words) {
      cls.members.push_back(word);
      masses.push_back(count);
    }
    cls.sampler = DiscreteSampler(masses);
    by_tag_.emplace(tag, std::move(cls));
  }
}

bool SubstitutionSampler::uses_global_fallback(std::string_view pos_tag) const {
  if (variant_ != SamplingVariant::kPosTf) return true;
  const auto it = by_tag_.find(std::string(pos_tag));
  return it == by_tag_.end() || it->second.members.size() < 2;
}

WordId SubstitutionSampler::draw_once(Rng& rng, std::string_view pos_tag) const {
  if (!uses_global_fallback(pos_tag)) {
    const TagClass& cls = by_tag_.find(std::string(pos_tag))->second;
    return cls.members[cls.sampler.sample(rng)];
  }
  return static_cast<WordId>(global_.sample(rng));
}

WordId SubstitutionSampler::draw(Rng& rng, WordId original, std::string_view pos_tag) const {
  WordId w = draw_once(rng, pos_tag);
  for (int attempt = 1; attempt < kCollisionRetries && w == original; ++attempt) w = draw_once(rng, pos_tag);
  return w;
}

WeightSet normalize(const WeightSet& raw, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw std::invalid_argument("normalize: temperature must be positive");
  }
  const auto values = raw.values();
  if (values.empty()) throw std::invalid_argument("normalize: empty weight set");
  const double top = *std::max_element(values.begin(), values.end());
  double denom = 0.0;
  for (double w : values) denom += std::exp((w - top) / temperature);
  const double scale = static_cast<double>(values.size()) / denom;

  std::vector<std::vector<OccurrenceWeight>> docs(raw.num_docs());
  for (std::size_t i = 0; i < raw.num_docs(); ++i) {
    for (const auto& entry : raw.doc(i)) {
      docs[i].push_back({entry.position, scale * std::exp((entry.weight - top) / temperature)});
    }
  }
  return WeightSet(std::move(docs), true, temperature);
}

std::vector<WordId> occurrence_ids(const Corpus& corpus, std::size_t doc) {
  std::vector<WordId> ids;
  for (const auto& occ : corpus.occurrences(doc)) ids.push_back(occ.word);
  return ids;
}

std::size_t longest_document(const Corpus& corpus) {
  std::size_t longest = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) longest = std::max(longest, corpus.occurrences(i).size());
  return longest;
}

namespace {

void check_tables(const nnet::AuxModel& aux, const Corpus& corpus, const EmbeddingTable& doc_vectors,
                  const EmbeddingTable& word_vectors) {
  if (doc_vectors.rows() != corpus.size()) {
    throw std::invalid_argument("document vector table has " + std::to_string(doc_vectors.rows()) +
                                " rows for " + std::to_string(corpus.size()) + " documents");
  }
  if (word_vectors.rows() != corpus.vocabulary().size()) {
    throw std::invalid_argument("word vector table does not match the vocabulary");
  }
  if (word_vectors.dimension() != aux.input_dim() || doc_vectors.dimension() != aux.output_dim()) {
    throw std::invalid_argument("aux model shape does not match the vector tables");
  }
}

// Cosine distance, clamped against rounding just below zero.
double shift(const nnet::Vector& pred, const nnet::Vector& target) {
  return std::max(0.0, nnet::cosine_distance_loss(pred, target));
}

std::vector<double> document_ca_weights(const nnet::AuxModel& aux, const Corpus& corpus, std::size_t doc,
                                        const EmbeddingTable& doc_vectors, const EmbeddingTable& word_vectors,
                                        const SubstitutionSampler& sampler, std::size_t samples, Rng& rng) {
  const auto occurrences = corpus.occurrences(doc);
  const auto ids = occurrence_ids(corpus, doc);
  const std::size_t steps = aux.timesteps();
  const std::size_t offset = nnet::first_real_timestep(ids.size(), steps);
  nnet::Sequence seq = nnet::make_sequence(ids, word_vectors, steps);
  const auto row_d = doc_vectors.row(doc);
  const nnet::Vector target = Eigen::Map<const nnet::Vector>(row_d.data(), static_cast<Eigen::Index>(row_d.size()));
  if (target.norm() == 0.0) throw std::invalid_argument("zero document vector for " + doc_key(doc));
  const auto& tags = corpus.document(doc).pos_tags;

  std::vector<double> weights(occurrences.size(), 0.0);
  std::optional<double> untouched_shift;
  for (std::size_t k = 0; k < occurrences.size(); ++k) {
    if (k >= steps) {
      // Truncated away: substitution cannot move the prediction.
      if (!untouched_shift) {
        untouched_shift = shift(aux.predict(seq), target);
      }
      weights[k] = *untouched_shift;
      continue;
    }
    const auto row = static_cast<Eigen::Index>(offset + k);
    const Eigen::RowVectorXd saved = seq.row(row);
    const std::string_view tag = tags ? std::string_view((*tags)[occurrences[k].position]) : std::string_view{};
    double total = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      const WordId replacement = sampler.draw(rng, occurrences[k].word, tag);
      const auto vec = word_vectors.row(static_cast<std::size_t>(replacement));
      std::ranges::copy(vec, seq.row(row).data());
      total += shift(aux.predict(seq), target);
    }
    seq.row(row) = saved;
    weights[k] = total / static_cast<double>(samples);
  }
  return weights;
}

}  // namespace

WeightSet generate_ca_weights(const nnet::AuxModel& aux, const Corpus& corpus, const EmbeddingTable& doc_vectors,
                              const EmbeddingTable& word_vectors, const SamplingStrategy& strategy,
                              std::uint64_t seed, std::size_t threads) {
  if (strategy.sample_count < 1) throw std::invalid_argument("sample_count must be >= 1");
  check_tables(aux, corpus, doc_vectors, word_vectors);
  const SubstitutionSampler sampler(corpus, strategy.variant);

  std::vector<std::vector<OccurrenceWeight>> docs(corpus.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < corpus.size(); i += stride) {
      Rng rng(derive_seed(seed, i));
      const auto w = document_ca_weights(aux, corpus, i, doc_vectors, word_vectors, sampler,
                                         strategy.sample_count, rng);
      const auto occurrences = corpus.occurrences(i);
      docs[i].reserve(w.size());
      for (std::size_t k = 0; k < w.size(); ++k) docs[i].push_back({occurrences[k].position, w[k]});
    }
  };
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& th : pool) th.join();
  }
  return WeightSet(std::move(docs));
}

WeightSet idf_weight_set(const Corpus& corpus) {
  const auto table = idf_table(corpus.vocabulary(), corpus.size());
  std::vector<std::vector<OccurrenceWeight>> docs(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (const auto& occ : corpus.occurrences(i)) {
      docs[i].push_back({occ.position, table[static_cast<std::size_t>(occ.word)]});
    }
  }
  return WeightSet(std::move(docs));
}

double weight_idf_correlation(const WeightSet& ca, const WeightSet& idf) {
  if (ca.num_docs() != idf.num_docs()) throw std::invalid_argument("weight sets cover different documents");
  for (std::size_t i = 0; i < ca.num_docs(); ++i) {
    const auto a = ca.doc(i);
    const auto b = idf.doc(i);
    if (a.size() != b.size()) throw std::invalid_argument("weight sets cover different occurrences");
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a[k].position != b[k].position) throw std::invalid_argument("weight sets cover different occurrences");
    }
  }
  return pearson(ca.values(), idf.values());
}

std::vector<nnet::TrainingExample> aux_training_examples(const Corpus& corpus, const EmbeddingTable& doc_vectors,
                                                         const EmbeddingTable& word_vectors, std::size_t timesteps) {
  if (doc_vectors.rows() != corpus.size()) throw std::invalid_argument("document vector table does not match corpus");
  if (word_vectors.rows() != corpus.vocabulary().size()) {
    throw std::invalid_argument("word vector table does not match the vocabulary");
  }
  std::vector<nnet::TrainingExample> examples;
  examples.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus.occurrences(i).empty()) continue;
    nnet::TrainingExample ex;
    ex.input = nnet::make_sequence(occurrence_ids(corpus, i), word_vectors, timesteps);
    const auto row = doc_vectors.row(i);
    ex.target = Eigen::Map<const nnet::Vector>(row.data(), static_cast<Eigen::Index>(row.size()));
    if (ex.target.norm() == 0.0) continue;
    examples.push_back(std::move(ex));
  }
  return examples;
}

}  // namespace cadoc
