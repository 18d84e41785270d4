#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cadoc/caweights.hpp"
#include "cadoc/corpus.hpp"
#include "cadoc/embedding.hpp"
#include "cadoc/nnet.hpp"
#include "cadoc/stats.hpp"

namespace cadoc {

struct StsPair {
  std::vector<std::string> sentence_a;
  std::vector<std::string> sentence_b;
  double gold_score = 0.0;
  std::string domain;
  // Rows of the document table holding each sentence's vector.
  std::size_t doc_a = 0;
  std::size_t doc_b = 0;
};

// Tab-separated "gold<TAB>sentence A<TAB>sentence B[<TAB>domain]" lines. A
// missing fourth column takes default_domain.
std::vector<StsPair> read_sts_pairs(const std::filesystem::path& path, const std::string& default_domain);

// Points each pair at the corpus documents with identical token sequences.
void resolve_sts_pairs(std::vector<StsPair>& pairs, const Corpus& corpus);

struct DomainScore {
  std::string domain;
  double pearson = 0.0;
  std::size_t pairs = 0;
};

struct EvalReport {
  std::string method;
  std::vector<DomainScore> domains;  // sorted by domain name
  std::size_t total_pairs = 0;

  const DomainScore* find(const std::string& domain) const;
};

// Predicted similarity is the cosine of the two document vectors; Pearson is
// taken per domain against the gold scores.
EvalReport sts_evaluate(const EmbeddingTable& doc_vectors, const std::vector<StsPair>& pairs,
                        const std::string& method);

// One JSON object per line and domain: method, domain, pearson, pairs.
void write_report(const EvalReport& report, const std::filesystem::path& path);
std::string format_report(const EvalReport& report);

// Average-of-word-vectors document table (skip-gram baseline).
EmbeddingTable average_document_vectors(const Corpus& corpus, const EmbeddingTable& word_vectors);

// ---------------------------------------------------------------------------
// Introspection

inline constexpr double kFeatureChangeTolerance = 1e-9;

// Per retained token inside the model window: mean count, over the
// strategy's samples, of pooled features whose value moves by more than
// `tolerance` when that token is substituted.
std::vector<double> cnn_feature_changes(const nnet::CnnModel& model, const Corpus& corpus, std::size_t doc,
                                        const EmbeddingTable& word_vectors, const SamplingStrategy& strategy,
                                        std::uint64_t seed, double tolerance = kFeatureChangeTolerance);

// cnn_feature_changes rounded to the nearest integer.
std::vector<int> introspect_cnn(const nnet::CnnModel& model, const Corpus& corpus, std::size_t doc,
                                const EmbeddingTable& word_vectors, const SamplingStrategy& strategy,
                                std::uint64_t seed, double tolerance = kFeatureChangeTolerance);

// Euclidean norm of the reset gate at every real (non-padding) timestep.
std::vector<double> introspect_gru(const nnet::GruModel& model, std::span<const WordId> ids,
                                   const EmbeddingTable& word_vectors);

struct IntrospectionRow {
  std::string token;
  int cnn_feature_changes = 0;
  double gru_reset_norm = 0.0;
  double idf = 0.0;
};

// Rows for every retained token of `doc` that falls inside the model window.
std::vector<IntrospectionRow> introspection_rows(const nnet::CnnModel& cnn, const nnet::GruModel& gru,
                                                 const Corpus& corpus, std::size_t doc,
                                                 const EmbeddingTable& word_vectors,
                                                 const SamplingStrategy& strategy, std::uint64_t seed);

struct IntrospectionCorrelations {
  double cnn_idf = 0.0;
  double gru_idf = 0.0;
};

IntrospectionCorrelations introspection_correlations(std::span<const IntrospectionRow> rows);

}  // namespace cadoc
