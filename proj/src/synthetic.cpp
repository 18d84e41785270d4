#include "cadoc/synthetic.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "cadoc/random.hpp"

namespace cadoc::synthetic {

FillerTopicCorpus filler_topic_corpus(const FillerTopicSpec& spec) {
  if (spec.topics_per_doc > spec.topic_pool) throw std::invalid_argument("topic pool smaller than topics per doc");
  FillerTopicCorpus out;
  for (std::size_t i = 0; i < spec.fillers; ++i) out.filler_words.push_back("f" + std::to_string(i));
  for (std::size_t i = 0; i < spec.topic_pool; ++i) out.topic_words.push_back("topic" + std::to_string(i));

  Rng rng(spec.seed);
  for (std::size_t d = 0; d < spec.num_docs; ++d) {
    std::vector<std::size_t> pool(spec.topic_pool);
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    rng.shuffle(pool);
    pool.resize(spec.topics_per_doc);
    std::sort(pool.begin(), pool.end());

    TokenizedDocument doc;
    doc.doc_id = d;
    doc.tokens = out.filler_words;
    rng.shuffle(doc.tokens);
    std::vector<std::string> tags(doc.tokens.size(), "DT");
    for (std::size_t t : pool) {
      const std::size_t at = rng.below(doc.tokens.size() + 1);
      doc.tokens.insert(doc.tokens.begin() + static_cast<std::ptrdiff_t>(at), out.topic_words[t]);
      tags.insert(tags.begin() + static_cast<std::ptrdiff_t>(at), "NN");
    }
    doc.pos_tags = std::move(tags);
    std::size_t sum = 0;
    for (std::size_t t : pool) sum += t;
    out.domains.push_back(sum % 2 == 0 ? "even" : "odd");
    out.documents.push_back(std::move(doc));
  }
  return out;
}

namespace {

std::set<std::string> topics_of(const FillerTopicCorpus& corpus, std::size_t doc) {
  std::set<std::string> topics;
  for (const auto& token : corpus.documents[doc].tokens) {
    if (token.rfind("topic", 0) == 0) topics.insert(token);
  }
  return topics;
}

}  // namespace

std::vector<SyntheticPair> topic_pairs(const FillerTopicCorpus& corpus, std::size_t count, std::uint64_t seed) {
  const std::size_t n = corpus.documents.size();
  if (n < 2) throw std::invalid_argument("topic_pairs: need at least two documents");
  Rng rng(seed);
  std::vector<SyntheticPair> pairs;
  while (pairs.size() < count) {
    const std::size_t a = rng.below(n);
    const auto ta = topics_of(corpus, a);
    const bool want_overlap = rng.uniform() < 0.5;
    // Bounded search for a partner with (or without) overlap.
    for (int attempt = 0; attempt < 200; ++attempt) {
      const std::size_t b = rng.below(n);
      if (b == a) continue;
      const auto tb = topics_of(corpus, b);
      std::size_t shared = 0;
      for (const auto& t : tb) shared += ta.count(t);
      if ((shared > 0) != want_overlap && attempt < 199) continue;
      pairs.push_back({a, b, 2.5 * static_cast<double>(std::min<std::size_t>(shared, 2))});
      break;
    }
  }
  return pairs;
}

MeanVectorTask mean_vector_task(std::size_t num_docs, std::size_t vocab, std::size_t dim, std::size_t min_len,
                                std::size_t max_len, std::uint64_t seed) {
  if (min_len == 0 || max_len < min_len) throw std::invalid_argument("mean_vector_task: bad length range");
  Rng rng(seed);
  MeanVectorTask task;
  task.word_vectors = EmbeddingTable(vocab, dim);
  for (double& v : task.word_vectors.data()) v = rng.normal();
  task.timesteps = max_len;
  for (std::size_t d = 0; d < num_docs; ++d) {
    const std::size_t len = min_len + rng.below(max_len - min_len + 1);
    std::vector<WordId> ids(len);
    for (auto& id : ids) id = static_cast<WordId>(rng.below(vocab));
    nnet::TrainingExample ex;
    ex.input = nnet::make_sequence(ids, task.word_vectors, task.timesteps);
    ex.target = nnet::Vector::Zero(static_cast<Eigen::Index>(dim));
    for (WordId id : ids) {
      const auto row = task.word_vectors.row(static_cast<std::size_t>(id));
      ex.target += Eigen::Map<const nnet::Vector>(row.data(), static_cast<Eigen::Index>(dim));
    }
    ex.target /= static_cast<double>(len);
    task.docs.push_back(std::move(ids));
    task.examples.push_back(std::move(ex));
  }
  return task;
}

}  // namespace cadoc::synthetic
