#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cadoc/corpus.hpp"
#include "cadoc/embedding.hpp"
#include "cadoc/nnet.hpp"

namespace cadoc::synthetic {

// Every document holds the same filler words (in shuffled order) plus a few
// topic words drawn without replacement from a shared pool; topic words are
// inserted at random positions. Fillers are tagged "DT", topic words "NN".
struct FillerTopicSpec {
  std::size_t num_docs = 200;
  std::size_t fillers = 10;
  std::size_t topic_pool = 40;
  std::size_t topics_per_doc = 2;
  std::uint64_t seed = 11;
};

struct FillerTopicCorpus {
  std::vector<TokenizedDocument> documents;
  std::vector<std::string> domains;  // "even" / "odd" by topic-pair parity
  std::vector<std::string> filler_words;
  std::vector<std::string> topic_words;
};

FillerTopicCorpus filler_topic_corpus(const FillerTopicSpec& spec = {});

// Sentence pairs over a filler/topic corpus, scored 2.5 per shared topic word
// (so gold is in {0, 2.5, 5}); about half the pairs share at least one topic.
struct SyntheticPair {
  std::size_t doc_a = 0;
  std::size_t doc_b = 0;
  double gold = 0.0;
};
std::vector<SyntheticPair> topic_pairs(const FillerTopicCorpus& corpus, std::size_t count, std::uint64_t seed);

// Regression task whose target is the mean of the document's word vectors.
struct MeanVectorTask {
  EmbeddingTable word_vectors;             // standard normal entries
  std::vector<std::vector<WordId>> docs;   // random lengths in [min_len, max_len]
  std::vector<nnet::TrainingExample> examples;
  std::size_t timesteps = 0;
};

MeanVectorTask mean_vector_task(std::size_t num_docs = 200, std::size_t vocab = 50, std::size_t dim = 16,
                                std::size_t min_len = 6, std::size_t max_len = 14, std::uint64_t seed = 5);

}  // namespace cadoc::synthetic
