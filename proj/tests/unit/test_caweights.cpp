#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cadoc/caweights.hpp"
#include "test_util.hpp"

using namespace cadoc;
using cadoc::testing::docs_from;

namespace {

WeightSet flat(std::initializer_list<double> values) {
  std::vector<OccurrenceWeight> doc;
  std::size_t pos = 0;
  for (double v : values) doc.push_back({pos++, v});
  return WeightSet({doc});
}

TokenizedDocument tagged(std::size_t id, std::vector<std::string> tokens, std::vector<std::string> tags) {
  return {id, std::move(tokens), std::move(tags)};
}

// Width-one CNN over scalar word vectors: prediction = (max token value, 1).
nnet::CnnModel max_model(std::size_t timesteps) {
  nnet::CnnModel model(timesteps, 1, 2, {1}, 1);
  model.bank_weights(0)(0, 0) = 1.0;
  model.dense_weights() << 1.0, 0.0;
  model.dense_bias() << 0.0, 1.0;
  return model;
}

}  // namespace

TEST_CASE("normalize examples") {
  const auto psi = normalize(flat({0.0, 0.7 * std::log(3.0)}), 0.7);
  CHECK(psi.normalized());
  CHECK(psi.doc(0)[0].weight == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(psi.doc(0)[1].weight == doctest::Approx(1.5).epsilon(1e-12));

  const auto same = normalize(flat({0.3, 0.3, 0.3}), 0.1);
  for (const auto& e : same.doc(0)) CHECK(e.weight == doctest::Approx(1.0));

  CHECK_THROWS(normalize(flat({1.0}), 0.0));
  CHECK_THROWS(normalize(flat({1.0}), -1.0));
}

TEST_CASE("normalize is stable for large raw values") {
  const auto psi = normalize(flat({1000.0, 1001.0}), 0.01);
  for (double v : psi.values()) CHECK(std::isfinite(v));
  CHECK(psi.mean() == doctest::Approx(1.0));
}

TEST_CASE("normalize invariants over random sets") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<OccurrenceWeight>> docs(1 + rng.below(5));
    for (auto& d : docs) {
      const std::size_t n = 1 + rng.below(12);
      for (std::size_t k = 0; k < n; ++k) d.push_back({k, rng.uniform(0.0, 2.0)});
    }
    const WeightSet raw(docs);
    const double temperature = std::exp(rng.uniform(-3.0, 3.0));
    const auto psi = normalize(raw, temperature);
    CHECK(std::abs(psi.mean() - 1.0) < 1e-9);
    const auto a = raw.values();
    const auto b = psi.values();
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < a.size(); ++j) {
        if (a[i] < a[j]) CHECK(b[i] <= b[j]);
      }
    }
    for (double v : normalize(raw, 1e6).values()) CHECK(std::abs(v - 1.0) < 1e-4);
  }
}

TEST_CASE("default sample counts") {
  CHECK(SamplingStrategy::global().sample_count == 50);
  CHECK(SamplingStrategy::pos().sample_count == 10);
  CHECK(SamplingStrategy{}.variant == SamplingVariant::kGlobalTf);
  CHECK(parse_sampling_variant("pos") == SamplingVariant::kPosTf);
  CHECK_THROWS(parse_sampling_variant("tf"));
}

TEST_CASE("constant aux model yields uniform weights") {
  const Corpus corpus(docs_from({{"a", "b", "c"}, {"c", "d"}}), 1);
  nnet::CnnModel model(3, 2, 2, {1, 2}, 3);
  model.dense_bias() << 0.6, -0.8;
  EmbeddingTable words(4, 2);
  Rng rng(3);
  for (double& v : words.data()) v = rng.normal();
  EmbeddingTable docs(2, 2);
  for (std::size_t i = 0; i < 2; ++i) {
    docs.row(i)[0] = 0.6;
    docs.row(i)[1] = -0.8;
  }
  const auto raw = generate_ca_weights(model, corpus, docs, words, SamplingStrategy::global(7), 1);
  CHECK(!raw.normalized());
  for (double v : raw.values()) CHECK(std::abs(v) < 1e-12);
  for (double v : normalize(raw, kDefaultCaTemperature).values()) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("weights match a hand-computed max-pooling oracle") {
  const Corpus corpus(docs_from({{"a", "b", "c"}}), 1);
  EmbeddingTable words(3, 1);
  words.row(0)[0] = 1.0;
  words.row(1)[0] = 2.0;
  words.row(2)[0] = 5.0;
  EmbeddingTable docs(1, 2);
  docs.row(0)[0] = 5.0;
  docs.row(0)[1] = 1.0;
  const auto model = max_model(3);
  const auto raw = generate_ca_weights(model, corpus, docs, words, SamplingStrategy::global(20), 4);
  // Replacing a or b never lowers the maximum; replacing c drops it to 2.
  const double dropped = 1.0 - (5.0 * 2.0 + 1.0) / (std::sqrt(26.0) * std::sqrt(5.0));
  CHECK(std::abs(raw.doc(0)[0].weight) < 1e-15);
  CHECK(std::abs(raw.doc(0)[1].weight) < 1e-15);
  CHECK(raw.doc(0)[2].weight == doctest::Approx(dropped).epsilon(1e-12));
}

TEST_CASE("tokens past the window share the unsubstituted shift") {
  const Corpus corpus(docs_from({{"a", "b", "c", "a"}}), 1);
  EmbeddingTable words(3, 1);
  words.row(0)[0] = 1.0;
  words.row(1)[0] = 2.0;
  words.row(2)[0] = 5.0;
  EmbeddingTable docs(1, 2);
  docs.row(0)[0] = 1.0;
  docs.row(0)[1] = 1.0;
  const auto raw = generate_ca_weights(max_model(2), corpus, docs, words, SamplingStrategy::global(5), 4);
  const double base = 1.0 - (2.0 + 1.0) / (std::sqrt(5.0) * std::sqrt(2.0));
  CHECK(raw.doc(0)[2].weight == doctest::Approx(base).epsilon(1e-12));
  CHECK(raw.doc(0)[3].weight == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("ca weights are deterministic, bounded and thread-independent") {
  Rng rng(40);
  std::vector<std::vector<std::string>> lists(12);
  for (auto& l : lists) {
    l.resize(3 + rng.below(6));
    for (auto& t : l) t = "w" + std::to_string(rng.below(15));
  }
  const Corpus corpus(docs_from(lists), 1);
  EmbeddingTable words(corpus.vocabulary().size(), 4);
  for (double& v : words.data()) v = rng.normal();
  EmbeddingTable docs(corpus.size(), 3);
  for (double& v : docs.data()) v = rng.normal();

  nnet::AuxModelConfig mc;
  mc.timesteps = longest_document(corpus);
  mc.input_dim = 4;
  mc.output_dim = 3;
  mc.cnn_widths = {1, 2};
  mc.cnn_kernels = 4;
  mc.gru_hidden = 5;
  for (auto arch : {nnet::Architecture::kCnn, nnet::Architecture::kGru}) {
    mc.arch = arch;
    const auto model = nnet::make_aux_model(mc, 8);
    const auto one = generate_ca_weights(*model, corpus, docs, words, SamplingStrategy::global(6), 21);
    const auto again = generate_ca_weights(*model, corpus, docs, words, SamplingStrategy::global(6), 21);
    const auto threaded = generate_ca_weights(*model, corpus, docs, words, SamplingStrategy::global(6), 21, 3);
    CHECK(one.values() == again.values());
    CHECK(one.values() == threaded.values());
    CHECK(one.matches(corpus));
    for (double v : one.values()) {
      CHECK(v >= 0.0);
      CHECK(v <= 2.0);
    }
  }
}

TEST_CASE("ca weights reject mismatched tables") {
  const Corpus corpus(docs_from({{"a", "b"}}), 1);
  EmbeddingTable words(2, 1);
  EmbeddingTable docs(2, 2);
  CHECK_THROWS(generate_ca_weights(max_model(2), corpus, docs, words, SamplingStrategy::global(1), 1));
  EmbeddingTable one_doc(1, 2);
  CHECK_THROWS(generate_ca_weights(max_model(2), corpus, one_doc, words, SamplingStrategy::global(0), 1));
}

TEST_CASE("substitution sampler") {
  const Corpus tagged_corpus({tagged(0, {"the", "cat", "sat"}, {"DT", "NN", "VB"}),
                              tagged(1, {"the", "dog", "ran"}, {"DT", "NN", "VB"})},
                             1);
  const SubstitutionSampler pos(tagged_corpus, SamplingVariant::kPosTf);
  CHECK(pos.uses_global_fallback("DT"));
  CHECK(pos.uses_global_fallback("JJ"));
  CHECK(!pos.uses_global_fallback("NN"));
  const auto& vocab = tagged_corpus.vocabulary();
  const WordId cat = *vocab.find("cat");
  const WordId dog = *vocab.find("dog");
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const WordId w = pos.draw(rng, cat, "NN");
    CHECK(w == dog);
  }
  bool saw_other = false;
  const WordId the = *vocab.find("the");
  for (int i = 0; i < 50; ++i) saw_other |= pos.draw(rng, the, "DT") != the;
  CHECK(saw_other);

  const Corpus plain(docs_from({{"a", "b"}}), 1);
  CHECK_THROWS_WITH(SubstitutionSampler(plain, SamplingVariant::kPosTf), doctest::Contains("POS"));
  CHECK_NOTHROW(SubstitutionSampler(plain, SamplingVariant::kGlobalTf));
}

TEST_CASE("global sampler follows term frequency") {
  const Corpus corpus(docs_from({{"a", "a", "a", "b"}}), 1);
  const SubstitutionSampler sampler(corpus, SamplingVariant::kGlobalTf);
  Rng rng(6);
  int a_count = 0;
  const int draws = 20000;
  // kNoWord never collides, so draws are plain tf samples.
  for (int i = 0; i < draws; ++i) a_count += sampler.draw(rng, kNoWord) == 0 ? 1 : 0;
  CHECK(static_cast<double>(a_count) / draws == doctest::Approx(0.75).epsilon(0.03));
}

TEST_CASE("idf weights and their correlation") {
  const Corpus corpus(docs_from({{"a", "b"}, {"a", "c"}, {"a", "d"}, {"b", "e"}}), 1);
  const auto idfw = idf_weight_set(corpus);
  CHECK(idfw.doc(0)[0].weight == doctest::Approx(std::log(4.0 / 3.0)));
  CHECK(idfw.doc(0)[1].weight == doctest::Approx(std::log(2.0)));
  CHECK(idfw.doc(3)[1].weight == doctest::Approx(std::log(4.0)));
  CHECK(weight_idf_correlation(idfw, idfw) == doctest::Approx(1.0));

  std::vector<std::vector<OccurrenceWeight>> flipped;
  for (std::size_t i = 0; i < idfw.num_docs(); ++i) {
    flipped.emplace_back();
    for (const auto& e : idfw.doc(i)) flipped.back().push_back({e.position, 3.0 - 2.0 * e.weight});
  }
  CHECK(weight_idf_correlation(WeightSet(flipped), idfw) == doctest::Approx(-1.0));
  CHECK_THROWS(weight_idf_correlation(flat({1.0, 2.0}), idfw));
}

TEST_CASE("aux training examples") {
  const Corpus corpus(docs_from({{"a", "b"}, {"c"}}), 1);
  EmbeddingTable words(3, 1);
  words.row(0)[0] = 1;
  words.row(1)[0] = 2;
  words.row(2)[0] = 3;
  EmbeddingTable docs(2, 2);
  docs.row(0)[0] = 1;
  const auto ex = aux_training_examples(corpus, docs, words, 3);
  REQUIRE(ex.size() == 1);  // zero target skipped
  CHECK(ex[0].input(0, 0) == 0.0);
  CHECK(ex[0].input(1, 0) == 1.0);
  CHECK(ex[0].input(2, 0) == 2.0);
  CHECK(longest_document(corpus) == 2);
}
