#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "cadoc/caweights.hpp"
#include "cadoc/embed.hpp"
#include "cadoc/eval.hpp"
#include "cadoc/pipeline.hpp"
#include "cadoc/stats.hpp"

namespace py = pybind11;
using namespace cadoc;

namespace {

py::array_t<double> to_numpy(const EmbeddingTable& t) {
  py::array_t<double> out({t.rows(), t.dimension()});
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

EmbeddingTable from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                          const std::vector<std::string>& keys) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-d array");
  EmbeddingTable t(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), t.data().begin());
  t.keys() = keys;
  return t;
}

std::vector<std::vector<double>> weight_lists(const WeightSet& w) {
  std::vector<std::vector<double>> out(w.num_docs());
  for (std::size_t i = 0; i < w.num_docs(); ++i) {
    for (const auto& e : w.doc(i)) out[i].push_back(e.weight);
  }
  return out;
}

// Weight lists are aligned with corpus.occurrences(i).
WeightSet weight_set(const Corpus& corpus, const std::vector<std::vector<double>>& lists) {
  if (lists.size() != corpus.size()) throw std::invalid_argument("one weight list per document expected");
  std::vector<std::vector<OccurrenceWeight>> docs(lists.size());
  for (std::size_t i = 0; i < lists.size(); ++i) {
    const auto occ = corpus.occurrences(i);
    if (occ.size() != lists[i].size()) {
      throw std::invalid_argument("document " + std::to_string(i) + ": weight count differs from occurrences");
    }
    for (std::size_t k = 0; k < occ.size(); ++k) docs[i].push_back({occ[k].position, lists[i][k]});
  }
  return WeightSet(std::move(docs));
}

std::vector<TokenizedDocument> to_documents(const std::vector<std::vector<std::string>>& token_lists,
                                            const std::optional<std::vector<std::vector<std::string>>>& tags) {
  std::vector<TokenizedDocument> docs;
  for (std::size_t i = 0; i < token_lists.size(); ++i) {
    TokenizedDocument d{i, token_lists[i], std::nullopt};
    if (tags) d.pos_tags = tags->at(i);
    docs.push_back(std::move(d));
  }
  return docs;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Weighted DBOW document embeddings with context-aware weights";

  py::class_<Corpus>(m, "Corpus")
      .def(py::init([](const std::vector<std::vector<std::string>>& docs,
                       const std::optional<std::vector<std::vector<std::string>>>& pos_tags, std::size_t min_count) {
             return Corpus(to_documents(docs, pos_tags), min_count);
           }),
           py::arg("documents"), py::arg("pos_tags") = py::none(), py::arg("min_count") = 1)
      .def_static("load", &load_corpus, py::arg("docs"), py::arg("pos") = py::none(),
                  py::arg("domains") = py::none(), py::arg("min_count") = 1)
      .def("__len__", &Corpus::size)
      .def_property_readonly("vocabulary", [](const Corpus& c) {
        auto words = c.vocabulary().words();
        return std::vector<std::string>(words.begin(), words.end());
      })
      .def("tokens", [](const Corpus& c, std::size_t i) { return c.document(i).tokens; })
      .def("occurrences", [](const Corpus& c, std::size_t i) {
        std::vector<std::string> out;
        for (const auto& o : c.occurrences(i)) out.push_back(c.vocabulary().word(o.word));
        return out;
      })
      .def("idf", [](const Corpus& c, const std::string& word) {
        const auto id = c.vocabulary().find(word);
        if (!id) throw py::key_error(word);
        return idf(c.vocabulary(), *id, c.size());
      });

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("dimension", &TrainConfig::dimension)
      .def_readwrite("window", &TrainConfig::window)
      .def_readwrite("subsample_threshold", &TrainConfig::subsample_threshold)
      .def_readwrite("negatives", &TrainConfig::negatives)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("initial_lr", &TrainConfig::initial_lr)
      .def_readwrite("final_lr", &TrainConfig::final_lr)
      .def_readwrite("negative_exponent", &TrainConfig::negative_exponent)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("joint_word_training", &TrainConfig::joint_word_training)
      .def_readwrite("threads", &TrainConfig::threads);

  m.def(
      "train_dbow",
      [](const Corpus& corpus, const TrainConfig& cfg, const std::optional<std::vector<std::vector<double>>>& weights) {
        std::optional<WeightSet> ws;
        if (weights) ws = weight_set(corpus, *weights);
        DbowResult r;
        {
          py::gil_scoped_release release;
          r = train_dbow(corpus, cfg, ws ? &*ws : nullptr);
        }
        return py::make_tuple(to_numpy(r.doc_vectors), to_numpy(r.word_vectors));
      },
      py::arg("corpus"), py::arg("config"), py::arg("weights") = py::none(),
      "Returns (document vectors, word vectors); word rows follow Corpus.vocabulary.");
  m.def(
      "train_skipgram",
      [](const Corpus& corpus, const TrainConfig& cfg) {
        py::gil_scoped_release release;
        auto words = train_skipgram(corpus, cfg);
        py::gil_scoped_acquire acquire;
        return to_numpy(words);
      },
      py::arg("corpus"), py::arg("config"));

  py::enum_<nnet::Architecture>(m, "Architecture")
      .value("CNN", nnet::Architecture::kCnn)
      .value("GRU", nnet::Architecture::kGru);

  py::class_<nnet::AuxModelConfig>(m, "AuxModelConfig")
      .def(py::init<>())
      .def_readwrite("arch", &nnet::AuxModelConfig::arch)
      .def_readwrite("timesteps", &nnet::AuxModelConfig::timesteps)
      .def_readwrite("input_dim", &nnet::AuxModelConfig::input_dim)
      .def_readwrite("output_dim", &nnet::AuxModelConfig::output_dim)
      .def_readwrite("cnn_widths", &nnet::AuxModelConfig::cnn_widths)
      .def_readwrite("cnn_kernels", &nnet::AuxModelConfig::cnn_kernels)
      .def_readwrite("gru_hidden", &nnet::AuxModelConfig::gru_hidden)
      .def_readwrite("dropout", &nnet::AuxModelConfig::dropout);

  py::class_<nnet::AuxTrainConfig>(m, "AuxTrainConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &nnet::AuxTrainConfig::epochs)
      .def_readwrite("batch_size", &nnet::AuxTrainConfig::batch_size)
      .def_readwrite("seed", &nnet::AuxTrainConfig::seed)
      .def_property(
          "lr", [](const nnet::AuxTrainConfig& c) { return c.adam.lr; },
          [](nnet::AuxTrainConfig& c, double v) { c.adam.lr = v; });

  py::class_<nnet::AuxModel>(m, "AuxModel")
      .def_property_readonly("architecture", &nnet::AuxModel::architecture)
      .def_property_readonly("timesteps", &nnet::AuxModel::timesteps)
      .def("parameter_count", &nnet::AuxModel::parameter_count)
      .def("predict",
           [](const nnet::AuxModel& model, const nnet::Sequence& seq) -> nnet::Vector { return model.predict(seq); })
      .def("save", [](const nnet::AuxModel& model, const std::filesystem::path& p) { nnet::save_model(model, p); });

  m.def("make_aux_model", &nnet::make_aux_model, py::arg("config"), py::arg("seed") = 1);
  m.def("load_aux_model", &nnet::load_model);
  m.def(
      "train_aux_model",
      [](const Corpus& corpus, const py::array_t<double>& docs, const py::array_t<double>& words,
         nnet::AuxModelConfig mc, const nnet::AuxTrainConfig& tc) {
        const auto doc_table = from_numpy(docs, {});
        const auto word_table = from_numpy(words, {});
        if (mc.timesteps == 0) mc.timesteps = longest_document(corpus);
        mc.input_dim = word_table.dimension();
        mc.output_dim = doc_table.dimension();
        const auto examples = aux_training_examples(corpus, doc_table, word_table, mc.timesteps);
        nnet::TrainingHistory history;
        std::unique_ptr<nnet::AuxModel> model;
        {
          py::gil_scoped_release release;
          model = nnet::train_aux(examples, mc, tc, &history);
        }
        return py::make_tuple(std::move(model), history.epoch_loss);
      },
      py::arg("corpus"), py::arg("doc_vectors"), py::arg("word_vectors"), py::arg("config"),
      py::arg("train_config"), "Returns (model, per-epoch loss).");

  m.def(
      "ca_weights",
      [](const nnet::AuxModel& aux, const Corpus& corpus, const py::array_t<double>& docs,
         const py::array_t<double>& words, const std::string& sampling, std::size_t samples, std::uint64_t seed,
         std::size_t threads) {
        const auto variant = parse_sampling_variant(sampling);
        SamplingStrategy strategy{variant, samples > 0 ? samples
                                                       : (variant == SamplingVariant::kPosTf
                                                              ? SamplingStrategy::pos().sample_count
                                                              : SamplingStrategy::global().sample_count)};
        const auto doc_table = from_numpy(docs, {});
        const auto word_table = from_numpy(words, {});
        WeightSet w;
        {
          py::gil_scoped_release release;
          w = generate_ca_weights(aux, corpus, doc_table, word_table, strategy, seed, threads);
        }
        return weight_lists(w);
      },
      py::arg("aux"), py::arg("corpus"), py::arg("doc_vectors"), py::arg("word_vectors"),
      py::arg("sampling") = "global", py::arg("samples") = 0, py::arg("seed") = 1, py::arg("threads") = 1,
      "Raw (unnormalized) weights, one list per document aligned with Corpus.occurrences.");
  m.def("idf_weights", [](const Corpus& corpus) { return weight_lists(idf_weight_set(corpus)); });
  m.def(
      "normalize",
      [](const Corpus& corpus, const std::vector<std::vector<double>>& raw, double temperature) {
        return weight_lists(normalize(weight_set(corpus, raw), temperature));
      },
      py::arg("corpus"), py::arg("raw"), py::arg("temperature"));

  m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) { return pearson(x, y); });

  m.def(
      "sts_evaluate",
      [](const Corpus& corpus, const py::array_t<double>& docs, const std::filesystem::path& sts,
         const std::string& default_domain) {
        auto pairs = read_sts_pairs(sts, default_domain);
        resolve_sts_pairs(pairs, corpus);
        const auto report = sts_evaluate(from_numpy(docs, {}), pairs, "python");
        std::map<std::string, double> out;
        for (const auto& d : report.domains) out[d.domain] = d.pearson;
        return out;
      },
      py::arg("corpus"), py::arg("doc_vectors"), py::arg("sts"), py::arg("default_domain") = "default",
      "Pearson correlation per domain.");

  m.attr("DEFAULT_CA_TEMPERATURE") = kDefaultCaTemperature;
  m.attr("DEFAULT_IDF_TEMPERATURE") = kDefaultIdfTemperature;

  m.def("subcommands", &pipeline::subcommands);
  m.def(
      "run",
      [](const std::string& name, const std::optional<std::filesystem::path>& config,
         const std::map<std::string, std::string>& overrides, const std::optional<std::string>& arch,
         const std::optional<std::string>& method, const std::optional<std::string>& sampling, bool force) {
        std::vector<std::pair<std::string, std::string>> ov(overrides.begin(), overrides.end());
        const auto cfg = pipeline::load_config(config, ov);
        pipeline::Invocation inv;
        if (arch) inv.arch = nnet::parse_architecture(*arch);
        inv.method = method;
        if (sampling) inv.sampling = parse_sampling_variant(*sampling);
        inv.force = force;
        std::ostringstream log;
        {
          py::gil_scoped_release release;
          pipeline::run_subcommand(name, cfg, inv, log);
        }
        return log.str();
      },
      py::arg("subcommand"), py::arg("config") = py::none(), py::arg("overrides") = std::map<std::string, std::string>{},
      py::arg("arch") = py::none(), py::arg("method") = py::none(), py::arg("sampling") = py::none(),
      py::arg("force") = false, "Runs one pipeline stage and returns its log.");
  m.def("write_synthetic_corpus", &pipeline::write_synthetic_corpus, py::arg("directory"), py::arg("seed") = 11);
}
