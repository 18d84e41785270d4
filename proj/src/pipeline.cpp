#include "cadoc/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "cadoc/eval.hpp"
#include "cadoc/synthetic.hpp"

namespace cadoc::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

MissingPrerequisite::MissingPrerequisite(const std::string& stage, const std::string& detail)
    : std::runtime_error("missing prerequisite: stage '" + stage + "' has not been run (" + detail + ")"),
      stage_(stage) {}

std::size_t WeightSettings::sample_count() const {
  if (samples > 0) return samples;
  return sampling == SamplingVariant::kPosTf ? SamplingStrategy::pos().sample_count
                                             : SamplingStrategy::global().sample_count;
}

std::string to_string(Method method) {
  switch (method) {
    case Method::kDbow: return "dbow";
    case Method::kCaCnn: return "ca-cnn";
    case Method::kCaGru: return "ca-gru";
    case Method::kIdf: return "idf";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::kDbow, Method::kCaCnn, Method::kCaGru, Method::kIdf}) {
    if (to_string(m) == name) return m;
  }
  throw UsageError("unknown method '" + name + "' (expected dbow, ca-cnn, ca-gru or idf)");
}

PipelineConfig::PipelineConfig() { embed.joint_word_training = true; }

// ---------------------------------------------------------------------------
// Config <-> JSON

namespace {

json to_json(const PipelineConfig& c) {
  return {
      {"seed", c.seed},
      {"threads", c.threads},
      {"method", to_string(c.method)},
      {"paths",
       {{"docs", c.paths.docs.string()},
        {"pos", c.paths.pos.string()},
        {"domains", c.paths.domains.string()},
        {"sts", c.paths.sts.string()},
        {"out", c.paths.out.string()}}},
      {"corpus", {{"min_count", c.min_count}}},
      {"embed",
       {{"dimension", c.embed.dimension},
        {"window", c.embed.window},
        {"subsample_threshold", c.embed.subsample_threshold},
        {"negatives", c.embed.negatives},
        {"epochs", c.embed.epochs},
        {"initial_lr", c.embed.initial_lr},
        {"final_lr", c.embed.final_lr},
        {"negative_exponent", c.embed.negative_exponent},
        {"joint_word_training", c.embed.joint_word_training}}},
      {"aux",
       {{"timesteps", c.aux.timesteps},
        {"cnn_widths", c.aux.cnn_widths},
        {"cnn_kernels", c.aux.cnn_kernels},
        {"gru_hidden", c.aux.gru_hidden},
        {"dropout", c.aux.dropout},
        {"epochs", c.aux_train.epochs},
        {"batch_size", c.aux_train.batch_size},
        {"lr", c.aux_train.adam.lr},
        {"beta1", c.aux_train.adam.beta1},
        {"beta2", c.aux_train.adam.beta2},
        {"epsilon", c.aux_train.adam.epsilon}}},
      {"weights",
       {{"sampling", std::string(to_string(c.weights.sampling))},
        {"samples", c.weights.samples},
        {"ca_temperature", c.weights.ca_temperature},
        {"idf_temperature", c.weights.idf_temperature}}},
      {"eval", {{"default_domain", c.eval.default_domain}, {"introspect_docs", c.eval.introspect_docs}}},
  };
}

PipelineConfig from_json(const json& j) {
  PipelineConfig c;
  try {
    c.seed = j.at("seed").get<std::uint64_t>();
    c.threads = j.at("threads").get<std::size_t>();
    c.method = parse_method(j.at("method").get<std::string>());
    const auto& p = j.at("paths");
    c.paths.docs = p.at("docs").get<std::string>();
    c.paths.pos = p.at("pos").get<std::string>();
    c.paths.domains = p.at("domains").get<std::string>();
    c.paths.sts = p.at("sts").get<std::string>();
    c.paths.out = p.at("out").get<std::string>();
    c.min_count = j.at("corpus").at("min_count").get<std::size_t>();
    const auto& e = j.at("embed");
    c.embed.dimension = e.at("dimension").get<std::size_t>();
    c.embed.window = e.at("window").get<std::size_t>();
    c.embed.subsample_threshold = e.at("subsample_threshold").get<double>();
    c.embed.negatives = e.at("negatives").get<std::size_t>();
    c.embed.epochs = e.at("epochs").get<std::size_t>();
    c.embed.initial_lr = e.at("initial_lr").get<double>();
    c.embed.final_lr = e.at("final_lr").get<double>();
    c.embed.negative_exponent = e.at("negative_exponent").get<double>();
    c.embed.joint_word_training = e.at("joint_word_training").get<bool>();
    const auto& a = j.at("aux");
    c.aux.timesteps = a.at("timesteps").get<std::size_t>();
    c.aux.cnn_widths = a.at("cnn_widths").get<std::vector<std::size_t>>();
    c.aux.cnn_kernels = a.at("cnn_kernels").get<std::size_t>();
    c.aux.gru_hidden = a.at("gru_hidden").get<std::size_t>();
    c.aux.dropout = a.at("dropout").get<double>();
    c.aux_train.epochs = a.at("epochs").get<std::size_t>();
    c.aux_train.batch_size = a.at("batch_size").get<std::size_t>();
    c.aux_train.adam.lr = a.at("lr").get<double>();
    c.aux_train.adam.beta1 = a.at("beta1").get<double>();
    c.aux_train.adam.beta2 = a.at("beta2").get<double>();
    c.aux_train.adam.epsilon = a.at("epsilon").get<double>();
    const auto& w = j.at("weights");
    c.weights.sampling = parse_sampling_variant(w.at("sampling").get<std::string>());
    c.weights.samples = w.at("samples").get<std::size_t>();
    c.weights.ca_temperature = w.at("ca_temperature").get<double>();
    c.weights.idf_temperature = w.at("idf_temperature").get<double>();
    c.eval.default_domain = j.at("eval").at("default_domain").get<std::string>();
    c.eval.introspect_docs = j.at("eval").at("introspect_docs").get<std::size_t>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("bad config: ") + e.what());
  }
  c.embed.min_count = c.min_count;
  c.embed.threads = c.threads;
  if (c.threads == 0) throw UsageError("threads must be >= 1");
  if (!(c.weights.ca_temperature > 0.0) || !(c.weights.idf_temperature > 0.0)) {
    throw UsageError("temperatures must be positive");
  }
  try {
    c.embed.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("bad config: ") + e.what());
  }
  return c;
}

// Copies `patch` into `base`, rejecting keys the defaults do not have.
void merge(json& base, const json& patch, const std::string& where) {
  for (const auto& [key, value] : patch.items()) {
    const std::string name = where.empty() ? key : where + "." + key;
    if (!base.contains(key)) throw UsageError("unknown config key '" + name + "'");
    if (base[key].is_object()) {
      if (!value.is_object()) throw UsageError("config key '" + name + "' must be a section");
      merge(base[key], value, name);
    } else {
      base[key] = value;
    }
  }
}

json parse_override_value(const json& current, const std::string& key, const std::string& text) {
  try {
    if (current.is_string()) return text;
    if (current.is_boolean()) {
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      throw UsageError("expected true or false");
    }
    if (current.is_array()) {
      // Accept JSON ("[2,3]") or a comma list ("2,3").
      if (!text.empty() && text.front() == '[') return json::parse(text);
      json arr = json::array();
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) arr.push_back(std::stoull(item));
      return arr;
    }
    std::size_t used = 0;
    if (current.is_number_unsigned() || current.is_number_integer()) {
      if (!text.empty() && text.front() == '-') throw UsageError("expected a non-negative integer");
      const auto v = std::stoull(text, &used);
      if (used != text.size()) throw UsageError("expected an integer");
      return v;
    }
    const double v = std::stod(text, &used);
    if (used != text.size()) throw UsageError("expected a number");
    return v;
  } catch (const UsageError& e) {
    throw UsageError("bad value '" + text + "' for --" + key + ": " + e.what());
  } catch (const std::exception&) {
    throw UsageError("bad value '" + text + "' for --" + key);
  }
}

void resolve_paths(json& j, const fs::path& base) {
  for (auto& [key, value] : j["paths"].items()) {
    const fs::path p = value.get<std::string>();
    if (!p.empty() && p.is_relative()) value = (base / p).lexically_normal().string();
  }
}

}  // namespace

PipelineConfig load_config(const std::optional<fs::path>& file,
                           const std::vector<std::pair<std::string, std::string>>& overrides) {
  json j = to_json(PipelineConfig{});
  if (file) {
    std::ifstream in(*file);
    if (!in) throw UsageError("cannot open config file " + file->string());
    json patch;
    try {
      patch = json::parse(in);
    } catch (const json::exception& e) {
      throw UsageError(file->string() + ": " + e.what());
    }
    merge(j, patch, "");
    resolve_paths(j, file->parent_path());
  }
  for (const auto& [key, text] : overrides) {
    json* node = &j;
    std::stringstream ss(key);
    std::string part;
    while (std::getline(ss, part, '.')) {
      if (!node->is_object() || !node->contains(part)) throw UsageError("unknown option --" + key);
      node = &(*node)[part];
    }
    if (node->is_object()) throw UsageError("option --" + key + " names a section, not a key");
    *node = parse_override_value(*node, key, text);
  }
  return from_json(j);
}

std::string config_to_json(const PipelineConfig& cfg) { return to_json(cfg).dump(2); }

// ---------------------------------------------------------------------------
// Checksums and manifests

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t hash) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

namespace {

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string optional_checksum(const fs::path& path) { return path.empty() ? "" : file_checksum(path); }

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Seed streams per stage, so stages stay independent of each other's draws.
enum SeedStream : std::uint64_t { kSkipgramStream = 1, kDbowStream, kCnnStream, kGruStream, kWeightsStream, kIntrospectStream };

}  // namespace

std::string file_checksum(const fs::path& path) { return hex(fnv1a(read_bytes(path))); }

namespace {

class Stage {
 public:
  Stage(std::string stage, std::string tag, const PipelineConfig& cfg, const Invocation& inv, std::ostream& log)
      : stage_(std::move(stage)), tag_(std::move(tag)), cfg_(cfg), inv_(inv), log_(log), started_(utc_now()) {
    fs::create_directories(cfg_.paths.out);
    const json full = to_json(cfg_);
    sections_["seed"] = hex(fnv1a(std::to_string(cfg_.seed)));
    sections_["corpus"] = hex(fnv1a(json{{"min_count", cfg_.min_count},
                                         {"docs", optional_checksum(cfg_.paths.docs)},
                                         {"pos", optional_checksum(cfg_.paths.pos)},
                                         {"domains", optional_checksum(cfg_.paths.domains)}}
                                        .dump()));
    sections_["embed"] = hex(fnv1a(full["embed"].dump()));
    sections_["aux"] = hex(fnv1a(full["aux"].dump()));
  }

  std::string stem() const { return tag_.empty() ? stage_ : stage_ + "-" + tag_; }
  fs::path path(const std::string& name) const { return cfg_.paths.out / name; }
  std::ostream& log() { return log_; }

  // Sections whose checksums this stage's artifacts depend on.
  void depends_on(std::initializer_list<const char*> names) {
    for (const char* n : names) lineage_[n] = sections_.at(n);
  }

  // Loads a prerequisite's manifest, checking its artifacts and lineage.
  void require(const std::string& stem, const std::string& stage, const std::string& command) {
    const fs::path mpath = path(stem + ".manifest.json");
    if (!fs::exists(mpath)) throw MissingPrerequisite(stage, "no " + mpath.string() + "; run `cadoc " + command + "` first");
    const json manifest = json::parse(read_bytes(mpath));
    for (const auto& [file, sum] : manifest.at("outputs").items()) {
      const fs::path artifact = path(file);
      if (!fs::exists(artifact)) throw MissingPrerequisite(stage, artifact.string() + " is missing");
      if (file_checksum(artifact) != sum.get<std::string>() && !inv_.force) {
        throw std::runtime_error(artifact.string() + " changed after stage '" + stage +
                                 "' wrote it; rerun the stage or pass --force");
      }
    }
    for (const auto& [section, sum] : manifest.at("lineage").items()) {
      const auto it = sections_.find(section);
      if (it == sections_.end() || it->second == sum.get<std::string>()) continue;
      if (!inv_.force) {
        throw std::runtime_error("config section '" + section + "' differs from the one stage '" + stage +
                                 "' ran with; rerun it or pass --force");
      }
      log_ << "warning: lineage mismatch in '" << section << "' for " << stage << " (forced)\n";
    }
    inputs_[stem] = manifest.at("outputs");
    // Inherit the producer's lineage so mismatches surface downstream too.
    for (const auto& [section, sum] : manifest.at("lineage").items()) {
      if (!lineage_.contains(section)) lineage_[section] = sum.get<std::string>();
    }
  }

  void output(const std::string& name) { outputs_.push_back(name); }
  void setting(const std::string& key, json value) { settings_[key] = std::move(value); }

  void finish() {
    json outputs = json::object();
    for (const auto& name : outputs_) outputs[name] = file_checksum(path(name));
    json manifest = {
        {"stage", stage_},
        {"tag", tag_},
        {"seed", cfg_.seed},
        {"threads", cfg_.threads},
        {"started", started_},
        {"finished", utc_now()},
        {"config", to_json(cfg_)},
        {"lineage", lineage_},
        {"settings", settings_},
        {"inputs", inputs_},
        {"outputs", outputs},
    };
    std::ofstream out(path(stem() + ".manifest.json"), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest in " + cfg_.paths.out.string());
    out << manifest.dump(2) << '\n';
    log_ << stage_ << (tag_.empty() ? "" : " [" + tag_ + "]") << ": wrote";
    for (const auto& name : outputs_) log_ << ' ' << name;
    log_ << '\n';
  }

 private:
  std::string stage_;
  std::string tag_;
  const PipelineConfig& cfg_;
  const Invocation& inv_;
  std::ostream& log_;
  std::string started_;
  std::map<std::string, std::string> sections_;
  json lineage_ = json::object();
  json settings_ = json::object();
  json inputs_ = json::object();
  std::vector<std::string> outputs_;
};

Corpus open_corpus(const PipelineConfig& cfg) {
  if (cfg.paths.docs.empty()) throw UsageError("paths.docs is not set");
  auto opt = [](const fs::path& p) { return p.empty() ? std::nullopt : std::optional<fs::path>(p); };
  return load_corpus(cfg.paths.docs, opt(cfg.paths.pos), opt(cfg.paths.domains), cfg.min_count);
}

TrainConfig embed_config(const PipelineConfig& cfg, SeedStream stream) {
  TrainConfig tc = cfg.embed;
  tc.seed = derive_seed(cfg.seed, stream);
  return tc;
}

std::string arch_name(nnet::Architecture arch) { return std::string(nnet::to_string(arch)); }

nnet::Architecture method_arch(Method m) {
  return m == Method::kCaGru ? nnet::Architecture::kGru : nnet::Architecture::kCnn;
}

SamplingVariant sampling_of(const PipelineConfig& cfg, const Invocation& inv) {
  return inv.sampling.value_or(cfg.weights.sampling);
}

// Artifact tag of a weighted method: "ca-cnn-global", "idf", ...
std::string weight_tag(Method m, SamplingVariant sampling) {
  if (m == Method::kIdf) return "idf";
  return to_string(m) + "-" + std::string(to_string(sampling));
}

Method weighted_method(const PipelineConfig& cfg, const Invocation& inv) {
  const Method m = inv.method ? parse_method(*inv.method) : cfg.method;
  if (m == Method::kDbow) throw UsageError("train-wdbow needs a weighted method (ca-cnn, ca-gru or idf)");
  return m;
}

void stage_build_vocab(const PipelineConfig& cfg, const Invocation& inv, std::ostream& log) {
  Stage st("build-vocab", "", cfg, inv, log);
  st.depends_on({"corpus"});
  const Corpus corpus = open_corpus(cfg);
  const auto& vocab = corpus.vocabulary();
  std::ofstream out(st.path("vocab.tsv"), std::ios::binary);
  out << "word\ttf\tdf\n";
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const auto id = static_cast<WordId>(i);
    out << vocab.word(id) << '\t' << vocab.term_freq(id) << '\t' << vocab.doc_freq(id) << '\n';
  }
  out.close();
  st.output("vocab.tsv");
  st.setting("documents", corpus.size());
  st.setting("vocabulary", vocab.size());
  st.setting("occurrences", corpus.total_occurrences());
  log << corpus.size() << " documents, " << vocab.size() << " words, " << corpus.total_occurrences()
      << " occurrences\n";
  st.finish();
}

void stage_train_skipgram(const PipelineConfig& cfg, const Invocation& inv, std::ostream& log) {
  Stage st("train-skipgram", "", cfg, inv, log);
  st.depends_on({"corpus", "embed", "seed"});
  st.require("build-vocab", "build-vocab", "build-vocab");
  const Corpus corpus = open_corpus(cfg);
  write_vectors(train_skipgram(corpus, embed_config(cfg, kSkipgramStream)), st.path("skipgram.words.vec"));
  st.output("skipgram.words.vec");
  st.finish();
}

void stage_train_dbow(const PipelineConfig& cfg, const Invocation& inv, std::ostream& log) {
  Stage st("train-dbow", "", cfg, inv, log);
  st.depends_on({"corpus", "embed", "seed"});
  st.require("build-vocab", "build-vocab", "build-vocab");
  const Corpus corpus = open_corpus(cfg);
  const auto result = train_dbow(corpus, embed_config(cfg, kDbowStream));
  write_vectors(result.doc_vectors, st.path("dbow.docs.vec"));
  write_vectors(result.word_vectors, st.path("dbow.words.vec"));
  st.output("dbow.docs.vec");
  st.output("dbow.words.vec");
  st.finish();
}

void stage_train_aux(const PipelineConfig& cfg, const Invocation& inv, std::ostream& log) {
  const auto arch = inv.arch.value_or(method_arch(cfg.method));
  const std::string name = arch_name(arch);
  Stage st("train-aux", name, cfg, inv, log);
  st.depends_on({"corpus", "embed", "aux", "seed"});
  st.require("train-dbow", "train-dbow", "train-dbow");
  const Corpus corpus = open_corpus(cfg);
  const auto docs = read_vectors(st.path("dbow.docs.vec"));
  const auto words = read_vectors(st.path("dbow.words.vec"));

  nnet::AuxModelConfig mc = cfg.aux;
  mc.arch = arch;
  if (mc.timesteps == 0) mc.timesteps = longest_document(corpus);
  mc.input_dim = words.dimension();
  mc.output_dim = docs.dimension();
  const auto examples = aux_training_examples(corpus, docs, words, mc.timesteps);
  nnet::AuxTrainConfig tc = cfg.aux_train;
  tc.seed = derive_seed(cfg.seed, arch == nnet::Architecture::kCnn ? kCnnStream : kGruStream);
  nnet::TrainingHistory history;
  const auto model = nnet::train_aux(examples, mc, tc, &history);

  nnet::save_model(*model, st.path("aux-" + name + ".bin"));
  std::ofstream loss(st.path("aux-" + name + ".loss.tsv"), std::ios::binary);
  loss << "epoch\tloss\n" << std::setprecision(17);
  for (std::size_t e = 0; e < history.epoch_loss.size(); ++e) loss << e + 1 << '\t' << history.epoch_loss[e] << '\n';
  loss.close();
  st.output("aux-" + name + ".bin");
  st.output("aux-" + name + ".loss.tsv");
  const double fit = 1.0 - nnet::mean_loss(*model, examples);
  st.setting("timesteps", mc.timesteps);
  st.setting("parameters", model->parameter_count());
  st.setting("mean_cosine", fit);
  log << name << ": " << model->parameter_count() << " parameters, T=" << mc.timesteps
      << ", mean cosine to targets " << fit << '\n';
  st.finish();
}

void stage_gen_weights(const PipelineConfig& cfg, const Invocation& inv, std::ostream& log) {
  const std::string kind = inv.method.value_or(cfg.method == Method::kIdf ? "idf" : "ca");
  if (kind != "ca" && kind != "idf") throw UsageError("gen-weights --method must be ca or idf");
  const auto sampling = sampling_of(cfg, inv);
  Method method = Method::kIdf;
  if (kind == "ca") {
    const auto arch = inv.arch.value_or(method_arch(cfg.method));
    method = arch == nnet::Architecture::kGru ? Method::kCaGru : Method::kCaCnn;
  }
  const std::string tag = weight_tag(method, sampling);
  Stage st("gen-weights", tag, cfg, inv, log);
  st.depends_on({"corpus"});
  st.require("build-vocab", "build-vocab", "build-vocab");
  const Corpus corpus = open_corpus(cfg);

  WeightSet raw;
  double temperature = 0.0;
  if (method == Method::kIdf) {
    raw = idf_weight_set(corpus);
    temperature = inv.temperature.value_or(cfg.weights.idf_temperature);
  } else {
    const std::string arch = method == Method::kCaGru ? "gru" : "cnn";
    st.depends_on({"embed", "aux", "seed"});
    st.require("train-dbow", "train-dbow", "train-dbow");
    st.require("train-aux-" + arch, "train-aux", "train-aux --arch " + arch);
    const auto docs = read_vectors(st.path("dbow.docs.vec"));
    const auto words = read_vectors(st.path("dbow.words.vec"));
    const auto model = nnet::load_model(st.path("aux-" + arch + ".bin"));
    SamplingStrategy strategy{sampling, 0};
    WeightSettings ws = cfg.weights;
    ws.sampling = sampling;
    if (inv.samples) ws.samples = *inv.samples;
    strategy.sample_count = ws.sample_count();
    raw = generate_ca_weights(*model, corpus, docs, words, strategy, derive_seed(cfg.seed, kWeightsStream),
                              cfg.threads);
    temperature = inv.temperature.value_or(cfg.weights.ca_temperature);
    st.setting("samples", strategy.sample_count);
    st.setting("sampling", std::string(to_string(sampling)));
  }
  if (!(temperature > 0.0)) throw UsageError("temperature must be positive");
  const auto psi = normalize(raw, temperature);
  write_weights(raw, st.path("weights." + tag + ".raw.txt"));
  write_weights(psi, st.path("weights." + tag + ".txt"));
  st.output("weights." + tag + ".raw.txt");
  st.output("weights." + tag + ".txt");
  st.setting("temperature", temperature);
  if (method != Method::kIdf) {
    const double r = weight_idf_correlation(raw, idf_weight_set(corpus));
    st.setting("idf_correlation", r);
    log << tag << ": Pearson correlation with IDF weights " << r << '\n';
  }
  st.finish();
}

void stage_train_wdbow(const PipelineConfig& cfg, const Invocation& inv, std::ostream& log) {
  const Method method = weighted_method(cfg, inv);
  const std::string tag = weight_tag(method, sampling_of(cfg, inv));
  Stage st("train-wdbow", tag, cfg, inv, log);
  st.depends_on({"corpus", "embed", "seed"});
  const std::string gen_cmd = method == Method::kIdf ? "gen-weights --method idf"
                                                     : "gen-weights --method ca --arch " + arch_name(method_arch(method));
  st.require("gen-weights-" + tag, "gen-weights", gen_cmd);
  const Corpus corpus = open_corpus(cfg);
  const auto weights = read_weights(st.path("weights." + tag + ".txt"));
  const auto result = train_dbow(corpus, embed_config(cfg, kDbowStream), &weights);
  write_vectors(result.doc_vectors, st.path("wdbow-" + tag + ".docs.vec"));
  st.output("wdbow-" + tag + ".docs.vec");
  st.finish();
}

// Document vectors for an evaluation/export method, plus its artifact label.
std::pair<EmbeddingTable, std::string> method_vectors(Stage& st, const PipelineConfig& cfg, const Invocation& inv,
                                                      const Corpus& corpus) {
  const std::string name = inv.method.value_or(to_string(cfg.method));
  if (name == "skipgram") {
    st.require("train-skipgram", "train-skipgram", "train-skipgram");
    return {average_document_vectors(corpus, read_vectors(st.path("skipgram.words.vec"))), "skipgram"};
  }
  const Method m = parse_method(name);
  if (m == Method::kDbow) {
    st.require("train-dbow", "train-dbow", "train-dbow");
    return {read_vectors(st.path("dbow.docs.vec")), "dbow"};
  }
  const std::string tag = weight_tag(m, sampling_of(cfg, inv));
  st.require("train-wdbow-" + tag, "train-wdbow", "train-wdbow --method " + to_string(m));
  return {read_vectors(st.path("wdbow-" + tag + ".docs.vec")), tag};
}

std::string label_of(const PipelineConfig& cfg, const Invocation& inv) {
  const std::string name = inv.method.value_or(to_string(cfg.method));
  if (name == "skipgram" || name == "dbow") return name;
  return weight_tag(parse_method(name), sampling_of(cfg, inv));
}

void stage_eval_sts(const PipelineConfig& cfg, const Invocation& inv, std::ostream& log) {
  Stage st("eval-sts", label_of(cfg, inv), cfg, inv, log);
  if (cfg.paths.sts.empty()) throw UsageError("paths.sts is not set");
  st.depends_on({"corpus", "seed"});
  st.require("build-vocab", "build-vocab", "build-vocab");
  const Corpus corpus = open_corpus(cfg);
  const auto [vectors, label] = method_vectors(st, cfg, inv, corpus);
  auto pairs = read_sts_pairs(cfg.paths.sts, cfg.eval.default_domain);
  resolve_sts_pairs(pairs, corpus);
  const auto report = sts_evaluate(vectors, pairs, label);
  write_report(report, st.path("report." + label + ".jsonl"));
  st.output("report." + label + ".jsonl");
  st.setting("sts", cfg.paths.sts.string());
  st.setting("sts_checksum", file_checksum(cfg.paths.sts));
  log << format_report(report);
  st.finish();
}

void stage_introspect(const PipelineConfig& cfg, const Invocation& inv, std::ostream& log) {
  Stage st("introspect", "", cfg, inv, log);
  st.depends_on({"corpus", "embed", "aux", "seed"});
  st.require("train-dbow", "train-dbow", "train-dbow");
  st.require("train-aux-cnn", "train-aux", "train-aux --arch cnn");
  st.require("train-aux-gru", "train-aux", "train-aux --arch gru");
  const Corpus corpus = open_corpus(cfg);
  const auto words = read_vectors(st.path("dbow.words.vec"));
  const auto cnn = nnet::load_model(st.path("aux-cnn.bin"));
  const auto gru = nnet::load_model(st.path("aux-gru.bin"));
  WeightSettings ws = cfg.weights;
  ws.sampling = sampling_of(cfg, inv);
  if (inv.samples) ws.samples = *inv.samples;
  const SamplingStrategy strategy{ws.sampling, ws.sample_count()};

  std::vector<IntrospectionRow> all;
  std::ofstream out(st.path("introspection.tsv"), std::ios::binary);
  out << "doc\ttoken\tcnn_feature_changes\tgru_reset_norm\tidf\n" << std::setprecision(17);
  const std::size_t n = std::min(cfg.eval.introspect_docs, corpus.size());
  for (std::size_t d = 0; d < n; ++d) {
    const auto rows = introspection_rows(static_cast<const nnet::CnnModel&>(*cnn),
                                         static_cast<const nnet::GruModel&>(*gru), corpus, d, words, strategy,
                                         derive_seed(cfg.seed, kIntrospectStream));
    for (const auto& r : rows) {
      out << d << '\t' << r.token << '\t' << r.cnn_feature_changes << '\t' << r.gru_reset_norm << '\t' << r.idf
          << '\n';
    }
    all.insert(all.end(), rows.begin(), rows.end());
  }
  out.close();
  json summary = {{"documents", n}, {"tokens", all.size()}, {"sampling", std::string(to_string(strategy.variant))},
                  {"samples", strategy.sample_count}};
  try {
    const auto corr = introspection_correlations(all);
    summary["cnn_idf_correlation"] = corr.cnn_idf;
    summary["gru_idf_correlation"] = corr.gru_idf;
    log << "correlation with IDF: cnn " << corr.cnn_idf << ", gru " << corr.gru_idf << '\n';
  } catch (const std::invalid_argument& e) {
    summary["cnn_idf_correlation"] = nullptr;
    summary["gru_idf_correlation"] = nullptr;
    log << "correlation with IDF undefined: " << e.what() << '\n';
  }
  std::ofstream(st.path("introspection.summary.json"), std::ios::binary) << summary.dump(2) << '\n';
  st.output("introspection.tsv");
  st.output("introspection.summary.json");
  st.finish();
}

void stage_export(const PipelineConfig& cfg, const Invocation& inv, std::ostream& log) {
  Stage st("export-vectors", label_of(cfg, inv), cfg, inv, log);
  st.depends_on({"corpus", "seed"});
  const Corpus corpus = open_corpus(cfg);
  const auto [vectors, label] = method_vectors(st, cfg, inv, corpus);
  const fs::path dest = inv.output.value_or(st.path("export." + label + ".vec"));
  write_vectors(vectors, dest);
  const fs::path rel = dest.lexically_relative(cfg.paths.out);
  if (!rel.empty() && *rel.begin() != "..") {
    st.output(rel.string());
  } else {
    st.setting("destination", dest.string());
    st.setting("destination_checksum", file_checksum(dest));
  }
  log << "exported " << vectors.rows() << " vectors to " << dest.string() << '\n';
  st.finish();
}

using StageFn = void (*)(const PipelineConfig&, const Invocation&, std::ostream&);

const std::vector<std::pair<std::string, StageFn>>& stage_table() {
  static const std::vector<std::pair<std::string, StageFn>> table{
      {"build-vocab", stage_build_vocab},   {"train-skipgram", stage_train_skipgram},
      {"train-dbow", stage_train_dbow},     {"train-aux", stage_train_aux},
      {"gen-weights", stage_gen_weights},   {"train-wdbow", stage_train_wdbow},
      {"eval-sts", stage_eval_sts},         {"introspect", stage_introspect},
      {"export-vectors", stage_export},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : stage_table()) out.push_back(name);
    return out;
  }();
  return names;
}

void run_subcommand(const std::string& name, const PipelineConfig& cfg, const Invocation& inv, std::ostream& log) {
  for (const auto& [stage, fn] : stage_table()) {
    if (stage == name) return fn(cfg, inv, log);
  }
  throw UsageError("unknown subcommand '" + name + "'");
}

void write_synthetic_corpus(const fs::path& dir, std::uint64_t seed) {
  synthetic::FillerTopicSpec spec;
  spec.seed = seed;
  const auto corpus = synthetic::filler_topic_corpus(spec);
  fs::create_directories(dir);
  std::ofstream docs(dir / "docs.txt", std::ios::binary);
  std::ofstream pos(dir / "pos.txt", std::ios::binary);
  std::ofstream domains(dir / "domains.txt", std::ios::binary);
  auto join = [](const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : " ") + s;
    return out;
  };
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    docs << join(corpus.documents[i].tokens) << '\n';
    pos << join(*corpus.documents[i].pos_tags) << '\n';
    domains << corpus.domains[i] << '\n';
  }
  std::ofstream sts(dir / "sts.tsv", std::ios::binary);
  for (const auto& p : synthetic::topic_pairs(corpus, 200, seed + 1)) {
    sts << p.gold << '\t' << join(corpus.documents[p.doc_a].tokens) << '\t'
        << join(corpus.documents[p.doc_b].tokens) << '\t' << corpus.domains[p.doc_a] << '\n';
  }
}

}  // namespace cadoc::pipeline
