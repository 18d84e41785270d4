#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cadoc/caweights.hpp"
#include "cadoc/embed.hpp"
#include "cadoc/nnet.hpp"

namespace cadoc::pipeline {

// Raised for bad configuration or command lines; the CLI maps it to exit 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a stage's inputs were never produced.
class MissingPrerequisite : public std::runtime_error {
 public:
  MissingPrerequisite(const std::string& stage, const std::string& detail);
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct Paths {
  std::filesystem::path docs;
  std::filesystem::path pos;      // optional
  std::filesystem::path domains;  // optional
  std::filesystem::path sts;      // needed by eval-sts
  std::filesystem::path out = "run";
};

struct WeightSettings {
  SamplingVariant sampling = SamplingVariant::kGlobalTf;
  std::size_t samples = 0;  // 0: the variant's default
  double ca_temperature = kDefaultCaTemperature;
  double idf_temperature = kDefaultIdfTemperature;

  std::size_t sample_count() const;
};

struct EvalSettings {
  std::string default_domain = "default";
  std::size_t introspect_docs = 50;
};

// Document-vector method: plain dbow, w-dbow with CA weights from either
// aux model, or w-dbow with IDF weights.
enum class Method { kDbow, kCaCnn, kCaGru, kIdf };
std::string to_string(Method method);
Method parse_method(const std::string& name);

struct PipelineConfig {
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  Method method = Method::kCaCnn;
  Paths paths;
  std::size_t min_count = 1;
  TrainConfig embed;
  nnet::AuxModelConfig aux;  // timesteps 0: longest document
  nnet::AuxTrainConfig aux_train;
  WeightSettings weights;
  EvalSettings eval;

  PipelineConfig();
};

// Defaults, then the JSON file (relative paths resolve against its
// directory), then "section.key" overrides in order.
PipelineConfig load_config(const std::optional<std::filesystem::path>& file,
                           const std::vector<std::pair<std::string, std::string>>& overrides = {});
std::string config_to_json(const PipelineConfig& cfg);

// Per-invocation selectors; unset ones fall back to the config.
struct Invocation {
  std::optional<nnet::Architecture> arch;
  std::optional<std::string> method;  // ca|idf for gen-weights, else a Method name or "skipgram"
  std::optional<SamplingVariant> sampling;
  std::optional<std::size_t> samples;
  std::optional<double> temperature;
  std::optional<std::filesystem::path> output;  // export-vectors destination
  bool force = false;
};

const std::vector<std::string>& subcommands();

// Runs one stage, writing its artifacts and manifest under paths.out.
// Progress goes to `log`.
void run_subcommand(const std::string& name, const PipelineConfig& cfg, const Invocation& inv, std::ostream& log);

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t hash = 0xcbf29ce484222325ULL);
std::string file_checksum(const std::filesystem::path& path);

// Writes the bundled filler/topic corpus (docs, pos, domains, sts) to `dir`.
void write_synthetic_corpus(const std::filesystem::path& dir, std::uint64_t seed = 11);

}  // namespace cadoc::pipeline
