#include <CLI11.hpp>

#include <iostream>

#include "cadoc/pipeline.hpp"

namespace pl = cadoc::pipeline;

namespace {

// Turns leftover "--section.key value" / "--section.key=value" arguments into
// config overrides.
std::vector<std::pair<std::string, std::string>> dotted_overrides(const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (arg.rfind("--", 0) != 0 || arg.find('.') == std::string::npos) {
      throw pl::UsageError("unrecognized argument '" + arg + "'");
    }
    const auto eq = arg.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(arg.substr(2, eq - 2), arg.substr(eq + 1));
    } else {
      if (i + 1 >= extras.size()) throw pl::UsageError("missing value for " + arg);
      out.emplace_back(arg.substr(2), extras[++i]);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted DBOW document embeddings with context-aware weights"};
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_extras();

  std::string config_file;
  std::size_t threads = 0;
  bool force = false;
  bool quiet = false;
  app.add_option("-c,--config", config_file, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--threads", threads, "Worker threads (1 = deterministic)")->check(CLI::PositiveNumber);
  app.add_flag("--force", force, "Ignore lineage mismatches with earlier stages");
  app.add_flag("-q,--quiet", quiet, "Suppress progress output");

  std::string arch, method, sampling, output, synthetic_dir;
  std::size_t samples = 0;
  double temperature = 0.0;

  std::vector<CLI::App*> stages;
  for (const auto& name : pl::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->allow_extras();
    stages.push_back(sub);
    if (name == "train-aux" || name == "gen-weights") {
      sub->add_option("--arch", arch, "Aux model")->check(CLI::IsMember({"cnn", "gru"}));
    }
    if (name == "gen-weights") {
      sub->add_option("--method", method, "Weight source")->check(CLI::IsMember({"ca", "idf"}));
      sub->add_option("--samples", samples, "Substitutions per occurrence")->check(CLI::PositiveNumber);
      sub->add_option("--temperature", temperature, "Normalization temperature")->check(CLI::PositiveNumber);
    }
    if (name == "train-wdbow") {
      sub->add_option("--method", method, "Weighted method")->check(CLI::IsMember({"ca-cnn", "ca-gru", "idf"}));
    }
    if (name == "eval-sts" || name == "export-vectors") {
      sub->add_option("--method", method, "Document vectors to use")
          ->check(CLI::IsMember({"dbow", "ca-cnn", "ca-gru", "idf", "skipgram"}));
    }
    if (name == "gen-weights" || name == "train-wdbow" || name == "eval-sts" || name == "export-vectors" ||
        name == "introspect") {
      sub->add_option("--sampling", sampling, "Substitution distribution")->check(CLI::IsMember({"global", "pos"}));
    }
    if (name == "introspect") {
      sub->add_option("--samples", samples, "Substitutions per token")->check(CLI::PositiveNumber);
    }
    if (name == "export-vectors") sub->add_option("-o,--out", output, "Destination file");
  }
  auto* make_synthetic = app.add_subcommand("make-synthetic", "Write the filler/topic demo corpus");
  make_synthetic->add_option("dir", synthetic_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (make_synthetic->parsed()) {
      pl::write_synthetic_corpus(synthetic_dir);
      return 0;
    }
    CLI::App* sub = nullptr;
    for (auto* s : stages) {
      if (s->parsed()) sub = s;
    }
    // Extras fall through to the top-level app, in command-line order.
    auto overrides = dotted_overrides(app.remaining());
    if (threads > 0) overrides.emplace_back("threads", std::to_string(threads));
    const auto cfg = pl::load_config(config_file.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_file),
                                     overrides);

    pl::Invocation inv;
    inv.force = force;
    if (!arch.empty()) inv.arch = cadoc::nnet::parse_architecture(arch);
    if (!method.empty()) inv.method = method;
    if (!sampling.empty()) inv.sampling = cadoc::parse_sampling_variant(sampling);
    if (samples > 0) inv.samples = samples;
    if (temperature > 0.0) inv.temperature = temperature;
    if (!output.empty()) inv.output = output;

    std::ostringstream sink;
    pl::run_subcommand(sub->get_name(), cfg, inv, quiet ? static_cast<std::ostream&>(sink) : std::cout);
    return 0;
  } catch (const pl::UsageError& e) {
    std::cerr << "error: " << e.what() << "\nRun with --help for more information.\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
