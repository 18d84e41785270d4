#include "cadoc/eval.hpp"

#include "cadoc/embed.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace cadoc {

namespace {

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

}  // namespace

std::vector<StsPair> read_sts_pairs(const std::filesystem::path& path, const std::string& default_domain) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<StsPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto fields = split_tabs(line);
    if (fields.size() != 3 && fields.size() != 4) {
      throw std::runtime_error(where + ": expected gold, sentence A, sentence B[, domain]");
    }
    StsPair pair;
    try {
      std::size_t used = 0;
      pair.gold_score = std::stod(fields[0], &used);
      if (used != fields[0].size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw std::runtime_error(where + ": bad gold score '" + fields[0] + "'");
    }
    if (!(pair.gold_score >= 0.0 && pair.gold_score <= 5.0)) {
      throw std::runtime_error(where + ": gold score outside [0, 5]");
    }
    pair.sentence_a = split_whitespace(fields[1]);
    pair.sentence_b = split_whitespace(fields[2]);
    if (pair.sentence_a.empty() || pair.sentence_b.empty()) throw std::runtime_error(where + ": empty sentence");
    pair.domain = fields.size() == 4 && !fields[3].empty() ? fields[3] : default_domain;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

void resolve_sts_pairs(std::vector<StsPair>& pairs, const Corpus& corpus) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < corpus.size(); ++i) index.try_emplace(join(corpus.document(i).tokens), i);
  auto lookup = [&](const std::vector<std::string>& sentence) {
    const auto key = join(sentence);
    const auto it = index.find(key);
    if (it == index.end()) throw std::runtime_error("sentence not found in the corpus: \"" + key + "\"");
    return it->second;
  };
  for (auto& pair : pairs) {
    pair.doc_a = lookup(pair.sentence_a);
    pair.doc_b = lookup(pair.sentence_b);
  }
}

const DomainScore* EvalReport::find(const std::string& domain) const {
  for (const auto& d : domains) {
    if (d.domain == domain) return &d;
  }
  return nullptr;
}

EvalReport sts_evaluate(const EmbeddingTable& doc_vectors, const std::vector<StsPair>& pairs,
                        const std::string& method) {
  auto vector_of = [&](std::size_t doc) {
    if (doc >= doc_vectors.rows()) {
      throw std::out_of_range("missing vector for document " + doc_key(doc));
    }
    return doc_vectors.row(doc);
  };
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_domain;
  for (const auto& pair : pairs) {
    auto& [predicted, gold] = by_domain[pair.domain];
    predicted.push_back(cosine_similarity(vector_of(pair.doc_a), vector_of(pair.doc_b)));
    gold.push_back(pair.gold_score);
  }
  EvalReport report;
  report.method = method;
  report.total_pairs = pairs.size();
  for (const auto& [domain, series] : by_domain) {
    report.domains.push_back({domain, pearson(series.first, series.second), series.first.size()});
  }
  return report;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  for (const auto& d : report.domains) {
    nlohmann::json record = {{"method", report.method}, {"domain", d.domain}, {"pearson", d.pearson},
                             {"pairs", d.pairs}};
    out << record.dump() << '\n';
  }
  return out.str();
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << format_report(report);
}

EmbeddingTable average_document_vectors(const Corpus& corpus, const EmbeddingTable& word_vectors) {
  EmbeddingTable table(corpus.size(), word_vectors.dimension());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto mean = average_word_vectors(corpus.document(i), corpus.vocabulary(), word_vectors);
    std::ranges::copy(mean, table.row(i).begin());
    table.keys().push_back(doc_key(corpus.document(i).doc_id));
  }
  return table;
}

std::vector<double> cnn_feature_changes(const nnet::CnnModel& model, const Corpus& corpus, std::size_t doc,
                                        const EmbeddingTable& word_vectors, const SamplingStrategy& strategy,
                                        std::uint64_t seed, double tolerance) {
  if (strategy.sample_count < 1) throw std::invalid_argument("sample_count must be >= 1");
  if (word_vectors.dimension() != model.input_dim() || word_vectors.rows() != corpus.vocabulary().size()) {
    throw std::invalid_argument("word vectors do not match the model or vocabulary");
  }
  const SubstitutionSampler sampler(corpus, strategy.variant);
  Rng rng(derive_seed(seed, doc));
  const auto ids = occurrence_ids(corpus, doc);
  const auto occurrences = corpus.occurrences(doc);
  const std::size_t steps = model.timesteps();
  const std::size_t offset = nnet::first_real_timestep(ids.size(), steps);
  nnet::Sequence seq = nnet::make_sequence(ids, word_vectors, steps);
  const nnet::Vector base = model.pool(seq).values;
  const auto& tags = corpus.document(doc).pos_tags;

  std::vector<double> counts;
  for (std::size_t k = 0; k < ids.size() && k < steps; ++k) {
    const auto row = static_cast<Eigen::Index>(offset + k);
    const Eigen::RowVectorXd saved = seq.row(row);
    const std::string_view tag = tags ? std::string_view((*tags)[occurrences[k].position]) : std::string_view{};
    double total = 0.0;
    for (std::size_t s = 0; s < strategy.sample_count; ++s) {
      const WordId replacement = sampler.draw(rng, ids[k], tag);
      std::ranges::copy(word_vectors.row(static_cast<std::size_t>(replacement)), seq.row(row).data());
      const nnet::Vector pooled = model.pool(seq).values;
      total += static_cast<double>(((pooled - base).cwiseAbs().array() > tolerance).count());
    }
    seq.row(row) = saved;
    counts.push_back(total / static_cast<double>(strategy.sample_count));
  }
  return counts;
}

std::vector<int> introspect_cnn(const nnet::CnnModel& model, const Corpus& corpus, std::size_t doc,
                                const EmbeddingTable& word_vectors, const SamplingStrategy& strategy,
                                std::uint64_t seed, double tolerance) {
  const auto means = cnn_feature_changes(model, corpus, doc, word_vectors, strategy, seed, tolerance);
  std::vector<int> out;
  out.reserve(means.size());
  for (double m : means) out.push_back(static_cast<int>(std::lround(m)));
  return out;
}

std::vector<double> introspect_gru(const nnet::GruModel& model, std::span<const WordId> ids,
                                   const EmbeddingTable& word_vectors) {
  if (word_vectors.dimension() != model.input_dim()) {
    throw std::invalid_argument("word vectors do not match the model input dimension");
  }
  const std::size_t steps = model.timesteps();
  std::size_t real = 0;
  for (WordId id : ids) real += id != kNoWord ? 1 : 0;
  real = std::min(real, steps);
  const auto trace = nnet::gru_forward(nnet::make_sequence(ids, word_vectors, steps), model);
  std::vector<double> norms;
  norms.reserve(real);
  for (std::size_t t = steps - real; t < steps; ++t) norms.push_back(trace.r[t].norm());
  return norms;
}

std::vector<IntrospectionRow> introspection_rows(const nnet::CnnModel& cnn, const nnet::GruModel& gru,
                                                 const Corpus& corpus, std::size_t doc,
                                                 const EmbeddingTable& word_vectors,
                                                 const SamplingStrategy& strategy, std::uint64_t seed) {
  const auto changes = introspect_cnn(cnn, corpus, doc, word_vectors, strategy, seed);
  const auto ids = occurrence_ids(corpus, doc);
  const auto norms = introspect_gru(gru, ids, word_vectors);
  const auto occurrences = corpus.occurrences(doc);
  const std::size_t n = std::min(changes.size(), norms.size());
  std::vector<IntrospectionRow> rows;
  rows.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    IntrospectionRow row;
    row.token = corpus.document(doc).tokens[occurrences[k].position];
    row.cnn_feature_changes = changes[k];
    row.gru_reset_norm = norms[k];
    row.idf = idf(corpus.vocabulary(), ids[k], corpus.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

IntrospectionCorrelations introspection_correlations(std::span<const IntrospectionRow> rows) {
  std::vector<double> changes;
  std::vector<double> norms;
  std::vector<double> idfs;
  for (const auto& row : rows) {
    changes.push_back(row.cnn_feature_changes);
    norms.push_back(row.gru_reset_norm);
    idfs.push_back(row.idf);
  }
  return {pearson(changes, idfs), pearson(norms, idfs)};
}

}  // namespace cadoc
