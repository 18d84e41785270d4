#include "cadoc/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

namespace cadoc {

Vocabulary Vocabulary::build(std::span<const TokenizedDocument> docs, std::size_t min_count) {
  if (docs.empty()) throw std::invalid_argument("empty corpus");
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");

  struct Counts {
    std::uint64_t tf = 0;
    std::uint64_t df = 0;
    std::size_t first_seen = 0;
  };
  std::unordered_map<std::string_view, Counts> counts;
  std::vector<std::string_view> order;
  std::uint64_t total = 0;

  std::unordered_set<std::string_view> seen_in_doc;
  for (const auto& doc : docs) {
    seen_in_doc.clear();
    for (const auto& token : doc.tokens) {
      ++total;
      auto [it, inserted] = counts.try_emplace(token);
      if (inserted) {
        it->second.first_seen = order.size();
        order.push_back(token);
      }
      ++it->second.tf;
      if (seen_in_doc.insert(token).second) ++it->second.df;
    }
  }

  Vocabulary vocab;
  vocab.total_tokens_ = total;
  vocab.num_docs_ = docs.size();
  vocab.min_count_ = min_count;
  for (std::string_view word : order) {
    const Counts& c = counts.at(word);
    if (c.tf < min_count) continue;
    const auto id = static_cast<WordId>(vocab.words_.size());
    vocab.words_.emplace_back(word);
    vocab.index_.emplace(std::string(word), id);
    vocab.term_freq_.push_back(c.tf);
    vocab.doc_freq_.push_back(c.df);
  }
  return vocab;
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  const auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double idf(const Vocabulary& vocab, WordId id, std::size_t num_docs) {
  if (num_docs < 1) throw std::invalid_argument("idf: num_docs must be >= 1");
  if (id < 0 || static_cast<std::size_t>(id) >= vocab.size()) {
    throw std::out_of_range("idf: word id out of range");
  }
  const std::uint64_t df = vocab.doc_freq(id);
  if (df == 0) throw std::invalid_argument("word absent from corpus");
  return std::log(static_cast<double>(num_docs) / static_cast<double>(df));
}

std::vector<double> idf_table(const Vocabulary& vocab, std::size_t num_docs) {
  std::vector<double> out(vocab.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = idf(vocab, static_cast<WordId>(i), num_docs);
  return out;
}

double keep_probability(double word_freq_fraction, double threshold) {
  if (!(word_freq_fraction > 0.0) || word_freq_fraction > 1.0) {
    throw std::invalid_argument("keep_probability: frequency fraction must be in (0, 1]");
  }
  if (!(threshold > 0.0)) throw std::invalid_argument("keep_probability: threshold must be positive");
  return std::min(1.0, std::sqrt(threshold / word_freq_fraction));
}

Corpus::Corpus(std::vector<TokenizedDocument> documents, std::size_t min_count,
               std::optional<std::vector<std::string>> domain_labels)
    : documents_(std::move(documents)), domain_labels_(std::move(domain_labels)) {
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    const auto& doc = documents_[i];
    if (doc.tokens.empty()) {
      throw std::invalid_argument("document " + std::to_string(i) + " has no tokens");
    }
    if (doc.pos_tags && doc.pos_tags->size() != doc.tokens.size()) {
      throw std::invalid_argument("document " + std::to_string(i) +
                                  ": POS tag count does not match token count");
    }
  }
  if (domain_labels_ && domain_labels_->size() != documents_.size()) {
    throw std::invalid_argument("domain label count does not match document count");
  }

  vocab_ = Vocabulary::build(documents_, min_count);
  occurrences_.resize(documents_.size());
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    const auto& tokens = documents_[i].tokens;
    auto& occ = occurrences_[i];
    for (std::size_t p = 0; p < tokens.size(); ++p) {
      if (auto id = vocab_.find(tokens[p])) occ.push_back({p, *id});
    }
    total_occurrences_ += occ.size();
  }
}

bool Corpus::has_pos_tags() const {
  return !documents_.empty() &&
         std::all_of(documents_.begin(), documents_.end(),
                     [](const TokenizedDocument& d) { return d.pos_tags.has_value(); });
}

std::vector<std::string> split_whitespace(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

namespace {

std::vector<std::string> split_tags(std::string_view line) {
  auto tags = split_whitespace(line);
  if (tags.size() == 1 && tags[0].find('/') != std::string::npos && tags[0] != "/") {
    std::vector<std::string> parts;
    std::string_view rest = tags[0];
    for (;;) {
      const auto slash = rest.find('/');
      parts.emplace_back(rest.substr(0, slash));
      if (slash == std::string_view::npos) break;
      rest.remove_prefix(slash + 1);
    }
    return parts;
  }
  return tags;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<TokenizedDocument> read_documents(const std::filesystem::path& doc_path,
                                              const std::optional<std::filesystem::path>& pos_path) {
  auto docs_in = open_input(doc_path);
  std::optional<std::ifstream> pos_in;
  if (pos_path) pos_in = open_input(*pos_path);

  std::vector<TokenizedDocument> docs;
  std::string line;
  std::string tag_line;
  std::size_t line_no = 0;
  while (std::getline(docs_in, line)) {
    ++line_no;
    TokenizedDocument doc;
    doc.doc_id = docs.size();
    doc.tokens = split_whitespace(line);
    if (doc.tokens.empty()) {
      throw std::runtime_error(doc_path.string() + ":" + std::to_string(line_no) + ": empty document");
    }
    if (pos_in) {
      if (!std::getline(*pos_in, tag_line)) {
        throw std::runtime_error(pos_path->string() + ":" + std::to_string(line_no) +
                                 ": POS file has fewer lines than the document file");
      }
      auto tags = split_tags(tag_line);
      if (tags.size() != doc.tokens.size()) {
        throw std::runtime_error(pos_path->string() + ":" + std::to_string(line_no) + ": " +
                                 std::to_string(tags.size()) + " tags for " +
                                 std::to_string(doc.tokens.size()) + " tokens");
      }
      doc.pos_tags = std::move(tags);
    }
    docs.push_back(std::move(doc));
  }
  if (pos_in && std::getline(*pos_in, tag_line) && !split_whitespace(tag_line).empty()) {
    throw std::runtime_error(pos_path->string() + ":" + std::to_string(line_no + 1) +
                             ": POS file has more lines than the document file");
  }
  return docs;
}

std::vector<std::string> read_domain_labels(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    labels.push_back(line);
  }
  return labels;
}

Corpus load_corpus(const std::filesystem::path& doc_path,
                   const std::optional<std::filesystem::path>& pos_path,
                   const std::optional<std::filesystem::path>& domain_path, std::size_t min_count) {
  auto docs = read_documents(doc_path, pos_path);
  std::optional<std::vector<std::string>> labels;
  if (domain_path) labels = read_domain_labels(*domain_path);
  return Corpus(std::move(docs), min_count, std::move(labels));
}

}  // namespace cadoc
