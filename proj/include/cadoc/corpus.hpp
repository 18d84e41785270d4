#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cadoc {

using WordId = std::int32_t;
inline constexpr WordId kNoWord = -1;

struct TokenizedDocument {
  std::size_t doc_id = 0;
  std::vector<std::string> tokens;
  std::optional<std::vector<std::string>> pos_tags;
};

// Word ids are dense in 0..size()-1, assigned in order of first appearance.
class Vocabulary {
 public:
  static Vocabulary build(std::span<const TokenizedDocument> docs, std::size_t min_count);

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

  std::optional<WordId> find(std::string_view word) const;
  const std::string& word(WordId id) const { return words_.at(static_cast<std::size_t>(id)); }
  std::uint64_t term_freq(WordId id) const { return term_freq_.at(static_cast<std::size_t>(id)); }
  std::uint64_t doc_freq(WordId id) const { return doc_freq_.at(static_cast<std::size_t>(id)); }

  std::span<const std::string> words() const { return words_; }
  std::span<const std::uint64_t> term_freqs() const { return term_freq_; }
  std::span<const std::uint64_t> doc_freqs() const { return doc_freq_; }

  // Token count over all documents, filtered words included.
  std::uint64_t total_tokens() const { return total_tokens_; }
  std::size_t num_docs() const { return num_docs_; }
  std::size_t min_count() const { return min_count_; }

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };

  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId, StringHash, std::equal_to<>> index_;
  std::vector<std::uint64_t> term_freq_;
  std::vector<std::uint64_t> doc_freq_;
  std::uint64_t total_tokens_ = 0;
  std::size_t num_docs_ = 0;
  std::size_t min_count_ = 1;
};

// ln(num_docs / doc_freq).
double idf(const Vocabulary& vocab, WordId id, std::size_t num_docs);
std::vector<double> idf_table(const Vocabulary& vocab, std::size_t num_docs);

// min(1, sqrt(threshold / fraction)).
double keep_probability(double word_freq_fraction, double threshold);

// A retained token: its position in the original token sequence and its id.
struct Occurrence {
  std::size_t position = 0;
  WordId word = kNoWord;
};

// Immutable once built.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<TokenizedDocument> documents, std::size_t min_count,
         std::optional<std::vector<std::string>> domain_labels = std::nullopt);

  std::size_t size() const { return documents_.size(); }
  const TokenizedDocument& document(std::size_t i) const { return documents_.at(i); }
  std::span<const TokenizedDocument> documents() const { return documents_; }
  const Vocabulary& vocabulary() const { return vocab_; }

  // Tokens of document i that survive min_count, in order.
  std::span<const Occurrence> occurrences(std::size_t i) const { return occurrences_.at(i); }
  std::size_t total_occurrences() const { return total_occurrences_; }
  bool has_pos_tags() const;

  const std::optional<std::vector<std::string>>& domain_labels() const { return domain_labels_; }

 private:
  std::vector<TokenizedDocument> documents_;
  Vocabulary vocab_;
  std::vector<std::vector<Occurrence>> occurrences_;
  std::size_t total_occurrences_ = 0;
  std::optional<std::vector<std::string>> domain_labels_;
};

// One document per line, single-space separated tokens. The POS file mirrors
// the line structure with one tag per token; the domain file carries one
// label per line.
std::vector<TokenizedDocument> read_documents(const std::filesystem::path& doc_path,
                                              const std::optional<std::filesystem::path>& pos_path);
std::vector<std::string> read_domain_labels(const std::filesystem::path& path);

Corpus load_corpus(const std::filesystem::path& doc_path,
                   const std::optional<std::filesystem::path>& pos_path,
                   const std::optional<std::filesystem::path>& domain_path = std::nullopt,
                   std::size_t min_count = 1);

std::vector<std::string> split_whitespace(std::string_view line);

}  // namespace cadoc
