#pragma once

// Token sequences, lemmatization, stop words and tf*idf weights.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace quotefam::textprep {

using TokenSeq = std::vector<std::string>;
using WordSet = std::unordered_set<std::string>;

// Whitespace split, then leading/trailing punctuation stripped from each
// token. Internal hyphens and apostrophes survive; empty tokens are dropped.
TokenSeq tokenize(std::string_view text);

// Plain whitespace split with no other processing.
TokenSeq split_words(std::string_view text);

// Suffix-rule lemma of a lowercase word, iterated to a fixed point so that
// rule_lemma(rule_lemma(w)) == rule_lemma(w).
std::string rule_lemma(std::string_view word);

class Lemmatizer {
 public:
  Lemmatizer() = default;
  explicit Lemmatizer(std::unordered_map<std::string, std::string> table) : table_(std::move(table)) {}

  // TSV surface<TAB>lemma per line.
  static Lemmatizer from_stream(std::istream& in);

  // Table lookup, then the rule lemmatizer (which falls back to identity).
  std::string lemma(std::string_view word) const;

 private:
  std::unordered_map<std::string, std::string> table_;
};

const WordSet& default_stopwords();
// Common English words used by the language heuristic (stop words excluded).
const WordSet& english_words();
// One term per line; blank lines and '#' comments skipped.
WordSet load_word_list(std::istream& in);

// Lemmatize each token, then drop tokens whose surface form or lemma is a
// stop word. Order is preserved.
TokenSeq normalize(const TokenSeq& seq, const Lemmatizer& lemmatizer, const WordSet& stopwords);

using TermId = std::uint32_t;

// Terms are numbered in lexicographic order of their text, so comparing id
// sequences orders the underlying token sequences lexicographically.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> terms);  // sorted and deduplicated here

  std::optional<TermId> find(std::string_view term) const;
  const std::string& term(TermId id) const { return terms_.at(id); }
  std::size_t size() const noexcept { return terms_.size(); }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, TermId> ids_;
};

class TfIdfIndex {
 public:
  TfIdfIndex() = default;
  // docs[q] is the normalized token sequence of quote q.
  static TfIdfIndex build(std::span<const TokenSeq> docs);

  std::size_t n_quotes() const noexcept { return sequences_.size(); }
  const Vocabulary& vocabulary() const noexcept { return vocab_; }

  std::span<const TermId> sequence(std::size_t quote) const { return sequences_.at(quote); }
  std::uint32_t doc_freq(TermId term) const { return doc_freq_.at(term); }
  double idf(TermId term) const { return idf_.at(term); }
  // Raw count of term in quote; 0 when absent.
  std::uint32_t tf(TermId term, std::size_t quote) const;

  // tf(w,q) * ln(|Q| / df(w)); DomainError if w does not occur in q.
  double tfidf(std::string_view term, std::size_t quote) const;
  double tfidf(TermId term, std::size_t quote) const;

  // tf*idf of the term at each position of quote's sequence.
  std::vector<double> position_weights(std::size_t quote) const;

 private:
  struct TermCount {
    TermId term;
    std::uint32_t count;
  };
  Vocabulary vocab_;
  std::vector<std::vector<TermId>> sequences_;
  std::vector<std::vector<TermCount>> counts_;  // sorted by term
  std::vector<std::uint32_t> doc_freq_;
  std::vector<double> idf_;
};

}  // namespace quotefam::textprep
