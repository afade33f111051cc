#include "core/textprep.hpp"

#include <algorithm>
#include <cmath>
#include <istream>

#include "core/error.hpp"

namespace quotefam::textprep {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u);
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool has_vowel(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return is_vowel(c) || c == 'y'; });
}

bool is_consonant(char c) { return c >= 'a' && c <= 'z' && !is_vowel(c); }

// Irregular forms map straight to their lemma. Every value is a fixed point
// of the suffix rules below.
const std::unordered_map<std::string_view, std::string_view>& irregular_forms() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      {"is", "be"},          {"am", "be"},         {"are", "be"},         {"was", "be"},
      {"were", "be"},        {"been", "be"},       {"being", "be"},       {"has", "have"},
      {"had", "have"},       {"having", "have"},   {"does", "do"},        {"did", "do"},
      {"done", "do"},        {"doing", "do"},      {"goes", "go"},        {"went", "go"},
      {"gone", "go"},        {"said", "say"},      {"says", "say"},       {"made", "make"},
      {"got", "get"},        {"gotten", "get"},    {"took", "take"},      {"taken", "take"},
      {"saw", "see"},        {"seen", "see"},      {"came", "come"},      {"knew", "know"},
      {"known", "know"},     {"thought", "think"}, {"told", "tell"},      {"gave", "give"},
      {"given", "give"},     {"found", "find"},    {"left", "leave"},     {"felt", "feel"},
      {"kept", "keep"},      {"began", "begin"},   {"begun", "begin"},    {"brought", "bring"},
      {"bought", "buy"},     {"ran", "run"},       {"wrote", "write"},    {"written", "write"},
      {"stood", "stand"},    {"held", "hold"},     {"lost", "lose"},      {"meant", "mean"},
      {"paid", "pay"},       {"sent", "send"},     {"built", "build"},    {"spoke", "speak"},
      {"spoken", "speak"},   {"chose", "choose"},  {"chosen", "choose"},  {"fought", "fight"},
      {"taught", "teach"},   {"led", "lead"},      {"sold", "sell"},      {"won", "win"},
      {"met", "meet"},       {"sat", "sit"},       {"ate", "eat"},        {"eaten", "eat"},
      {"fell", "fall"},      {"fallen", "fall"},   {"broke", "break"},    {"broken", "break"},
      {"forgot", "forget"},  {"understood", "understand"},                {"heard", "hear"},
      {"men", "man"},        {"women", "woman"},   {"children", "child"}, {"feet", "foot"},
      {"teeth", "tooth"},    {"mice", "mouse"},    {"lives", "life"},     {"wives", "wife"},
      {"better", "good"},    {"best", "good"},     {"worse", "bad"},      {"worst", "bad"},
  };
  return table;
}

// Words whose apparent suffix is part of the stem.
const std::unordered_set<std::string_view>& suffix_exceptions() {
  static const std::unordered_set<std::string_view> words = {
      "during",  "nothing", "something", "anything", "everything", "morning", "evening",
      "ceiling", "news",    "this",      "thus",     "his",        "hers",    "its",
      "yes",     "always",  "perhaps",   "series",   "species",    "politics", "economics",
      "physics", "hundred", "indeed",    "united",   "sometimes",  "ones",     "whereas",
      "needs",   "less",    "unless",    "various",  "was",        "has",      "does",
  };
  return words;
}

std::string repair_stem(std::string stem) {
  const std::size_t n = stem.size();
  if (n >= 2 && stem[n - 1] == stem[n - 2] && is_consonant(stem[n - 1]) && stem[n - 1] != 'l' &&
      stem[n - 1] != 's' && stem[n - 1] != 'z') {
    stem.pop_back();
  } else if (ends_with(stem, "at") || ends_with(stem, "bl") || ends_with(stem, "iz") ||
             (n >= 5 && (ends_with(stem, "ag") || ends_with(stem, "rv") || ends_with(stem, "uc") ||
                         ends_with(stem, "iv") || ends_with(stem, "ur")))) {
    stem.push_back('e');
  } else if (n == 3 && is_consonant(stem[0]) && is_vowel(stem[1]) && is_consonant(stem[2]) &&
             stem[2] != 'w' && stem[2] != 'x' && stem[2] != 'y') {
    stem.push_back('e');
  }
  return stem;
}

std::string rule_step(const std::string& w) {
  if (suffix_exceptions().contains(w)) return w;
  if (const auto it = irregular_forms().find(w); it != irregular_forms().end()) {
    return std::string(it->second);
  }
  if (ends_with(w, "'s") && w.size() > 2) return w.substr(0, w.size() - 2);
  if (w.size() <= 3) return w;
  if (ends_with(w, "ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
  if (ends_with(w, "sses")) return w.substr(0, w.size() - 2);
  if (ends_with(w, "ches") || ends_with(w, "shes") || ends_with(w, "xes") || ends_with(w, "zzes")) {
    return w.substr(0, w.size() - 2);
  }
  if (ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is")) {
    return w.substr(0, w.size() - 1);
  }
  if (ends_with(w, "ied") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
  if (ends_with(w, "eed")) return w.size() > 4 ? w.substr(0, w.size() - 1) : w;
  for (const std::string_view suffix : {std::string_view("ed"), std::string_view("ing")}) {
    if (!ends_with(w, suffix)) continue;
    const std::string stem = w.substr(0, w.size() - suffix.size());
    if (stem.size() >= 3 && has_vowel(stem)) return repair_stem(stem);
  }
  return w;
}

}  // namespace

TokenSeq split_words(std::string_view text) {
  TokenSeq out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

TokenSeq tokenize(std::string_view text) {
  TokenSeq out;
  for (std::string& word : split_words(text)) {
    std::size_t b = 0, e = word.size();
    while (b < e && is_punct(word[b])) ++b;
    while (e > b && is_punct(word[e - 1])) --e;
    if (e > b) out.push_back(word.substr(b, e - b));
  }
  return out;
}

std::string rule_lemma(std::string_view word) {
  std::string current(word);
  // Every rule shortens the word or maps to a fixed point, so this settles fast.
  for (int round = 0; round < 16; ++round) {
    std::string next = rule_step(current);
    if (next == current || next.empty()) break;
    current = std::move(next);
  }
  return current;
}

Lemmatizer Lemmatizer::from_stream(std::istream& in) {
  std::unordered_map<std::string, std::string> table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw FormatError("lemma map line is not surface<TAB>lemma", line_no);
    }
    table.insert_or_assign(line.substr(0, tab), line.substr(tab + 1));
  }
  if (in.bad()) throw IoError("failed reading lemma map");
  return Lemmatizer(std::move(table));
}

std::string Lemmatizer::lemma(std::string_view word) const {
  if (const auto it = table_.find(std::string(word)); it != table_.end()) return it->second;
  return rule_lemma(word);
}

WordSet load_word_list(std::istream& in) {
  WordSet words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    words.insert(line);
  }
  if (in.bad()) throw IoError("failed reading word list");
  return words;
}

TokenSeq normalize(const TokenSeq& seq, const Lemmatizer& lemmatizer, const WordSet& stopwords) {
  TokenSeq out;
  out.reserve(seq.size());
  for (const std::string& token : seq) {
    if (stopwords.contains(token)) continue;
    std::string lemma = lemmatizer.lemma(token);
    if (lemma.empty() || stopwords.contains(lemma)) continue;
    out.push_back(std::move(lemma));
  }
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
  std::sort(terms_.begin(), terms_.end());
  terms_.erase(std::unique(terms_.begin(), terms_.end()), terms_.end());
  ids_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) ids_.emplace(terms_[i], static_cast<TermId>(i));
}

std::optional<TermId> Vocabulary::find(std::string_view term) const {
  if (const auto it = ids_.find(std::string(term)); it != ids_.end()) return it->second;
  return std::nullopt;
}

TfIdfIndex TfIdfIndex::build(std::span<const TokenSeq> docs) {
  TfIdfIndex index;
  {
    std::vector<std::string> all;
    for (const TokenSeq& doc : docs) all.insert(all.end(), doc.begin(), doc.end());
    index.vocab_ = Vocabulary(std::move(all));
  }
  const std::size_t n_terms = index.vocab_.size();
  index.doc_freq_.assign(n_terms, 0);
  index.sequences_.reserve(docs.size());
  index.counts_.reserve(docs.size());
  for (const TokenSeq& doc : docs) {
    std::vector<TermId> seq;
    seq.reserve(doc.size());
    for (const std::string& token : doc) seq.push_back(*index.vocab_.find(token));
    std::vector<TermId> sorted = seq;
    std::sort(sorted.begin(), sorted.end());
    std::vector<TermCount> counts;
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      counts.push_back(TermCount{sorted[i], static_cast<std::uint32_t>(j - i)});
      ++index.doc_freq_[sorted[i]];
      i = j;
    }
    index.sequences_.push_back(std::move(seq));
    index.counts_.push_back(std::move(counts));
  }
  index.idf_.resize(n_terms);
  const double n = static_cast<double>(docs.size());
  for (std::size_t t = 0; t < n_terms; ++t) {
    index.idf_[t] = std::log(n / static_cast<double>(index.doc_freq_[t]));
  }
  return index;
}

std::uint32_t TfIdfIndex::tf(TermId term, std::size_t quote) const {
  const auto& counts = counts_.at(quote);
  const auto it = std::lower_bound(counts.begin(), counts.end(), term,
                                   [](const TermCount& c, TermId t) { return c.term < t; });
  return (it != counts.end() && it->term == term) ? it->count : 0;
}

double TfIdfIndex::tfidf(TermId term, std::size_t quote) const {
  if (quote >= n_quotes()) throw DomainError("tfidf: unknown quote");
  const std::uint32_t count = tf(term, quote);
  if (count == 0) throw DomainError("tfidf: term does not occur in quote");
  return static_cast<double>(count) * idf_[term];
}

double TfIdfIndex::tfidf(std::string_view term, std::size_t quote) const {
  const auto id = vocab_.find(term);
  if (!id) throw DomainError("tfidf: unknown term '" + std::string(term) + "'");
  return tfidf(*id, quote);
}

std::vector<double> TfIdfIndex::position_weights(std::size_t quote) const {
  const auto seq = sequence(quote);
  std::vector<double> weights(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    weights[i] = static_cast<double>(tf(seq[i], quote)) * idf_[seq[i]];
  }
  return weights;
}

}  // namespace quotefam::textprep
