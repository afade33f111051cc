#include <sstream>

#include "core/textprep.hpp"

namespace quotefam::textprep {

namespace detail {
extern const char* const kEnglishWords;
}

namespace {

constexpr const char* kStopwords[] = {
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "aren't", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both",
    "but", "by", "can", "cannot", "can't", "could", "couldn't", "did", "didn't", "do", "does",
    "doesn't", "doing", "don't", "down", "during", "each", "few", "for", "from", "further", "had",
    "hadn't", "has", "hasn't", "have", "haven't", "having", "he", "he'd", "he'll", "her", "here",
    "hers", "herself", "he's", "him", "himself", "his", "how", "i", "i'd", "if", "i'll", "i'm",
    "in", "into", "is", "isn't", "it", "its", "it's", "itself", "i've", "just", "let's", "me",
    "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once", "only",
    "or", "other", "ought", "our", "ours", "ourselves", "out", "over", "own", "same", "she",
    "she'd", "she'll", "she's", "should", "shouldn't", "so", "some", "such", "than", "that",
    "that's", "the", "their", "theirs", "them", "themselves", "then", "there", "there's", "these",
    "they", "they'd", "they'll", "they're", "they've", "this", "those", "through", "to", "too",
    "under", "until", "up", "very", "was", "wasn't", "we", "we'd", "we'll", "we're", "were",
    "weren't", "we've", "what", "what's", "when", "where", "which", "while", "who", "whom",
    "who's", "why", "will", "with", "won't", "would", "wouldn't", "you", "you'd", "you'll", "your",
    "you're", "yours", "yourself", "yourselves", "you've",
};

}  // namespace

const WordSet& default_stopwords() {
  static const WordSet words(std::begin(kStopwords), std::end(kStopwords));
  return words;
}

const WordSet& english_words() {
  static const WordSet words = [] {
    std::istringstream in(detail::kEnglishWords);
    WordSet w = load_word_list(in);
    for (const auto& s : default_stopwords()) w.erase(s);
    return w;
  }();
  return words;
}

}  // namespace quotefam::textprep
