#include <doctest.h>

#include <cmath>
#include <sstream>

#include "core/error.hpp"
#include "core/textprep.hpp"

using namespace quotefam;
using namespace quotefam::textprep;

TEST_CASE("tokenize strips punctuation at the edges only") {
  CHECK(tokenize("sexist attacks ...") == TokenSeq{"sexist", "attacks"});
  CHECK(tokenize("cease-fire now") == TokenSeq{"cease-fire", "now"});
  CHECK(tokenize("\"don't\" stop, (ever)!") == TokenSeq{"don't", "stop", "ever"});
  CHECK(tokenize("").empty());
  CHECK(split_words("a  b ...") == TokenSeq{"a", "b", "..."});
}

TEST_CASE("normalize against a hand lemma table") {
  // Expected lemmas written out by hand rather than taken from the rules.
  const TokenSeq in = {"is", "subjected", "to", "attacks"};
  CHECK(normalize(in, Lemmatizer{}, default_stopwords()) == TokenSeq{"subject", "attack"});
  CHECK(normalize({"palin"}, Lemmatizer{}, default_stopwords()) == TokenSeq{"palin"});
  CHECK(normalize({"the", "of", "and", "is"}, Lemmatizer{}, default_stopwords()).empty());
}

TEST_CASE("rule lemmatizer") {
  const std::pair<const char*, const char*> cases[] = {
      {"attacks", "attack"}, {"boxes", "box"},     {"stopped", "stop"},   {"running", "run"},
      {"treatment", "treatment"}, {"women", "woman"}, {"parties", "party"}, {"outraged", "outrage"},
      {"is", "be"},         {"glass", "glass"},
  };
  for (const auto& [w, l] : cases) {
    CAPTURE(w);
    CHECK(rule_lemma(w) == l);
  }
}

TEST_CASE("rule lemmatizer is a fixed point") {
  const char* words[] = {"attacks", "sensitized", "outraged", "running", "studies", "palin", "gov", "sexist",
                         "stood", "bodies", "addresses", "hopping", "cease-fire", "taxes"};
  for (const char* w : words) {
    const auto once = rule_lemma(w);
    CAPTURE(w);
    CHECK(rule_lemma(once) == once);
  }
}

TEST_CASE("lemma table overrides rules and normalize is idempotent") {
  std::istringstream table("sensitised\tsensitize\nsensitized\tsensitize\nsensitize\tsensitize\n");
  const auto lem = Lemmatizer::from_stream(table);
  CHECK(lem.lemma("sensitised") == "sensitize");
  const TokenSeq in = {"we", "are", "sensitised", "and", "outraged", "by", "attacks"};
  const auto once = normalize(in, lem, default_stopwords());
  CHECK(normalize(once, lem, default_stopwords()) == once);
}

TEST_CASE("word lists") {
  std::istringstream in("# comment\nfoo\n\nbar\n");
  const auto w = load_word_list(in);
  CHECK(w.size() == 2);
  CHECK(w.count("foo") == 1);
  CHECK(default_stopwords().count("the") == 1);
  CHECK(english_words().count("party") == 1);
  CHECK(english_words().count("the") == 0);
}

TEST_CASE("tf*idf values") {
  // n_quotes = 4; "rare" only in quote 0 and twice in quote 1's own term.
  const std::vector<TokenSeq> docs = {
      {"common", "rare"}, {"common", "twice", "twice"}, {"common", "x"}, {"common", "y"}};
  const auto idx = TfIdfIndex::build(docs);
  CHECK(idx.n_quotes() == 4);
  CHECK(idx.tfidf("common", 0) == 0.0);
  CHECK(idx.tfidf("common", 1) == 0.0);
  CHECK(idx.tfidf("rare", 0) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  CHECK(idx.tfidf("rare", 0) == doctest::Approx(1.3863).epsilon(1e-4));
  CHECK(idx.tfidf("twice", 1) == doctest::Approx(2.0 * std::log(4.0)).epsilon(1e-15));
  CHECK(idx.tfidf("twice", 1) == doctest::Approx(2.7726).epsilon(1e-4));
  CHECK_THROWS_AS(idx.tfidf("rare", 1), DomainError);
  CHECK_THROWS_AS(idx.tfidf("absent", 0), DomainError);

  const auto id = idx.vocabulary().find("common");
  REQUIRE(id);
  CHECK(idx.doc_freq(*id) == 4);
  for (std::size_t t = 0; t < idx.vocabulary().size(); ++t) {
    CHECK(idx.idf(static_cast<TermId>(t)) >= 0.0);
    CHECK(idx.doc_freq(static_cast<TermId>(t)) >= 1);
    CHECK(idx.doc_freq(static_cast<TermId>(t)) <= 4);
  }
  const auto w = idx.position_weights(1);
  REQUIRE(w.size() == 3);
  CHECK(w[1] == w[2]);
}

TEST_CASE("vocabulary ids follow lexicographic order") {
  const Vocabulary v({"pear", "apple", "fig", "apple"});
  CHECK(v.size() == 3);
  CHECK(*v.find("apple") < *v.find("fig"));
  CHECK(*v.find("fig") < *v.find("pear"));
  CHECK_FALSE(v.find("kiwi"));
}

TEST_CASE("index build is deterministic") {
  const std::vector<TokenSeq> docs = {{"b", "a"}, {"c", "a", "a"}, {"d"}};
  const auto a = TfIdfIndex::build(docs);
  const auto b = TfIdfIndex::build(docs);
  for (std::size_t q = 0; q < docs.size(); ++q) CHECK(a.position_weights(q) == b.position_weights(q));
}
