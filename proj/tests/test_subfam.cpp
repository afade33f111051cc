#include <doctest.h>

#include <fstream>
#include <sstream>

#include "core/artifacts.hpp"
#include "core/error.hpp"
#include "core/random.hpp"
#include "core/subfam.hpp"
#include "oracles.hpp"

using namespace quotefam;
using namespace quotefam::subfam;

namespace {

Family make_family(const std::vector<std::pair<std::string, std::uint64_t>>& quotes) {
  Family f;
  corpus::QuoteId id = 0;
  for (const auto& [t, m] : quotes) f.quotes.push_back({id++, t, m, {}});
  return f;
}

Family fiorina() {
  std::ifstream in(QUOTEFAM_DATA_DIR "/fiorina_family.jsonl");
  std::stringstream ss;
  ss << in.rdbuf();
  return artifacts::parse_family_records(ss.str()).at(0).family;
}

}  // namespace

TEST_CASE("token edit distance") {
  CHECK(token_edit_distance("gov palin", "gov sarah palin") == 1);
  CHECK(token_edit_distance("is subjected", "is being subjected") == 1);
  CHECK(token_edit_distance("same words here", "same words here") == 0);
  CHECK(token_edit_distance("", "a b") == 2);
}

TEST_CASE("banded distance matches the full DP") {
  Rng rng(3);
  for (int t = 0; t < 500; ++t) {
    std::vector<int> a(rng.below(9)), b(rng.below(9));
    for (auto& x : a) x = int(rng.below(3));
    for (auto& x : b) x = int(rng.below(3));
    const std::size_t full = oracle::levenshtein(a, b);
    CHECK(edit_distance<int>(a, b) == full);
    for (std::size_t lim : {0, 1, 2, 4}) {
      CHECK(bounded_edit_distance<int>(a, b, lim) == std::min(full, lim + 1));
    }
  }
}

TEST_CASE("edit graph on a single quote") {
  const auto f = make_family({{"only one here", 5}});
  const auto g = build_edit_graph(f);
  CHECK(g.size() == 1);
  CHECK(g.adjacency[0].empty());
  CHECK_THROWS_AS(build_edit_graph(f, 0), DomainError);
}

TEST_CASE("edit graph equals the all-pairs filter") {
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    std::vector<std::pair<std::string, std::uint64_t>> q;
    std::set<std::string> seen;
    while (q.size() < 25) {
      std::string s;
      const auto len = 1 + rng.below(5);
      for (std::size_t i = 0; i < len; ++i) s += (i ? " " : "") + std::string(1, char('a' + rng.below(3)));
      if (seen.insert(s).second) q.emplace_back(s, 1 + rng.below(9));
    }
    const auto f = make_family(q);
    for (std::size_t k : {1, 2}) {
      const auto g = build_edit_graph(f, k);
      for (std::size_t i = 0; i < q.size(); ++i) {
        std::vector<std::size_t> expect;
        for (std::size_t j = 0; j < q.size(); ++j) {
          if (i != j && oracle::levenshtein(oracle::words(q[i].first), oracle::words(q[j].first)) <= k) {
            expect.push_back(j);
          }
        }
        CHECK(g.adjacency[i] == expect);
      }
    }
  }
}

TEST_CASE("components") {
  auto edgeless = make_family({{"a b c", 1}, {"d e f", 2}, {"g h i", 3}});
  CHECK(subfamilies(build_edit_graph(edgeless), edgeless).size() == 3);

  auto path = make_family({{"a b c", 1}, {"a b c d", 2}, {"a b c d e", 3}});
  const auto subs = subfamilies(build_edit_graph(path), path);
  REQUIRE(subs.size() == 1);
  CHECK(subs[0].members.size() == 3);
  CHECK(subs[0].total_mentions == 6);
}

TEST_CASE("the seven Fiorina versions form three sub-families") {
  const auto f = fiorina();
  REQUIRE(f.quotes.size() == 7);
  const auto g = build_edit_graph(f, 1);
  const auto subs = subfamilies(g, f);
  REQUIRE(subs.size() == 3);
  // Long form, short form and second half, in order of smallest quote id.
  CHECK(subs[0].members == std::vector<std::size_t>{0, 1});
  CHECK(subs[1].members == std::vector<std::size_t>{2, 3, 4});
  CHECK(subs[2].members == std::vector<std::size_t>{5, 6});
  CHECK(subs[0].total_mentions == 21);
  CHECK(subs[1].total_mentions == 71);
  CHECK(subfamily_labels(subs, 7) == std::vector<std::uint32_t>{0, 0, 1, 1, 1, 2, 2});
}

TEST_CASE("neighborhoods") {
  auto isolated = make_family({{"x y", 1}, {"p q r s", 1}});
  const auto gi = build_edit_graph(isolated);
  CHECK(neighborhood(gi, 0).members == std::vector<std::size_t>{0});

  auto pair = make_family({{"x y", 1}, {"x y z", 1}, {"a b c d e", 1}});
  CHECK(neighborhood(build_edit_graph(pair), 0).members == std::vector<std::size_t>{0, 1});

  // Star: hub "a b c" with four one-word variants that are two edits apart.
  auto star = make_family({{"a b c", 1}, {"a b c d", 1}, {"z b c", 1}, {"a b", 1}, {"a y c", 1}});
  const auto gs = build_edit_graph(star);
  const auto nb = neighborhood(gs, 0);
  CHECK(nb.members.size() == 5);
  CHECK(nb.center == 0);
  CHECK(neighborhood_at(gs, 1).members == std::vector<std::size_t>{0, 1});
  CHECK_THROWS_AS(neighborhood(gs, 99), DomainError);
}
