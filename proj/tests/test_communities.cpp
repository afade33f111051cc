#include <doctest.h>

#include <cmath>
#include <set>

#include "core/communities.hpp"
#include "core/error.hpp"
#include "core/random.hpp"
#include "oracles.hpp"

using namespace quotefam;
using namespace quotefam::communities;
using simgraph::Edge;
using simgraph::SimilarityGraph;

namespace {

std::vector<oracle::WeightedEdge> plain(const SimilarityGraph& g) {
  std::vector<oracle::WeightedEdge> out;
  for (const auto& e : g.edges()) out.push_back({e.u, e.v, e.weight});
  return out;
}

std::vector<int> as_int(std::span<const ModuleId> a) { return {a.begin(), a.end()}; }

void add_clique(std::vector<Edge>& e, std::uint32_t first, std::uint32_t n) {
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j) e.push_back({first + i, first + j, 1.0});
}

SimilarityGraph two_cliques(bool bridge) {
  std::vector<Edge> e;
  add_clique(e, 0, 4);
  add_clique(e, 4, 4);
  if (bridge) e.push_back({3, 4, 1.0});
  return {8, e};
}

SimilarityGraph random_graph(Rng& rng, std::size_t n, double p) {
  std::vector<Edge> e;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) e.push_back({i, j, 0.35 + 0.65 * rng.uniform01()});
  return {n, e};
}

}  // namespace

TEST_CASE("two nodes in one module code ln 2") {
  const SimilarityGraph g(2, {{0, 1, 0.8}});
  const std::vector<ModuleId> one = {0, 0};
  CHECK(map_equation(g, one) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("map equation agrees with the flow-definition oracle") {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const auto g = random_graph(rng, 7, 0.5);
    std::vector<ModuleId> a(7);
    for (auto& m : a) m = ModuleId(rng.below(3) * 5);  // sparse labels allowed
    CHECK(map_equation(g, a) == doctest::Approx(oracle::map_equation(7, plain(g), as_int(a))).epsilon(1e-12));
  }
  CHECK_THROWS_AS(map_equation(two_cliques(true), std::vector<ModuleId>{0, 0}), DomainError);
}

TEST_CASE("singletons never beat one module on a clique") {
  std::vector<Edge> e;
  add_clique(e, 0, 4);
  const SimilarityGraph k4(4, e);
  CHECK(map_equation(k4, std::vector<ModuleId>{0, 1, 2, 3}) >= map_equation(k4, std::vector<ModuleId>{0, 0, 0, 0}));
}

TEST_CASE("two cliques with a bridge") {
  const auto g = two_cliques(true);
  std::vector<int> best;
  const double opt = oracle::shortest_codelength(8, plain(g), &best);
  const std::vector<ModuleId> split = {0, 0, 0, 0, 1, 1, 1, 1};
  CHECK(map_equation(g, split) == doctest::Approx(opt).epsilon(1e-12));
  CHECK(oracle::same_partition(best, std::vector<std::uint32_t>(split.begin(), split.end())));
  const auto p = detect_families(g, 1);
  CHECK(oracle::same_partition(best, p.assignment));
  CHECK(p.codelength == doctest::Approx(opt).epsilon(1e-12));
}

TEST_CASE("edgeless and disconnected graphs") {
  const SimilarityGraph empty(5, {});
  const auto p = detect_families(empty, 3);
  CHECK(p.n_modules() == 5);
  const auto q = detect_families(two_cliques(false), 3);
  CHECK(q.n_modules() == 2);
  CHECK(oracle::same_partition({0, 0, 0, 0, 1, 1, 1, 1}, q.assignment));
}

TEST_CASE("random 8-node graphs are close to the exhaustive optimum") {
  Rng rng(2024);
  int good = 0;
  for (int t = 0; t < 100; ++t) {
    const auto g = random_graph(rng, 8, 0.45);
    const double opt = oracle::shortest_codelength(8, plain(g));
    const auto p = detect_families(g, std::uint64_t(t), {3, 200});
    CHECK(p.codelength == doctest::Approx(map_equation(g, p.assignment)).epsilon(1e-12));
    if (p.codelength <= 1.05 * opt + 1e-12) ++good;
  }
  CHECK(good >= 95);
}

TEST_CASE("detection is deterministic and respects components") {
  Rng rng(9);
  const auto g = random_graph(rng, 30, 0.08);
  const auto a = detect_families(g, 17, {2, 200});
  const auto b = detect_families(g, 17, {2, 200});
  CHECK(a.assignment == b.assignment);
  CHECK(a.codelength == b.codelength);
  // Component labels by flood fill.
  std::vector<int> comp(30, -1);
  int c = 0;
  for (std::uint32_t s = 0; s < 30; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<std::uint32_t> stack = {s};
    comp[s] = c;
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (const auto& nb : g.neighbors(u))
        if (comp[nb.node] < 0) comp[nb.node] = c, stack.push_back(nb.node);
    }
    ++c;
  }
  for (const auto& e : g.edges()) CHECK(comp[e.u] == comp[e.v]);
  for (std::uint32_t u = 0; u < 30; ++u)
    for (std::uint32_t v = 0; v < 30; ++v)
      if (a.assignment[u] == a.assignment[v]) CHECK(comp[u] == comp[v]);
}

TEST_CASE("families from partition") {
  std::vector<corpus::Quote> q = {{0, "a", 3, {}}, {0, "b", 4, {}}, {0, "c", 5, {}}};
  const corpus::QuoteSet qs(std::move(q));
  Partition p;
  p.assignment = {1, 0, 1};
  const auto fams = families_from_partition(p, qs);
  REQUIRE(fams.size() == 2);
  CHECK(fams[1].n_versions() == 2);
  CHECK(fams[1].total_mentions() == 8);
  CHECK(fams[1].quotes[0].id == 0);
  CHECK(fams[1].quotes[1].id == 2);
}

TEST_CASE("family filter") {
  auto fam = [](FamilyId id, std::vector<std::string> texts) {
    Family f;
    f.id = id;
    corpus::QuoteId qid = 0;
    for (auto& t : texts) f.quotes.push_back({qid++, t, 5, {}});
    return f;
  };
  const std::vector<Family> in = {fam(0, {"a little bit"}), fam(1, {"la vida no vale nada"}),
                                  fam(2, {"the republican party will not stand by", "short one"})};
  const auto out = filter_families(in);
  REQUIRE(out.size() == 1);
  CHECK(out[0].id == 2);
  REQUIRE(out[0].quotes.size() == 1);
  CHECK(out[0].quotes[0].text == "the republican party will not stand by");

  FilterOptions off;
  off.english_check = false;
  CHECK(filter_families(in, off).size() == 2);
  CHECK_FALSE(looks_english("la vida no vale nada", textprep::english_words()));
  CHECK(looks_english("the republican party will not stand by", textprep::english_words()));
}
