#include <doctest.h>

#include <cmath>
#include <sstream>

#include "core/error.hpp"
#include "core/metrics.hpp"
#include "core/random.hpp"
#include "oracles.hpp"

using namespace quotefam;
using namespace quotefam::metrics;

namespace {

Family make_family(const std::vector<std::pair<std::string, std::uint64_t>>& quotes) {
  Family f;
  corpus::QuoteId id = 0;
  for (const auto& [t, m] : quotes) f.quotes.push_back({id++, t, m, {}});
  return f;
}

Family random_family(Rng& rng, std::size_t n) {
  std::vector<std::pair<std::string, std::uint64_t>> q;
  std::set<std::string> seen;
  while (q.size() < n) {
    std::string s;
    const auto len = 2 + rng.below(4);
    for (std::size_t i = 0; i < len; ++i) s += (i ? " " : "") + std::string(1, char('a' + rng.below(4)));
    if (seen.insert(s).second) q.emplace_back(s, 1 + rng.below(30));
  }
  return make_family(q);
}

Neighborhood nb_of(std::size_t center, std::vector<std::size_t> members) { return {center, std::move(members)}; }

}  // namespace

TEST_CASE("term stability in a quote") {
  const auto f = make_family({{"a b c", 3}, {"a b d", 1}});
  CHECK(term_stability_in_quote("a", f, nb_of(0, {0})) == 1.0);
  CHECK(term_stability_in_quote("c", f, nb_of(0, {0, 1})) == 0.75);
  CHECK(term_stability_in_quote("a", f, nb_of(0, {0, 1})) == 1.0);
  CHECK_THROWS_AS(term_stability_in_quote("d", f, nb_of(0, {0, 1})), DomainError);
}

TEST_CASE("term stability across quotes") {
  std::vector<TermRecord> r = {{"t", 0, 0, 1.0, 1.0}, {"t", 0, 1, 0.5, 3.0}, {"u", 0, 1, 0.4, 3.0}};
  CHECK(term_stability("t", r) == 0.625);
  CHECK(term_stability("u", r) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK_THROWS_AS(term_stability("v", r), DomainError);
  const auto all = term_stabilities(r);
  CHECK(all.size() == 2);
  CHECK(all.at("t") == 0.625);
}

TEST_CASE("quote stability") {
  const auto f = make_family({{"the republican party", 56}, {"the republican party fails", 16}, {"x", 1}, {"y", 99}});
  CHECK(quote_stability(f, nb_of(0, {0})) == 1.0);
  CHECK(quote_stability(f, nb_of(0, {0, 1})) == doctest::Approx(56.0 / 72.0).epsilon(1e-15));
  CHECK(quote_stability(f, nb_of(0, {0, 1})) == doctest::Approx(0.778).epsilon(1e-3));
  CHECK(quote_stability(f, nb_of(2, {2, 3})) == doctest::Approx(0.01).epsilon(1e-15));
}

TEST_CASE("quote stability decreases with neighbor mentions") {
  for (std::uint64_t w = 1; w < 20; ++w) {
    const auto a = make_family({{"p q", 5}, {"p q r", w}});
    const auto b = make_family({{"p q", 5}, {"p q r", w + 1}});
    CHECK(quote_stability(b, nb_of(0, {0, 1})) < quote_stability(a, nb_of(0, {0, 1})));
  }
}

TEST_CASE("entropy values") {
  const std::uint64_t one[] = {7}, two[] = {4, 4}, skew[] = {3, 1}, zero[] = {3, 0};
  CHECK(entropy(one) == 0.0);
  CHECK(entropy(two) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(entropy(skew) == doctest::Approx(-(0.75 * std::log(0.75) + 0.25 * std::log(0.25))).epsilon(1e-15));
  CHECK(entropy(skew) == doctest::Approx(0.5623).epsilon(1e-4));
  CHECK(entropy(zero) == 0.0);
}

TEST_CASE("entropy grouping identity and bounds on random families") {
  Rng rng(42);
  for (int t = 0; t < 200; ++t) {
    const auto f = random_family(rng, 2 + rng.below(15));
    const auto g = subfam::build_edit_graph(f, 1);
    const auto subs = subfam::subfamilies(g, f);
    std::vector<std::uint64_t> all, shares;
    for (const auto& q : f.quotes) all.push_back(q.mentions);
    const double total = double(f.total_mentions());
    double within = 0.0;
    for (const auto& s : subs) {
      shares.push_back(s.total_mentions);
      std::vector<std::uint64_t> m;
      for (auto i : s.members) m.push_back(f.quotes[i].mentions);
      CHECK(entropy(f, s) == doctest::Approx(oracle::entropy(m)).epsilon(1e-12));
      within += double(s.total_mentions) / total * entropy(f, s);
    }
    const double hf = entropy(f);
    CHECK(std::abs(hf - oracle::entropy(shares) - within) < 1e-9);
    CHECK(hf >= 0.0);
    CHECK(hf <= std::log(double(f.quotes.size())) + 1e-12);
  }
}

TEST_CASE("stabilities stay in range and isolated quotes are fully stable") {
  Rng rng(43);
  for (int t = 0; t < 100; ++t) {
    const auto f = random_family(rng, 1 + rng.below(12));
    const auto g = subfam::build_edit_graph(f, 1);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto nb = subfam::neighborhood_at(g, i);
      const double s = quote_stability(f, nb);
      CHECK(s > 0.0);
      CHECK(s <= 1.0);
      if (nb.members.size() == 1) CHECK(s == 1.0);
    }
    for (const auto& r : term_records(f, g)) {
      CHECK(r.value >= 0.0);
      CHECK(r.value <= 1.0);
    }
  }
}

TEST_CASE("term records") {
  const auto f = make_family({{"a b c", 3}, {"a b d", 1}, {"x y", 2}});
  const auto g = subfam::build_edit_graph(f, 1);
  const auto r = term_records(f, g);
  CHECK(r.size() == 8);
  for (const auto& x : r) {
    if (x.quote == 0 && x.term == "c") CHECK(x.value == 0.75);
    if (x.quote == 1 && x.term == "d") CHECK(x.value == 0.25);
    if (x.quote == 2) CHECK(x.value == 1.0);
  }
}

TEST_CASE("feature stability") {
  const std::vector<StabilityRecord> one = {{0.3, 2.0}};
  const std::vector<StabilityRecord> eq = {{1.0, 1.0}, {0.0, 1.0}};
  const std::vector<StabilityRecord> skew = {{1.0, 9.0}, {0.0, 1.0}};
  auto key = [](const StabilityRecord&) { return 0; };
  CHECK(feature_stability(std::span<const StabilityRecord>(one), key).at(0) == 0.3);
  CHECK(feature_stability(std::span<const StabilityRecord>(eq), key).at(0) == 0.5);
  CHECK(feature_stability(std::span<const StabilityRecord>(skew), key).at(0) == 0.9);
}

TEST_CASE("quantile bins") {
  std::vector<Point> p;
  for (int i = 0; i < 10; ++i) p.push_back({double(9 - i), double(i % 3), 1.0 + i});
  const auto one = bin_quantiles(p, 1);
  REQUIRE(one.bins.size() == 1);
  double sw = 0, swy = 0;
  for (const auto& x : p) sw += x.weight, swy += x.weight * x.y;
  CHECK(one.bins[0].y == doctest::Approx(swy / sw).epsilon(1e-15));

  const auto five = bin_quantiles(p, 5);
  REQUIRE(five.bins.size() == 5);
  for (const auto& b : five.bins) CHECK(b.n == 2);
  CHECK(five.bins[0].x_mean == 0.5);
  CHECK(five.bins[4].x_mean == 8.5);

  std::vector<Point> flat(17, Point{0, 0.25, 1});
  for (std::size_t i = 0; i < flat.size(); ++i) flat[i].x = double(i);
  for (const auto& b : bin_quantiles(flat, 4).bins) {
    CHECK(b.y == 0.25);
    CHECK(b.ci_low == b.y);
    CHECK(b.ci_high == b.y);
  }
  CHECK_THROWS_AS(bin_quantiles(p, 11), DomainError);
  CHECK_THROWS_AS(bin_quantiles(p, 0), DomainError);
}

TEST_CASE("bin populations differ by at most one") {
  for (std::size_t n = 1; n < 80; ++n) {
    for (std::size_t k = 1; k <= n; ++k) {
      const auto s = quantile_sizes(n, k);
      REQUIRE(s.size() == k);
      const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
      CHECK(*hi - *lo <= 1);
      CHECK(std::is_sorted(s.rbegin(), s.rend()));
      std::size_t sum = 0;
      for (auto x : s) sum += x;
      CHECK(sum == n);
    }
  }
}

TEST_CASE("interval of a weighted bin") {
  // Two points y = 0 and 1 with weights 1 and 3: mean 0.75, weighted
  // variance 0.1875, Kish n_eff = 16 / 10.
  std::vector<Point> p = {{0, 0, 1}, {1, 1, 3}};
  const auto b = bin_quantiles(p, 1).bins[0];
  const double half = 1.959963984540054 * std::sqrt(0.1875 / 1.6);
  CHECK(b.y == 0.75);
  CHECK(b.ci_low == doctest::Approx(0.75 - half).epsilon(1e-14));
  CHECK(b.ci_high == doctest::Approx(0.75 + half).epsilon(1e-14));
}

TEST_CASE("curve csv") {
  BinnedCurve c{1, {{1.5, 0.25, 0.2, 0.3, 4}}};
  std::ostringstream out;
  write_curve_csv(out, c);
  CHECK(out.str() == "x_mean,y,ci_low,ci_high,n\n1.500000,0.250000,0.200000,0.300000,4\n");
}
