#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_set>

#include "core/error.hpp"
#include "core/textprep.hpp"

namespace quotefam::metrics {

namespace {

bool contains_token(std::string_view text, std::string_view term) {
  for (const auto& tok : textprep::split_words(text)) {
    if (tok == term) return true;
  }
  return false;
}

double neighborhood_mentions(const Family& family, const Neighborhood& nb) {
  double total = 0.0;
  for (const std::size_t m : nb.members) total += static_cast<double>(family.quotes.at(m).mentions);
  return total;
}

}  // namespace

double term_stability_in_quote(std::string_view term, const Family& family, const Neighborhood& nb) {
  if (!contains_token(family.quotes.at(nb.center).text, term)) {
    throw DomainError("term '" + std::string(term) + "' does not occur in the quote");
  }
  double sharing = 0.0;
  for (const std::size_t m : nb.members) {
    const auto& q = family.quotes.at(m);
    if (contains_token(q.text, term)) sharing += static_cast<double>(q.mentions);
  }
  return sharing / neighborhood_mentions(family, nb);
}

double quote_stability(const Family& family, const Neighborhood& nb) {
  return static_cast<double>(family.quotes.at(nb.center).mentions) / neighborhood_mentions(family, nb);
}

double entropy(std::span<const std::uint64_t> mentions) {
  double total = 0.0;
  for (const auto w : mentions) total += static_cast<double>(w);
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (const auto w : mentions) {
    if (w == 0) continue;
    const double p = static_cast<double>(w) / total;
    h -= p * std::log(p);
  }
  return h;
}

double entropy(const Family& family) {
  std::vector<std::uint64_t> w;
  w.reserve(family.quotes.size());
  for (const auto& q : family.quotes) w.push_back(q.mentions);
  return entropy(w);
}

double entropy(const Family& family, const SubFamily& sub) {
  std::vector<std::uint64_t> w;
  w.reserve(sub.members.size());
  for (const std::size_t m : sub.members) w.push_back(family.quotes.at(m).mentions);
  return entropy(w);
}

std::vector<TermRecord> term_records(const Family& family, const subfam::EditGraph& graph) {
  const std::size_t n = family.quotes.size();
  std::vector<std::unordered_set<std::string>> token_sets(n);
  std::vector<textprep::TokenSeq> tokens(n);
  for (std::size_t i = 0; i < n; ++i) {
    tokens[i] = textprep::split_words(family.quotes[i].text);
    token_sets[i].insert(tokens[i].begin(), tokens[i].end());
  }
  std::vector<TermRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto nb = subfam::neighborhood_at(graph, i);
    const double total = neighborhood_mentions(family, nb);
    std::unordered_set<std::string_view> done;
    for (const auto& t : tokens[i]) {
      if (!done.insert(t).second) continue;
      double sharing = 0.0;
      for (const std::size_t m : nb.members) {
        if (token_sets[m].count(t)) sharing += static_cast<double>(family.quotes[m].mentions);
      }
      out.push_back({t, family.id, family.quotes[i].id, sharing / total,
                     static_cast<double>(family.quotes[i].mentions)});
    }
  }
  return out;
}

double term_stability(std::string_view term, std::span<const TermRecord> records) {
  double num = 0.0, den = 0.0;
  bool seen = false;
  for (const auto& r : records) {
    if (r.term != term) continue;
    seen = true;
    num += r.weight * r.value;
    den += r.weight;
  }
  if (!seen) throw DomainError("term '" + std::string(term) + "' does not occur in any quote");
  return num / den;
}

std::map<std::string, double> term_stabilities(std::span<const TermRecord> records) {
  return feature_stability(records, [](const TermRecord& r) { return r.term; });
}

std::vector<std::size_t> quantile_sizes(std::size_t n, std::size_t k) {
  if (k == 0) throw DomainError("quantile count must be positive");
  std::vector<std::size_t> sizes(k, n / k);
  for (std::size_t i = 0; i < n % k; ++i) ++sizes[i];
  return sizes;
}

BinnedCurve bin_quantiles(std::vector<Point> points, std::size_t k) {
  if (k == 0) throw DomainError("quantile count must be positive");
  if (points.size() < k) {
    throw DomainError("cannot split " + std::to_string(points.size()) + " points into " + std::to_string(k) +
                      " quantiles");
  }
  std::stable_sort(points.begin(), points.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
  BinnedCurve curve;
  curve.k = k;
  std::size_t begin = 0;
  for (const std::size_t size : quantile_sizes(points.size(), k)) {
    const std::span<const Point> group(points.data() + begin, size);
    begin += size;
    double sx = 0.0, sw = 0.0, swy = 0.0, sww = 0.0;
    for (const auto& p : group) {
      sx += p.x;
      sw += p.weight;
      swy += p.weight * p.y;
      sww += p.weight * p.weight;
    }
    Bin bin;
    bin.n = size;
    bin.x_mean = sx / static_cast<double>(size);
    if (sw > 0.0) {
      bin.y = swy / sw;
      double var = 0.0;
      for (const auto& p : group) var += p.weight * (p.y - bin.y) * (p.y - bin.y);
      var /= sw;
      // Kish effective sample size turns the weighted variance into a
      // standard error of the weighted mean.
      const double n_eff = sw * sw / sww;
      const double half = 1.959963984540054 * std::sqrt(var / n_eff);
      bin.ci_low = bin.y - half;
      bin.ci_high = bin.y + half;
    }
    curve.bins.push_back(bin);
  }
  return curve;
}

void write_curve_csv(std::ostream& out, const BinnedCurve& curve) {
  out << "x_mean,y,ci_low,ci_high,n\n";
  char line[160];
  for (const auto& b : curve.bins) {
    std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f,%.6f,%zu\n", b.x_mean, b.y, b.ci_low, b.ci_high, b.n);
    out << line;
  }
}

}  // namespace quotefam::metrics
