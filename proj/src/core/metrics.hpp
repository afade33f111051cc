#pragma once

// Term, quote and family level transformation measures, and the
// equally-populated quantile curves used to summarize them.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "core/communities.hpp"
#include "core/subfam.hpp"

namespace quotefam::metrics {

using communities::Family;
using subfam::Neighborhood;
using subfam::SubFamily;

// s(t|q): mention-weighted share of the neighborhood whose raw tokens
// contain t. DomainError if t is not a token of the neighborhood center.
double term_stability_in_quote(std::string_view term, const Family& family, const Neighborhood& nb);

// S(q) = w_q over the neighborhood's mentions.
double quote_stability(const Family& family, const Neighborhood& nb);

// Shannon entropy (nats) of a mention distribution; 0 log 0 = 0.
double entropy(std::span<const std::uint64_t> mentions);
double entropy(const Family& family);
double entropy(const Family& family, const SubFamily& sub);

struct StabilityRecord {
  double value = 0.0;
  double weight = 0.0;
};

// One s(t|q) observation.
struct TermRecord {
  std::string term;
  communities::FamilyId family = 0;
  corpus::QuoteId quote = 0;
  double value = 0.0;
  double weight = 0.0;  // w_q
};

// s(t|q) for every distinct raw token of every quote.
std::vector<TermRecord> term_records(const Family& family, const subfam::EditGraph& graph);

// s(t) as the w_q-weighted mean of s(t|q); DomainError for an unseen term.
double term_stability(std::string_view term, std::span<const TermRecord> records);

// s(t) for every term present in the records.
std::map<std::string, double> term_stabilities(std::span<const TermRecord> records);

// Weighted mean of record values grouped by key(record).
template <class Record, class KeyFn>
auto feature_stability(std::span<const Record> records, KeyFn key) {
  using Key = std::decay_t<decltype(key(records.front()))>;
  std::map<Key, std::pair<double, double>> sums;
  for (const auto& r : records) {
    auto& s = sums[key(r)];
    s.first += r.weight * r.value;
    s.second += r.weight;
  }
  std::map<Key, double> out;
  for (const auto& [k, s] : sums) out.emplace(k, s.second > 0.0 ? s.first / s.second : 0.0);
  return out;
}

struct Point {
  double x = 0.0;
  double y = 0.0;
  double weight = 1.0;
};

struct Bin {
  double x_mean = 0.0;
  double y = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;
};

struct BinnedCurve {
  std::size_t k = 0;
  std::vector<Bin> bins;
};

// Sorts by x (stable, so ties keep input order), splits into k contiguous
// groups whose sizes differ by at most one with the larger groups first,
// and reports the weighted mean of y with a 95% normal-approximation
// interval. DomainError if points.size() < k or k == 0.
BinnedCurve bin_quantiles(std::vector<Point> points, std::size_t k);

// Contiguous equally-populated groups: sizes of the k groups over n items.
std::vector<std::size_t> quantile_sizes(std::size_t n, std::size_t k);

// x_mean,y,ci_low,ci_high,n with six decimals.
void write_curve_csv(std::ostream& out, const BinnedCurve& curve);

}  // namespace quotefam::metrics
