#include "core/evalstats.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <string_view>
#include <unordered_map>

#include "core/error.hpp"
#include "core/random.hpp"

namespace quotefam::evalstats {

namespace {

struct Counts {
  std::uint64_t one_relevant = 0;
  std::uint64_t one_judged = 0;
  std::uint64_t two_relevant = 0;
};

void tally(const JudgedFamily& f, Counts& c) {
  for (const Mark m : f.list_one) {
    if (m == Mark::uncertain) continue;
    ++c.one_judged;
    if (m == Mark::relevant) ++c.one_relevant;
  }
  for (const Mark m : f.list_two) {
    if (m == Mark::relevant) ++c.two_relevant;
  }
}

PrecisionRecall from_counts(const Counts& c) {
  PrecisionRecall pr;
  pr.precision = static_cast<double>(c.one_relevant) / static_cast<double>(c.one_judged);
  const auto found = c.one_relevant + c.two_relevant;
  pr.relative_recall = found == 0 ? 0.0 : static_cast<double>(c.one_relevant) / static_cast<double>(found);
  const double s = pr.precision + pr.relative_recall;
  pr.f_measure = s > 0.0 ? 2.0 * pr.precision * pr.relative_recall / s : 0.0;
  return pr;
}

}  // namespace

PrecisionRecall precision_relative_recall(std::span<const JudgedFamily> judged) {
  Counts c;
  for (const auto& f : judged) tally(f, c);
  if (c.one_judged == 0) throw DomainError("no definite judgments in the first lists");
  return from_counts(c);
}

double cohen_kappa(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw DomainError("annotations differ in length");
  if (a.empty()) throw DomainError("no annotations");
  const double n = static_cast<double>(a.size());
  std::unordered_map<int, double> ma, mb;
  double agree = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma[a[i]] += 1.0;
    mb[b[i]] += 1.0;
    if (a[i] == b[i]) agree += 1.0;
  }
  const double po = agree / n;
  double pe = 0.0;
  for (const auto& [label, count] : ma) {
    const auto it = mb.find(label);
    if (it != mb.end()) pe += (count / n) * (it->second / n);
  }
  if (pe >= 1.0) return 1.0;
  return (po - pe) / (1.0 - pe);
}

double approx_randomization_test(std::span<const double> a, std::span<const double> b, std::size_t iterations,
                                 std::uint64_t seed) {
  if (a.size() != b.size()) throw DomainError("paired scores differ in length");
  if (a.empty()) throw DomainError("no paired scores");
  if (iterations < 100) throw DomainError("at least 100 iterations are required");
  const std::size_t m = a.size();
  std::vector<double> diff(m);
  double observed = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    diff[i] = a[i] - b[i];
    observed += diff[i];
  }
  observed = std::abs(observed) / static_cast<double>(m);
  Rng rng(seed);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < iterations; ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; i += 64) {
      std::uint64_t bits = rng.next();
      const std::size_t end = std::min(m, i + 64);
      for (std::size_t j = i; j < end; ++j, bits >>= 1) s += (bits & 1u) ? -diff[j] : diff[j];
    }
    if (std::abs(s) / static_cast<double>(m) >= observed - 1e-12) ++hits;
  }
  return static_cast<double>(hits + 1) / static_cast<double>(iterations + 1);
}

namespace {

std::optional<Mark> parse_mark(std::string_view s) {
  if (s == "relevant" || s == "1" || s == "yes") return Mark::relevant;
  if (s == "not_relevant" || s == "0" || s == "no") return Mark::not_relevant;
  if (s == "uncertain" || s == "?") return Mark::uncertain;
  return std::nullopt;
}

}  // namespace

std::vector<JudgmentRow> parse_judgments(std::istream& in) {
  std::vector<JudgmentRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 4) throw FormatError("judgment rows need 4 columns", lineno);
    JudgmentRow row;
    row.family_id = cols[0];
    if (cols[1] == "1") {
      row.list = 1;
    } else if (cols[1] == "2") {
      row.list = 2;
    } else {
      throw FormatError("judgment list must be 1 or 2", lineno);
    }
    row.quote_text = cols[2];
    const auto mark = parse_mark(cols[3]);
    if (!mark) throw FormatError("unknown judgment mark '" + cols[3] + "'", lineno);
    row.mark = *mark;
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw IoError("failed reading judgments");
  return rows;
}

std::vector<JudgedFamily> group_judgments(std::span<const JudgmentRow> rows) {
  std::vector<JudgedFamily> out;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto& r : rows) {
    auto [it, inserted] = slot.emplace(r.family_id, out.size());
    if (inserted) out.push_back({r.family_id, {}, {}});
    auto& f = out[it->second];
    (r.list == 1 ? f.list_one : f.list_two).push_back(r.mark);
  }
  return out;
}

std::map<std::string, double> family_f_scores(std::span<const JudgedFamily> judged) {
  std::map<std::string, double> out;
  for (const auto& f : judged) {
    Counts c;
    tally(f, c);
    out[f.family_id] = c.one_judged == 0 ? 0.0 : from_counts(c).f_measure;
  }
  return out;
}

}  // namespace quotefam::evalstats
