#include "core/mutation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include <Eigen/Dense>
#include <boost/math/special_functions/beta.hpp>

#include "core/error.hpp"
#include "core/textprep.hpp"

namespace quotefam::mutation {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::copy: return "copy";
    case EventKind::micro: return "micro";
    case EventKind::macro: return "macro";
  }
  return "copy";
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
  if (text == "copy") return EventKind::copy;
  if (text == "micro") return EventKind::micro;
  if (text == "macro") return EventKind::macro;
  return std::nullopt;
}

StaticRates static_rates(const Family& family, std::span<const SubFamily> subs) {
  StaticRates out;
  out.micro.reserve(subs.size());
  for (const auto& sf : subs) {
    if (sf.total_mentions < 2) {
      out.micro.emplace_back();
    } else {
      out.micro.emplace_back(static_cast<double>(sf.members.size() - 1) /
                             static_cast<double>(sf.total_mentions - 1));
    }
  }
  const auto total = family.total_mentions();
  if (total >= 2 && !subs.empty()) {
    out.macro = static_cast<double>(subs.size() - 1) / static_cast<double>(total - 1);
  }
  return out;
}

std::vector<std::size_t> mention_order(const Family& family) {
  const auto& qs = family.quotes;
  const bool timed = !qs.empty() && std::all_of(qs.begin(), qs.end(), [](const corpus::Quote& q) {
    return q.timestamps.size() == q.mentions;
  });
  std::vector<std::size_t> order;
  if (timed) {
    std::vector<std::pair<corpus::Timestamp, std::size_t>> stamped;
    for (std::size_t i = 0; i < qs.size(); ++i) {
      for (const auto ts : qs[i].timestamps) stamped.emplace_back(ts, i);
    }
    // Quotes sit in ascending id order, so the local index breaks ties by id.
    std::sort(stamped.begin(), stamped.end());
    order.reserve(stamped.size());
    for (const auto& s : stamped) order.push_back(s.second);
    return order;
  }
  std::vector<std::size_t> versions(qs.size());
  std::iota(versions.begin(), versions.end(), std::size_t{0});
  std::stable_sort(versions.begin(), versions.end(),
                   [&](std::size_t a, std::size_t b) { return qs[a].mentions > qs[b].mentions; });
  for (const std::size_t v : versions) order.insert(order.end(), qs[v].mentions, v);
  return order;
}

namespace {

bool contains_run(std::span<const std::string> hay, std::span<const std::string> needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace

std::vector<MutationEvent> replay_family(const Family& family, std::span<const SubFamily> subs,
                                         std::span<const std::size_t> order) {
  const std::size_t n = family.quotes.size();
  if (n == 0) throw DomainError("cannot replay an empty family");
  std::vector<std::uint64_t> count(n, 0);
  for (const std::size_t q : order) {
    if (q >= n) throw DomainError("mention order refers to an unknown version");
    ++count[q];
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (count[i] != family.quotes[i].mentions) throw DomainError("mention order does not match mention counts");
  }
  const auto labels = subfam::subfamily_labels(subs, n);
  std::vector<textprep::TokenSeq> tokens(n);
  for (std::size_t i = 0; i < n; ++i) tokens[i] = textprep::split_words(family.quotes[i].text);

  std::vector<std::uint64_t> seen_mentions(n, 0);
  std::vector<std::size_t> seen_versions;
  struct SubState {
    std::uint64_t mentions = 0;
    std::size_t versions = 0;
    double length_sum = 0.0;
  };
  std::vector<SubState> sub(subs.size());
  SubState fam;

  auto macro_source = [&](std::size_t q) -> std::uint32_t {
    // A trimmed version most plausibly comes from a seen version containing
    // it; the most mentioned such sub-family wins, then the smaller id.
    std::optional<std::uint32_t> best;
    auto better = [&](std::uint32_t s) {
      return !best || sub[s].mentions > sub[*best].mentions || (sub[s].mentions == sub[*best].mentions && s < *best);
    };
    for (const std::size_t v : seen_versions) {
      if (contains_run(tokens[v], tokens[q]) && better(labels[v])) best = labels[v];
    }
    if (best) return *best;
    for (std::uint32_t s = 0; s < sub.size(); ++s) {
      if (sub[s].versions > 0 && better(s)) best = s;
    }
    return *best;
  };

  std::vector<MutationEvent> events;
  events.reserve(order.empty() ? 0 : order.size() - 1);
  for (std::size_t t = 0; t < order.size(); ++t) {
    const std::size_t q = order[t];
    const std::uint32_t s = labels[q];
    const bool fresh = seen_mentions[q] == 0;
    if (t > 0) {
      MutationEvent ev;
      ev.family = family.id;
      ev.time = t;
      ev.subfamily = s;
      if (!fresh) {
        ev.kind = EventKind::copy;
        ev.source = s;
      } else if (sub[s].versions > 0) {
        ev.kind = EventKind::micro;
        ev.source = s;
      } else {
        ev.kind = EventKind::macro;
        ev.source = macro_source(q);
      }
      const auto& src = sub[ev.source];
      ev.n = src.mentions;
      ev.l = src.length_sum / static_cast<double>(src.versions);
      ev.n_family = fam.mentions;
      ev.l_family = fam.length_sum / static_cast<double>(fam.versions);
      events.push_back(ev);
    }
    ++seen_mentions[q];
    ++sub[s].mentions;
    ++fam.mentions;
    if (fresh) {
      seen_versions.push_back(q);
      const double len = static_cast<double>(tokens[q].size());
      ++sub[s].versions;
      sub[s].length_sum += len;
      ++fam.versions;
      fam.length_sum += len;
    }
  }
  return events;
}

std::vector<MutationEvent> replay_family(const Family& family, std::size_t max_edit) {
  const auto graph = subfam::build_edit_graph(family, max_edit);
  const auto subs = subfam::subfamilies(graph, family);
  const auto order = mention_order(family);
  return replay_family(family, subs, order);
}

std::pair<double, double> proportion_ci(std::uint64_t successes, std::uint64_t trials, bool exact) {
  if (trials == 0) throw DomainError("proportion of zero trials");
  if (successes > trials) throw DomainError("more successes than trials");
  const double x = static_cast<double>(successes), n = static_cast<double>(trials);
  if (exact) {
    const double lo = successes == 0 ? 0.0 : boost::math::ibeta_inv(x, n - x + 1.0, 0.025);
    const double hi = successes == trials ? 1.0 : boost::math::ibeta_inv(x + 1.0, n - x, 0.975);
    return {lo, hi};
  }
  const double p = x / n;
  const double half = 1.959963984540054 * std::sqrt(p * (1.0 - p) / n);
  return {std::max(0.0, p - half), std::min(1.0, p + half)};
}

metrics::BinnedCurve binned_rates(std::span<const MutationEvent> events, Covariate covariate, EventKind kind,
                                  const BinOptions& options) {
  if (events.empty()) throw DomainError("no events to bin");
  if (options.k == 0) throw DomainError("quantile count must be positive");
  auto value = [covariate](const MutationEvent& e) {
    switch (covariate) {
      case Covariate::n: return static_cast<double>(e.n);
      case Covariate::l: return e.l;
      case Covariate::n_family: return static_cast<double>(e.n_family);
      case Covariate::l_family: return e.l_family;
    }
    return 0.0;
  };
  std::vector<std::pair<double, bool>> points;
  points.reserve(events.size());
  for (const auto& e : events) points.emplace_back(value(e), e.kind == kind);
  std::stable_sort(points.begin(), points.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  metrics::BinnedCurve curve;
  curve.k = std::min(options.k, points.size());
  std::size_t begin = 0;
  for (const std::size_t size : metrics::quantile_sizes(points.size(), curve.k)) {
    double sx = 0.0;
    std::uint64_t hits = 0;
    for (std::size_t i = begin; i < begin + size; ++i) {
      sx += points[i].first;
      hits += points[i].second ? 1 : 0;
    }
    begin += size;
    metrics::Bin bin;
    bin.n = size;
    bin.x_mean = sx / static_cast<double>(size);
    bin.y = static_cast<double>(hits) / static_cast<double>(size);
    std::tie(bin.ci_low, bin.ci_high) = proportion_ci(hits, size, options.exact_ci);
    curve.bins.push_back(bin);
  }
  return curve;
}

void write_events_csv(std::ostream& out, std::span<const MutationEvent> events) {
  out << "family_id,kind,n,l,n_family,l_family,subfamily_id,source_subfamily_id,time\n";
  char line[256];
  for (const auto& e : events) {
    std::snprintf(line, sizeof line, "%u,%s,%llu,%.6f,%llu,%.6f,%u,%u,%llu\n", e.family, to_string(e.kind).data(),
                  static_cast<unsigned long long>(e.n), e.l, static_cast<unsigned long long>(e.n_family), e.l_family,
                  e.subfamily, e.source, static_cast<unsigned long long>(e.time));
    out << line;
  }
}

std::string_view to_string(FitForm form) {
  switch (form) {
    case FitForm::power_law: return "power_law";
    case FitForm::exp_saturation: return "exp_saturation";
    case FitForm::peak_decay: return "peak_decay";
    case FitForm::constant: return "constant";
  }
  return "constant";
}

std::optional<FitForm> parse_fit_form(std::string_view text) {
  for (const auto f : {FitForm::power_law, FitForm::exp_saturation, FitForm::peak_decay, FitForm::constant}) {
    if (text == to_string(f)) return f;
  }
  return std::nullopt;
}

double RateCurveFit::raw(double x) const {
  auto p = [this](std::size_t i) { return i < params.size() ? params[i] : 0.0; };
  switch (form) {
    case FitForm::power_law: return p(0) * std::pow(x, -p(1));
    case FitForm::exp_saturation: return p(0) - p(1) * std::exp(-p(2) * x);
    case FitForm::peak_decay: return p(0) + p(1) * (x - 5.0) * std::exp(-p(2) * x);
    case FitForm::constant: return p(0);
  }
  return 0.0;
}

double RateCurveFit::operator()(double x) const {
  const double v = raw(x);
  if (!(v > 0.0)) return 0.0;
  return std::min(v, 1.0);
}

RateCurveFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("power-law fit: x and y differ in length");
  const std::size_t m = x.size();
  std::vector<double> lx(m), ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("power-law fit needs positive x and y");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  if (m < 2) throw DomainError("power-law fit needs at least two points");
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(m);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("power-law fit needs at least two distinct x");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  RateCurveFit fit;
  fit.form = FitForm::power_law;
  fit.params = {std::exp(intercept), -slope};
  for (std::size_t i = 0; i < m; ++i) {
    const double r = ly[i] - (intercept + slope * lx[i]);
    fit.rss += r * r;
  }
  return fit;
}

namespace {

std::vector<double> curve_x(const metrics::BinnedCurve& c) {
  std::vector<double> v;
  for (const auto& b : c.bins) v.push_back(b.x_mean);
  return v;
}

std::vector<double> curve_y(const metrics::BinnedCurve& c) {
  std::vector<double> v;
  for (const auto& b : c.bins) v.push_back(b.y);
  return v;
}

using Params = std::array<double, 3>;

class LengthModel {
 public:
  LengthModel(std::span<const double> x, std::span<const double> y, FitForm form) : x_(x), y_(y), form_(form) {}

  double shape(double x, double e) const {
    const double E = std::exp(-e * x);
    return form_ == FitForm::exp_saturation ? -E : (x - 5.0) * E;
  }

  double value(const Params& p, double x) const { return p[0] + p[1] * shape(x, p[2]); }

  double rss(const Params& p) const {
    double s = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const double r = y_[i] - value(p, x_[i]);
      s += r * r;
    }
    return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
  }

  // c and d enter linearly, so each has a closed-form coordinate optimum.
  void coordinate_descent(Params& p, std::size_t sweeps) const {
    const std::size_t m = x_.size();
    double current = rss(p);
    for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
      double sum = 0.0;
      for (std::size_t i = 0; i < m; ++i) sum += y_[i] - p[1] * shape(x_[i], p[2]);
      p[0] = sum / static_cast<double>(m);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double h = shape(x_[i], p[2]);
        num += h * (y_[i] - p[0]);
        den += h * h;
      }
      if (den > 0.0) p[1] = num / den;
      line_search_rate(p);
      const double next = rss(p);
      if (current - next <= 1e-15 * std::max(1.0, current)) break;
      current = next;
    }
  }

  // Golden-section search for the decay rate on a log-scale bracket.
  void line_search_rate(Params& p) const {
    const double center = std::log(std::max(std::abs(p[2]), 1e-6));
    const double sign = p[2] < 0.0 ? -1.0 : 1.0;
    auto f = [&](double u) {
      Params q = p;
      q[2] = sign * std::exp(u);
      return rss(q);
    };
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = center - 2.0, b = center + 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 60; ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = f(d);
      }
    }
    const double u = 0.5 * (a + b);
    if (f(u) < rss(p)) p[2] = sign * std::exp(u);
  }

  // Levenberg-Marquardt. Returns true when the proposed step falls below the
  // relative tolerance.
  bool refine(Params& p, const NonlinearOptions& opt) const {
    const std::size_t m = x_.size();
    Eigen::MatrixXd J(static_cast<Eigen::Index>(m), 3);
    Eigen::VectorXd r(static_cast<Eigen::Index>(m));
    double lambda = 1e-3;
    double current = rss(p);
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
      for (std::size_t i = 0; i < m; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const double xi = x_[i];
        const double E = std::exp(-p[2] * xi);
        r(row) = y_[i] - value(p, xi);
        J(row, 0) = 1.0;
        if (form_ == FitForm::exp_saturation) {
          J(row, 1) = -E;
          J(row, 2) = p[1] * xi * E;
        } else {
          J(row, 1) = (xi - 5.0) * E;
          J(row, 2) = -p[1] * (xi - 5.0) * xi * E;
        }
      }
      const Eigen::Matrix3d A = J.transpose() * J;
      const Eigen::Vector3d g = J.transpose() * r;
      const double scale = std::max(A.diagonal().maxCoeff(), 1e-300);
      Eigen::Matrix3d damped = A;
      for (int k = 0; k < 3; ++k) damped(k, k) += lambda * (A(k, k) + 1e-12 * scale);
      const Eigen::Vector3d step = damped.ldlt().solve(g);
      const double pnorm = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
      if (!step.allFinite()) return false;
      if (step.norm() <= opt.step_tolerance * (pnorm + opt.step_tolerance)) return true;
      const Params trial = {p[0] + step(0), p[1] + step(1), p[2] + step(2)};
      const double next = rss(trial);
      if (next < current) {
        p = trial;
        current = next;
        lambda = std::max(lambda / 10.0, 1e-12);
      } else {
        lambda *= 10.0;
        if (lambda > 1e20) return true;
      }
    }
    return false;
  }

 private:
  std::span<const double> x_;
  std::span<const double> y_;
  FitForm form_;
};

}  // namespace

RateCurveFit fit_power_law(const metrics::BinnedCurve& curve) {
  const auto x = curve_x(curve);
  const auto y = curve_y(curve);
  return fit_power_law(x, y);
}

RateCurveFit fit_length_form(std::span<const double> x, std::span<const double> y, FitForm form,
                             const NonlinearOptions& options) {
  if (form != FitForm::exp_saturation && form != FitForm::peak_decay) {
    throw DomainError("length fit needs exp_saturation or peak_decay");
  }
  if (x.size() != y.size()) throw DomainError("length fit: x and y differ in length");
  if (x.size() < 3) throw DomainError("length fit needs at least three points");
  const LengthModel model(x, y, form);

  struct Result {
    Params p;
    double rss;
    bool converged;
  };
  std::optional<Result> best, best_any;
  auto better = [](const Result& a, const std::optional<Result>& b) {
    return !b || a.rss < b->rss || (a.rss == b->rss && a.p < b->p);
  };
  for (const double c : {0.0, 0.01, 0.05}) {
    for (const double d : {-0.5, -0.1, -0.01, 0.01, 0.1, 0.5}) {
      for (const double e : {0.1, 0.5, 1.0}) {
        Params p = {c, d, e};
        model.coordinate_descent(p, 20);
        const bool ok = model.refine(p, options);
        const Result res{p, model.rss(p), ok};
        if (!std::isfinite(res.rss)) continue;
        if (better(res, best_any)) best_any = res;
        if (ok && better(res, best)) best = res;
      }
    }
  }
  RateCurveFit fit;
  fit.form = form;
  if (!best) {
    if (best_any) {
      fit.params.assign(best_any->p.begin(), best_any->p.end());
      fit.rss = best_any->rss;
    }
    fit.converged = false;
    throw FitError("nonlinear fit did not converge from any start", fit);
  }
  fit.params.assign(best->p.begin(), best->p.end());
  fit.rss = best->rss;
  return fit;
}

RateCurveFit fit_length_form(const metrics::BinnedCurve& curve, FitForm form, const NonlinearOptions& options) {
  const auto x = curve_x(curve);
  const auto y = curve_y(curve);
  return fit_length_form(x, y, form, options);
}

}  // namespace quotefam::mutation
