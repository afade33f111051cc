#pragma once

// Micro and macro mutation rates: static estimates from family composition,
// dynamic estimates from replaying family growth, and parametric fits.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "core/communities.hpp"
#include "core/metrics.hpp"
#include "core/subfam.hpp"

namespace quotefam::mutation {

using communities::Family;
using communities::FamilyId;
using subfam::SubFamily;

enum class EventKind { copy, micro, macro };

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view text);

struct MutationEvent {
  FamilyId family = 0;
  EventKind kind = EventKind::copy;
  std::uint64_t time = 0;         // position in the family's mention order
  std::uint32_t subfamily = 0;    // sub-family of the mentioned version
  std::uint32_t source = 0;       // sub-family the event is attributed to
  // State strictly before the event. n/l describe the source sub-family,
  // n_family/l_family the whole family; l is the mean token count of the
  // versions seen so far.
  std::uint64_t n = 0;
  double l = 0.0;
  std::uint64_t n_family = 0;
  double l_family = 0.0;
};

struct StaticRates {
  std::vector<std::optional<double>> micro;  // per sub-family, absent when mentions < 2
  std::optional<double> macro;               // absent when family mentions < 2
};

StaticRates static_rates(const Family& family, std::span<const SubFamily> subs);

// Local quote index of every mention in replay order. With timestamps on
// every quote, mentions are ordered by (timestamp, quote id). Otherwise the
// fallback lists versions by descending mentions (ties by id), each
// version's mentions contiguously.
std::vector<std::size_t> mention_order(const Family& family);

// DomainError for an empty family or an order inconsistent with the
// mention counts.
std::vector<MutationEvent> replay_family(const Family& family, std::span<const SubFamily> subs,
                                         std::span<const std::size_t> order);
std::vector<MutationEvent> replay_family(const Family& family, std::size_t max_edit = 1);

enum class Covariate { n, l, n_family, l_family };

struct BinOptions {
  std::size_t k = 15;
  bool exact_ci = false;  // Clopper-Pearson instead of the normal approximation
};

// Rate of `kind` among all events, per equally-populated quantile of the
// covariate. Bins are clipped to the number of events when there are fewer.
metrics::BinnedCurve binned_rates(std::span<const MutationEvent> events, Covariate covariate, EventKind kind,
                                  const BinOptions& options = {});

// 95% interval for a binomial proportion.
std::pair<double, double> proportion_ci(std::uint64_t successes, std::uint64_t trials, bool exact);

// events dump
void write_events_csv(std::ostream& out, std::span<const MutationEvent> events);

enum class FitForm {
  power_law,       // a * x^-b
  exp_saturation,  // c - d * exp(-e x)
  peak_decay,      // c + d * (x - 5) * exp(-e x)
  constant,        // c
};

std::string_view to_string(FitForm form);
std::optional<FitForm> parse_fit_form(std::string_view text);

struct RateCurveFit {
  FitForm form = FitForm::constant;
  std::vector<double> params;
  double rss = 0.0;
  bool converged = true;

  double raw(double x) const;
  // raw(x) clamped to [0, 1]
  double operator()(double x) const;
};

class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, RateCurveFit best) : std::runtime_error(what), best_(std::move(best)) {}
  const RateCurveFit& best() const noexcept { return best_; }

 private:
  RateCurveFit best_;
};

// Closed-form least squares of ln y on ln x; rss in log space.
// DomainError on non-positive x or y or fewer than two distinct x.
RateCurveFit fit_power_law(std::span<const double> x, std::span<const double> y);
RateCurveFit fit_power_law(const metrics::BinnedCurve& curve);

struct NonlinearOptions {
  std::size_t max_iterations = 200;
  double step_tolerance = 1e-10;
};

// Three-parameter nonlinear least squares from a grid of starting points,
// each refined by coordinate descent and then damped Gauss-Newton. The best
// start wins by rss, then by lexicographic parameter order. FitError when no
// start converges.
RateCurveFit fit_length_form(std::span<const double> x, std::span<const double> y, FitForm form,
                             const NonlinearOptions& options = {});
RateCurveFit fit_length_form(const metrics::BinnedCurve& curve, FitForm form, const NonlinearOptions& options = {});

}  // namespace quotefam::mutation
