#pragma once

// Urn-style generative model of family growth: copy one version, possibly
// mutating it one word at a time (micro) or trimming it into a new
// sub-family (macro).

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "core/communities.hpp"
#include "core/metrics.hpp"
#include "core/mutation.hpp"
#include "core/random.hpp"

namespace quotefam::morphsim {

using mutation::EventKind;
using mutation::RateCurveFit;

enum class Channel { micro, macro };

struct ChannelModel {
  RateCurveFit by_length;
  RateCurveFit by_mentions;
  double mean_rate = 1.0;  // <rho>
};

struct RateModel {
  ChannelModel micro;
  ChannelModel macro;
  std::size_t min_trim_len = 5;
  std::size_t max_edit = 1;  // validity radius used to keep sub-families apart

  const ChannelModel& channel(Channel c) const { return c == Channel::micro ? micro : macro; }
};

// Published curves; <rho> of each channel is its length curve at l = 10.
RateModel published_model();
// rho = c for both covariates and <rho> = c.
RateModel constant_model(double micro_rate, double macro_rate);
// Every rate zero.
RateModel zero_model();

// rho(l) rho(n) / <rho>, each curve clamped to [0, 1] and the product as well.
// ConfigError when <rho> is not positive.
double combined_rate(const RateModel& model, Channel channel, double l, double n);

struct SimQuote {
  std::vector<std::uint32_t> tokens;
  std::uint64_t mentions = 0;
  std::uint32_t subfamily = 0;
  std::uint32_t parent = 0;  // index of the version it was derived from (itself for the seed)
};

struct SimEvent {
  EventKind kind = EventKind::copy;
  std::uint64_t time = 0;      // step index, the seed mention being time 0
  std::uint32_t chosen = 0;    // version picked in step 1
  std::uint32_t produced = 0;  // version receiving the mention
  std::uint32_t subfamily = 0;  // sub-family of the chosen version
  std::uint64_t n = 0;
  double l = 0.0;
  bool rejected = false;  // a mutation was drawn but every candidate clashed
};

struct SimFamily {
  std::vector<SimQuote> quotes;
  std::vector<std::vector<std::uint32_t>> subfamilies;  // version indices
  std::vector<std::uint64_t> subfamily_mentions;
  std::vector<SimEvent> events;
  std::uint64_t total_mentions = 0;
  std::uint64_t seed = 0;
  std::uint32_t next_token = 0;

  // One version of l tokens with a single mention.
  static SimFamily seeded(std::size_t l0, std::uint64_t seed);

  // Text rendering "t<id> t<id> ..." and a Family whose mention timestamps
  // are the step indices, for replaying through the mutation module.
  communities::Family to_family(communities::FamilyId id) const;
};

// One urn step; appends and returns the event.
SimEvent step(SimFamily& family, const RateModel& model, Rng& rng);

// DomainError unless l0 >= 1 and N >= 1.
SimFamily simulate_family(std::size_t l0, std::uint64_t N, const RateModel& model, std::uint64_t seed);

struct Target {
  std::size_t l0 = 0;
  std::uint64_t mentions = 0;
};

struct TargetOptions {
  std::uint64_t min_mentions = 5;     // x_min of the mention power law
  double exponent = 2.0;              // density exponent alpha > 1
  std::uint64_t max_mentions = 10000;
  std::size_t min_length = 8;
  std::size_t max_length = 40;
};

// Mention budgets N = floor(x_min * u^(-1/(alpha-1))) capped at max_mentions,
// seed lengths uniform in [min_length, max_length].
std::vector<Target> power_law_targets(std::size_t count, std::uint64_t seed, const TargetOptions& options = {});

struct SizeCount {
  std::uint64_t size = 0;
  std::uint64_t count = 0;
};

struct SimSummary {
  std::uint64_t n_families = 0;
  std::uint64_t n_versions = 0;
  std::uint64_t n_subfamilies = 0;
  std::uint64_t rejected = 0;
  std::vector<SizeCount> subfamily_size_histogram;  // size = sub-family mentions
  std::vector<SizeCount> subfamily_versions_histogram;
  metrics::BinnedCurve family_entropy;     // vs family mentions
  metrics::BinnedCurve subfamily_entropy;  // vs sub-family mentions
};

struct SimCorpus {
  std::vector<SimFamily> families;
  SimSummary summary;
};

// Family i uses derive_seed(seed, i). Entropy curves use `quantiles` bins,
// clipped to the number of families / sub-families.
SimCorpus simulate_corpus(std::span<const Target> targets, const RateModel& model, std::uint64_t seed,
                          std::size_t quantiles = 10, std::size_t threads = 0);

double family_entropy(const SimFamily& family);
double subfamily_entropy(const SimFamily& family, std::size_t sub);

}  // namespace quotefam::morphsim
