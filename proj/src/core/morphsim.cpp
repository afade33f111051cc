#include "core/morphsim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/subfam.hpp"

namespace quotefam::morphsim {

namespace {

constexpr int kMaxRedraws = 16;

RateCurveFit curve(mutation::FitForm form, std::vector<double> params) {
  RateCurveFit f;
  f.form = form;
  f.params = std::move(params);
  return f;
}

ChannelModel constant_channel(double rate) {
  ChannelModel c;
  c.by_length = curve(mutation::FitForm::constant, {rate});
  c.by_mentions = curve(mutation::FitForm::constant, {rate});
  c.mean_rate = rate;
  return c;
}

}  // namespace

RateModel published_model() {
  using mutation::FitForm;
  RateModel m;
  m.micro.by_mentions = curve(FitForm::power_law, {0.057, 0.739});
  m.micro.by_length = curve(FitForm::peak_decay, {0.004, 0.046, 0.423});
  m.macro.by_mentions = curve(FitForm::power_law, {0.225, 0.763});
  m.macro.by_length = curve(FitForm::exp_saturation, {0.020, 0.292, 0.499});
  m.micro.mean_rate = m.micro.by_length(10.0);
  m.macro.mean_rate = m.macro.by_length(10.0);
  return m;
}

RateModel constant_model(double micro_rate, double macro_rate) {
  RateModel m;
  m.micro = constant_channel(micro_rate);
  m.macro = constant_channel(macro_rate);
  // A zero channel never fires; keep the divisor positive.
  if (micro_rate <= 0.0) m.micro.mean_rate = 1.0;
  if (macro_rate <= 0.0) m.macro.mean_rate = 1.0;
  return m;
}

RateModel zero_model() { return constant_model(0.0, 0.0); }

double combined_rate(const RateModel& model, Channel channel, double l, double n) {
  const auto& c = model.channel(channel);
  if (!(c.mean_rate > 0.0)) {
    throw ConfigError(channel == Channel::micro ? "micro.mean_rate" : "macro.mean_rate", "must be positive");
  }
  const double rho = c.by_length(l) * c.by_mentions(n) / c.mean_rate;
  return std::clamp(rho, 0.0, 1.0);
}

SimFamily SimFamily::seeded(std::size_t l0, std::uint64_t seed) {
  if (l0 < 1) throw DomainError("seed length must be at least 1");
  SimFamily f;
  f.seed = seed;
  SimQuote q;
  q.tokens.resize(l0);
  for (std::size_t i = 0; i < l0; ++i) q.tokens[i] = static_cast<std::uint32_t>(i);
  q.mentions = 1;
  f.next_token = static_cast<std::uint32_t>(l0);
  f.quotes.push_back(std::move(q));
  f.subfamilies.push_back({0});
  f.subfamily_mentions.push_back(1);
  f.total_mentions = 1;
  return f;
}

communities::Family SimFamily::to_family(communities::FamilyId id) const {
  communities::Family fam;
  fam.id = id;
  fam.quotes.resize(quotes.size());
  for (std::size_t v = 0; v < quotes.size(); ++v) {
    auto& q = fam.quotes[v];
    q.id = static_cast<corpus::QuoteId>(v);
    q.mentions = quotes[v].mentions;
    for (std::size_t i = 0; i < quotes[v].tokens.size(); ++i) {
      if (i) q.text += ' ';
      q.text += 't';
      q.text += std::to_string(quotes[v].tokens[i]);
    }
  }
  fam.quotes[0].timestamps.push_back(corpus::Timestamp{});
  for (const auto& e : events) {
    fam.quotes[e.produced].timestamps.push_back(corpus::Timestamp{std::chrono::seconds(e.time)});
  }
  return fam;
}

namespace {

std::size_t pick_version(const SimFamily& f, std::uint32_t sub, Rng& rng) {
  std::uint64_t r = rng.below(f.subfamily_mentions[sub]);
  for (const std::uint32_t v : f.subfamilies[sub]) {
    if (r < f.quotes[v].mentions) return v;
    r -= f.quotes[v].mentions;
  }
  return f.subfamilies[sub].back();
}

std::vector<std::uint32_t> micro_candidate(const std::vector<std::uint32_t>& src, std::uint32_t fresh, Rng& rng) {
  const std::size_t l = src.size();
  const std::uint64_t ops = l > 1 ? 3 : 2;
  std::vector<std::uint32_t> out = src;
  switch (rng.below(ops)) {
    case 0:  // insert
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(rng.below(l + 1)), fresh);
      break;
    case 1:  // substitute
      out[rng.below(l)] = fresh;
      break;
    default:  // delete
      out.erase(out.begin() + static_cast<std::ptrdiff_t>(rng.below(l)));
      break;
  }
  return out;
}

std::vector<std::uint32_t> trim_candidate(const std::vector<std::uint32_t>& src, std::size_t min_len, Rng& rng) {
  const std::size_t l = src.size();
  const std::size_t len = static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(min_len),
                                                               static_cast<std::int64_t>(l - 2)));
  const std::size_t start = rng.below(l - len + 1);
  return {src.begin() + static_cast<std::ptrdiff_t>(start),
          src.begin() + static_cast<std::ptrdiff_t>(start + len)};
}

// A micro product must be new and must not come within the edit radius of
// another sub-family; a macro product must not come within it of anything.
bool acceptable(const SimFamily& f, const std::vector<std::uint32_t>& cand, std::optional<std::uint32_t> home,
                std::size_t radius) {
  for (const auto& q : f.quotes) {
    const std::size_t limit = home && q.subfamily == *home ? 0 : radius;
    if (subfam::bounded_edit_distance<std::uint32_t>(cand, q.tokens, limit) <= limit) return false;
  }
  return true;
}

}  // namespace

SimEvent step(SimFamily& f, const RateModel& model, Rng& rng) {
  if (f.quotes.empty()) throw DomainError("cannot step an empty family");
  SimEvent ev;
  ev.time = f.total_mentions;
  ev.subfamily = static_cast<std::uint32_t>(rng.below(f.subfamilies.size()));
  ev.chosen = static_cast<std::uint32_t>(pick_version(f, ev.subfamily, rng));
  ev.produced = ev.chosen;
  const auto& chosen_tokens = f.quotes[ev.chosen].tokens;
  const std::size_t l = chosen_tokens.size();
  ev.l = static_cast<double>(l);

  auto add_version = [&](std::vector<std::uint32_t> tokens, std::uint32_t sub) {
    SimQuote q;
    q.tokens = std::move(tokens);
    q.mentions = 0;
    q.subfamily = sub;
    q.parent = ev.chosen;
    f.quotes.push_back(std::move(q));
    const auto v = static_cast<std::uint32_t>(f.quotes.size() - 1);
    f.subfamilies[sub].push_back(v);
    return v;
  };

  bool done = false;
  const std::uint64_t n_sub = f.subfamily_mentions[ev.subfamily];
  const double p_micro = combined_rate(model, Channel::micro, ev.l, static_cast<double>(n_sub));
  if (rng.bernoulli(p_micro)) {
    ev.n = n_sub;
    for (int attempt = 0; attempt < kMaxRedraws && !done; ++attempt) {
      auto cand = micro_candidate(chosen_tokens, f.next_token, rng);
      if (!acceptable(f, cand, ev.subfamily, model.max_edit)) continue;
      ++f.next_token;
      ev.kind = EventKind::micro;
      ev.produced = add_version(std::move(cand), ev.subfamily);
      done = true;
    }
    if (!done) ev.rejected = true;
  } else if (l >= model.min_trim_len + 2) {
    const double p_macro = combined_rate(model, Channel::macro, ev.l, static_cast<double>(f.total_mentions));
    if (rng.bernoulli(p_macro)) {
      ev.n = f.total_mentions;
      for (int attempt = 0; attempt < kMaxRedraws && !done; ++attempt) {
        auto cand = trim_candidate(chosen_tokens, model.min_trim_len, rng);
        if (!acceptable(f, cand, std::nullopt, model.max_edit)) continue;
        const auto sub = static_cast<std::uint32_t>(f.subfamilies.size());
        f.subfamilies.emplace_back();
        f.subfamily_mentions.push_back(0);
        ev.kind = EventKind::macro;
        ev.produced = add_version(std::move(cand), sub);
        done = true;
      }
      if (!done) ev.rejected = true;
    }
  }
  if (!done) {
    ev.kind = EventKind::copy;
    ev.n = n_sub;
  }
  ++f.quotes[ev.produced].mentions;
  ++f.subfamily_mentions[f.quotes[ev.produced].subfamily];
  ++f.total_mentions;
  f.events.push_back(ev);
  return ev;
}

SimFamily simulate_family(std::size_t l0, std::uint64_t N, const RateModel& model, std::uint64_t seed) {
  if (N < 1) throw DomainError("mention budget must be at least 1");
  SimFamily f = SimFamily::seeded(l0, seed);
  Rng rng(seed);
  f.events.reserve(N - 1);
  while (f.total_mentions < N) step(f, model, rng);
  return f;
}

double family_entropy(const SimFamily& family) {
  std::vector<std::uint64_t> w;
  w.reserve(family.quotes.size());
  for (const auto& q : family.quotes) w.push_back(q.mentions);
  return metrics::entropy(w);
}

double subfamily_entropy(const SimFamily& family, std::size_t sub) {
  std::vector<std::uint64_t> w;
  for (const auto v : family.subfamilies.at(sub)) w.push_back(family.quotes[v].mentions);
  return metrics::entropy(w);
}

namespace {

std::vector<SizeCount> histogram(const std::map<std::uint64_t, std::uint64_t>& counts) {
  std::vector<SizeCount> out;
  out.reserve(counts.size());
  for (const auto& [size, count] : counts) out.push_back({size, count});
  return out;
}

}  // namespace

std::vector<Target> power_law_targets(std::size_t count, std::uint64_t seed, const TargetOptions& options) {
  if (!(options.exponent > 1.0)) throw DomainError("mention exponent must exceed 1");
  if (options.min_mentions < 1 || options.max_mentions < options.min_mentions) {
    throw DomainError("invalid mention range");
  }
  if (options.min_length < 1 || options.max_length < options.min_length) throw DomainError("invalid length range");
  Rng rng(seed);
  std::vector<Target> out(count);
  for (auto& t : out) {
    const double u = 1.0 - rng.uniform01();  // (0, 1]
    const double x = static_cast<double>(options.min_mentions) * std::pow(u, -1.0 / (options.exponent - 1.0));
    t.mentions = x >= static_cast<double>(options.max_mentions) ? options.max_mentions
                                                                 : static_cast<std::uint64_t>(x);
    t.l0 = static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(options.min_length),
                                                static_cast<std::int64_t>(options.max_length)));
  }
  return out;
}

SimCorpus simulate_corpus(std::span<const Target> targets, const RateModel& model, std::uint64_t seed,
                          std::size_t quantiles, std::size_t threads) {
  if (targets.empty()) throw DomainError("no simulation targets");
  SimCorpus corpus;
  corpus.families.resize(targets.size());
  parallel_strided(targets.size(), threads, [&](std::size_t, std::size_t i) {
    corpus.families[i] = simulate_family(targets[i].l0, targets[i].mentions, model, derive_seed(seed, i));
  });

  auto& s = corpus.summary;
  std::map<std::uint64_t, std::uint64_t> sizes, versions;
  std::vector<metrics::Point> fam_points, sub_points;
  for (const auto& f : corpus.families) {
    ++s.n_families;
    s.n_versions += f.quotes.size();
    s.n_subfamilies += f.subfamilies.size();
    for (const auto& e : f.events) s.rejected += e.rejected ? 1 : 0;
    fam_points.push_back({static_cast<double>(f.total_mentions), family_entropy(f), 1.0});
    for (std::size_t k = 0; k < f.subfamilies.size(); ++k) {
      ++sizes[f.subfamily_mentions[k]];
      ++versions[f.subfamilies[k].size()];
      sub_points.push_back({static_cast<double>(f.subfamily_mentions[k]), subfamily_entropy(f, k), 1.0});
    }
  }
  s.subfamily_size_histogram = histogram(sizes);
  s.subfamily_versions_histogram = histogram(versions);
  if (quantiles > 0) {
    s.family_entropy = metrics::bin_quantiles(fam_points, std::min(quantiles, fam_points.size()));
    s.subfamily_entropy = metrics::bin_quantiles(sub_points, std::min(quantiles, sub_points.size()));
  }
  return corpus;
}

}  // namespace quotefam::morphsim
