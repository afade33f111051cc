#pragma once

// Synthetic quotes over a Zipf-distributed vocabulary.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "core/corpus.hpp"
#include "core/random.hpp"

namespace synth {

class Zipf {
 public:
  Zipf(std::size_t vocab, double s) : cdf_(vocab) {
    double acc = 0.0;
    for (std::size_t r = 0; r < vocab; ++r) cdf_[r] = acc += 1.0 / std::pow(double(r + 1), s);
    for (auto& c : cdf_) c /= acc;
  }
  std::size_t draw(quotefam::Rng& rng) const {
    const double u = rng.uniform01();
    return std::size_t(std::lower_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

// n distinct quotes, lengths uniform in [lo, hi], words "w<rank>".
inline quotefam::corpus::QuoteSet quotes(std::size_t n, std::size_t vocab, std::size_t lo, std::size_t hi,
                                         std::uint64_t seed, double s = 1.0) {
  quotefam::Rng rng(seed);
  const Zipf zipf(vocab, s);
  std::vector<quotefam::corpus::Quote> out;
  std::set<std::string> seen;
  while (out.size() < n) {
    const auto len = std::size_t(rng.between(std::int64_t(lo), std::int64_t(hi)));
    std::string text;
    for (std::size_t i = 0; i < len; ++i) {
      if (i) text += ' ';
      text += "w" + std::to_string(zipf.draw(rng));
    }
    if (!seen.insert(text).second) continue;
    quotefam::corpus::Quote q;
    q.text = std::move(text);
    q.mentions = 5 + rng.below(20);
    out.push_back(std::move(q));
  }
  return quotefam::corpus::QuoteSet(std::move(out));
}

}  // namespace synth
