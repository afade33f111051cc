#pragma once

// Straightforward reference implementations used to check the optimized
// code. Nothing here calls into the library's own algorithms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// Full (n+1)x(m+1) matrix, then the backtrace from the ends with
// match > substitute > delete > insert at equal cost.
struct Ratio {
  double mismatch = 0.0;
  double total = 0.0;
  std::size_t distance = 0;
  std::size_t steps = 0;
  double value() const {
    if (total > 0.0) return mismatch / total;
    return steps ? double(distance) / double(steps) : 0.0;
  }
};

inline Ratio weighted_path(const std::vector<std::uint32_t>& a, const std::vector<double>& wa,
                           const std::vector<std::uint32_t>& b, const std::vector<double>& wb) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = int(i);
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = int(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      int best = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      best = std::min(best, d[i - 1][j] + 1);
      best = std::min(best, d[i][j - 1] + 1);
      d[i][j] = best;
    }
  }
  Ratio r;
  r.distance = std::size_t(d[n][m]);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    double w;
    bool match = false;
    if (i > 0 && j > 0 && a[i - 1] == b[j - 1] && d[i - 1][j - 1] == d[i][j]) {
      w = std::max(wa[i - 1], wb[j - 1]);
      match = true;
      --i, --j;
    } else if (i > 0 && j > 0 && a[i - 1] != b[j - 1] && d[i - 1][j - 1] + 1 == d[i][j]) {
      w = std::max(wa[i - 1], wb[j - 1]);
      --i, --j;
    } else if (i > 0 && d[i - 1][j] + 1 == d[i][j]) {
      w = wa[i - 1];
      --i;
    } else {
      w = wb[j - 1];
      --j;
    }
    ++r.steps;
    r.total += w;
    if (!match) r.mismatch += w;
  }
  return r;
}

// Lexicographically smaller sequence first, as the library documents.
inline double weighted_levenshtein(std::vector<std::uint32_t> a, std::vector<double> wa,
                                   std::vector<std::uint32_t> b, std::vector<double> wb) {
  if (b < a) {
    std::swap(a, b);
    std::swap(wa, wb);
  }
  return weighted_path(a, wa, b, wb).value();
}

template <class T>
std::size_t levenshtein(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return d[a.size()][b.size()];
}

inline std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// Pairs (i < j) whose distinct word sets share at least min_shared words.
inline std::set<std::pair<std::uint32_t, std::uint32_t>> shared_word_pairs(
    const std::vector<std::set<std::string>>& sets, std::size_t min_shared) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> out;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      std::size_t shared = 0;
      for (const auto& w : sets[i]) shared += sets[j].count(w);
      if (shared >= min_shared) out.emplace(std::uint32_t(i), std::uint32_t(j));
    }
  }
  return out;
}

struct WeightedEdge {
  std::size_t u, v;
  double w;
};

// Two-level map equation in nats for an undirected graph, written from the
// flow definitions: node visit rate s_a / 2W, module exit rate equal to the
// weight crossing its boundary over 2W.
inline double map_equation(std::size_t n, const std::vector<WeightedEdge>& edges, const std::vector<int>& module) {
  double total = 0.0;
  std::vector<double> strength(n, 0.0);
  for (const auto& e : edges) {
    strength[e.u] += e.w;
    strength[e.v] += e.w;
    total += 2.0 * e.w;
  }
  if (total <= 0.0) return 0.0;
  std::map<int, double> exit, flow;
  for (const auto& e : edges) {
    if (module[e.u] != module[e.v]) {
      exit[module[e.u]] += e.w / total;
      exit[module[e.v]] += e.w / total;
    }
  }
  for (std::size_t a = 0; a < n; ++a) flow[module[a]] += strength[a] / total;
  auto plogp = [](double p) { return p > 0.0 ? p * std::log(p) : 0.0; };
  double q = 0.0, sum_exit = 0.0, sum_nodes = 0.0, sum_mod = 0.0;
  for (const auto& [m, x] : exit) {
    q += x;
    sum_exit += plogp(x);
  }
  for (std::size_t a = 0; a < n; ++a) sum_nodes += plogp(strength[a] / total);
  for (const auto& [m, p] : flow) sum_mod += plogp(p + (exit.count(m) ? exit.at(m) : 0.0));
  return plogp(q) - 2.0 * sum_exit - sum_nodes + sum_mod;
}

// Calls fn on every set partition of {0..n-1} as a restricted growth string.
inline void for_each_partition(std::size_t n, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> a(n, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int max_label) {
    if (i == n) {
      fn(a);
      return;
    }
    for (int l = 0; l <= max_label + 1; ++l) {
      a[i] = l;
      rec(i + 1, std::max(max_label, l));
    }
  };
  if (n == 0) {
    fn(a);
    return;
  }
  a[0] = 0;
  rec(1, 0);
}

inline double shortest_codelength(std::size_t n, const std::vector<WeightedEdge>& edges,
                                  std::vector<int>* best_partition = nullptr) {
  double best = INFINITY;
  for_each_partition(n, [&](const std::vector<int>& p) {
    const double l = map_equation(n, edges, p);
    if (l < best - 1e-12) {
      best = l;
      if (best_partition) *best_partition = p;
    }
  });
  return best;
}

inline double entropy(const std::vector<std::uint64_t>& m) {
  double total = 0.0;
  for (auto x : m) total += double(x);
  double h = 0.0;
  for (auto x : m) {
    if (x == 0) continue;
    const double p = double(x) / total;
    h -= p * std::log(p);
  }
  return h;
}

// Same labeling up to renaming.
inline bool same_partition(const std::vector<int>& a, const std::vector<std::uint32_t>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, std::uint32_t> fwd;
  std::map<std::uint32_t, int> back;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [f, fi] = fwd.emplace(a[i], b[i]);
    auto [r, ri] = back.emplace(b[i], a[i]);
    if (f->second != b[i] || r->second != a[i]) return false;
  }
  return true;
}

}  // namespace oracle
