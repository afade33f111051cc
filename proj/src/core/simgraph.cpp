#include "core/simgraph.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>
#include <unordered_map>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace quotefam::simgraph {

namespace {

struct AlignResult {
  std::size_t unit_distance = 0;
  std::size_t steps = 0;
  double mismatch = 0.0;
  double total = 0.0;

  double ratio() const {
    if (total > 0.0) return mismatch / total;
    return steps == 0 ? 0.0 : static_cast<double>(unit_distance) / static_cast<double>(steps);
  }
};

// Unit-cost DP plus canonical backtrace. `path`, when given, receives the
// steps in backtrace order (from the sequence ends).
AlignResult align(std::span<const TermId> a, std::span<const double> wa, std::span<const TermId> b,
                  std::span<const double> wb, std::vector<std::uint32_t>& cost,
                  std::vector<EditStep>* path) {
  const std::size_t n = a.size(), m = b.size();
  const std::size_t stride = m + 1;
  cost.resize((n + 1) * stride);
  for (std::size_t j = 0; j <= m; ++j) cost[j] = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    std::uint32_t* row = cost.data() + i * stride;
    const std::uint32_t* up = row - stride;
    row[0] = static_cast<std::uint32_t>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint32_t diag = up[j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u);
      row[j] = std::min({diag, up[j] + 1u, row[j - 1] + 1u});
    }
  }
  AlignResult result;
  result.unit_distance = cost[n * stride + m];
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const std::uint32_t here = cost[i * stride + j];
    EditStep step{StepKind::match, std::nullopt, std::nullopt, 0.0};
    if (i > 0 && j > 0 && a[i - 1] == b[j - 1] && cost[(i - 1) * stride + j - 1] == here) {
      step = {StepKind::match, i - 1, j - 1, std::max(wa[i - 1], wb[j - 1])};
      --i;
      --j;
    } else if (i > 0 && j > 0 && a[i - 1] != b[j - 1] && cost[(i - 1) * stride + j - 1] + 1 == here) {
      step = {StepKind::substitute, i - 1, j - 1, std::max(wa[i - 1], wb[j - 1])};
      --i;
      --j;
    } else if (i > 0 && cost[(i - 1) * stride + j] + 1 == here) {
      step = {StepKind::remove, i - 1, std::nullopt, wa[i - 1]};
      --i;
    } else {
      step = {StepKind::insert, std::nullopt, j - 1, wb[j - 1]};
      --j;
    }
    ++result.steps;
    result.total += step.weight;
    if (step.kind != StepKind::match) result.mismatch += step.weight;
    if (path) path->push_back(step);
  }
  return result;
}

void check_weights(std::span<const TermId> seq, std::span<const double> weights) {
  if (seq.size() != weights.size()) throw DomainError("weight count differs from sequence length");
}

double canonical_ratio(std::span<const TermId> a, std::span<const double> wa, std::span<const TermId> b,
                       std::span<const double> wb, std::vector<std::uint32_t>& scratch) {
  if (a.empty() && b.empty()) throw DomainError("weighted_levenshtein: both sequences empty");
  if (std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end())) {
    std::swap(a, b);
    std::swap(wa, wb);
  }
  return align(a, wa, b, wb, scratch, nullptr).ratio();
}

}  // namespace

double EditPath::ratio() const {
  if (total_weight > 0.0) return mismatch_weight / total_weight;
  return steps.empty() ? 0.0 : static_cast<double>(unit_distance) / static_cast<double>(steps.size());
}

EditPath min_edit_path(std::span<const TermId> a, std::span<const double> a_weights,
                       std::span<const TermId> b, std::span<const double> b_weights) {
  check_weights(a, a_weights);
  check_weights(b, b_weights);
  std::vector<std::uint32_t> scratch;
  EditPath path;
  const AlignResult r = align(a, a_weights, b, b_weights, scratch, &path.steps);
  std::reverse(path.steps.begin(), path.steps.end());
  path.unit_distance = r.unit_distance;
  path.mismatch_weight = r.mismatch;
  path.total_weight = r.total;
  return path;
}

double weighted_levenshtein(std::span<const TermId> a, std::span<const double> a_weights,
                            std::span<const TermId> b, std::span<const double> b_weights) {
  check_weights(a, a_weights);
  check_weights(b, b_weights);
  std::vector<std::uint32_t> scratch;
  return canonical_ratio(a, a_weights, b, b_weights, scratch);
}

double weighted_levenshtein(const textprep::TfIdfIndex& index, QuoteId a, QuoteId b) {
  const auto wa = index.position_weights(a);
  const auto wb = index.position_weights(b);
  return weighted_levenshtein(index.sequence(a), wa, index.sequence(b), wb);
}

std::vector<std::vector<std::uint32_t>> full_word_sets(const corpus::QuoteSet& quotes) {
  std::unordered_map<std::string, std::uint32_t> ids;
  std::vector<std::vector<std::uint32_t>> sets;
  sets.reserve(quotes.size());
  for (const corpus::Quote& q : quotes.quotes()) {
    std::vector<std::uint32_t> set;
    for (const std::string& word : textprep::tokenize(q.text)) {
      const auto [it, inserted] = ids.try_emplace(word, static_cast<std::uint32_t>(ids.size()));
      set.push_back(it->second);
    }
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    sets.push_back(std::move(set));
  }
  return sets;
}

namespace {

std::size_t count_shared(std::span<const std::uint32_t> x, std::span<const std::uint32_t> y) {
  std::size_t shared = 0;
  auto i = x.begin();
  auto j = y.begin();
  while (i != x.end() && j != y.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++shared;
      ++i;
      ++j;
    }
  }
  return shared;
}

std::vector<std::vector<QuoteId>> inverted_index(std::span<const std::vector<std::uint32_t>> sets) {
  std::uint32_t max_id = 0;
  for (const auto& s : sets) {
    if (!s.empty()) max_id = std::max(max_id, s.back());
  }
  std::vector<std::vector<QuoteId>> postings(sets.empty() ? 0 : max_id + 1);
  for (std::size_t q = 0; q < sets.size(); ++q) {
    for (const std::uint32_t w : sets[q]) postings[w].push_back(static_cast<QuoteId>(q));
  }
  return postings;
}

}  // namespace

std::vector<QuotePair> candidate_pairs(std::span<const std::vector<std::uint32_t>> word_sets,
                                       std::size_t min_shared) {
  if (min_shared < 1) throw DomainError("min_shared must be at least 1");
  const auto postings = inverted_index(word_sets);
  std::vector<std::uint32_t> counts(word_sets.size(), 0);
  std::vector<QuoteId> touched;
  std::vector<QuotePair> pairs;
  for (std::size_t q = 0; q < word_sets.size(); ++q) {
    touched.clear();
    for (const std::uint32_t w : word_sets[q]) {
      const auto& list = postings[w];
      for (auto it = std::upper_bound(list.begin(), list.end(), static_cast<QuoteId>(q)); it != list.end();
           ++it) {
        if (counts[*it]++ == 0) touched.push_back(*it);
      }
    }
    std::sort(touched.begin(), touched.end());
    for (const QuoteId other : touched) {
      if (counts[other] >= min_shared) pairs.push_back({static_cast<QuoteId>(q), other});
      counts[other] = 0;
    }
  }
  return pairs;
}

std::vector<QuotePair> candidate_pairs(const corpus::QuoteSet& quotes, std::size_t min_shared) {
  const auto sets = full_word_sets(quotes);
  return candidate_pairs(sets, min_shared);
}

SimilarityGraph::SimilarityGraph(std::size_t n_nodes, std::vector<Edge> edges)
    : n_nodes_(n_nodes), edges_(std::move(edges)) {
  for (Edge& e : edges_) {
    if (e.u == e.v || e.u >= n_nodes_ || e.v >= n_nodes_) throw DomainError("invalid similarity edge");
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges_.begin(), edges_.end());
  std::vector<std::size_t> degree(n_nodes_, 0);
  for (const Edge& e : edges_) {
    ++degree[e.u];
    ++degree[e.v];
  }
  offsets_.assign(n_nodes_ + 1, 0);
  for (std::size_t i = 0; i < n_nodes_; ++i) offsets_[i + 1] = offsets_[i] + degree[i];
  adjacency_.resize(offsets_.back());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const Edge& e : edges_) {
    adjacency_[fill[e.u]++] = {e.v, e.weight};
    adjacency_[fill[e.v]++] = {e.u, e.weight};
  }
}

double SimilarityGraph::strength(QuoteId node) const {
  double s = 0.0;
  for (const Neighbor& nb : neighbors(node)) s += nb.weight;
  return s;
}

std::optional<double> edge_weight(double dissimilarity, double threshold) {
  const double similarity = 1.0 - dissimilarity;
  if (similarity > threshold) return similarity;
  return std::nullopt;
}

namespace {

// Per-quote data for the prefix filter. An edge (a, b) needs
//   S(a,b) = sum over shared terms of tf_a * tf_b * idf > threshold * max(W_a, W_b)
// where W is the sum of position weights: matched steps weigh at most S and
// every path's total weight is at least W_a and W_b. With K the largest tf
// in the corpus, K * tf_a * idf bounds each shared term's contribution from
// a's side alone, which is what the per-quote prefix is cut against.
struct QuoteProfile {
  std::vector<double> weights;  // per position
  double total = 0.0;           // W
  struct TermMass {
    TermId term;
    std::uint32_t tf;
    double idf;
  };
  std::vector<TermMass> by_term;   // sorted by term id
  std::vector<TermId> prefix;      // leading terms in global order
};

constexpr double kSlack = 1e-9;

}  // namespace

SimilarityGraph build_graph(const corpus::QuoteSet& quotes, const textprep::TfIdfIndex& index,
                            const BuildOptions& options, BuildStats* stats) {
  if (!(options.threshold > 0.0 && options.threshold < 1.0)) {
    throw DomainError("threshold must lie in (0, 1)");
  }
  if (index.n_quotes() != quotes.size()) throw DomainError("index and quote set sizes differ");
  const std::size_t n = quotes.size();
  const double theta = options.threshold;
  const auto word_sets = full_word_sets(quotes);

  std::uint32_t max_tf = 1;
  std::vector<QuoteProfile> profiles(n);
  for (std::size_t q = 0; q < n; ++q) {
    QuoteProfile& p = profiles[q];
    p.weights = index.position_weights(q);
    p.total = std::accumulate(p.weights.begin(), p.weights.end(), 0.0);
    std::vector<TermId> terms(index.sequence(q).begin(), index.sequence(q).end());
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    for (const TermId t : terms) {
      const std::uint32_t tf = index.tf(t, q);
      max_tf = std::max(max_tf, tf);
      p.by_term.push_back({t, tf, index.idf(t)});
    }
  }

  // Global order: decreasing idf, then term id.
  auto before = [&](const QuoteProfile::TermMass& x, const QuoteProfile::TermMass& y) {
    if (x.idf != y.idf) return x.idf > y.idf;
    return x.term < y.term;
  };
  std::vector<QuoteId> zero_weight;
  for (std::size_t q = 0; q < n; ++q) {
    QuoteProfile& p = profiles[q];
    if (p.by_term.empty()) continue;
    if (p.total <= 0.0) {
      zero_weight.push_back(static_cast<QuoteId>(q));
      continue;
    }
    auto ordered = p.by_term;
    std::sort(ordered.begin(), ordered.end(), before);
    const double budget = theta * p.total * (1.0 - kSlack);
    double suffix = 0.0;
    std::size_t cut = ordered.size();
    while (cut > 0) {
      const auto& tm = ordered[cut - 1];
      const double mass = static_cast<double>(max_tf) * tm.tf * tm.idf;
      if (suffix + mass > budget) break;
      suffix += mass;
      --cut;
    }
    for (std::size_t i = 0; i < cut; ++i) p.prefix.push_back(ordered[i].term);
  }

  std::vector<std::vector<QuoteId>> postings(index.vocabulary().size());
  for (std::size_t q = 0; q < n; ++q) {
    for (const TermId t : profiles[q].prefix) postings[t].push_back(static_cast<QuoteId>(q));
  }

  auto shared_mass = [&](const QuoteProfile& x, const QuoteProfile& y) {
    double s = 0.0;
    auto i = x.by_term.begin();
    auto j = y.by_term.begin();
    while (i != x.by_term.end() && j != y.by_term.end()) {
      if (i->term < j->term) {
        ++i;
      } else if (j->term < i->term) {
        ++j;
      } else {
        s += static_cast<double>(i->tf) * j->tf * i->idf;
        ++i;
        ++j;
      }
    }
    return s;
  };

  const std::size_t threads = resolve_threads(options.threads);
  struct WorkerOut {
    std::vector<Edge> edges;
    std::size_t probed = 0;
    std::size_t scored = 0;
  };
  std::vector<WorkerOut> outputs(threads);
  auto score = [&](QuoteId a, QuoteId b, std::vector<std::uint32_t>& scratch, WorkerOut& out) {
    if (count_shared(word_sets[a], word_sets[b]) < options.min_shared) return;
    ++out.scored;
    const double l = canonical_ratio(index.sequence(a), profiles[a].weights, index.sequence(b),
                                     profiles[b].weights, scratch);
    if (const auto w = edge_weight(l, theta)) out.edges.push_back({a, b, *w});
  };

  parallel_strided(n, threads, [&](std::size_t worker, std::size_t q) {
    thread_local std::vector<std::uint32_t> scratch;
    thread_local std::vector<std::uint8_t> seen;
    thread_local std::vector<QuoteId> touched;
    WorkerOut& out = outputs[worker];
    const QuoteProfile& pa = profiles[q];
    if (pa.prefix.empty()) return;
    if (seen.size() != n) seen.assign(n, 0);
    touched.clear();
    for (const TermId t : pa.prefix) {
      for (const QuoteId other : postings[t]) {
        if (other >= q) break;
        if (!seen[other]) {
          seen[other] = 1;
          touched.push_back(other);
        }
      }
    }
    for (const QuoteId other : touched) {
      seen[other] = 0;
      const QuoteProfile& pb = profiles[other];
      ++out.probed;
      const double bound = theta * std::max(pa.total, pb.total) * (1.0 - kSlack);
      if (shared_mass(pa, pb) <= bound) continue;
      score(other, static_cast<QuoteId>(q), scratch, out);
    }
  });

  // Quotes whose every term occurs in all quotes have zero total weight; the
  // ratio then uses unit weights, so these pairs are scored exhaustively.
  {
    std::vector<std::uint32_t> scratch;
    for (std::size_t i = 0; i < zero_weight.size(); ++i) {
      for (std::size_t j = i + 1; j < zero_weight.size(); ++j) {
        ++outputs[0].probed;
        score(zero_weight[i], zero_weight[j], scratch, outputs[0]);
      }
    }
  }

  std::vector<Edge> edges;
  BuildStats totals;
  for (WorkerOut& out : outputs) {
    edges.insert(edges.end(), out.edges.begin(), out.edges.end());
    totals.probed_pairs += out.probed;
    totals.scored_pairs += out.scored;
  }
  if (stats) *stats = totals;
  return SimilarityGraph(n, std::move(edges));
}

void write_edge_list(std::ostream& out, const SimilarityGraph& graph) {
  char buf[64];
  for (const Edge& e : graph.edges()) {
    std::snprintf(buf, sizeof buf, "%u\t%u\t%.6f\n", e.u, e.v, e.weight);
    out << buf;
  }
}

}  // namespace quotefam::simgraph
