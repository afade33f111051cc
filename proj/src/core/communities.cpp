#include "core/communities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "core/error.hpp"
#include "core/random.hpp"

namespace quotefam::communities {

namespace {

double plogp(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

// Flow network of one aggregation level. Edge flows are w / 2W in each
// direction; self-loops (flow inside an aggregated node) are not stored.
struct FlowNet {
  std::vector<double> flow;
  std::vector<double> exit;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;

  std::size_t size() const { return flow.size(); }
};

FlowNet leaf_net(const simgraph::SimilarityGraph& graph) {
  FlowNet net;
  const std::size_t n = graph.n_nodes();
  net.flow.assign(n, 0.0);
  net.exit.assign(n, 0.0);
  net.adj.resize(n);
  double total = 0.0;
  for (const auto& e : graph.edges()) total += e.weight;
  if (total <= 0.0) return net;
  const double scale = 1.0 / (2.0 * total);
  for (std::size_t v = 0; v < n; ++v) {
    for (const auto& nb : graph.neighbors(static_cast<simgraph::QuoteId>(v))) {
      const double f = nb.weight * scale;
      net.adj[v].push_back({nb.node, f});
      net.flow[v] += f;
      net.exit[v] += f;
    }
  }
  return net;
}

// Renumbers labels densely in order of first occurrence.
std::vector<ModuleId> compact(std::span<const ModuleId> labels) {
  std::unordered_map<ModuleId, ModuleId> remap;
  std::vector<ModuleId> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto [it, inserted] = remap.try_emplace(labels[i], static_cast<ModuleId>(remap.size()));
    out[i] = it->second;
  }
  return out;
}

class LevelOptimizer {
 public:
  LevelOptimizer(const FlowNet& net, Rng& rng, std::size_t max_passes)
      : net_(net), rng_(rng), max_passes_(max_passes) {}

  // Dense module assignment of this level's nodes.
  std::vector<ModuleId> run() {
    const std::size_t n = net_.size();
    module_.resize(n);
    std::iota(module_.begin(), module_.end(), ModuleId{0});
    mod_flow_ = net_.flow;
    mod_exit_ = net_.exit;
    members_.assign(n, 1);
    exit_sum_ = std::accumulate(mod_exit_.begin(), mod_exit_.end(), 0.0);
    link_.assign(n, 0.0);

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    for (std::size_t pass = 0; pass < max_passes_; ++pass) {
      rng_.shuffle(std::span<std::uint32_t>(order));
      std::size_t moves = 0;
      for (const std::uint32_t v : order) {
        if (try_move(v)) ++moves;
      }
      if (moves == 0) break;
    }
    return compact(module_);
  }

 private:
  double delta(ModuleId from, ModuleId to, std::uint32_t v, double link_from, double link_to) const {
    const double p = net_.flow[v];
    const double e = net_.exit[v];
    const double qa = mod_exit_[from], pa = mod_flow_[from];
    const double qb = mod_exit_[to], pb = mod_flow_[to];
    const double qa2 = std::max(0.0, qa - e + 2.0 * link_from);
    const double pa2 = std::max(0.0, pa - p);
    const double qb2 = std::max(0.0, qb + e - 2.0 * link_to);
    const double pb2 = pb + p;
    const double sum2 = std::max(0.0, exit_sum_ - qa - qb + qa2 + qb2);
    return plogp(sum2) - plogp(exit_sum_) - 2.0 * (plogp(qa2) + plogp(qb2) - plogp(qa) - plogp(qb)) +
           (plogp(qa2 + pa2) + plogp(qb2 + pb2) - plogp(qa + pa) - plogp(qb + pb));
  }

  bool try_move(std::uint32_t v) {
    const ModuleId from = module_[v];
    touched_.clear();
    for (const auto& [u, f] : net_.adj[v]) {
      const ModuleId m = module_[u];
      if (link_[m] == 0.0) touched_.push_back(m);
      link_[m] += f;
    }
    const double link_from = link_[from];
    ModuleId best = from;
    double best_delta = 0.0;
    std::sort(touched_.begin(), touched_.end());
    for (const ModuleId m : touched_) {
      if (m == from) continue;
      const double d = delta(from, m, v, link_from, link_[m]);
      if (d < best_delta) {
        best_delta = d;
        best = m;
      }
    }
    if (members_[from] > 1 && !free_.empty()) {
      const ModuleId fresh = free_.back();
      const double d = delta(from, fresh, v, link_from, 0.0);
      if (d < best_delta) {
        best_delta = d;
        best = fresh;
      }
    }
    const double link_to = best == from ? 0.0 : link_[best];
    for (const ModuleId m : touched_) link_[m] = 0.0;
    if (best == from || best_delta > -1e-12) return false;

    const double p = net_.flow[v];
    const double e = net_.exit[v];
    const double qa2 = std::max(0.0, mod_exit_[from] - e + 2.0 * link_from);
    const double qb2 = std::max(0.0, mod_exit_[best] + e - 2.0 * link_to);
    exit_sum_ += qa2 + qb2 - mod_exit_[from] - mod_exit_[best];
    mod_exit_[from] = qa2;
    mod_exit_[best] = qb2;
    mod_flow_[from] = std::max(0.0, mod_flow_[from] - p);
    mod_flow_[best] += p;
    if (!free_.empty() && free_.back() == best) free_.pop_back();
    --members_[from];
    ++members_[best];
    if (members_[from] == 0) {
      mod_flow_[from] = 0.0;
      mod_exit_[from] = 0.0;
      free_.push_back(from);
    }
    module_[v] = best;
    return true;
  }

  const FlowNet& net_;
  Rng& rng_;
  std::size_t max_passes_;
  std::vector<ModuleId> module_;
  std::vector<double> mod_flow_, mod_exit_, link_;
  std::vector<std::uint32_t> members_;
  std::vector<ModuleId> free_;
  std::vector<ModuleId> touched_;
  double exit_sum_ = 0.0;
};

FlowNet aggregate(const FlowNet& net, std::span<const ModuleId> assignment, std::size_t n_modules) {
  FlowNet up;
  up.flow.assign(n_modules, 0.0);
  up.exit.assign(n_modules, 0.0);
  up.adj.resize(n_modules);
  std::vector<std::unordered_map<std::uint32_t, double>> links(n_modules);
  for (std::size_t v = 0; v < net.size(); ++v) {
    const ModuleId a = assignment[v];
    up.flow[a] += net.flow[v];
    for (const auto& [u, f] : net.adj[v]) {
      const ModuleId b = assignment[u];
      if (a == b) continue;
      links[a][b] += f;
      up.exit[a] += f;
    }
  }
  for (std::size_t a = 0; a < n_modules; ++a) {
    up.adj[a].assign(links[a].begin(), links[a].end());
    std::sort(up.adj[a].begin(), up.adj[a].end());
  }
  return up;
}

std::vector<ModuleId> greedy(const FlowNet& leaves, Rng& rng, std::size_t max_passes) {
  std::vector<ModuleId> leaf_module(leaves.size());
  std::iota(leaf_module.begin(), leaf_module.end(), ModuleId{0});
  FlowNet level = leaves;
  while (true) {
    const auto level_assignment = LevelOptimizer(level, rng, max_passes).run();
    const std::size_t n_modules =
        level_assignment.empty() ? 0 : *std::max_element(level_assignment.begin(), level_assignment.end()) + 1;
    for (ModuleId& m : leaf_module) m = level_assignment[m];
    if (n_modules == level.size()) break;
    level = aggregate(level, level_assignment, n_modules);
  }
  return leaf_module;
}

std::vector<ModuleId> component_labels(const simgraph::SimilarityGraph& graph) {
  const std::size_t n = graph.n_nodes();
  std::vector<ModuleId> label(n, std::numeric_limits<ModuleId>::max());
  std::vector<simgraph::QuoteId> stack;
  ModuleId next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (label[s] != std::numeric_limits<ModuleId>::max()) continue;
    label[s] = next;
    stack.assign(1, static_cast<simgraph::QuoteId>(s));
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (const auto& nb : graph.neighbors(v)) {
        if (label[nb.node] == std::numeric_limits<ModuleId>::max()) {
          label[nb.node] = next;
          stack.push_back(nb.node);
        }
      }
    }
    ++next;
  }
  return label;
}

}  // namespace

std::size_t Partition::n_modules() const {
  if (assignment.empty()) return 0;
  return *std::max_element(assignment.begin(), assignment.end()) + 1;
}

double map_equation(const simgraph::SimilarityGraph& graph, std::span<const ModuleId> assignment) {
  if (assignment.size() != graph.n_nodes()) throw DomainError("map_equation: assignment does not cover every node");
  const auto modules = compact(assignment);
  const std::size_t n_modules = modules.empty() ? 0 : *std::max_element(modules.begin(), modules.end()) + 1;
  double total = 0.0;
  for (const auto& e : graph.edges()) total += e.weight;
  if (total <= 0.0) return 0.0;
  const double scale = 1.0 / (2.0 * total);
  std::vector<double> mod_flow(n_modules, 0.0), mod_exit(n_modules, 0.0);
  double node_term = 0.0;
  for (std::size_t v = 0; v < graph.n_nodes(); ++v) {
    const double p = graph.strength(static_cast<simgraph::QuoteId>(v)) * scale;
    mod_flow[modules[v]] += p;
    node_term += plogp(p);
  }
  for (const auto& e : graph.edges()) {
    if (modules[e.u] == modules[e.v]) continue;
    mod_exit[modules[e.u]] += e.weight * scale;
    mod_exit[modules[e.v]] += e.weight * scale;
  }
  double exit_sum = 0.0, exit_term = 0.0, module_term = 0.0;
  for (std::size_t m = 0; m < n_modules; ++m) {
    exit_sum += mod_exit[m];
    exit_term += plogp(mod_exit[m]);
    module_term += plogp(mod_exit[m] + mod_flow[m]);
  }
  // L = q H(Q) + sum_i p_i H(P_i), expanded into plogp terms.
  return plogp(exit_sum) - 2.0 * exit_term - node_term + module_term;
}

Partition detect_families(const simgraph::SimilarityGraph& graph, std::uint64_t seed,
                          const DetectOptions& options) {
  const FlowNet leaves = leaf_net(graph);
  Partition best;
  best.codelength = std::numeric_limits<double>::infinity();
  const std::size_t trials = std::max<std::size_t>(1, options.trials);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t));
    auto assignment = compact(greedy(leaves, rng, options.max_passes));
    const double length = map_equation(graph, assignment);
    if (length < best.codelength) best = Partition{std::move(assignment), length};
  }
  // One module per connected component is always a valid answer.
  auto components = compact(component_labels(graph));
  const double component_length = map_equation(graph, components);
  if (component_length < best.codelength - 1e-12) best = Partition{std::move(components), component_length};
  return best;
}

std::uint64_t Family::total_mentions() const {
  std::uint64_t total = 0;
  for (const auto& q : quotes) total += q.mentions;
  return total;
}

std::vector<Family> families_from_partition(const Partition& partition, const corpus::QuoteSet& quotes) {
  if (partition.assignment.size() != quotes.size()) throw DomainError("partition does not match quote set");
  std::vector<Family> families(partition.n_modules());
  for (std::size_t f = 0; f < families.size(); ++f) families[f].id = static_cast<FamilyId>(f);
  for (std::size_t q = 0; q < quotes.size(); ++q) {
    families[partition.assignment[q]].quotes.push_back(quotes[static_cast<corpus::QuoteId>(q)]);
  }
  return families;
}

bool looks_english(std::string_view text, const textprep::WordSet& words, double fraction) {
  const auto tokens = textprep::tokenize(text);
  if (tokens.empty()) return false;
  const auto& stop = textprep::default_stopwords();
  std::size_t known = 0;
  for (const auto& t : tokens) {
    if (stop.contains(t) || words.contains(t)) ++known;
  }
  return static_cast<double>(known) >= fraction * static_cast<double>(tokens.size());
}

std::vector<Family> filter_families(std::span<const Family> families, const FilterOptions& options) {
  const textprep::WordSet& words = options.wordlist ? *options.wordlist : textprep::english_words();
  std::vector<Family> kept;
  for (const Family& family : families) {
    Family out{family.id, {}};
    for (const auto& q : family.quotes) {
      if (textprep::tokenize(q.text).size() < options.min_words) continue;
      if (options.english_check && !looks_english(q.text, words, options.english_fraction)) continue;
      out.quotes.push_back(q);
    }
    if (!out.quotes.empty()) kept.push_back(std::move(out));
  }
  return kept;
}

}  // namespace quotefam::communities
