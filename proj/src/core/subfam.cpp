#include "core/subfam.hpp"

#include "core/error.hpp"
#include "core/textprep.hpp"

namespace quotefam::subfam {

namespace {

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
};

}  // namespace

std::size_t token_edit_distance(std::string_view a, std::string_view b) {
  const auto ta = textprep::split_words(a);
  const auto tb = textprep::split_words(b);
  return edit_distance<std::string>(ta, tb);
}

std::size_t EditGraph::local(corpus::QuoteId id) const {
  const auto it = std::find(nodes.begin(), nodes.end(), id);
  if (it == nodes.end()) throw DomainError("quote " + std::to_string(id) + " is not in this family");
  return static_cast<std::size_t>(it - nodes.begin());
}

EditGraph build_edit_graph(const Family& family, std::size_t max_edit) {
  if (max_edit < 1) throw DomainError("max_edit must be at least 1");
  const std::size_t n = family.quotes.size();
  EditGraph g;
  g.nodes.reserve(n);
  g.adjacency.resize(n);
  std::vector<textprep::TokenSeq> tokens;
  tokens.reserve(n);
  for (const auto& q : family.quotes) {
    g.nodes.push_back(q.id);
    tokens.push_back(textprep::split_words(q.text));
  }
  // Visit pairs in order of length so that only lengths within max_edit meet.
  std::vector<std::size_t> by_length(n);
  std::iota(by_length.begin(), by_length.end(), std::size_t{0});
  std::stable_sort(by_length.begin(), by_length.end(),
                   [&](std::size_t x, std::size_t y) { return tokens[x].size() < tokens[y].size(); });
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t x = by_length[i];
    for (std::size_t k = i + 1; k < n; ++k) {
      const std::size_t y = by_length[k];
      if (tokens[y].size() - tokens[x].size() > max_edit) break;
      if (bounded_edit_distance<std::string>(tokens[x], tokens[y], max_edit) <= max_edit) {
        g.adjacency[x].push_back(y);
        g.adjacency[y].push_back(x);
      }
    }
  }
  for (auto& adj : g.adjacency) std::sort(adj.begin(), adj.end());
  return g;
}

std::vector<SubFamily> subfamilies(const EditGraph& graph, const Family& family) {
  const std::size_t n = graph.size();
  if (family.quotes.size() != n) throw DomainError("edit graph does not match family");
  DisjointSet sets(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (const std::size_t u : graph.adjacency[v]) sets.unite(v, u);
  }
  std::vector<std::size_t> roots;
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> slot(n, n);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t r = sets.find(v);
    if (slot[r] == n) {
      slot[r] = groups.size();
      groups.emplace_back();
    }
    groups[slot[r]].push_back(v);
  }
  auto smallest_id = [&](const std::vector<std::size_t>& members) {
    corpus::QuoteId best = graph.nodes[members.front()];
    for (const std::size_t m : members) best = std::min(best, graph.nodes[m]);
    return best;
  };
  std::sort(groups.begin(), groups.end(),
            [&](const auto& x, const auto& y) { return smallest_id(x) < smallest_id(y); });
  std::vector<SubFamily> out;
  out.reserve(groups.size());
  for (std::size_t s = 0; s < groups.size(); ++s) {
    SubFamily sf;
    sf.id = static_cast<std::uint32_t>(s);
    sf.members = std::move(groups[s]);
    for (const std::size_t m : sf.members) sf.total_mentions += family.quotes[m].mentions;
    out.push_back(std::move(sf));
  }
  return out;
}

std::vector<std::uint32_t> subfamily_labels(std::span<const SubFamily> subs, std::size_t n_quotes) {
  std::vector<std::uint32_t> labels(n_quotes, 0);
  for (const auto& sf : subs) {
    for (const std::size_t m : sf.members) labels.at(m) = sf.id;
  }
  return labels;
}

Neighborhood neighborhood_at(const EditGraph& graph, std::size_t local_index) {
  if (local_index >= graph.size()) throw DomainError("neighborhood: local index out of range");
  Neighborhood nb;
  nb.center = local_index;
  nb.members = graph.adjacency[local_index];
  nb.members.insert(std::lower_bound(nb.members.begin(), nb.members.end(), local_index), local_index);
  return nb;
}

Neighborhood neighborhood(const EditGraph& graph, corpus::QuoteId quote) {
  return neighborhood_at(graph, graph.local(quote));
}

}  // namespace quotefam::subfam
