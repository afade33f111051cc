#pragma once

// Sub-families: connected components of the intra-family graph joining
// quotes at small token edit distance.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/communities.hpp"

namespace quotefam::subfam {

using communities::Family;

// Unit-cost Levenshtein distance over token sequences.
template <class T>
std::size_t edit_distance(std::span<const T> a, std::span<const T> b) {
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

// min(edit_distance(a, b), limit + 1), evaluated on the diagonal band of
// half-width `limit`.
template <class T>
std::size_t bounded_edit_distance(std::span<const T> a, std::span<const T> b, std::size_t limit) {
  const std::size_t n = a.size(), m = b.size();
  const std::size_t over = limit + 1;
  if ((n > m ? n - m : m - n) > limit) return over;
  // Cells outside the band are treated as `over`; values are capped at over.
  std::vector<std::size_t> prev(m + 1, over), cur(m + 1, over);
  for (std::size_t j = 0; j <= std::min(m, limit); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t lo = i > limit ? i - limit : 0;
    const std::size_t hi = std::min(m, i + limit);
    std::fill(cur.begin(), cur.end(), over);
    if (lo == 0) cur[0] = std::min(i, over);
    std::size_t row_min = cur[0];
    for (std::size_t j = std::max<std::size_t>(lo, 1); j <= hi; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      const std::size_t del = prev[j] + 1;
      const std::size_t ins = cur[j - 1] + 1;
      cur[j] = std::min({sub, del, ins, over});
      row_min = std::min(row_min, cur[j]);
    }
    if (row_min >= over) return over;
    std::swap(prev, cur);
  }
  return std::min(prev[m], over);
}

// Edit distance between whitespace-split raw texts; no normalization.
std::size_t token_edit_distance(std::string_view a, std::string_view b);

struct EditGraph {
  std::vector<corpus::QuoteId> nodes;           // quote ids, family order
  std::vector<std::vector<std::size_t>> adjacency;  // local indices, ascending

  std::size_t size() const noexcept { return nodes.size(); }
  // Local index of a quote id; DomainError when absent.
  std::size_t local(corpus::QuoteId id) const;
};

EditGraph build_edit_graph(const Family& family, std::size_t max_edit = 1);

struct SubFamily {
  std::uint32_t id = 0;
  std::vector<std::size_t> members;  // local indices, ascending
  std::uint64_t total_mentions = 0;
};

// Ids are ordinal in ascending order of each component's smallest quote id.
std::vector<SubFamily> subfamilies(const EditGraph& graph, const Family& family);

// Sub-family id of every quote of the family, by local index.
std::vector<std::uint32_t> subfamily_labels(std::span<const SubFamily> subs, std::size_t n_quotes);

struct Neighborhood {
  std::size_t center = 0;            // local index
  std::vector<std::size_t> members;  // ascending, includes center
};

// DomainError for an unknown quote id.
Neighborhood neighborhood(const EditGraph& graph, corpus::QuoteId quote);
Neighborhood neighborhood_at(const EditGraph& graph, std::size_t local_index);

}  // namespace quotefam::subfam
