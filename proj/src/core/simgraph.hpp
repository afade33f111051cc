#pragma once

// tf*idf-weighted Levenshtein dissimilarity and the thresholded similarity
// network over quotes.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "core/corpus.hpp"
#include "core/textprep.hpp"

namespace quotefam::simgraph {

using corpus::QuoteId;
using textprep::TermId;

enum class StepKind { match, substitute, insert, remove };

struct EditStep {
  StepKind kind;
  std::optional<std::size_t> a_pos;  // position in the first sequence
  std::optional<std::size_t> b_pos;  // position in the second sequence
  double weight;                     // f(w, q, w', q') of the step
};

// One minimum unit-cost edit path, stored from the sequence starts forward.
struct EditPath {
  std::vector<EditStep> steps;
  std::size_t unit_distance = 0;
  double mismatch_weight = 0.0;
  double total_weight = 0.0;

  // mismatch / total; falls back to unit_distance / steps when every weight
  // on the path is zero.
  double ratio() const;
};

// Canonical minimum path for transforming a into b. The backtrace runs from
// the sequence ends and prefers match > substitute > delete > insert at
// equal cost. a and b are taken in the given order.
EditPath min_edit_path(std::span<const TermId> a, std::span<const double> a_weights,
                       std::span<const TermId> b, std::span<const double> b_weights);

// Symmetric in its arguments: the lexicographically smaller sequence is
// aligned as the first one. DomainError if both are empty.
double weighted_levenshtein(std::span<const TermId> a, std::span<const double> a_weights,
                            std::span<const TermId> b, std::span<const double> b_weights);
double weighted_levenshtein(const textprep::TfIdfIndex& index, QuoteId a, QuoteId b);

struct QuotePair {
  QuoteId first;
  QuoteId second;
  auto operator<=>(const QuotePair&) const = default;
};

// Sorted distinct surface-word ids per quote (tokenize output, stop words kept).
std::vector<std::vector<std::uint32_t>> full_word_sets(const corpus::QuoteSet& quotes);

// Every unordered pair sharing at least min_shared distinct words, once,
// with first < second, in ascending order.
std::vector<QuotePair> candidate_pairs(std::span<const std::vector<std::uint32_t>> word_sets,
                                       std::size_t min_shared = 2);
std::vector<QuotePair> candidate_pairs(const corpus::QuoteSet& quotes, std::size_t min_shared = 2);

struct Edge {
  QuoteId u;  // u < v
  QuoteId v;
  double weight;
  auto operator<=>(const Edge&) const = default;
};

class SimilarityGraph {
 public:
  SimilarityGraph() = default;
  SimilarityGraph(std::size_t n_nodes, std::vector<Edge> edges);

  std::size_t n_nodes() const noexcept { return n_nodes_; }
  std::span<const Edge> edges() const noexcept { return edges_; }

  struct Neighbor {
    QuoteId node;
    double weight;
  };
  std::span<const Neighbor> neighbors(QuoteId node) const {
    return {adjacency_.data() + offsets_[node], adjacency_.data() + offsets_[node + 1]};
  }
  double strength(QuoteId node) const;

 private:
  std::size_t n_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adjacency_;
};

// Edge weight 1 - L when it strictly exceeds the threshold.
std::optional<double> edge_weight(double dissimilarity, double threshold);

struct BuildOptions {
  double threshold = 0.35;
  std::size_t min_shared = 2;
  std::size_t threads = 0;  // 0: hardware concurrency
};

struct BuildStats {
  std::size_t probed_pairs = 0;  // distinct pairs surviving the prefix filter
  std::size_t scored_pairs = 0;  // pairs that reached the full DP
};

// Edges between quotes sharing min_shared full words whose similarity
// 1 - L exceeds the threshold. Candidates come from an exact prefix filter
// over tf*idf mass, so the result equals the all-pairs definition.
SimilarityGraph build_graph(const corpus::QuoteSet& quotes, const textprep::TfIdfIndex& index,
                            const BuildOptions& options = {}, BuildStats* stats = nullptr);

// id1<TAB>id2<TAB>weight, weight printed with 6 decimals.
void write_edge_list(std::ostream& out, const SimilarityGraph& graph);

}  // namespace quotefam::simgraph
