#pragma once

// Quotation families: map-equation communities of the similarity graph.

#include <cstdint>
#include <span>
#include <vector>

#include "core/corpus.hpp"
#include "core/simgraph.hpp"
#include "core/textprep.hpp"

namespace quotefam::communities {

using ModuleId = std::uint32_t;
using FamilyId = std::uint32_t;

struct Partition {
  std::vector<ModuleId> assignment;  // node -> module, modules numbered densely
  double codelength = 0.0;           // nats

  std::size_t n_modules() const;
};

// Two-level map equation (nats) of an undirected weighted graph under the
// given node -> module assignment, with visit rates proportional to node
// strength. Module labels need not be dense.
double map_equation(const simgraph::SimilarityGraph& graph, std::span<const ModuleId> assignment);

struct DetectOptions {
  std::size_t trials = 1;   // independent greedy runs; the shortest code wins
  std::size_t max_passes = 200;
};

// Greedy codelength minimization: repeated node-move passes in seeded random
// order, then module aggregation and recursion. Modules never span
// connected components.
Partition detect_families(const simgraph::SimilarityGraph& graph, std::uint64_t seed,
                          const DetectOptions& options = {});

struct Family {
  FamilyId id = 0;
  std::vector<corpus::Quote> quotes;  // ascending quote id

  std::uint64_t total_mentions() const;
  std::size_t n_versions() const noexcept { return quotes.size(); }
};

// Family ids follow module ids; members copied from the quote set.
std::vector<Family> families_from_partition(const Partition& partition, const corpus::QuoteSet& quotes);

struct FilterOptions {
  std::size_t min_words = 5;
  bool english_check = true;
  double english_fraction = 0.4;
  // Replaces the bundled word list when set.
  const textprep::WordSet* wordlist = nullptr;
};

// At least `fraction` of the text's tokens are known English words.
bool looks_english(std::string_view text, const textprep::WordSet& words, double fraction = 0.4);

// Drops quotes that are too short or fail the language test, then families
// left empty. Remaining membership is unchanged.
std::vector<Family> filter_families(std::span<const Family> families, const FilterOptions& options = {});

}  // namespace quotefam::communities
