#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "synspace/embedding.hpp"

namespace synspace {

struct SimilarityEdge {
  std::size_t i = 0;
  std::size_t j = 0;  // i < j
  double similarity = 0.0;

  friend bool operator==(const SimilarityEdge&, const SimilarityEdge&) = default;
};

/// Complete pairwise similarity graph; edges are stored in (i, j)
/// lexicographic order so edge (i, j) can be located by index.
class SimilarityGraph {
 public:
  SimilarityGraph() = default;
  /// `upper` holds the n(n-1)/2 similarities in (i, j) lexicographic order.
  SimilarityGraph(std::size_t n, std::span<const double> upper);

  std::size_t vertex_count() const noexcept { return n_; }
  const std::vector<SimilarityEdge>& edges() const noexcept { return edges_; }
  double similarity(std::size_t i, std::size_t j) const;

 private:
  std::size_t n_ = 0;
  std::vector<SimilarityEdge> edges_;
};

SimilarityGraph build_similarity_graph(const EmbeddingSet& set);

/// 1-skeleton of the Vietoris-Rips complex: edges with similarity ≥ epsilon.
std::vector<SimilarityEdge> vr_complex_at(const SimilarityGraph& graph, double epsilon);

inline constexpr double kEssentialDeath = -std::numeric_limits<double>::infinity();

struct PersistenceBar {
  double birth = 1.0;
  double death = kEssentialDeath;
  std::size_t representative = 0;

  bool essential() const noexcept { return death == kEssentialDeath; }
  double lifespan() const noexcept { return birth - death; }
};

struct MergeEvent {
  double epsilon = 0.0;
  std::size_t survivor_root = 0;  // root of the merged component afterwards
  std::size_t absorbed_root = 0;  // root whose bar dies here

  friend bool operator==(const MergeEvent&, const MergeEvent&) = default;
};

struct PersistenceRecord {
  std::size_t vertex_count = 0;
  std::vector<PersistenceBar> bars;  // finite bars in death order, essential bar last
  std::vector<MergeEvent> merges;    // decreasing epsilon
};

/// 0-dimensional persistence of the similarity filtration. Edges are added
/// in decreasing similarity (ties by (i, j)); on each merge the smaller
/// component dies, equal sizes keep the lower root index alive.
PersistenceRecord persistence_0d(const SimilarityGraph& graph);

/// Components as sorted index lists, ordered by their smallest member.
using Components = std::vector<std::vector<std::size_t>>;

Components connected_components(std::size_t n, std::span<const SimilarityEdge> edges);
/// Components obtained by replaying every merge with epsilon ≥ `epsilon`.
Components cut_merge_tree(const PersistenceRecord& record, double epsilon);

enum class CoreMode { FixedThreshold, AutoPersistence };

struct TopologyConfig {
  CoreMode mode = CoreMode::FixedThreshold;
  double fixed_epsilon = 0.9;
};

struct CoreComponent {
  std::vector<std::size_t> members;  // sorted
  double epsilon_used = 0.0;
  CoreMode mode = CoreMode::FixedThreshold;
};

/// Threshold placed inside the gap above the merge of maximal lifespan.
double auto_epsilon(const PersistenceRecord& record);

CoreComponent largest_component(const SimilarityGraph& graph, const TopologyConfig& config);
CoreComponent largest_component(const EmbeddingSet& set, const TopologyConfig& config);

}  // namespace synspace
