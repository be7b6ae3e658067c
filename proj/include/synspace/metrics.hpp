#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "synspace/embedding.hpp"

namespace synspace {

enum class MetricKind { Set, Center, Subspace, LocalCenter };

std::string_view metric_name(MetricKind kind) noexcept;
/// Accepts "set", "center", "subspace", "local-center" (or "local_center").
MetricKind parse_metric(std::string_view name);

inline constexpr std::size_t kDefaultNeighborhood = 20;
inline constexpr std::size_t kDefaultSubspaceCap = 8;

struct MetricConfig {
  MetricKind kind = MetricKind::LocalCenter;
  std::size_t neighborhood_n = kDefaultNeighborhood;
  std::size_t subspace_dims = 0;  // 0: min(8, |S0| - 1)
  bool renormalize_mean = false;  // ablation only
};

// Free-function forms. `space` is the filtered core S0.

double sim_point_to_set(std::span<const float> g, const EmbeddingSet& space);
double sim_point_to_center(std::span<const float> g, const EmbeddingSet& space, bool renormalize = false);
double sim_point_to_subspace(std::span<const float> g, const EmbeddingSet& space, std::size_t dims);
double sim_point_to_local_center(std::span<const float> g, const EmbeddingSet& space, std::size_t n,
                                 bool renormalize = false);

/// f* = argmax <g, f>, ties to the lowest index.
std::size_t nearest_member(std::span<const float> g, const EmbeddingSet& space);
/// N(f*): f* plus the n-1 members most similar to it (ties to lower index),
/// returned in ascending index order. n is clamped to |space|.
std::vector<std::size_t> local_neighborhood(const EmbeddingSet& space, std::size_t f_star, std::size_t n);
/// Arithmetic mean of the given rows (all rows when `indices` is empty).
std::vector<double> mean_of(const EmbeddingSet& space, std::span<const std::size_t> indices = {});

/// Principal directions of a centered point set.
struct PcaBasis {
  std::vector<double> mean;
  std::vector<std::vector<double>> directions;  // unit vectors, decreasing variance
  std::vector<double> variances;
  bool degenerate() const noexcept { return directions.empty(); }
};

/// Keeps at most `max_dims` directions with non-negligible variance.
PcaBasis principal_basis(const EmbeddingSet& space, std::size_t max_dims);

/// A filtered semantic space with its centroid and PCA basis computed once.
/// Immutable after construction; safe to share across threads.
class SemanticSpace {
 public:
  SemanticSpace(EmbeddingSet members, MetricConfig config);

  const EmbeddingSet& members() const noexcept { return members_; }
  const MetricConfig& config() const noexcept { return config_; }
  const std::vector<double>& centroid() const noexcept { return centroid_; }
  std::size_t size() const noexcept { return members_.size(); }
  /// Subspace dimension after clamping; 0 when the space is degenerate.
  std::size_t subspace_dims() const noexcept { return pca_ ? pca_->directions.size() : 0; }

  /// Similarity between g and this space under the configured metric.
  double score(std::span<const float> g) const;

  /// Point c(g) with score(g) = <g, c(g)> for the set, center and
  /// local-center metrics (f*, the centroid, the local mean respectively).
  std::vector<double> anchor(std::span<const float> g) const;

 private:
  double subspace_score(std::span<const float> g) const;

  EmbeddingSet members_;
  MetricConfig config_;
  std::vector<double> centroid_;
  std::optional<PcaBasis> pca_;
};

}  // namespace synspace
