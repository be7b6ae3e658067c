#include "synspace/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "synspace/error.hpp"

namespace synspace {
namespace {

void require_nonempty(const EmbeddingSet& space) {
  if (space.empty()) throw Error(ErrorCode::EmptySpace, "semantic space has no members");
}

void require_dim(std::span<const float> g, const EmbeddingSet& space) {
  if (g.size() != space.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "query dim " + std::to_string(g.size()) + " vs space dim " + std::to_string(space.dim()));
  }
}

void normalize_in_place(std::vector<double>& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double n = std::sqrt(sq);
  if (n <= kZeroNormTolerance) return;
  for (double& x : v) x /= n;
}

double dot_dd(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

std::size_t default_subspace_dims(std::size_t n) { return std::min(kDefaultSubspaceCap, n > 0 ? n - 1 : 0); }

double project_and_dot(std::span<const float> g, const PcaBasis& basis) {
  // proj(g) = mu + sum_j <g - mu, u_j> u_j ; return <proj(g), mu>.
  std::vector<double> centered(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) centered[i] = static_cast<double>(g[i]) - basis.mean[i];
  double out = dot_dd(basis.mean, basis.mean);
  for (const auto& u : basis.directions) out += dot_dd(centered, u) * dot_dd(u, basis.mean);
  return out;
}

}  // namespace

std::string_view metric_name(MetricKind kind) noexcept {
  switch (kind) {
    case MetricKind::Set: return "set";
    case MetricKind::Center: return "center";
    case MetricKind::Subspace: return "subspace";
    case MetricKind::LocalCenter: return "local-center";
  }
  return "unknown";
}

MetricKind parse_metric(std::string_view name) {
  if (name == "set") return MetricKind::Set;
  if (name == "center") return MetricKind::Center;
  if (name == "subspace") return MetricKind::Subspace;
  if (name == "local-center" || name == "local_center") return MetricKind::LocalCenter;
  throw Error(ErrorCode::InvalidConfig, "unknown metric '" + std::string(name) + "'");
}

double sim_point_to_set(std::span<const float> g, const EmbeddingSet& space) {
  require_nonempty(space);
  require_dim(g, space);
  return dot(g, space.row(nearest_member(g, space)));
}

std::vector<double> mean_of(const EmbeddingSet& space, std::span<const std::size_t> indices) {
  require_nonempty(space);
  std::vector<double> mean(space.dim(), 0.0);
  auto accumulate_row = [&](std::size_t i) {
    const auto r = space.row(i);
    for (std::size_t k = 0; k < r.size(); ++k) mean[k] += static_cast<double>(r[k]);
  };
  std::size_t count = 0;
  if (indices.empty()) {
    for (std::size_t i = 0; i < space.size(); ++i) accumulate_row(i);
    count = space.size();
  } else {
    for (std::size_t i : indices) accumulate_row(i);
    count = indices.size();
  }
  for (double& x : mean) x /= static_cast<double>(count);
  return mean;
}

double sim_point_to_center(std::span<const float> g, const EmbeddingSet& space, bool renormalize) {
  require_nonempty(space);
  require_dim(g, space);
  auto mean = mean_of(space);
  if (renormalize) normalize_in_place(mean);
  return dot(g, mean);
}

std::size_t nearest_member(std::span<const float> g, const EmbeddingSet& space) {
  require_nonempty(space);
  require_dim(g, space);
  std::size_t best = 0;
  double best_sim = dot(g, space.row(0));
  for (std::size_t i = 1; i < space.size(); ++i) {
    const double s = dot(g, space.row(i));
    if (s > best_sim) {
      best_sim = s;
      best = i;
    }
  }
  return best;
}

std::vector<std::size_t> local_neighborhood(const EmbeddingSet& space, std::size_t f_star, std::size_t n) {
  require_nonempty(space);
  if (n == 0) throw Error(ErrorCode::PreconditionViolation, "neighborhood size must be at least 1");
  n = std::min(n, space.size());
  const auto anchor = space.row(f_star);
  std::vector<std::pair<double, std::size_t>> others;
  others.reserve(space.size() - 1);
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (i != f_star) others.emplace_back(dot(anchor, space.row(i)), i);
  }
  const auto take = n - 1;
  std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(take), others.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  std::vector<std::size_t> out{f_star};
  for (std::size_t k = 0; k < take; ++k) out.push_back(others[k].second);
  std::sort(out.begin(), out.end());
  return out;
}

double sim_point_to_local_center(std::span<const float> g, const EmbeddingSet& space, std::size_t n,
                                 bool renormalize) {
  require_nonempty(space);
  require_dim(g, space);
  const auto hood = local_neighborhood(space, nearest_member(g, space), n);
  auto mean = mean_of(space, hood);
  if (renormalize) normalize_in_place(mean);
  return dot(g, mean);
}

PcaBasis principal_basis(const EmbeddingSet& space, std::size_t max_dims) {
  require_nonempty(space);
  const auto n = static_cast<Eigen::Index>(space.size());
  const auto dim = static_cast<Eigen::Index>(space.dim());
  PcaBasis basis;
  basis.mean = mean_of(space);

  Eigen::MatrixXd centered(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = space.row(static_cast<std::size_t>(i));
    for (Eigen::Index k = 0; k < dim; ++k) centered(i, k) = static_cast<double>(r[k]) - basis.mean[k];
  }

  // Eigen-decompose whichever of the Gram (n x n) or scatter (D x D) matrix
  // is smaller; both share their nonzero spectrum.
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  const bool use_gram = n <= dim;
  if (use_gram) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(centered * centered.transpose());
    values = es.eigenvalues();
    vectors = es.eigenvectors();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(centered.transpose() * centered);
    values = es.eigenvalues();
    vectors = es.eigenvectors();
  }
  if (values.size() == 0) return basis;
  const double top = values.maxCoeff();
  if (!(top > 1e-20)) return basis;
  const double floor = top * 1e-10;

  // SelfAdjointEigenSolver sorts ascending.
  for (Eigen::Index k = values.size() - 1; k >= 0 && basis.directions.size() < max_dims; --k) {
    if (values(k) <= floor) break;
    Eigen::VectorXd u = use_gram ? Eigen::VectorXd(centered.transpose() * vectors.col(k)) : Eigen::VectorXd(vectors.col(k));
    u.normalize();
    basis.directions.emplace_back(u.data(), u.data() + u.size());
    basis.variances.push_back(values(k) / static_cast<double>(n));
  }
  return basis;
}

double sim_point_to_subspace(std::span<const float> g, const EmbeddingSet& space, std::size_t dims) {
  require_nonempty(space);
  require_dim(g, space);
  if (dims == 0) throw Error(ErrorCode::PreconditionViolation, "subspace dimension must be at least 1");
  dims = std::min({dims, space.dim(), space.size() - 1});
  if (dims == 0) return sim_point_to_center(g, space);
  const auto basis = principal_basis(space, dims);
  if (basis.degenerate()) return sim_point_to_center(g, space);
  return project_and_dot(g, basis);
}

SemanticSpace::SemanticSpace(EmbeddingSet members, MetricConfig config)
    : members_(std::move(members)), config_(config) {
  require_nonempty(members_);
  if (config_.neighborhood_n == 0) throw Error(ErrorCode::PreconditionViolation, "neighborhood size must be at least 1");
  centroid_ = mean_of(members_);
  if (config_.kind == MetricKind::Subspace) {
    std::size_t dims = config_.subspace_dims == 0 ? default_subspace_dims(members_.size()) : config_.subspace_dims;
    dims = std::min({dims, members_.dim(), members_.size() - 1});
    if (dims > 0) pca_ = principal_basis(members_, dims);
  }
}

std::vector<double> SemanticSpace::anchor(std::span<const float> g) const {
  require_dim(g, members_);
  std::vector<double> out;
  switch (config_.kind) {
    case MetricKind::Set: {
      const auto r = members_.row(nearest_member(g, members_));
      out.assign(r.begin(), r.end());
      return out;
    }
    case MetricKind::Center:
      out = centroid_;
      break;
    case MetricKind::LocalCenter: {
      const auto hood = local_neighborhood(members_, nearest_member(g, members_), config_.neighborhood_n);
      out = mean_of(members_, hood);
      break;
    }
    case MetricKind::Subspace:
      throw Error(ErrorCode::PreconditionViolation, "the subspace metric has no single anchor point");
  }
  if (config_.renormalize_mean) normalize_in_place(out);
  return out;
}

double SemanticSpace::subspace_score(std::span<const float> g) const {
  if (!pca_ || pca_->degenerate()) {
    auto mean = centroid_;
    if (config_.renormalize_mean) normalize_in_place(mean);
    return dot(g, mean);
  }
  return project_and_dot(g, *pca_);
}

double SemanticSpace::score(std::span<const float> g) const {
  require_dim(g, members_);
  if (config_.kind == MetricKind::Subspace) return subspace_score(g);
  return dot(g, anchor(g));
}

}  // namespace synspace
