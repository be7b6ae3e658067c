#include "synspace/tta.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "synspace/error.hpp"

namespace synspace {
namespace {

constexpr double kProbFloor = 1e-300;

void check_config(const TtaConfig& c) {
  if (!(c.tau > 0.0) || !std::isfinite(c.tau)) throw Error(ErrorCode::InvalidConfig, "tau must be positive");
  if (!(c.rho > 0.0 && c.rho <= 1.0)) throw Error(ErrorCode::InvalidConfig, "rho must lie in (0, 1]");
  if (!(c.learning_rate >= 0.0) || !std::isfinite(c.learning_rate)) {
    throw Error(ErrorCode::InvalidConfig, "learning rate must be non-negative");
  }
}

void check_shifts(const Matrix& shifts, std::size_t k_count, std::size_t dim) {
  if (shifts.size() != k_count) throw Error(ErrorCode::DimensionMismatch, "one shift vector per class required");
  for (const auto& v : shifts) {
    if (v.size() != dim) throw Error(ErrorCode::DimensionMismatch, "shift vector has wrong dimension");
  }
}

Matrix shifted_probabilities(const EmbeddingSet& views, const Matrix& base, const Matrix& shifts, double tau) {
  Matrix rows(views.size());
  std::vector<double> logits;
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto g = views.row(i);
    logits.resize(base[i].size());
    for (std::size_t k = 0; k < logits.size(); ++k) logits[k] = tau * (base[i][k] + dot(g, shifts[k]));
    rows[i] = softmax(logits);
  }
  return rows;
}

// Marginal over the selected views with accurate logs. Near saturation p_bar_j rounds to 1,
// so its log is taken from the complement (the summed mass of the other classes).
struct Marginal {
  std::vector<double> p;
  std::vector<double> log_p;
};

Marginal marginal(const Matrix& rows, std::span<const std::size_t> selected) {
  const std::size_t k_count = rows.front().size();
  Marginal out{std::vector<double>(k_count, 0.0), std::vector<double>(k_count, 0.0)};
  std::vector<double> rest(k_count, 0.0);
  for (auto i : selected) {
    const auto& r = rows[i];
    const double total = std::accumulate(r.begin(), r.end(), 0.0);
    for (std::size_t k = 0; k < k_count; ++k) {
      out.p[k] += r[k];
      double others = 0.0;
      if (r[k] > 0.5) {
        for (std::size_t j = 0; j < k_count; ++j) others += j == k ? 0.0 : r[j];
      } else {
        others = total - r[k];
      }
      rest[k] += others;
    }
  }
  const double inv_m = 1.0 / static_cast<double>(selected.size());
  for (std::size_t k = 0; k < k_count; ++k) {
    out.p[k] *= inv_m;
    rest[k] *= inv_m;
    out.log_p[k] = out.p[k] > 0.5 ? std::log1p(-rest[k]) : std::log(std::max(out.p[k], kProbFloor));
  }
  return out;
}

double marginal_entropy_of(const Marginal& m) {
  double h = 0.0;
  for (std::size_t k = 0; k < m.p.size(); ++k) {
    if (m.p[k] > 0.0) h -= m.p[k] * m.log_p[k];
  }
  return std::max(0.0, h);
}

}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw Error(ErrorCode::EmptySet, "softmax of no logits");
  double hi = logits[0];
  for (double z : logits) {
    if (!std::isfinite(z)) throw Error(ErrorCode::NumericalOverflow, "non-finite logit");
    hi = std::max(hi, z);
  }
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) sum += (p[k] = std::exp(logits[k] - hi));
  for (double& x : p) x /= sum;
  return p;
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return std::max(0.0, h);
}

Matrix base_view_scores(const EmbeddingSet& views, const ClassCatalog& catalog) {
  if (views.empty()) throw Error(ErrorCode::EmptySet, "episode has no views");
  if (views.dim() != catalog.dim()) throw Error(ErrorCode::DimensionMismatch, "view dimension differs from catalog");
  Matrix out(views.size());
  for (std::size_t i = 0; i < views.size(); ++i) out[i] = catalog.scores(views.row(i));
  return out;
}

Matrix view_scores(const EmbeddingSet& views, const ClassCatalog& catalog, const Matrix& shifts, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidConfig, "tau must be positive");
  check_shifts(shifts, catalog.class_count(), catalog.dim());
  return shifted_probabilities(views, base_view_scores(views, catalog), shifts, tau);
}

std::vector<std::size_t> select_confident(const Matrix& rows, double rho) {
  if (rows.empty()) throw Error(ErrorCode::EmptySet, "no views to select from");
  if (!(rho > 0.0 && rho <= 1.0)) throw Error(ErrorCode::InvalidConfig, "rho must lie in (0, 1]");
  const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(rho * static_cast<double>(rows.size()))));
  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) ranked.emplace_back(entropy(rows[i]), i);
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < m; ++k) out.push_back(ranked[k].second);
  return out;
}

TtaEpisode::TtaEpisode(EmbeddingSet views, const ClassCatalog& catalog, TtaConfig config)
    : views_(std::move(views)), config_(config) {
  check_config(config_);
  base_ = base_view_scores(views_, catalog);
  shifts_.assign(catalog.class_count(), std::vector<double>(catalog.dim(), 0.0));
  selected_ = select_confident(probabilities(), config_.rho);
}

Matrix TtaEpisode::probabilities() const { return probabilities(shifts_); }

Matrix TtaEpisode::probabilities(const Matrix& shifts) const {
  check_shifts(shifts, shifts_.size(), views_.dim());
  return shifted_probabilities(views_, base_, shifts, config_.tau);
}

double TtaEpisode::marginal_entropy(const Matrix& shifts) const {
  return marginal_entropy_of(marginal(probabilities(shifts), selected_));
}

Matrix TtaEpisode::gradient() const {
  const auto rows = probabilities();
  const auto p_bar = marginal(rows, selected_);
  const std::size_t k_count = p_bar.p.size();
  // With a_j = -(log p_bar_j + 1), a_k - sum_j p_ij a_j = sum_j p_ij (log p_bar_j - log p_bar_k),
  // which avoids cancelling two nearly equal terms when the views are confident.
  Matrix grad(k_count, std::vector<double>(views_.dim(), 0.0));
  const double inv_m = 1.0 / static_cast<double>(selected_.size());
  for (auto i : selected_) {
    const auto& p = rows[i];
    const auto g = views_.row(i);
    for (std::size_t k = 0; k < k_count; ++k) {
      double spread = 0.0;
      for (std::size_t j = 0; j < k_count; ++j) spread += p[j] * (p_bar.log_p[j] - p_bar.log_p[k]);
      // Softmax Jacobian: dp_j/dz_k = p_j (delta_jk - p_k); dz_k/dv_k = tau g_i.
      const double dz = inv_m * p[k] * spread * config_.tau;
      if (dz == 0.0) continue;
      for (std::size_t d = 0; d < g.size(); ++d) grad[k][d] += dz * static_cast<double>(g[d]);
    }
  }
  return grad;
}

void TtaEpisode::adapt_step() {
  if (trace_.empty()) trace_.push_back(marginal_entropy());
  const auto grad = gradient();
  for (std::size_t k = 0; k < shifts_.size(); ++k) {
    for (std::size_t d = 0; d < shifts_[k].size(); ++d) shifts_[k][d] -= config_.learning_rate * grad[k][d];
  }
  trace_.push_back(marginal_entropy());
}

void TtaEpisode::set_shifts(Matrix shifts) {
  check_shifts(shifts, shifts_.size(), views_.dim());
  shifts_ = std::move(shifts);
}

Prediction TtaEpisode::predict_adapted() const {
  Prediction p;
  const auto g = views_.row(0);
  p.scores.resize(shifts_.size());
  for (std::size_t k = 0; k < shifts_.size(); ++k) p.scores[k] = base_[0][k] + dot(g, shifts_[k]);
  p.class_id = argmax_lowest(p.scores);
  return p;
}

Prediction TtaEpisode::predict_unadapted() const {
  Prediction p;
  p.scores = base_[0];
  p.class_id = argmax_lowest(p.scores);
  return p;
}

EpisodeResult run_episode(const EmbeddingSet& views, const ClassCatalog& catalog, const TtaConfig& config) {
  TtaEpisode ep(views, catalog, config);
  EpisodeResult r;
  r.unadapted = ep.predict_unadapted();
  ep.adapt_step();
  r.adapted = ep.predict_adapted();
  r.selected = ep.selected();
  r.entropy_trace = ep.entropy_trace();
  r.shifts = ep.shifts();
  return r;
}

}  // namespace synspace
