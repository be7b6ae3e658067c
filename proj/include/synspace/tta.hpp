#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "synspace/catalog.hpp"
#include "synspace/embedding.hpp"

namespace synspace {

struct TtaConfig {
  double tau = 100.0;          // logit scale
  double rho = 0.1;            // fraction of views kept for the marginal
  double learning_rate = 5e-4;
};

using Matrix = std::vector<std::vector<double>>;

/// Max-subtracted softmax; throws NumericalOverflow on non-finite logits.
std::vector<double> softmax(std::span<const double> logits);
/// Shannon entropy in nats, with 0 log 0 = 0.
double entropy(std::span<const double> p);

/// Unshifted similarities s[i][k] = sim(views[i], S0_k).
Matrix base_view_scores(const EmbeddingSet& views, const ClassCatalog& catalog);

/// Softmax rows of tau * (s[i][k] + <g_i, v_k>). A uniform shift of a space
/// adds <g_i, v_k> to every member similarity, so f* and N(f*) are the same
/// as in the unshifted space.
Matrix view_scores(const EmbeddingSet& views, const ClassCatalog& catalog, const Matrix& shifts, double tau);

/// Indices of the max(1, floor(rho * M)) lowest-entropy rows, ties to the
/// lower index, in selection order.
std::vector<std::size_t> select_confident(const Matrix& rows, double rho);

/// One test sample: M views (original first) and per-class shift vectors.
class TtaEpisode {
 public:
  TtaEpisode(EmbeddingSet views, const ClassCatalog& catalog, TtaConfig config);

  const EmbeddingSet& views() const noexcept { return views_; }
  const TtaConfig& config() const noexcept { return config_; }
  const Matrix& base_scores() const noexcept { return base_; }
  const Matrix& shifts() const noexcept { return shifts_; }
  const std::vector<std::size_t>& selected() const noexcept { return selected_; }
  /// Marginal entropy before and after each step taken so far.
  const std::vector<double>& entropy_trace() const noexcept { return trace_; }

  Matrix probabilities() const;
  Matrix probabilities(const Matrix& shifts) const;
  double marginal_entropy() const { return marginal_entropy(shifts_); }
  double marginal_entropy(const Matrix& shifts) const;
  /// dL/dv_k for the marginal entropy over the selected views.
  Matrix gradient() const;

  /// v <- v - lr * dL/dv.
  void adapt_step();
  void set_shifts(Matrix shifts);

  /// Scores of views[0] against the shifted spaces.
  Prediction predict_adapted() const;
  Prediction predict_unadapted() const;

 private:
  EmbeddingSet views_;
  TtaConfig config_;
  Matrix base_;
  Matrix shifts_;
  std::vector<std::size_t> selected_;
  std::vector<double> trace_;
};

struct EpisodeResult {
  Prediction unadapted;
  Prediction adapted;
  std::vector<std::size_t> selected;
  std::vector<double> entropy_trace;
  Matrix shifts;
};

/// Fresh zero shifts, one gradient step, adapted prediction.
EpisodeResult run_episode(const EmbeddingSet& views, const ClassCatalog& catalog, const TtaConfig& config);

}  // namespace synspace
