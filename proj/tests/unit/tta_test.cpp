#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "support/episodes.hpp"
#include "synspace/error.hpp"
#include "synspace/tta.hpp"

using namespace synspace;

namespace {

Matrix zeros(std::size_t k, std::size_t d) { return Matrix(k, std::vector<double>(d, 0.0)); }

}  // namespace

TEST(Softmax, RowsSumToOneAndSurviveLargeLogits) {
  const std::vector<double> big{1000.0, 1001.0, 999.0};
  const auto p = softmax(big);
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
  EXPECT_GT(p[1], p[0]);
  const std::vector<double> bad{1.0, INFINITY};
  EXPECT_THROW(softmax(bad), Error);
  EXPECT_EQ(entropy(std::vector<double>{1.0, 0.0}), 0.0);
  EXPECT_NEAR(entropy(std::vector<double>{0.5, 0.5}), std::log(2.0), 1e-15);
}

TEST(ViewScores, ZeroShiftAndSingleClass) {
  std::mt19937_64 rng(1);
  auto ep = oracle::random_episode(rng, 3, 8, 5);
  const auto rows = view_scores(ep.views, ep.catalog, zeros(3, 8), 100.0);
  for (std::size_t i = 0; i < ep.views.size(); ++i) {
    auto logits = ep.catalog.scores(ep.views.row(i));
    for (auto& z : logits) z *= 100.0;
    const auto expected = softmax(logits);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(rows[i][k], expected[k]);
    EXPECT_NEAR(std::accumulate(rows[i].begin(), rows[i].end(), 0.0), 1.0, 1e-9);
  }
  auto one = oracle::random_episode(rng, 1, 8, 4);
  for (const auto& row : view_scores(one.views, one.catalog, zeros(1, 8), 100.0)) EXPECT_EQ(row, std::vector<double>{1.0});
}

TEST(ViewScores, ShiftAlongViewRaisesThatLogit) {
  std::mt19937_64 rng(2);
  auto ep = oracle::random_episode(rng, 3, 8, 4);
  const double tau = 100.0, c = 0.01;
  TtaEpisode episode(ep.views, ep.catalog, {tau, 0.5, 0.0});
  auto shifts = zeros(3, 8);
  const auto g = ep.views.row(2);
  for (std::size_t d = 0; d < 8; ++d) shifts[1][d] = c * g[d];
  const auto before = episode.probabilities();
  const auto after = episode.probabilities(shifts);
  // log p_1 - log p_0 moves by exactly tau * c * |g|^2 = tau * c.
  const double moved = (std::log(after[2][1]) - std::log(after[2][0])) - (std::log(before[2][1]) - std::log(before[2][0]));
  EXPECT_NEAR(moved, tau * c * oracle::dot(g, g), 1e-9);
  EXPECT_NEAR(moved, tau * c, 1e-5);
}

TEST(SelectConfident, CountsAndOrder) {
  Matrix rows(8);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& r : rows) {
    r = {u(rng), u(rng), u(rng)};
    const double s = r[0] + r[1] + r[2];
    for (auto& x : r) x /= s;
  }
  const auto picked = select_confident(rows, 0.25);
  ASSERT_EQ(picked.size(), 2u);
  std::vector<std::size_t> order(8);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return entropy(rows[a]) < entropy(rows[b]); });
  EXPECT_EQ(picked, (std::vector<std::size_t>{order[0], order[1]}));

  rows[5] = {0.0, 1.0, 0.0};
  EXPECT_EQ(select_confident(rows, 0.1).front(), 5u);

  const Matrix same(10, {0.2, 0.3, 0.5});
  EXPECT_EQ(select_confident(same, 0.3), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(select_confident(same, 0.01).size(), 1u);
  EXPECT_THROW(select_confident(same, 0.0), Error);
}

TEST(Gradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 30; ++t) {
    auto ep = oracle::random_episode(rng, 3, 8, 10);
    TtaEpisode episode(ep.views, ep.catalog, {100.0, 0.3, 5e-4});
    EXPECT_LE(oracle::gradient_error(episode, 1e-4), 1e-4);
  }
}

TEST(Gradient, HoldsAwayFromZeroShift) {
  std::mt19937_64 rng(5);
  auto ep = oracle::random_episode(rng, 4, 6, 8);
  TtaEpisode episode(ep.views, ep.catalog, {100.0, 0.5, 5e-4});
  std::normal_distribution<double> nd(0.0, 0.01);
  auto shifts = zeros(4, 6);
  for (auto& v : shifts)
    for (auto& x : v) x = nd(rng);
  episode.set_shifts(shifts);
  EXPECT_LE(oracle::gradient_error(episode, 1e-4), 1e-4);
}

TEST(AdaptStep, IsADescentDirection) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 20; ++t) {
    auto ep = oracle::random_episode(rng, 3, 8, 10);
    TtaEpisode base(ep.views, ep.catalog, {100.0, 0.3, 5e-4});
    const double l0 = base.marginal_entropy();
    const auto grad = base.gradient();
    double eta = 1e-2;
    bool decreased = false;
    for (int halving = 0; halving <= 10 && !decreased; ++halving, eta /= 2.0) {
      auto shifts = base.shifts();
      for (std::size_t k = 0; k < shifts.size(); ++k)
        for (std::size_t d = 0; d < shifts[k].size(); ++d) shifts[k][d] -= eta * grad[k][d];
      decreased = base.marginal_entropy(shifts) < l0;
    }
    EXPECT_TRUE(decreased);
  }
}

TEST(AdaptStep, ZeroLearningRateReproducesPlainPrediction) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    auto ep = oracle::random_episode(rng, 4, 8, 8);
    const auto r = run_episode(ep.views, ep.catalog, {100.0, 0.25, 0.0});
    const auto plain = predict(ep.views.row(0), ep.catalog);
    EXPECT_EQ(r.adapted.scores, plain.scores);
    EXPECT_EQ(r.adapted.class_id, plain.class_id);
    EXPECT_EQ(r.unadapted.scores, plain.scores);
    for (const auto& v : r.shifts)
      for (double x : v) EXPECT_EQ(x, 0.0);
  }
}

TEST(AdaptStep, ExactlyOneStepAndTraceRecorded) {
  std::mt19937_64 rng(8);
  auto ep = oracle::random_episode(rng, 3, 8, 16);
  const auto r = run_episode(ep.views, ep.catalog, {});
  EXPECT_EQ(r.selected.size(), 1u);
  ASSERT_EQ(r.entropy_trace.size(), 2u);
  TtaEpisode manual(ep.views, ep.catalog, {});
  manual.adapt_step();
  EXPECT_EQ(manual.shifts(), r.shifts);
}

TEST(PredictAdapted, ShiftAlongOriginalAddsInnerProduct) {
  std::mt19937_64 rng(9);
  auto ep = oracle::random_episode(rng, 3, 8, 4);
  TtaEpisode episode(ep.views, ep.catalog, {});
  auto shifts = zeros(3, 8);
  const auto g = ep.views.row(0);
  for (std::size_t d = 0; d < 8; ++d) shifts[1][d] = 0.5 * g[d];
  const auto before = episode.predict_adapted();
  EXPECT_EQ(before.scores, predict(g, ep.catalog).scores);
  episode.set_shifts(shifts);
  const auto after = episode.predict_adapted();
  EXPECT_NEAR(after.scores[1] - before.scores[1], 0.5, 1e-6);
  EXPECT_EQ(after.scores[0], before.scores[0]);
}

TEST(PredictAdapted, AgreeingViewsFlipANarrowMistake) {
  // Class 0 is a single text along e1, class 1 along e2. The original view
  // leans slightly to class 0; every augmentation leans a little further to class 1.
  InMemoryEmbeddingProvider provider;
  provider.set(0, EmbeddingSet(3, {1, 0, 0}));
  provider.set(1, EmbeddingSet(3, {0, 1, 0}));
  const std::vector<ClassLexicon> lex{{"a", "t", {"a"}, {}}, {"b", "t", {"b"}, {}}};
  const auto catalog = ClassCatalog::build(lex, provider, {}, {});

  EmbeddingSet views(3);
  views.add(normalize(std::vector<float>{0.70f, 0.69f, 0.2f}).values());
  for (int i = 1; i < 10; ++i) views.add(normalize(std::vector<float>{0.68f, 0.72f, 0.2f}).values());
  TtaEpisode episode(views, catalog, {100.0, 0.5, 5e-3});
  const auto before = episode.predict_unadapted();
  EXPECT_EQ(before.class_id, 0);
  EXPECT_LT(before.scores[0] - before.scores[1], 0.02);

  episode.adapt_step();
  const auto after = episode.predict_adapted();
  // Brute-force check of the shifted scores.
  for (std::size_t k = 0; k < 2; ++k) {
    double shifted = before.scores[k];
    for (std::size_t d = 0; d < 3; ++d) shifted += views.row(0)[d] * episode.shifts()[k][d];
    EXPECT_NEAR(after.scores[k], shifted, 1e-12);
  }
  EXPECT_EQ(after.class_id, 1);
  EXPECT_LT(episode.entropy_trace().back(), episode.entropy_trace().front());
}

TEST(Shifts, NeighbourhoodSelectionIsShiftInvariant) {
  // Adding one vector to every member adds <g, v> to every similarity, so
  // f* and N(f*) stay put.
  std::mt19937_64 rng(10);
  for (int t = 0; t < 50; ++t) {
    const auto s = oracle::random_cluster(rng, 15, 6, 0.5);
    const auto g = oracle::random_unit(rng, 6);
    const auto v = oracle::random_unit(rng, 6);
    std::vector<double> sims, shifted;
    for (std::size_t i = 0; i < s.size(); ++i) {
      double a = oracle::dot(g, s.row(i)), b = a;
      for (std::size_t d = 0; d < 6; ++d) b += g[d] * 0.3 * v[d];
      sims.push_back(a);
      shifted.push_back(b);
    }
    const auto best = std::max_element(sims.begin(), sims.end()) - sims.begin();
    const auto best_shifted = std::max_element(shifted.begin(), shifted.end()) - shifted.begin();
    EXPECT_EQ(best, best_shifted);
  }
}

TEST(TtaConfig, RejectsBadKnobs) {
  std::mt19937_64 rng(11);
  auto ep = oracle::random_episode(rng, 2, 4, 4);
  EXPECT_THROW(TtaEpisode(ep.views, ep.catalog, {0.0, 0.1, 1e-3}), Error);
  EXPECT_THROW(TtaEpisode(ep.views, ep.catalog, {100.0, 1.5, 1e-3}), Error);
  EXPECT_THROW(TtaEpisode(ep.views, ep.catalog, {100.0, 0.1, -1.0}), Error);
}
