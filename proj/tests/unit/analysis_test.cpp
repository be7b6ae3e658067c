#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"
#include "synspace/analysis.hpp"
#include "synspace/error.hpp"

using namespace synspace;

namespace {

// 1 - trace of the explicit 1/n covariance matrix.
double covariance_oracle(const EmbeddingSet& s) {
  const std::size_t n = s.size(), dim = s.dim();
  std::vector<double> mu(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dim; ++d) mu[d] += s.row(i)[d];
  for (auto& x : mu) x /= static_cast<double>(n);
  oracle::Matrix cov(dim, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < dim; ++b) cov[a][b] += (s.row(i)[a] - mu[a]) * (s.row(i)[b] - mu[b]);
  double trace = 0.0;
  for (std::size_t d = 0; d < dim; ++d) trace += cov[d][d] / static_cast<double>(n);
  return 1.0 - trace;
}

EmbeddingSet add_noise(const EmbeddingSet& s, std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> nd(0.0, sigma);
  EmbeddingSet out(s.dim());
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::vector<float> v(s.row(i).begin(), s.row(i).end());
    for (auto& x : v) x += static_cast<float>(nd(rng));
    out.add(normalize(std::span<const float>(v)).values());
  }
  return out;
}

}  // namespace

TEST(Compactness, Anchors) {
  const EmbeddingSet same(3, {0.6f, 0.8f, 0, 0.6f, 0.8f, 0, 0.6f, 0.8f, 0, 0.6f, 0.8f, 0});
  EXPECT_EQ(compactness(same), 1.0);
  const EmbeddingSet antipodal(4, {1, 0, 0, 0, -1, 0, 0, 0});
  EXPECT_EQ(compactness(antipodal), 0.0);
  EXPECT_THROW(compactness(EmbeddingSet(3)), Error);
}

TEST(Compactness, MatchesCovarianceTrace) {
  std::mt19937_64 rng(50);
  for (int t = 0; t < 20; ++t) {
    const auto s = oracle::random_cluster(rng, 50, 16, 0.05);
    EXPECT_NEAR(compactness(s), covariance_oracle(s), 1e-10);
    EXPECT_LE(compactness(s), 1.0);
  }
}

TEST(Compactness, PermutationAndRotationInvariant) {
  std::mt19937_64 rng(51);
  const auto s = oracle::random_cluster(rng, 20, 3, 0.3);
  std::vector<std::size_t> perm(s.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = perm.size() - 1 - i;
  EXPECT_NEAR(compactness(s.subset(perm)), compactness(s), 1e-12);

  // Rotation by 90 degrees in the (x, y) plane.
  EmbeddingSet rotated(3);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto r = s.row(i);
    rotated.add(std::vector<float>{-r[1], r[0], r[2]});
  }
  EXPECT_NEAR(compactness(rotated), compactness(s), 1e-12);
}

TEST(Compare, IdenticalAndNoisyPopulations) {
  std::mt19937_64 rng(52);
  std::vector<NamedGroup> a, b;
  for (int g = 0; g < 5; ++g) {
    a.push_back({"g" + std::to_string(g), oracle::random_cluster(rng, 40, 32, 0.05)});
    b.push_back({a.back().group_id, add_noise(a.back().members, rng, 0.05)});
  }
  const auto same = compare_populations(a, a);
  EXPECT_EQ(same.a.mean_compactness, same.b.mean_compactness);
  const auto noisy = compare_populations(a, b);
  EXPECT_GT(noisy.a.mean_compactness, noisy.b.mean_compactness);

  const std::vector<NamedGroup> one{a.front()};
  const auto single = compare_populations(one, one);
  EXPECT_EQ(single.a.per_group.size(), 1u);
  EXPECT_EQ(single.b.per_group.size(), 1u);
}

TEST(Compare, CsvLayout) {
  const std::vector<NamedGroup> a{{"x", EmbeddingSet(2, {1, 0, -1, 0})}};
  const std::vector<NamedGroup> b{{"y", EmbeddingSet(2, {0, 1, 0, 1})}};
  EXPECT_EQ(comparison_csv(compare_populations(a, b)), "population,group_id,compactness\na,x,0\nb,y,1\n");
}
