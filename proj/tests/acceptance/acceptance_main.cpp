// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit when any
// criterion fails. Every check compares against an oracle from tests/support.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "support/episodes.hpp"
#include "support/oracles.hpp"
#include "synspace/analysis.hpp"
#include "synspace/catalog.hpp"
#include "synspace/commands.hpp"
#include "synspace/embedding_io.hpp"
#include "synspace/metrics.hpp"
#include "synspace/synth.hpp"
#include "synspace/topology.hpp"
#include "synspace/tta.hpp"

using namespace synspace;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

oracle::Matrix dense(const SimilarityGraph& g) {
  oracle::Matrix m(g.vertex_count(), std::vector<double>(g.vertex_count(), 1.0));
  for (const auto& e : g.edges()) m[e.i][e.j] = m[e.j][e.i] = e.similarity;
  return m;
}

EmbeddingSet random_generic_set(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<std::size_t> dim(3, 16);
  std::uniform_real_distribution<double> spread(0.2, 1.5);
  return oracle::random_cluster(rng, n, dim(rng), spread(rng));
}

Outcome persistence_matches_single_linkage() {
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<std::size_t> size(1, 12);
  int mismatches = 0;
  double worst_sim = 0.0;
  for (int t = 0; t < 500; ++t) {
    const auto set = random_generic_set(rng, size(rng));
    const auto g = build_similarity_graph(set);
    const auto sim = oracle::similarity_matrix(set);
    for (const auto& e : g.edges()) worst_sim = std::max(worst_sim, std::abs(e.similarity - sim[e.i][e.j]));

    const auto rec = persistence_0d(g);
    const auto expected = oracle::single_linkage(dense(g));
    std::map<std::size_t, std::set<std::size_t>> by_root;
    for (std::size_t v = 0; v < set.size(); ++v) by_root[v] = {v};
    bool same = rec.merges.size() == expected.size();
    for (std::size_t k = 0; same && k < expected.size(); ++k) {
      const auto& m = rec.merges[k];
      const auto& a = by_root.at(m.survivor_root);
      const auto& b = by_root.at(m.absorbed_root);
      same = m.epsilon == expected[k].similarity &&
             ((a == expected[k].left && b == expected[k].right) || (a == expected[k].right && b == expected[k].left));
      by_root[m.survivor_root].insert(b.begin(), b.end());
      by_root.erase(m.absorbed_root);
    }
    mismatches += same ? 0 : 1;
  }
  std::ostringstream d;
  d << "500 sets, " << mismatches << " mismatches, max |sim - oracle| = " << worst_sim;
  return {mismatches == 0 && worst_sim <= 1e-12, d.str()};
}

Outcome dendrogram_consistency() {
  std::mt19937_64 rng(1002);
  std::uniform_int_distribution<std::size_t> size(1, 12);
  int mismatches = 0, checks = 0;
  for (int t = 0; t < 100; ++t) {
    const auto set = random_generic_set(rng, size(rng));
    const auto g = build_similarity_graph(set);
    const auto rec = persistence_0d(g);
    const auto sim = dense(g);
    for (int step = 0; step < 50; ++step) {
      const double eps = -1.0 + 2.0 * step / 49.0;
      auto direct = connected_components(g.vertex_count(), vr_complex_at(g, eps));
      const auto cut = cut_merge_tree(rec, eps);
      const bool agree_cut = direct == cut;
      std::sort(direct.begin(), direct.end());
      const bool agree_dfs = direct == oracle::threshold_components(sim, eps);
      mismatches += (agree_cut && agree_dfs) ? 0 : 1;
      ++checks;
    }
  }
  std::ostringstream d;
  d << checks << " (set, eps) pairs, " << mismatches << " mismatches";
  return {mismatches == 0, d.str()};
}

Outcome metric_boundaries() {
  std::mt19937_64 rng(1003);
  std::uniform_int_distribution<std::size_t> size(1, 40), dim(2, 32);
  std::uniform_real_distribution<double> spread(0.05, 1.0);
  double worst_set = 0.0, worst_center = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto d = dim(rng);
    const auto s = oracle::random_cluster(rng, size(rng), d, spread(rng));
    const auto g = oracle::random_unit(rng, d);
    worst_set = std::max(worst_set, std::abs(sim_point_to_local_center(g, s, 1) - sim_point_to_set(g, s)));
    worst_center =
        std::max(worst_center, std::abs(sim_point_to_local_center(g, s, s.size()) - sim_point_to_center(g, s)));
  }
  std::ostringstream d;
  d << "1000 pairs, max |lc(1) - set| = " << worst_set << ", max |lc(|S|) - center| = " << worst_center;
  return {worst_set <= 1e-9 && worst_center <= 1e-9, d.str()};
}

Outcome tta_gradient() {
  std::mt19937_64 rng(1004);
  std::uniform_int_distribution<std::size_t> classes(2, 5), dim(4, 16), views(2, 16);
  std::uniform_real_distribution<double> rho(0.2, 1.0);
  double worst = 0.0;
  int bitwise_failures = 0;
  const int episodes = 120;
  for (int t = 0; t < episodes; ++t) {
    auto ep = oracle::random_episode(rng, classes(rng), dim(rng), views(rng));
    TtaEpisode episode(ep.views, ep.catalog, {100.0, rho(rng), 5e-4});
    worst = std::max(worst, oracle::gradient_error(episode, 1e-4));

    const auto frozen = run_episode(ep.views, ep.catalog, {100.0, 0.5, 0.0});
    const auto plain = predict(ep.views.row(0), ep.catalog);
    if (frozen.adapted.scores != plain.scores || frozen.adapted.class_id != plain.class_id) ++bitwise_failures;
  }
  std::ostringstream d;
  d << episodes << " episodes, max relative error " << worst << ", eta=0 bitwise mismatches " << bitwise_failures;
  return {worst <= 1e-4 && bitwise_failures == 0, d.str()};
}

Outcome homology_ablation() {
  SynthParams p;
  p.seed = 7;
  p.classes = 5;
  p.synonyms = 40;
  p.outlier_rate = 0.1;
  p.queries = 500;
  p.episodes = 0;
  const auto bench = generate_benchmark(p);

  std::vector<ClassLexicon> lexicons;
  InMemoryEmbeddingProvider provider;
  for (std::size_t k = 0; k < bench.classes.size(); ++k) {
    lexicons.push_back(bench.classes[k].lexicon);
    provider.set(static_cast<int>(k), bench.classes[k].embeddings);
  }
  const MetricConfig metric{MetricKind::LocalCenter, 20};
  const auto filtered = ClassCatalog::build(lexicons, provider, {FilterMode::FixedThreshold, 0.9}, metric);
  const auto unfiltered = ClassCatalog::build(lexicons, provider, {FilterMode::Unfiltered, 0.9}, metric);
  const auto labels = integer_labels(bench.queries);
  const double acc_f = evaluate(bench.queries, labels, filtered).top1_accuracy;
  const double acc_u = evaluate(bench.queries, labels, unfiltered).top1_accuracy;

  std::size_t clean_cores = 0, planted = 0, excluded = 0;
  for (std::size_t k = 0; k < bench.classes.size(); ++k) {
    const auto& members = filtered.entry(k).core.members;
    bool clean = true;
    for (auto o : bench.classes[k].outliers) {
      ++planted;
      const bool kept = std::binary_search(members.begin(), members.end(), o);
      excluded += kept ? 0 : 1;
      clean = clean && !kept;
    }
    clean_cores += clean ? 1 : 0;
  }
  const double clean_fraction = static_cast<double>(clean_cores) / static_cast<double>(bench.classes.size());
  std::ostringstream d;
  d << "top-1 filtered " << acc_f << " vs unfiltered " << acc_u << " (margin " << acc_f - acc_u << "), "
    << clean_cores << "/" << bench.classes.size() << " cores free of outliers, " << excluded << "/" << planted
    << " planted outliers excluded";
  return {acc_f >= acc_u && clean_fraction >= 0.9, d.str()};
}

Outcome compactness_anchors() {
  const EmbeddingSet identical(5, std::vector<float>{0.2f, 0.4f, 0.4f, 0.8f, 0.0f, 0.2f, 0.4f, 0.4f, 0.8f, 0.0f,
                                                     0.2f, 0.4f, 0.4f, 0.8f, 0.0f});
  const EmbeddingSet antipodal(5, std::vector<float>{1, 0, 0, 0, 0, -1, 0, 0, 0, 0});
  const bool exact = compactness(identical) == 1.0 && compactness(antipodal) == 0.0;

  std::mt19937_64 rng(1006);
  const auto cluster = oracle::random_cluster(rng, 50, 24, 0.05);
  std::vector<double> mu(cluster.dim(), 0.0);
  for (std::size_t i = 0; i < cluster.size(); ++i)
    for (std::size_t d = 0; d < cluster.dim(); ++d) mu[d] += cluster.row(i)[d];
  for (auto& x : mu) x /= static_cast<double>(cluster.size());
  oracle::Matrix cov(cluster.dim(), std::vector<double>(cluster.dim(), 0.0));
  for (std::size_t i = 0; i < cluster.size(); ++i)
    for (std::size_t a = 0; a < cluster.dim(); ++a)
      for (std::size_t b = 0; b < cluster.dim(); ++b)
        cov[a][b] += (cluster.row(i)[a] - mu[a]) * (cluster.row(i)[b] - mu[b]) / static_cast<double>(cluster.size());
  double trace = 0.0;
  for (std::size_t d = 0; d < cluster.dim(); ++d) trace += cov[d][d];
  const double diff = std::abs(compactness(cluster) - (1.0 - trace));

  std::ostringstream d;
  d << "identical " << compactness(identical) << ", antipodal " << compactness(antipodal)
    << ", cluster vs covariance trace |diff| = " << diff;
  return {exact && diff <= 1e-10, d.str()};
}

std::string read_all(const fs::path& p) {
  const auto b = read_file_bytes(p);
  return {b.begin(), b.end()};
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "synspace_acceptance_determinism";
  auto run_once = [&](std::string& bytes) -> bool {
    fs::remove_all(root);
    std::ostringstream out, err;
    auto ok = [&](std::vector<std::string> args) { return run_cli(args, out, err) == 0; };
    const auto bench = root / "bench";
    const auto cat = (root / "catalog").string();
    const auto rep = (root / "report").string();
    if (!ok({"synth", "--out", bench.string()})) return false;
    if (!ok({"build", "--lexicon", (bench / "lexicon.json").string(), "--embeddings", (bench / "embeddings").string(),
             "--catalog", cat}))
      return false;
    if (!ok({"classify", "--catalog", cat, "--queries", (bench / "queries.s3em").string(), "--report", rep})) return false;
    if (!ok({"tta", "--catalog", cat, "--episodes", (bench / "episodes").string(), "--report", rep})) return false;
    bytes.clear();
    for (const auto* name : {"report.json", "per_class.csv", "tta_report.json", "tta_episodes.csv"})
      bytes += read_all(fs::path(rep) / name);
    bytes += read_all(fs::path(cat) / "catalog.json");
    return true;
  };
  std::string first, second;
  const bool ran = run_once(first) && run_once(second);
  fs::remove_all(root);
  std::ostringstream d;
  d << "synth -> build -> classify -> tta twice, " << first.size() << " report bytes, "
    << (ran ? (first == second ? "identical" : "DIFFERENT") : "pipeline failed");
  return {ran && !first.empty() && first == second, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"persistence merges equal brute-force single linkage", persistence_matches_single_linkage},
      {"vr components equal merge-tree cuts on a 50-value grid", dendrogram_consistency},
      {"local-center boundary identities within 1e-9", metric_boundaries},
      {"tta analytic gradient within 1e-4 and eta=0 is bitwise plain", tta_gradient},
      {"homology filtering does not lower top-1 on the seed-7 benchmark", homology_ablation},
      {"compactness anchors and covariance-trace oracle", compactness_anchors},
      {"pipeline reports are byte-identical across runs", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  %s  [%s] (%.2fs)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
