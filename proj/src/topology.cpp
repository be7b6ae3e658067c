#include "synspace/topology.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "synspace/error.hpp"

namespace synspace {
namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    std::size_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const std::size_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  std::size_t size(std::size_t root) const { return size_[root]; }

  // Attaches `absorbed` under `survivor`; both must be roots.
  void attach(std::size_t survivor, std::size_t absorbed) {
    parent_[absorbed] = survivor;
    size_[survivor] += size_[absorbed];
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b] || (size_[a] == size_[b] && b < a)) std::swap(a, b);
    attach(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

Components group(UnionFind& uf, std::size_t n) {
  std::vector<std::size_t> slot(n, n);
  Components out;
  for (std::size_t v = 0; v < n; ++v) {
    const auto r = uf.find(v);
    if (slot[r] == n) {
      slot[r] = out.size();
      out.emplace_back();
    }
    out[slot[r]].push_back(v);
  }
  return out;
}

std::size_t pair_index(std::size_t n, std::size_t i, std::size_t j) {
  // Offset of row i in the strict upper triangle, plus column offset.
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

double mean_internal_similarity(const SimilarityGraph& graph, const std::vector<std::size_t>& members) {
  if (members.size() < 2) return 1.0;
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t a = 0; a < members.size(); ++a) {
    for (std::size_t b = a + 1; b < members.size(); ++b) {
      acc += graph.similarity(members[a], members[b]);
      ++count;
    }
  }
  return acc / static_cast<double>(count);
}

void check_epsilon(double epsilon) {
  if (!(epsilon >= -1.0 && epsilon <= 1.0)) {
    throw Error(ErrorCode::PreconditionViolation, "epsilon " + std::to_string(epsilon) + " outside [-1, 1]");
  }
}

}  // namespace

SimilarityGraph::SimilarityGraph(std::size_t n, std::span<const double> upper) : n_(n) {
  if (upper.size() != n * (n - (n > 0 ? 1 : 0)) / 2) {
    throw Error(ErrorCode::DimensionMismatch, "similarity list does not match vertex count");
  }
  edges_.reserve(upper.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) edges_.push_back({i, j, std::clamp(upper[k++], -1.0, 1.0)});
  }
}

double SimilarityGraph::similarity(std::size_t i, std::size_t j) const {
  if (i == j) return 1.0;
  if (i > j) std::swap(i, j);
  if (j >= n_) throw Error(ErrorCode::PreconditionViolation, "vertex index out of range");
  return edges_[pair_index(n_, i, j)].similarity;
}

SimilarityGraph build_similarity_graph(const EmbeddingSet& set) {
  const std::size_t n = set.size();
  if (n == 0) throw Error(ErrorCode::EmptySet, "cannot build a similarity graph of an empty set");
  std::vector<double> upper;
  upper.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) upper.push_back(cosine(set.row(i), set.row(j)));
  }
  return SimilarityGraph(n, upper);
}

std::vector<SimilarityEdge> vr_complex_at(const SimilarityGraph& graph, double epsilon) {
  check_epsilon(epsilon);
  std::vector<SimilarityEdge> out;
  for (const auto& e : graph.edges()) {
    if (e.similarity >= epsilon) out.push_back(e);
  }
  return out;
}

PersistenceRecord persistence_0d(const SimilarityGraph& graph) {
  const std::size_t n = graph.vertex_count();
  if (n == 0) throw Error(ErrorCode::EmptySet, "persistence of an empty graph");
  std::vector<SimilarityEdge> order = graph.edges();
  std::stable_sort(order.begin(), order.end(),
                   [](const SimilarityEdge& a, const SimilarityEdge& b) { return a.similarity > b.similarity; });

  PersistenceRecord rec;
  rec.vertex_count = n;
  rec.bars.reserve(n);
  rec.merges.reserve(n - 1);
  UnionFind uf(n);
  for (const auto& e : order) {
    std::size_t a = uf.find(e.i);
    std::size_t b = uf.find(e.j);
    if (a == b) continue;
    if (uf.size(a) < uf.size(b) || (uf.size(a) == uf.size(b) && b < a)) std::swap(a, b);
    uf.attach(a, b);
    rec.bars.push_back({1.0, e.similarity, b});
    rec.merges.push_back({e.similarity, a, b});
    if (rec.merges.size() == n - 1) break;
  }
  rec.bars.push_back({1.0, kEssentialDeath, uf.find(0)});
  return rec;
}

Components connected_components(std::size_t n, std::span<const SimilarityEdge> edges) {
  UnionFind uf(n);
  for (const auto& e : edges) uf.unite(e.i, e.j);
  return group(uf, n);
}

Components cut_merge_tree(const PersistenceRecord& record, double epsilon) {
  UnionFind uf(record.vertex_count);
  for (const auto& m : record.merges) {
    if (m.epsilon < epsilon) break;
    uf.unite(m.survivor_root, m.absorbed_root);
  }
  return group(uf, record.vertex_count);
}

double auto_epsilon(const PersistenceRecord& record) {
  if (record.merges.empty()) return 1.0;
  const double lowest = record.merges.back().epsilon;
  for (auto it = record.merges.rbegin(); it != record.merges.rend(); ++it) {
    if (it->epsilon > lowest) return 0.5 * (lowest + it->epsilon);
  }
  return std::min(1.0, lowest + 1e-6);
}

CoreComponent largest_component(const SimilarityGraph& graph, const TopologyConfig& config) {
  const std::size_t n = graph.vertex_count();
  if (n == 0) throw Error(ErrorCode::EmptySet, "cannot extract a component from an empty set");

  CoreComponent core;
  core.mode = config.mode;
  Components comps;
  if (config.mode == CoreMode::FixedThreshold) {
    if (!(config.fixed_epsilon >= 0.0 && config.fixed_epsilon <= 1.0)) {
      throw Error(ErrorCode::PreconditionViolation, "fixed epsilon must lie in [0, 1]");
    }
    core.epsilon_used = config.fixed_epsilon;
    comps = connected_components(n, vr_complex_at(graph, core.epsilon_used));
  } else {
    const auto record = persistence_0d(graph);
    core.epsilon_used = auto_epsilon(record);
    comps = cut_merge_tree(record, core.epsilon_used);
  }

  std::size_t best = 0;
  double best_mean = mean_internal_similarity(graph, comps[0]);
  for (std::size_t c = 1; c < comps.size(); ++c) {
    if (comps[c].size() < comps[best].size()) continue;
    const double mean = mean_internal_similarity(graph, comps[c]);
    // Components are ordered by smallest member, so strict comparisons keep
    // the lower minimum index on a full tie.
    if (comps[c].size() > comps[best].size() || mean > best_mean) {
      best = c;
      best_mean = mean;
    }
  }
  core.members = std::move(comps[best]);
  return core;
}

CoreComponent largest_component(const EmbeddingSet& set, const TopologyConfig& config) {
  if (set.empty()) throw Error(ErrorCode::EmptySet, "cannot extract a component from an empty set");
  return largest_component(build_similarity_graph(set), config);
}

}  // namespace synspace
