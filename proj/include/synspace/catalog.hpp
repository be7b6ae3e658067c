#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synspace/embedding.hpp"
#include "synspace/metrics.hpp"
#include "synspace/textgen.hpp"
#include "synspace/topology.hpp"

namespace synspace {

/// How the core S0 is chosen from a class's embeddings. `Unfiltered` keeps
/// every member and exists for the homology ablation.
enum class FilterMode { FixedThreshold, AutoPersistence, Unfiltered };

struct FilterConfig {
  FilterMode mode = FilterMode::FixedThreshold;
  double epsilon = 0.9;
};

std::string_view filter_mode_name(FilterMode mode) noexcept;
FilterMode parse_filter_mode(std::string_view name);

/// Supplies the text embeddings of a class, aligned with its rendered texts.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::optional<EmbeddingSet> embeddings_for(int class_id, const ClassLexicon& lexicon) const = 0;
};

/// Reads <dir>/<class_id>.s3em, falling back to <dir>/<class name>.s3em and
/// the .tsv text format.
class DirectoryEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit DirectoryEmbeddingProvider(std::filesystem::path dir) : dir_(std::move(dir)) {}
  std::optional<EmbeddingSet> embeddings_for(int class_id, const ClassLexicon& lexicon) const override;

 private:
  std::filesystem::path dir_;
};

class InMemoryEmbeddingProvider final : public EmbeddingProvider {
 public:
  void set(int class_id, EmbeddingSet set) { sets_.insert_or_assign(class_id, std::move(set)); }
  std::optional<EmbeddingSet> embeddings_for(int class_id, const ClassLexicon& lexicon) const override;

 private:
  std::map<int, EmbeddingSet> sets_;
};

struct ClassEntry {
  int id = 0;
  ClassLexicon lexicon;
  std::vector<std::string> texts;
  EmbeddingSet embeddings;  // unit-normalized, aligned with texts
  CoreComponent core;
  SemanticSpace space;
};

/// Immutable set of per-class semantic spaces.
class ClassCatalog {
 public:
  static ClassCatalog build(const std::vector<ClassLexicon>& lexicons, const EmbeddingProvider& provider,
                            const FilterConfig& filter, const MetricConfig& metric);

  /// Directory layout: catalog.json plus one class_NNNN.s3em per class.
  static ClassCatalog load(const std::filesystem::path& dir);
  void save(const std::filesystem::path& dir) const;

  /// Same classes and cores, different similarity metric.
  ClassCatalog with_metric(const MetricConfig& metric) const;

  std::size_t dim() const noexcept { return dim_; }
  std::size_t class_count() const noexcept { return classes_.size(); }
  const ClassEntry& entry(std::size_t k) const { return classes_.at(k); }
  const std::vector<ClassEntry>& classes() const noexcept { return classes_; }
  const FilterConfig& filter() const noexcept { return filter_; }
  const MetricConfig& metric() const noexcept { return metric_; }
  /// SHA-256 over lexicons, embeddings and configuration.
  const std::string& input_hash() const noexcept { return input_hash_; }

  /// sim(g, S0_k) for every class.
  std::vector<double> scores(std::span<const float> g) const;

 private:
  ClassCatalog() = default;
  void compute_hash();

  std::size_t dim_ = 0;
  std::vector<ClassEntry> classes_;
  FilterConfig filter_;
  MetricConfig metric_;
  std::string input_hash_;
};

CoreComponent select_core(const EmbeddingSet& embeddings, const FilterConfig& filter);

/// Index of the maximum, ties to the lowest index.
int argmax_lowest(std::span<const double> scores);

struct Prediction {
  int class_id = 0;
  std::vector<double> scores;
};

Prediction predict(std::span<const float> g, const ClassCatalog& catalog);

struct EvaluationReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  double top1_accuracy = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::vector<std::size_t> per_class_count;
  std::vector<double> per_class_accuracy;  // NaN for classes without queries
  std::vector<int> predictions;
};

EvaluationReport evaluate(const EmbeddingSet& queries, std::span<const int> labels, const ClassCatalog& catalog);

/// Reads integer class labels from the label block of a query set.
std::vector<int> integer_labels(const EmbeddingSet& queries);

/// True when the predicted class is unchanged under c*score + b for a fixed
/// set of (c > 0, b) pairs.
bool argmax_invariance_check(const ClassCatalog& catalog, std::span<const float> g);

}  // namespace synspace
