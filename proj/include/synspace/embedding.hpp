#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace synspace {

// Unit-normalization threshold below which a vector is treated as zero.
inline constexpr double kZeroNormTolerance = 1e-12;

/// A single embedding vector. Values are stored as float32 (the file
/// precision); every kernel accumulates in double.
class Embedding {
 public:
  Embedding() = default;
  explicit Embedding(std::vector<float> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const float> values() const noexcept { return values_; }
  double norm() const noexcept;

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  std::vector<float> values_;
};

/// Scales `v` to unit L2 norm. When `expected_dim` is nonzero the length is
/// checked against it. Throws ZeroVector for ‖v‖ ≤ 1e-12.
Embedding normalize(std::span<const float> v, std::size_t expected_dim = 0);
Embedding normalize(std::span<const double> v, std::size_t expected_dim = 0);

double dot(std::span<const float> a, std::span<const float> b);
double dot(std::span<const float> a, std::span<const double> b);

/// Inner product of two unit vectors, clamped to [-1, 1].
double cosine(std::span<const float> a, std::span<const float> b);
double cosine(const Embedding& a, const Embedding& b);

/// Ordered, row-major collection of equal-length embeddings with optional
/// parallel text labels.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  explicit EmbeddingSet(std::size_t dim);
  EmbeddingSet(std::size_t dim, std::vector<float> data, std::vector<std::string> labels = {});

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const float> row(std::size_t i) const;
  std::span<const float> data() const noexcept { return data_; }
  Embedding embedding(std::size_t i) const;

  bool has_labels() const noexcept { return !labels_.empty(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(std::size_t i) const;

  void add(std::span<const float> row);
  void add(std::span<const float> row, std::string label);
  void add(const Embedding& e) { add(e.values()); }

  /// Rows at `indices`, in the given order, with their labels.
  EmbeddingSet subset(std::span<const std::size_t> indices) const;
  /// Copy with every row scaled to unit norm.
  EmbeddingSet normalized() const;

  friend bool operator==(const EmbeddingSet&, const EmbeddingSet&) = default;

 private:
  void check_row(std::span<const float> row) const;

  std::size_t dim_ = 0;
  std::vector<float> data_;
  std::vector<std::string> labels_;
};

}  // namespace synspace
