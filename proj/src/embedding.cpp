#include "synspace/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "synspace/error.hpp"

namespace synspace {
namespace {

void require_finite(std::span<const float> v) {
  for (float x : v) {
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteValue, "embedding contains NaN or Inf");
  }
}

template <typename T>
Embedding normalize_impl(std::span<const T> v, std::size_t expected_dim) {
  if (v.empty()) throw Error(ErrorCode::DimensionMismatch, "empty vector");
  if (expected_dim != 0 && v.size() != expected_dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected dim " + std::to_string(expected_dim) + ", got " + std::to_string(v.size()));
  }
  double sq = 0.0;
  for (T x : v) {
    if (!std::isfinite(static_cast<double>(x))) throw Error(ErrorCode::NonFiniteValue, "vector contains NaN or Inf");
    sq += static_cast<double>(x) * static_cast<double>(x);
  }
  const double n = std::sqrt(sq);
  if (n <= kZeroNormTolerance) throw Error(ErrorCode::ZeroVector, "cannot normalize a zero vector");
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(static_cast<double>(v[i]) / n);
  return Embedding(std::move(out));
}

}  // namespace

Embedding::Embedding(std::vector<float> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorCode::DimensionMismatch, "embedding must have positive dimension");
  require_finite(values_);
}

double Embedding::norm() const noexcept { return std::sqrt(dot(values_, values_)); }

Embedding normalize(std::span<const float> v, std::size_t expected_dim) { return normalize_impl(v, expected_dim); }
Embedding normalize(std::span<const double> v, std::size_t expected_dim) { return normalize_impl(v, expected_dim); }

double dot(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

double dot(std::span<const float> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * b[i];
  return acc;
}

double cosine(std::span<const float> a, std::span<const float> b) { return std::clamp(dot(a, b), -1.0, 1.0); }

double cosine(const Embedding& a, const Embedding& b) { return cosine(a.values(), b.values()); }

EmbeddingSet::EmbeddingSet(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorCode::DimensionMismatch, "embedding set dimension must be positive");
}

EmbeddingSet::EmbeddingSet(std::size_t dim, std::vector<float> data, std::vector<std::string> labels)
    : dim_(dim), data_(std::move(data)), labels_(std::move(labels)) {
  if (dim == 0) throw Error(ErrorCode::DimensionMismatch, "embedding set dimension must be positive");
  if (data_.size() % dim_ != 0) {
    throw Error(ErrorCode::DimensionMismatch, "data length is not a multiple of dim " + std::to_string(dim_));
  }
  require_finite(data_);
  if (!labels_.empty() && labels_.size() != size()) {
    throw Error(ErrorCode::DimensionMismatch, "label count " + std::to_string(labels_.size()) +
                                                  " does not match item count " + std::to_string(size()));
  }
}

std::span<const float> EmbeddingSet::row(std::size_t i) const {
  if (i >= size()) throw Error(ErrorCode::PreconditionViolation, "row index out of range");
  return std::span<const float>(data_).subspan(i * dim_, dim_);
}

Embedding EmbeddingSet::embedding(std::size_t i) const {
  const auto r = row(i);
  return Embedding(std::vector<float>(r.begin(), r.end()));
}

const std::string& EmbeddingSet::label(std::size_t i) const {
  if (!has_labels() || i >= labels_.size()) throw Error(ErrorCode::PreconditionViolation, "no label at index");
  return labels_[i];
}

void EmbeddingSet::check_row(std::span<const float> row) const {
  if (dim_ == 0) throw Error(ErrorCode::DimensionMismatch, "embedding set has no dimension");
  if (row.size() != dim_) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected dim " + std::to_string(dim_) + ", got " + std::to_string(row.size()));
  }
  require_finite(row);
}

void EmbeddingSet::add(std::span<const float> row) {
  check_row(row);
  if (has_labels()) throw Error(ErrorCode::PreconditionViolation, "labelled set requires a label per row");
  data_.insert(data_.end(), row.begin(), row.end());
}

void EmbeddingSet::add(std::span<const float> row, std::string label) {
  check_row(row);
  if (!empty() && !has_labels()) throw Error(ErrorCode::PreconditionViolation, "unlabelled set cannot take labels");
  data_.insert(data_.end(), row.begin(), row.end());
  labels_.push_back(std::move(label));
}

EmbeddingSet EmbeddingSet::subset(std::span<const std::size_t> indices) const {
  EmbeddingSet out(dim_);
  out.data_.reserve(indices.size() * dim_);
  for (std::size_t i : indices) {
    const auto r = row(i);
    out.data_.insert(out.data_.end(), r.begin(), r.end());
    if (has_labels()) out.labels_.push_back(labels_[i]);
  }
  return out;
}

EmbeddingSet EmbeddingSet::normalized() const {
  EmbeddingSet out(dim_);
  out.data_.reserve(data_.size());
  for (std::size_t i = 0; i < size(); ++i) {
    const Embedding e = normalize(row(i));
    out.data_.insert(out.data_.end(), e.values().begin(), e.values().end());
  }
  out.labels_ = labels_;
  return out;
}

}  // namespace synspace
