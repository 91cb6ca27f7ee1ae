#pragma once

#include <Eigen/Core>

#include <initializer_list>
#include <numeric>
#include <utility>
#include <vector>

#include "cyclebal/core/error.hpp"

namespace cyclebal {

/// Dense row-major tensor backed by an Eigen array. Rank-4 tensors use
/// the (N, C, H, W) convention throughout; parameters use whatever rank
/// fits (conv weights are (Cout, Cin, Kh, Kw)).
template <typename Scalar>
class Tensor {
 public:
  using Storage = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using Index = Eigen::Index;

  Tensor() = default;

  explicit Tensor(std::vector<Index> shape) : shape_(std::move(shape)) {
    data_.setZero(count(shape_));
  }

  Tensor(std::initializer_list<Index> shape) : Tensor(std::vector<Index>(shape)) {}

  static Tensor zeros(std::vector<Index> shape) { return Tensor(std::move(shape)); }

  static Tensor constant(std::vector<Index> shape, Scalar value) {
    Tensor t(std::move(shape));
    t.data_.setConstant(value);
    return t;
  }

  Index size() const { return data_.size(); }
  int rank() const { return static_cast<int>(shape_.size()); }
  const std::vector<Index>& shape() const { return shape_; }

  Index dim(int i) const { return shape_[static_cast<size_t>(i)]; }

  bool sameShape(const Tensor& other) const { return shape_ == other.shape_; }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  /// Flat elementwise view; use for Eigen array expressions.
  Storage& array() { return data_; }
  const Storage& array() const { return data_; }

  Scalar& operator[](Index i) { return data_[i]; }
  Scalar operator[](Index i) const { return data_[i]; }

  /// Rank-4 accessor, (n, c, h, w).
  Scalar& at(Index n, Index c, Index h, Index w) {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }
  Scalar at(Index n, Index c, Index h, Index w) const {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }

  /// Rank-2 accessor, (r, c).
  Scalar& at(Index r, Index c) { return data_[r * shape_[1] + c]; }
  Scalar at(Index r, Index c) const { return data_[r * shape_[1] + c]; }

  using MatrixMap =
      Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  using ConstMatrixMap = Eigen::Map<
      const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

  /// Row-major matrix view over the flat buffer. rows*cols must equal size().
  MatrixMap asMatrix(Index rows, Index cols) {
    checkViewSize(rows, cols);
    return MatrixMap(data_.data(), rows, cols);
  }
  ConstMatrixMap asMatrix(Index rows, Index cols) const {
    checkViewSize(rows, cols);
    return ConstMatrixMap(data_.data(), rows, cols);
  }

  /// Pointer to the start of sample n of a rank-4 tensor.
  Scalar* sampleData(Index n) { return data_.data() + n * sampleSize(); }
  const Scalar* sampleData(Index n) const { return data_.data() + n * sampleSize(); }
  Index sampleSize() const { return shape_[1] * shape_[2] * shape_[3]; }

  /// Copy with a new shape of identical element count.
  Tensor reshaped(std::vector<Index> shape) const {
    if (count(shape) != size())
      throw Error("Tensor::reshaped: element count mismatch");
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = data_;
    return t;
  }

  /// Copy of sample n as a (1, C, H, W) tensor.
  Tensor slice(Index n) const {
    Tensor t({Index(1), shape_[1], shape_[2], shape_[3]});
    t.data_ = data_.segment(n * sampleSize(), sampleSize());
    return t;
  }

  /// Write `src` (a (1,C,H,W) tensor) into sample slot n.
  void setSlice(Index n, const Tensor& src) {
    data_.segment(n * sampleSize(), sampleSize()) = src.data_;
  }

  bool allFinite() const { return data_.allFinite(); }

  void setZero() { data_.setZero(); }

  template <typename OtherScalar>
  Tensor<OtherScalar> cast() const {
    Tensor<OtherScalar> t(shape_);
    t.array() = data_.template cast<OtherScalar>();
    return t;
  }

  static Index count(const std::vector<Index>& shape) {
    Index n = 1;
    for (Index d : shape) n *= d;
    return shape.empty() ? 0 : n;
  }

 private:
  void checkViewSize(Index rows, Index cols) const {
    if (rows * cols != size()) throw Error("Tensor::asMatrix: size mismatch");
  }

  std::vector<Index> shape_;
  Storage data_;
};

/// Concatenate two rank-4 tensors along the channel axis.
template <typename Scalar>
Tensor<Scalar> concatChannels(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  using Index = Eigen::Index;
  const Index n = a.dim(0), ca = a.dim(1), cb = b.dim(1), h = a.dim(2), w = a.dim(3);
  if (b.dim(0) != n || b.dim(2) != h || b.dim(3) != w)
    throw Error("concatChannels: spatial/batch shape mismatch");
  Tensor<Scalar> out({n, ca + cb, h, w});
  const Index plane = h * w;
  for (Index i = 0; i < n; ++i) {
    std::copy(a.sampleData(i), a.sampleData(i) + ca * plane, out.sampleData(i));
    std::copy(b.sampleData(i), b.sampleData(i) + cb * plane, out.sampleData(i) + ca * plane);
  }
  return out;
}

/// First `channels` channels of a rank-4 tensor, copied.
template <typename Scalar>
Tensor<Scalar> channelPrefix(const Tensor<Scalar>& x, Eigen::Index channels) {
  using Index = Eigen::Index;
  const Index n = x.dim(0), h = x.dim(2), w = x.dim(3), plane = h * w;
  Tensor<Scalar> out({n, channels, h, w});
  for (Index i = 0; i < n; ++i)
    std::copy(x.sampleData(i), x.sampleData(i) + channels * plane, out.sampleData(i));
  return out;
}

template <typename Scalar>
Scalar maxAbsDiff(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (!a.sameShape(b)) throw Error("maxAbsDiff: shape mismatch");
  if (a.size() == 0) return Scalar(0);
  return (a.array() - b.array()).abs().maxCoeff();
}

}  // namespace cyclebal
