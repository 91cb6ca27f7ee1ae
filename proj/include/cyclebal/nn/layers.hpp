#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cyclebal/core/error.hpp"
#include "cyclebal/core/rng.hpp"
#include "cyclebal/core/tensor.hpp"

namespace cyclebal::nn {

using Eigen::Index;

template <typename Scalar>
struct Param {
  Tensor<Scalar> value;
  Tensor<Scalar> grad;

  void init(std::vector<Index> shape) {
    value = Tensor<Scalar>(shape);
    grad = Tensor<Scalar>(std::move(shape));
  }
  void zeroGrad() { grad.setZero(); }
};

template <typename Scalar>
using ParamVisitor = std::function<void(const std::string&, Param<Scalar>&)>;
template <typename Scalar>
using BufferVisitor = std::function<void(const std::string&, Tensor<Scalar>&)>;

/// Single-slot layer: forward caches whatever backward needs, so each
/// forward must be paired with its backward before the layer runs again.
template <typename Scalar>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor<Scalar> forward(const Tensor<Scalar>& x, bool train) = 0;
  virtual Tensor<Scalar> backward(const Tensor<Scalar>& dy) = 0;
  virtual void visitParams(const std::string&, const ParamVisitor<Scalar>&) {}
  /// Non-trainable state that still belongs in checkpoints (BN running stats).
  virtual void visitBuffers(const std::string&, const BufferVisitor<Scalar>&) {}
};

// ---------------------------------------------------------------------------
// Convolution (im2col + GEMM)
// ---------------------------------------------------------------------------

template <typename Scalar>
class Conv2d final : public Layer<Scalar> {
 public:
  Conv2d(Index inC, Index outC, Index kernel, Index stride = 1, Index pad = 0)
      : inC_(inC), outC_(outC), k_(kernel), stride_(stride), pad_(pad) {
    w_.init({outC, inC, kernel, kernel});
    b_.init({outC});
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, bool) override {
    if (x.rank() != 4 || x.dim(1) != inC_)
      throw TrainError("Conv2d: input shape mismatch");
    x_ = x;
    const Index n = x.dim(0), h = x.dim(2), w = x.dim(3);
    outH_ = (h + 2 * pad_ - k_) / stride_ + 1;
    outW_ = (w + 2 * pad_ - k_) / stride_ + 1;
    if (outH_ < 1 || outW_ < 1) throw TrainError("Conv2d: output would be empty");

    Tensor<Scalar> y({n, outC_, outH_, outW_});
    const Index kk = inC_ * k_ * k_;
    const Index p = outH_ * outW_;
    Tensor<Scalar> cols({kk, p});
    auto wMat = w_.value.asMatrix(outC_, kk);
    for (Index i = 0; i < n; ++i) {
      im2col(x, i, cols);
      auto yMat = typename Tensor<Scalar>::MatrixMap(y.sampleData(i), outC_, p);
      yMat.noalias() = wMat * cols.asMatrix(kk, p);
      for (Index c = 0; c < outC_; ++c) yMat.row(c).array() += b_.value[c];
    }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) override {
    const Index n = x_.dim(0);
    const Index kk = inC_ * k_ * k_;
    const Index p = outH_ * outW_;
    Tensor<Scalar> dx(x_.shape());
    Tensor<Scalar> cols({kk, p});
    Tensor<Scalar> dcols({kk, p});
    auto wMat = w_.value.asMatrix(outC_, kk);
    auto dwMat = w_.grad.asMatrix(outC_, kk);
    for (Index i = 0; i < n; ++i) {
      im2col(x_, i, cols);
      auto dyMat = typename Tensor<Scalar>::ConstMatrixMap(dy.sampleData(i), outC_, p);
      dwMat.noalias() += dyMat * cols.asMatrix(kk, p).transpose();
      for (Index c = 0; c < outC_; ++c) b_.grad[c] += dyMat.row(c).sum();
      dcols.asMatrix(kk, p).noalias() = wMat.transpose() * dyMat;
      col2imAdd(dcols, dx, i);
    }
    return dx;
  }

  void visitParams(const std::string& prefix, const ParamVisitor<Scalar>& fn) override {
    fn(prefix + ".w", w_);
    fn(prefix + ".b", b_);
  }

  Index fanIn() const { return inC_ * k_ * k_; }

 private:
  void im2col(const Tensor<Scalar>& x, Index sample, Tensor<Scalar>& cols) const {
    const Index h = x.dim(2), w = x.dim(3);
    const Scalar* src = x.sampleData(sample);
    Scalar* dst = cols.data();
    for (Index c = 0; c < inC_; ++c) {
      const Scalar* plane = src + c * h * w;
      for (Index ky = 0; ky < k_; ++ky) {
        for (Index kx = 0; kx < k_; ++kx) {
          for (Index oy = 0; oy < outH_; ++oy) {
            const Index iy = oy * stride_ - pad_ + ky;
            Scalar* row = dst + oy * outW_;
            if (iy < 0 || iy >= h) {
              std::fill(row, row + outW_, Scalar(0));
              continue;
            }
            const Scalar* srow = plane + iy * w;
            for (Index ox = 0; ox < outW_; ++ox) {
              const Index ix = ox * stride_ - pad_ + kx;
              row[ox] = (ix < 0 || ix >= w) ? Scalar(0) : srow[ix];
            }
          }
          dst += outH_ * outW_;
        }
      }
    }
  }

  void col2imAdd(const Tensor<Scalar>& cols, Tensor<Scalar>& dx, Index sample) const {
    const Index h = dx.dim(2), w = dx.dim(3);
    Scalar* out = dx.sampleData(sample);
    const Scalar* src = cols.data();
    for (Index c = 0; c < inC_; ++c) {
      Scalar* plane = out + c * h * w;
      for (Index ky = 0; ky < k_; ++ky) {
        for (Index kx = 0; kx < k_; ++kx) {
          for (Index oy = 0; oy < outH_; ++oy) {
            const Index iy = oy * stride_ - pad_ + ky;
            const Scalar* row = src + oy * outW_;
            if (iy < 0 || iy >= h) continue;
            Scalar* drow = plane + iy * w;
            for (Index ox = 0; ox < outW_; ++ox) {
              const Index ix = ox * stride_ - pad_ + kx;
              if (ix >= 0 && ix < w) drow[ix] += row[ox];
            }
          }
          src += outH_ * outW_;
        }
      }
    }
  }

  Index inC_, outC_, k_, stride_, pad_;
  Index outH_ = 0, outW_ = 0;
  Param<Scalar> w_, b_;
  Tensor<Scalar> x_;
};

// ---------------------------------------------------------------------------
// Linear
// ---------------------------------------------------------------------------

template <typename Scalar>
class Linear final : public Layer<Scalar> {
 public:
  Linear(Index in, Index out) : in_(in), out_(out) {
    w_.init({out, in});
    b_.init({out});
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, bool) override {
    if (x.rank() != 2 || x.dim(1) != in_) throw TrainError("Linear: input shape mismatch");
    x_ = x;
    const Index n = x.dim(0);
    Tensor<Scalar> y({n, out_});
    y.asMatrix(n, out_).noalias() = x.asMatrix(n, in_) * w_.value.asMatrix(out_, in_).transpose();
    for (Index i = 0; i < n; ++i)
      for (Index o = 0; o < out_; ++o) y.at(i, o) += b_.value[o];
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) override {
    const Index n = x_.dim(0);
    auto dyMat = dy.asMatrix(n, out_);
    w_.grad.asMatrix(out_, in_).noalias() += dyMat.transpose() * x_.asMatrix(n, in_);
    for (Index o = 0; o < out_; ++o) b_.grad[o] += dyMat.col(o).sum();
    Tensor<Scalar> dx({n, in_});
    dx.asMatrix(n, in_).noalias() = dyMat * w_.value.asMatrix(out_, in_);
    return dx;
  }

  void visitParams(const std::string& prefix, const ParamVisitor<Scalar>& fn) override {
    fn(prefix + ".w", w_);
    fn(prefix + ".b", b_);
  }

  Param<Scalar>& weight() { return w_; }
  const Param<Scalar>& weight() const { return w_; }

 private:
  Index in_, out_;
  Param<Scalar> w_, b_;
  Tensor<Scalar> x_;
};

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

/// Per-sample, per-channel normalization without affine parameters
/// (the translation networks' norm layer).
template <typename Scalar>
class InstanceNorm2d final : public Layer<Scalar> {
 public:
  explicit InstanceNorm2d(Index channels, Scalar eps = Scalar(1e-5))
      : c_(channels), eps_(eps) {}

  Tensor<Scalar> forward(const Tensor<Scalar>& x, bool) override {
    const Index n = x.dim(0), hXw = x.dim(2) * x.dim(3);
    xhat_ = Tensor<Scalar>(x.shape());
    invStd_ = Tensor<Scalar>({n, c_});
    for (Index i = 0; i < n; ++i) {
      for (Index c = 0; c < c_; ++c) {
        const Scalar* p = x.sampleData(i) + c * hXw;
        Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> plane(p, hXw);
        const Scalar mean = plane.mean();
        const Scalar var = (plane - mean).square().mean();
        const Scalar inv = Scalar(1) / std::sqrt(var + eps_);
        invStd_.at(i, c) = inv;
        Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, 1>> out(
            xhat_.sampleData(i) + c * hXw, hXw);
        out = (plane - mean) * inv;
      }
    }
    return xhat_;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) override {
    const Index n = dy.dim(0), hXw = dy.dim(2) * dy.dim(3);
    Tensor<Scalar> dx(dy.shape());
    const Scalar m = static_cast<Scalar>(hXw);
    for (Index i = 0; i < n; ++i) {
      for (Index c = 0; c < c_; ++c) {
        Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> g(
            dy.sampleData(i) + c * hXw, hXw);
        Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> xh(
            xhat_.sampleData(i) + c * hXw, hXw);
        Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, 1>> out(
            dx.sampleData(i) + c * hXw, hXw);
        const Scalar sumG = g.sum();
        const Scalar sumGx = (g * xh).sum();
        out = (g * m - sumG - xh * sumGx) * (invStd_.at(i, c) / m);
      }
    }
    return dx;
  }

 private:
  Index c_;
  Scalar eps_;
  Tensor<Scalar> xhat_, invStd_;
};

/// Batch normalization with affine parameters and running statistics.
template <typename Scalar>
class BatchNorm2d final : public Layer<Scalar> {
 public:
  explicit BatchNorm2d(Index channels, Scalar momentum = Scalar(0.1),
                       Scalar eps = Scalar(1e-5))
      : c_(channels), momentum_(momentum), eps_(eps) {
    gamma_.init({channels});
    beta_.init({channels});
    gamma_.value.array().setConstant(Scalar(1));
    runMean_ = Tensor<Scalar>({channels});
    runVar_ = Tensor<Scalar>::constant({channels}, Scalar(1));
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, bool train) override {
    const Index n = x.dim(0), hXw = x.dim(2) * x.dim(3);
    trainMode_ = train;
    Tensor<Scalar> y(x.shape());
    if (train) {
      xhat_ = Tensor<Scalar>(x.shape());
      invStd_ = Tensor<Scalar>({c_});
      const Scalar m = static_cast<Scalar>(n * hXw);
      for (Index c = 0; c < c_; ++c) {
        Scalar mean = 0;
        for (Index i = 0; i < n; ++i) {
          Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> plane(
              x.sampleData(i) + c * hXw, hXw);
          mean += plane.sum();
        }
        mean /= m;
        Scalar var = 0;
        for (Index i = 0; i < n; ++i) {
          Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> plane(
              x.sampleData(i) + c * hXw, hXw);
          var += (plane - mean).square().sum();
        }
        var /= m;
        const Scalar inv = Scalar(1) / std::sqrt(var + eps_);
        invStd_[c] = inv;
        for (Index i = 0; i < n; ++i) {
          Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> plane(
              x.sampleData(i) + c * hXw, hXw);
          Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, 1>> xh(
              xhat_.sampleData(i) + c * hXw, hXw);
          Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, 1>> out(
              y.sampleData(i) + c * hXw, hXw);
          xh = (plane - mean) * inv;
          out = xh * gamma_.value[c] + beta_.value[c];
        }
        // unbiased variance in the running estimate
        const Scalar unbiased = m > 1 ? var * m / (m - 1) : var;
        runMean_[c] = (Scalar(1) - momentum_) * runMean_[c] + momentum_ * mean;
        runVar_[c] = (Scalar(1) - momentum_) * runVar_[c] + momentum_ * unbiased;
      }
    } else {
      for (Index c = 0; c < c_; ++c) {
        const Scalar inv = Scalar(1) / std::sqrt(runVar_[c] + eps_);
        const Scalar scale = gamma_.value[c] * inv;
        const Scalar shift = beta_.value[c] - runMean_[c] * scale;
        for (Index i = 0; i < n; ++i) {
          Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> plane(
              x.sampleData(i) + c * hXw, hXw);
          Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, 1>> out(
              y.sampleData(i) + c * hXw, hXw);
          out = plane * scale + shift;
        }
      }
    }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) override {
    if (!trainMode_) throw TrainError("BatchNorm2d: backward after eval-mode forward");
    const Index n = dy.dim(0), hXw = dy.dim(2) * dy.dim(3);
    const Scalar m = static_cast<Scalar>(n * hXw);
    Tensor<Scalar> dx(dy.shape());
    for (Index c = 0; c < c_; ++c) {
      Scalar sumG = 0, sumGx = 0;
      for (Index i = 0; i < n; ++i) {
        Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> g(
            dy.sampleData(i) + c * hXw, hXw);
        Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> xh(
            xhat_.sampleData(i) + c * hXw, hXw);
        sumG += g.sum();
        sumGx += (g * xh).sum();
      }
      gamma_.grad[c] += sumGx;
      beta_.grad[c] += sumG;
      const Scalar scale = gamma_.value[c] * invStd_[c] / m;
      for (Index i = 0; i < n; ++i) {
        Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> g(
            dy.sampleData(i) + c * hXw, hXw);
        Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> xh(
            xhat_.sampleData(i) + c * hXw, hXw);
        Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, 1>> out(
            dx.sampleData(i) + c * hXw, hXw);
        out = (g * m - sumG - xh * sumGx) * scale;
      }
    }
    return dx;
  }

  void visitParams(const std::string& prefix, const ParamVisitor<Scalar>& fn) override {
    fn(prefix + ".gamma", gamma_);
    fn(prefix + ".beta", beta_);
  }

  void visitBuffers(const std::string& prefix, const BufferVisitor<Scalar>& fn) override {
    fn(prefix + ".running_mean", runMean_);
    fn(prefix + ".running_var", runVar_);
  }

 private:
  Index c_;
  Scalar momentum_, eps_;
  Param<Scalar> gamma_, beta_;
  Tensor<Scalar> runMean_, runVar_;
  Tensor<Scalar> xhat_, invStd_;
  bool trainMode_ = false;
};

// ---------------------------------------------------------------------------
// Activations
// ---------------------------------------------------------------------------

template <typename Scalar>
class ReLU final : public Layer<Scalar> {
 public:
  Tensor<Scalar> forward(const Tensor<Scalar>& x, bool) override {
    x_ = x;
    Tensor<Scalar> y(x.shape());
    y.array() = x.array().max(Scalar(0));
    return y;
  }
  Tensor<Scalar> backward(const Tensor<Scalar>& dy) override {
    Tensor<Scalar> dx(dy.shape());
    dx.array() = (x_.array() > Scalar(0)).template cast<Scalar>() * dy.array();
    return dx;
  }

 private:
  Tensor<Scalar> x_;
};

template <typename Scalar>
class LeakyReLU final : public Layer<Scalar> {
 public:
  explicit LeakyReLU(Scalar slope = Scalar(0.2)) : slope_(slope) {}
  Tensor<Scalar> forward(const Tensor<Scalar>& x, bool) override {
    x_ = x;
    Tensor<Scalar> y(x.shape());
    y.array() = (x.array() > Scalar(0)).select(x.array(), x.array() * slope_);
    return y;
  }
  Tensor<Scalar> backward(const Tensor<Scalar>& dy) override {
    Tensor<Scalar> dx(dy.shape());
    dx.array() = (x_.array() > Scalar(0)).select(dy.array(), dy.array() * slope_);
    return dx;
  }

 private:
  Scalar slope_;
  Tensor<Scalar> x_;
};

template <typename Scalar>
class Tanh final : public Layer<Scalar> {
 public:
  Tensor<Scalar> forward(const Tensor<Scalar>& x, bool) override {
    y_ = Tensor<Scalar>(x.shape());
    y_.array() = x.array().tanh();
    return y_;
  }
  Tensor<Scalar> backward(const Tensor<Scalar>& dy) override {
    Tensor<Scalar> dx(dy.shape());
    dx.array() = dy.array() * (Scalar(1) - y_.array().square());
    return dx;
  }

 private:
  Tensor<Scalar> y_;
};

// ---------------------------------------------------------------------------
// Pooling / resampling
// ---------------------------------------------------------------------------

template <typename Scalar>
class MaxPool2d final : public Layer<Scalar> {
 public:
  MaxPool2d(Index kernel, Index stride, Index pad = 0)
      : k_(kernel), stride_(stride), pad_(pad) {}

  Tensor<Scalar> forward(const Tensor<Scalar>& x, bool) override {
    const Index n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    inShape_ = x.shape();
    outH_ = (h + 2 * pad_ - k_) / stride_ + 1;
    outW_ = (w + 2 * pad_ - k_) / stride_ + 1;
    Tensor<Scalar> y({n, c, outH_, outW_});
    argmax_.assign(static_cast<size_t>(y.size()), 0);
    Index out = 0;
    for (Index i = 0; i < n; ++i) {
      for (Index ch = 0; ch < c; ++ch) {
        const Scalar* plane = x.sampleData(i) + ch * h * w;
        for (Index oy = 0; oy < outH_; ++oy) {
          for (Index ox = 0; ox < outW_; ++ox, ++out) {
            Scalar best = -std::numeric_limits<Scalar>::infinity();
            Index bestIdx = 0;
            for (Index ky = 0; ky < k_; ++ky) {
              const Index iy = oy * stride_ - pad_ + ky;
              if (iy < 0 || iy >= h) continue;
              for (Index kx = 0; kx < k_; ++kx) {
                const Index ix = ox * stride_ - pad_ + kx;
                if (ix < 0 || ix >= w) continue;
                const Scalar v = plane[iy * w + ix];
                if (v > best) {
                  best = v;
                  bestIdx = (i * c + ch) * h * w + iy * w + ix;
                }
              }
            }
            y.data()[out] = best;
            argmax_[static_cast<size_t>(out)] = bestIdx;
          }
        }
      }
    }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) override {
    Tensor<Scalar> dx(inShape_);
    for (Index i = 0; i < dy.size(); ++i)
      dx.data()[argmax_[static_cast<size_t>(i)]] += dy.data()[i];
    return dx;
  }

 private:
  Index k_, stride_, pad_;
  Index outH_ = 0, outW_ = 0;
  std::vector<Index> inShape_;
  std::vector<Index> argmax_;
};

template <typename Scalar>
class AvgPool2d final : public Layer<Scalar> {
 public:
  AvgPool2d(Index kernel, Index stride) : k_(kernel), stride_(stride) {}

  Tensor<Scalar> forward(const Tensor<Scalar>& x, bool) override {
    const Index n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    inShape_ = x.shape();
    outH_ = (h - k_) / stride_ + 1;
    outW_ = (w - k_) / stride_ + 1;
    Tensor<Scalar> y({n, c, outH_, outW_});
    const Scalar norm = Scalar(1) / static_cast<Scalar>(k_ * k_);
    for (Index i = 0; i < n; ++i) {
      for (Index ch = 0; ch < c; ++ch) {
        const Scalar* plane = x.sampleData(i) + ch * h * w;
        Scalar* out = y.sampleData(i) + ch * outH_ * outW_;
        for (Index oy = 0; oy < outH_; ++oy) {
          for (Index ox = 0; ox < outW_; ++ox) {
            Scalar acc = 0;
            for (Index ky = 0; ky < k_; ++ky)
              for (Index kx = 0; kx < k_; ++kx)
                acc += plane[(oy * stride_ + ky) * w + ox * stride_ + kx];
            out[oy * outW_ + ox] = acc * norm;
          }
        }
      }
    }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) override {
    Tensor<Scalar> dx(inShape_);
    const Index h = inShape_[2], w = inShape_[3];
    const Scalar norm = Scalar(1) / static_cast<Scalar>(k_ * k_);
    const Index n = dy.dim(0), c = dy.dim(1);
    for (Index i = 0; i < n; ++i) {
      for (Index ch = 0; ch < c; ++ch) {
        Scalar* plane = dx.sampleData(i) + ch * h * w;
        const Scalar* g = dy.sampleData(i) + ch * outH_ * outW_;
        for (Index oy = 0; oy < outH_; ++oy)
          for (Index ox = 0; ox < outW_; ++ox) {
            const Scalar v = g[oy * outW_ + ox] * norm;
            for (Index ky = 0; ky < k_; ++ky)
              for (Index kx = 0; kx < k_; ++kx)
                plane[(oy * stride_ + ky) * w + ox * stride_ + kx] += v;
          }
      }
    }
    return dx;
  }

 private:
  Index k_, stride_;
  Index outH_ = 0, outW_ = 0;
  std::vector<Index> inShape_;
};

/// (N, C, H, W) -> (N, C) mean over the spatial extent.
template <typename Scalar>
class GlobalAvgPool final : public Layer<Scalar> {
 public:
  Tensor<Scalar> forward(const Tensor<Scalar>& x, bool) override {
    inShape_ = x.shape();
    const Index n = x.dim(0), c = x.dim(1), hXw = x.dim(2) * x.dim(3);
    Tensor<Scalar> y({n, c});
    for (Index i = 0; i < n; ++i)
      for (Index ch = 0; ch < c; ++ch) {
        Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> plane(
            x.sampleData(i) + ch * hXw, hXw);
        y.at(i, ch) = plane.mean();
      }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) override {
    Tensor<Scalar> dx(inShape_);
    const Index n = inShape_[0], c = inShape_[1], hXw = inShape_[2] * inShape_[3];
    const Scalar norm = Scalar(1) / static_cast<Scalar>(hXw);
    for (Index i = 0; i < n; ++i)
      for (Index ch = 0; ch < c; ++ch) {
        Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, 1>> plane(
            dx.sampleData(i) + ch * hXw, hXw);
        plane.setConstant(dy.at(i, ch) * norm);
      }
    return dx;
  }

 private:
  std::vector<Index> inShape_;
};

template <typename Scalar>
class UpsampleNearest2x final : public Layer<Scalar> {
 public:
  Tensor<Scalar> forward(const Tensor<Scalar>& x, bool) override {
    const Index n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    inShape_ = x.shape();
    Tensor<Scalar> y({n, c, h * 2, w * 2});
    for (Index i = 0; i < n; ++i)
      for (Index ch = 0; ch < c; ++ch) {
        const Scalar* src = x.sampleData(i) + ch * h * w;
        Scalar* dst = y.sampleData(i) + ch * 4 * h * w;
        for (Index yy = 0; yy < h; ++yy)
          for (Index xx = 0; xx < w; ++xx) {
            const Scalar v = src[yy * w + xx];
            Scalar* d = dst + (2 * yy) * (2 * w) + 2 * xx;
            d[0] = v;
            d[1] = v;
            d[2 * w] = v;
            d[2 * w + 1] = v;
          }
      }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) override {
    Tensor<Scalar> dx(inShape_);
    const Index n = inShape_[0], c = inShape_[1], h = inShape_[2], w = inShape_[3];
    for (Index i = 0; i < n; ++i)
      for (Index ch = 0; ch < c; ++ch) {
        Scalar* dst = dx.sampleData(i) + ch * h * w;
        const Scalar* g = dy.sampleData(i) + ch * 4 * h * w;
        for (Index yy = 0; yy < h; ++yy)
          for (Index xx = 0; xx < w; ++xx) {
            const Scalar* s = g + (2 * yy) * (2 * w) + 2 * xx;
            dst[yy * w + xx] = s[0] + s[1] + s[2 * w] + s[2 * w + 1];
          }
      }
    return dx;
  }

 private:
  std::vector<Index> inShape_;
};

// ---------------------------------------------------------------------------
// Composition
// ---------------------------------------------------------------------------

template <typename Scalar>
class Sequential final : public Layer<Scalar> {
 public:
  Sequential() = default;

  template <typename L, typename... Args>
  L* add(const std::string& name, Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L* raw = layer.get();
    names_.push_back(name);
    layers_.push_back(std::move(layer));
    return raw;
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, bool train) override {
    Tensor<Scalar> h = x;
    for (auto& l : layers_) h = l->forward(h, train);
    return h;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) override {
    Tensor<Scalar> g = dy;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
  }

  void visitParams(const std::string& prefix, const ParamVisitor<Scalar>& fn) override {
    for (size_t i = 0; i < layers_.size(); ++i)
      layers_[i]->visitParams(prefix + "." + names_[i], fn);
  }

  void visitBuffers(const std::string& prefix, const BufferVisitor<Scalar>& fn) override {
    for (size_t i = 0; i < layers_.size(); ++i)
      layers_[i]->visitBuffers(prefix + "." + names_[i], fn);
  }

  size_t size() const { return layers_.size(); }

 private:
  std::vector<std::string> names_;
  std::vector<std::unique_ptr<Layer<Scalar>>> layers_;
};

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

template <typename Scalar>
void fillNormal(Tensor<Scalar>& t, RandomStream& rng, double stddev) {
  for (Index i = 0; i < t.size(); ++i)
    t.data()[i] = static_cast<Scalar>(rng.normal(0.0, stddev));
}

/// Gaussian init with std 0.02 on conv/linear weights, zero biases; the
/// translation-network convention.
template <typename Scalar, typename Net>
void initGaussian(Net& net, RandomStream& rng, double stddev = 0.02) {
  net.visitParams("net", [&](const std::string& name, Param<Scalar>& p) {
    if (name.ends_with(".w"))
      fillNormal(p.value, rng, stddev);
    else if (name.ends_with(".gamma"))
      p.value.array().setConstant(Scalar(1));
    else
      p.value.setZero();
  });
}

}  // namespace cyclebal::nn
