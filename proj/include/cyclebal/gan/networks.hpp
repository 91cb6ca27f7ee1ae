#pragma once

#include <string>

#include "cyclebal/core/checkpoint.hpp"
#include "cyclebal/nn/adam.hpp"
#include "cyclebal/nn/layers.hpp"

namespace cyclebal::gan {

using Eigen::Index;
using nn::Param;

/// conv-norm-relu-conv-norm with an additive skip.
template <typename Scalar>
class ResBlock final : public nn::Layer<Scalar> {
 public:
  explicit ResBlock(Index channels) {
    body_.template add<nn::Conv2d<Scalar>>("conv1", channels, channels, 3, 1, 1);
    body_.template add<nn::InstanceNorm2d<Scalar>>("norm1", channels);
    body_.template add<nn::ReLU<Scalar>>("relu");
    body_.template add<nn::Conv2d<Scalar>>("conv2", channels, channels, 3, 1, 1);
    body_.template add<nn::InstanceNorm2d<Scalar>>("norm2", channels);
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, bool train) override {
    Tensor<Scalar> y = body_.forward(x, train);
    y.array() += x.array();
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) override {
    Tensor<Scalar> dx = body_.backward(dy);
    dx.array() += dy.array();
    return dx;
  }

  void visitParams(const std::string& prefix, const nn::ParamVisitor<Scalar>& fn) override {
    body_.visitParams(prefix, fn);
  }

 private:
  nn::Sequential<Scalar> body_;
};

struct GeneratorConfig {
  Index channels = 1;   // image channels in and out
  Index base = 8;       // stem width; doubles at each of the two downsamplings
  Index resBlocks = 3;  // 3 suits 64x64, 9 the full 224x224 resolution
};

/// Residual translation network: 7x7 stem, two stride-2 downsamplings,
/// a stack of residual blocks, two nearest-neighbor upsamplings, 7x7 head
/// with tanh. Output shape equals input shape and lies in (-1, 1).
template <typename Scalar>
class ResnetGenerator {
 public:
  explicit ResnetGenerator(const GeneratorConfig& cfg) : cfg_(cfg) {
    const Index b = cfg.base;
    net_.template add<nn::Conv2d<Scalar>>("stem", cfg.channels, b, 7, 1, 3);
    net_.template add<nn::InstanceNorm2d<Scalar>>("stem_norm", b);
    net_.template add<nn::ReLU<Scalar>>("stem_relu");
    net_.template add<nn::Conv2d<Scalar>>("down1", b, b * 2, 3, 2, 1);
    net_.template add<nn::InstanceNorm2d<Scalar>>("down1_norm", b * 2);
    net_.template add<nn::ReLU<Scalar>>("down1_relu");
    net_.template add<nn::Conv2d<Scalar>>("down2", b * 2, b * 4, 3, 2, 1);
    net_.template add<nn::InstanceNorm2d<Scalar>>("down2_norm", b * 4);
    net_.template add<nn::ReLU<Scalar>>("down2_relu");
    for (Index i = 0; i < cfg.resBlocks; ++i)
      net_.template add<ResBlock<Scalar>>("res" + std::to_string(i), b * 4);
    net_.template add<nn::UpsampleNearest2x<Scalar>>("up1");
    net_.template add<nn::Conv2d<Scalar>>("up1_conv", b * 4, b * 2, 3, 1, 1);
    net_.template add<nn::InstanceNorm2d<Scalar>>("up1_norm", b * 2);
    net_.template add<nn::ReLU<Scalar>>("up1_relu");
    net_.template add<nn::UpsampleNearest2x<Scalar>>("up2");
    net_.template add<nn::Conv2d<Scalar>>("up2_conv", b * 2, b, 3, 1, 1);
    net_.template add<nn::InstanceNorm2d<Scalar>>("up2_norm", b);
    net_.template add<nn::ReLU<Scalar>>("up2_relu");
    net_.template add<nn::Conv2d<Scalar>>("head", b, cfg.channels, 7, 1, 3);
    net_.template add<nn::Tanh<Scalar>>("tanh");
  }

  ResnetGenerator(const GeneratorConfig& cfg, RandomStream& rng) : ResnetGenerator(cfg) {
    nn::initGaussian<Scalar>(*this, rng);
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, bool train) { return net_.forward(x, train); }
  Tensor<Scalar> backward(const Tensor<Scalar>& dy) { return net_.backward(dy); }

  template <typename Fn>
  void visitParams(const std::string& prefix, const Fn& fn) {
    net_.visitParams(prefix, fn);
  }

  const GeneratorConfig& config() const { return cfg_; }

 private:
  GeneratorConfig cfg_;
  nn::Sequential<Scalar> net_;
};

struct DiscriminatorConfig {
  Index channels = 1;
  Index base = 8;
  Index layers = 2;  // stride-2 stages; receptive field grows with depth
};

/// Patch discriminator: stacked stride-2 4x4 convolutions ending in a
/// 1-channel grid of raw real/fake scores (no squashing; the adversarial
/// objective is least-squares).
template <typename Scalar>
class PatchDiscriminator {
 public:
  explicit PatchDiscriminator(const DiscriminatorConfig& cfg) : cfg_(cfg) {
    Index c = cfg.base;
    net_.template add<nn::Conv2d<Scalar>>("in", cfg.channels, c, 4, 2, 1);
    net_.template add<nn::LeakyReLU<Scalar>>("in_act", Scalar(0.2));
    for (Index i = 1; i < cfg.layers; ++i) {
      const Index next = std::min<Index>(c * 2, cfg.base * 8);
      net_.template add<nn::Conv2d<Scalar>>("down" + std::to_string(i), c, next, 4, 2, 1);
      net_.template add<nn::InstanceNorm2d<Scalar>>("norm" + std::to_string(i), next);
      net_.template add<nn::LeakyReLU<Scalar>>("act" + std::to_string(i), Scalar(0.2));
      c = next;
    }
    const Index last = std::min<Index>(c * 2, cfg.base * 8);
    net_.template add<nn::Conv2d<Scalar>>("pre", c, last, 4, 1, 1);
    net_.template add<nn::InstanceNorm2d<Scalar>>("pre_norm", last);
    net_.template add<nn::LeakyReLU<Scalar>>("pre_act", Scalar(0.2));
    net_.template add<nn::Conv2d<Scalar>>("out", last, 1, 4, 1, 1);
  }

  PatchDiscriminator(const DiscriminatorConfig& cfg, RandomStream& rng)
      : PatchDiscriminator(cfg) {
    nn::initGaussian<Scalar>(*this, rng);
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, bool train) { return net_.forward(x, train); }
  Tensor<Scalar> backward(const Tensor<Scalar>& dy) { return net_.backward(dy); }

  template <typename Fn>
  void visitParams(const std::string& prefix, const Fn& fn) {
    net_.visitParams(prefix, fn);
  }

  const DiscriminatorConfig& config() const { return cfg_; }

 private:
  DiscriminatorConfig cfg_;
  nn::Sequential<Scalar> net_;
};

/// Copy all parameters (and buffers) of a network into a checkpoint table.
template <typename Scalar, typename Net>
void saveNetParams(Net& net, const std::string& scope, Checkpoint& ck) {
  net.visitParams(scope, [&ck](const std::string& name, Param<Scalar>& p) {
    ck.add(name, p.value);
  });
}

template <typename Scalar, typename Net>
void loadNetParams(Net& net, const std::string& scope, const Checkpoint& ck) {
  net.visitParams(scope, [&ck](const std::string& name, Param<Scalar>& p) {
    Tensor<Scalar> v = ck.template tensor<Scalar>(name);
    if (!v.sameShape(p.value))
      throw CheckpointError("parameter shape mismatch for " + name);
    p.value = std::move(v);
  });
}

}  // namespace cyclebal::gan
