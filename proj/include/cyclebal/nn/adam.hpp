#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cyclebal/core/checkpoint.hpp"
#include "cyclebal/nn/layers.hpp"

namespace cyclebal::nn {

/// Adam with bias correction. Parameter registration order is the
/// construction order of the network, which is deterministic, so moment
/// buffers serialize positionally under stable names.
template <typename Scalar>
class Adam {
 public:
  Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  template <typename Net>
  void attach(Net& net, const std::string& scope) {
    net.visitParams(scope, [this](const std::string& name, Param<Scalar>& p) {
      names_.push_back(name);
      params_.push_back(&p);
      m_.emplace_back(p.value.shape());
      v_.emplace_back(p.value.shape());
    });
  }

  void zeroGrad() {
    for (auto* p : params_) p->zeroGrad();
  }

  void step(double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
      auto& p = params_[i]->value.array();
      const auto& g = params_[i]->grad.array();
      auto& m = m_[i].array();
      auto& v = v_[i].array();
      m = Scalar(beta1_) * m + Scalar(1.0 - beta1_) * g;
      v = Scalar(beta2_) * v + Scalar(1.0 - beta2_) * g.square();
      p -= Scalar(lr) * (m / Scalar(c1)) / ((v / Scalar(c2)).sqrt() + Scalar(eps_));
    }
  }

  uint64_t stepCount() const { return t_; }
  size_t paramCount() const { return params_.size(); }

  void saveTo(Checkpoint& ck, const std::string& prefix) const {
    for (size_t i = 0; i < params_.size(); ++i) {
      ck.add(prefix + ".m." + names_[i], m_[i]);
      ck.add(prefix + ".v." + names_[i], v_[i]);
    }
    ck.addU64(prefix + ".t", t_);
  }

  void loadFrom(const Checkpoint& ck, const std::string& prefix) {
    for (size_t i = 0; i < params_.size(); ++i) {
      Tensor<Scalar> m = ck.template tensor<Scalar>(prefix + ".m." + names_[i]);
      Tensor<Scalar> v = ck.template tensor<Scalar>(prefix + ".v." + names_[i]);
      if (!m.sameShape(m_[i]) || !v.sameShape(v_[i]))
        throw CheckpointError("optimizer state shape mismatch for " + names_[i]);
      m_[i] = std::move(m);
      v_[i] = std::move(v);
    }
    t_ = ck.u64(prefix + ".t");
  }

 private:
  double beta1_, beta2_, eps_;
  uint64_t t_ = 0;
  std::vector<std::string> names_;
  std::vector<Param<Scalar>*> params_;
  std::vector<Tensor<Scalar>> m_, v_;
};

/// Constant learning rate over the first half of training, then linear
/// decay to zero by the end.
inline double linearDecayLr(double baseLr, Eigen::Index epoch, Eigen::Index totalEpochs) {
  const Eigen::Index decayStart = totalEpochs / 2;
  if (epoch < decayStart || totalEpochs <= decayStart) return baseLr;
  const double remaining = static_cast<double>(totalEpochs - epoch);
  return baseLr * remaining / static_cast<double>(totalEpochs - decayStart);
}

}  // namespace cyclebal::nn
