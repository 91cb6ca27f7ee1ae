#pragma once

#include "cyclebal/core/error.hpp"
#include "cyclebal/core/tensor.hpp"

namespace cyclebal::gan {

template <typename Scalar>
double l1Mean(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (!a.sameShape(b)) throw TrainError("l1Mean: shape mismatch");
  return static_cast<double>((a.array() - b.array()).abs().mean());
}

/// Cycle-consistency loss: mean |g10(g01(x0)) - x0| + mean |g01(g10(x1)) - x1|.
/// Zero iff both compositions reconstruct their inputs exactly. The
/// generators are passed as callables so closed-form maps can stand in for
/// networks in tests.
template <typename G01, typename G10, typename Scalar>
double cycleLoss(G01&& g01, G10&& g10, const Tensor<Scalar>& batch0,
                 const Tensor<Scalar>& batch1) {
  const Tensor<Scalar> rec0 = g10(g01(batch0));
  const Tensor<Scalar> rec1 = g01(g10(batch1));
  if (!rec0.allFinite() || !rec1.allFinite())
    throw TrainError("cycleLoss: non-finite reconstruction");
  return l1Mean(rec0, batch0) + l1Mean(rec1, batch1);
}

struct LsganPair {
  double dLoss = 0;  // mean((D(real)-1)^2) + mean(D(fake)^2)
  double gLoss = 0;  // mean((D(fake)-1)^2)
};

/// Least-squares adversarial objective over patch score grids.
template <typename Scalar>
LsganPair lsganLosses(const Tensor<Scalar>& realScores, const Tensor<Scalar>& fakeScores) {
  if (!realScores.allFinite() || !fakeScores.allFinite())
    throw TrainError("lsganLosses: non-finite scores");
  LsganPair out;
  out.dLoss = static_cast<double>((realScores.array() - Scalar(1)).square().mean()) +
              static_cast<double>(fakeScores.array().square().mean());
  out.gLoss = static_cast<double>((fakeScores.array() - Scalar(1)).square().mean());
  return out;
}

/// Convenience wrapper running the discriminator on both batches.
template <typename D, typename Scalar>
LsganPair adversarialLoss(D&& disc, const Tensor<Scalar>& realBatch,
                          const Tensor<Scalar>& fakeBatch) {
  return lsganLosses(disc(realBatch), disc(fakeBatch));
}

}  // namespace cyclebal::gan
