#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cyclebal/core/checkpoint.hpp"
#include "cyclebal/core/rng.hpp"
#include "cyclebal/gan/image_pool.hpp"
#include "cyclebal/gan/losses.hpp"
#include "cyclebal/gan/networks.hpp"
#include "cyclebal/nn/adam.hpp"

namespace cyclebal::gan {

struct GanConfig {
  Index resolution = 64;
  Index channels = 1;
  Index genBase = 8;
  Index resBlocks = 3;
  Index discBase = 8;
  Index discLayers = 2;
  double lambdaCyc = 10.0;
  double identityWeight = 0.0;  // fraction of lambdaCyc; 0 disables the identity term
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  Index batchSize = 1;
  Index poolCapacity = 50;
  Index epochs = 30;
  Index checkpointEvery = 10;  // epochs; 0 disables periodic checkpoints
  Index probeSize = 4;         // per-domain probe batch for cycle-loss tracking
};

struct GanStepLosses {
  uint64_t step = 0;
  double d0 = 0, d1 = 0;
  double gAdv = 0, gCyc = 0, gId = 0, gTotal = 0;

  bool finite() const {
    return std::isfinite(d0) && std::isfinite(d1) && std::isfinite(gAdv) &&
           std::isfinite(gCyc) && std::isfinite(gId) && std::isfinite(gTotal);
  }
};

/// The two translation networks with their discriminators, optimizers,
/// replay buffers and rng streams: everything one training run owns.
template <typename Scalar>
class CycleGan {
 public:
  CycleGan(const GanConfig& cfg, uint64_t seed)
      : cfg_(cfg),
        initRng_(RandomStream::derive(seed, "gan/init")),
        g01_(GeneratorConfig{cfg.channels, cfg.genBase, cfg.resBlocks}, initRng_),
        g10_(GeneratorConfig{cfg.channels, cfg.genBase, cfg.resBlocks}, initRng_),
        d0_(DiscriminatorConfig{cfg.channels, cfg.discBase, cfg.discLayers}, initRng_),
        d1_(DiscriminatorConfig{cfg.channels, cfg.discBase, cfg.discLayers}, initRng_),
        optG_(cfg.beta1, cfg.beta2),
        optD0_(cfg.beta1, cfg.beta2),
        optD1_(cfg.beta1, cfg.beta2),
        pool0_(cfg.poolCapacity, RandomStream::derive(seed, "gan/pool0")),
        pool1_(cfg.poolCapacity, RandomStream::derive(seed, "gan/pool1")),
        shuffleRng_(RandomStream::derive(seed, "gan/shuffle")) {
    optG_.attach(g01_, "g01");
    optG_.attach(g10_, "g10");
    optD0_.attach(d0_, "d0");
    optD1_.attach(d1_, "d1");
  }

  const GanConfig& config() const { return cfg_; }

  ResnetGenerator<Scalar>& g01() { return g01_; }
  ResnetGenerator<Scalar>& g10() { return g10_; }
  PatchDiscriminator<Scalar>& d0() { return d0_; }
  PatchDiscriminator<Scalar>& d1() { return d1_; }
  nn::Adam<Scalar>& optG() { return optG_; }
  nn::Adam<Scalar>& optD0() { return optD0_; }
  nn::Adam<Scalar>& optD1() { return optD1_; }
  ImagePool<Scalar>& pool0() { return pool0_; }
  ImagePool<Scalar>& pool1() { return pool1_; }
  RandomStream& shuffleRng() { return shuffleRng_; }

  uint64_t epoch = 0;
  uint64_t step = 0;

  void save(const std::string& path) {
    Checkpoint ck;
    saveNetParams<Scalar>(g01_, "g01", ck);
    saveNetParams<Scalar>(g10_, "g10", ck);
    saveNetParams<Scalar>(d0_, "d0", ck);
    saveNetParams<Scalar>(d1_, "d1", ck);
    optG_.saveTo(ck, "opt.g");
    optD0_.saveTo(ck, "opt.d0");
    optD1_.saveTo(ck, "opt.d1");
    pool0_.saveTo(ck, "pool0");
    pool1_.saveTo(ck, "pool1");
    const auto st = shuffleRng_.serialize();
    ck.addU64Array("rng.shuffle", std::vector<uint64_t>(st.begin(), st.end()));
    ck.addU64("state.epoch", epoch);
    ck.addU64("state.step", step);
    ck.addU64("meta.resolution", static_cast<uint64_t>(cfg_.resolution));
    ck.addU64("meta.channels", static_cast<uint64_t>(cfg_.channels));
    ck.addU64("meta.gen_base", static_cast<uint64_t>(cfg_.genBase));
    ck.addU64("meta.res_blocks", static_cast<uint64_t>(cfg_.resBlocks));
    ck.addU64("meta.disc_base", static_cast<uint64_t>(cfg_.discBase));
    ck.addU64("meta.disc_layers", static_cast<uint64_t>(cfg_.discLayers));
    ck.save(path);
  }

  void load(const std::string& path) {
    const Checkpoint ck = Checkpoint::load(path);
    checkMeta(ck);
    loadNetParams<Scalar>(g01_, "g01", ck);
    loadNetParams<Scalar>(g10_, "g10", ck);
    loadNetParams<Scalar>(d0_, "d0", ck);
    loadNetParams<Scalar>(d1_, "d1", ck);
    optG_.loadFrom(ck, "opt.g");
    optD0_.loadFrom(ck, "opt.d0");
    optD1_.loadFrom(ck, "opt.d1");
    pool0_.loadFrom(ck, "pool0");
    pool1_.loadFrom(ck, "pool1");
    const auto words = ck.u64Array("rng.shuffle");
    if (words.size() != 6) throw CheckpointError("gan checkpoint: bad rng state");
    std::array<uint64_t, 6> st{};
    std::copy(words.begin(), words.end(), st.begin());
    shuffleRng_.restore(st);
    epoch = ck.u64("state.epoch");
    step = ck.u64("state.step");
  }

  /// Architecture recorded in a checkpoint, for constructing a matching
  /// instance without the original config file.
  static GanConfig archFromCheckpoint(const Checkpoint& ck) {
    GanConfig cfg;
    cfg.resolution = static_cast<Index>(ck.u64("meta.resolution"));
    cfg.channels = static_cast<Index>(ck.u64("meta.channels"));
    cfg.genBase = static_cast<Index>(ck.u64("meta.gen_base"));
    cfg.resBlocks = static_cast<Index>(ck.u64("meta.res_blocks"));
    cfg.discBase = static_cast<Index>(ck.u64("meta.disc_base"));
    cfg.discLayers = static_cast<Index>(ck.u64("meta.disc_layers"));
    return cfg;
  }

 private:
  void checkMeta(const Checkpoint& ck) const {
    const GanConfig other = archFromCheckpoint(ck);
    if (other.resolution != cfg_.resolution || other.channels != cfg_.channels ||
        other.genBase != cfg_.genBase || other.resBlocks != cfg_.resBlocks ||
        other.discBase != cfg_.discBase || other.discLayers != cfg_.discLayers)
      throw CheckpointError("gan checkpoint: architecture mismatch with configuration");
  }

  GanConfig cfg_;
  RandomStream initRng_;
  ResnetGenerator<Scalar> g01_, g10_;
  PatchDiscriminator<Scalar> d0_, d1_;
  nn::Adam<Scalar> optG_, optD0_, optD1_;
  ImagePool<Scalar> pool0_, pool1_;
  RandomStream shuffleRng_;
};

/// Inference-mode translation. Pure: identical parameters and batch give
/// identical output. Validates range, shape and finiteness on both sides.
template <typename Scalar>
Tensor<Scalar> translate(ResnetGenerator<Scalar>& gen, const Tensor<Scalar>& batch) {
  if (batch.rank() != 4) throw TrainError("translate: expected (N, C, H, W) batch");
  if (batch.dim(1) != gen.config().channels)
    throw TrainError("translate: channel count mismatch");
  if (batch.dim(2) % 4 != 0 || batch.dim(3) % 4 != 0)
    throw TrainError("translate: spatial dims must be multiples of 4");
  if (!batch.allFinite()) throw TrainError("translate: non-finite input");
  if (batch.array().abs().maxCoeff() > Scalar(1) + Scalar(1e-5))
    throw TrainError("translate: input values outside [-1, 1]");
  Tensor<Scalar> out = gen.forward(batch, /*train=*/false);
  if (!out.allFinite()) throw TrainError("translate: non-finite generator output");
  return out;
}

namespace detail {

/// d(mean((s - target)^2)) / ds
template <typename Scalar>
Tensor<Scalar> lsganScoreGrad(const Tensor<Scalar>& scores, Scalar target) {
  Tensor<Scalar> g(scores.shape());
  g.array() = (scores.array() - target) * Scalar(2) / static_cast<Scalar>(scores.size());
  return g;
}

/// d(weight * mean|a - b|) / da, with sign(0) = 0 as the subgradient choice.
template <typename Scalar>
Tensor<Scalar> l1Grad(const Tensor<Scalar>& a, const Tensor<Scalar>& b, double weight) {
  Tensor<Scalar> g(a.shape());
  const Scalar w = static_cast<Scalar>(weight / static_cast<double>(a.size()));
  g.array() = (a.array() - b.array()).sign() * w;
  return g;
}

}  // namespace detail

/// One generator-side pass: forward both cycle directions, accumulate
/// gradients on g01 and g10 (discriminator parameter gradients are
/// clobbered and must be zeroed before the discriminator update). Returns
/// the losses and the freshly generated fakes for the replay buffers.
template <typename Scalar>
GanStepLosses generatorPass(CycleGan<Scalar>& gan, const Tensor<Scalar>& x0,
                            const Tensor<Scalar>& x1, Tensor<Scalar>* fake0Out = nullptr,
                            Tensor<Scalar>* fake1Out = nullptr) {
  GanStepLosses losses;
  const double lambda = gan.config().lambdaCyc;
  const double wId = gan.config().identityWeight * lambda;

  // direction A: x0 -> fake1 -> rec0
  Tensor<Scalar> fake1 = gan.g01().forward(x0, true);
  Tensor<Scalar> scores1 = gan.d1().forward(fake1, true);
  losses.gAdv += static_cast<double>((scores1.array() - Scalar(1)).square().mean());
  Tensor<Scalar> dFake1 = gan.d1().backward(detail::lsganScoreGrad(scores1, Scalar(1)));
  Tensor<Scalar> rec0 = gan.g10().forward(fake1, true);
  const double cycA = l1Mean(rec0, x0);
  losses.gCyc += cycA;
  dFake1.array() += gan.g10().backward(detail::l1Grad(rec0, x0, lambda)).array();
  gan.g01().backward(dFake1);

  // direction B: x1 -> fake0 -> rec1
  Tensor<Scalar> fake0 = gan.g10().forward(x1, true);
  Tensor<Scalar> scores0 = gan.d0().forward(fake0, true);
  losses.gAdv += static_cast<double>((scores0.array() - Scalar(1)).square().mean());
  Tensor<Scalar> dFake0 = gan.d0().backward(detail::lsganScoreGrad(scores0, Scalar(1)));
  Tensor<Scalar> rec1 = gan.g01().forward(fake0, true);
  const double cycB = l1Mean(rec1, x1);
  losses.gCyc += cycB;
  dFake0.array() += gan.g01().backward(detail::l1Grad(rec1, x1, lambda)).array();
  gan.g10().backward(dFake0);

  // optional identity terms: generators applied to their own target domain
  if (wId > 0) {
    Tensor<Scalar> id1 = gan.g01().forward(x1, true);
    const double lId1 = l1Mean(id1, x1);
    gan.g01().backward(detail::l1Grad(id1, x1, wId));
    Tensor<Scalar> id0 = gan.g10().forward(x0, true);
    const double lId0 = l1Mean(id0, x0);
    gan.g10().backward(detail::l1Grad(id0, x0, wId));
    losses.gId = lId0 + lId1;
  }

  losses.gTotal = losses.gAdv + lambda * losses.gCyc + wId * losses.gId;
  if (fake0Out) *fake0Out = std::move(fake0);
  if (fake1Out) *fake1Out = std::move(fake1);
  return losses;
}

/// One discriminator update from a real batch and a replay-buffer fake.
/// Returns the spec-form loss mean((D(real)-1)^2) + mean(D(fake)^2).
template <typename Scalar, typename Disc>
double discriminatorPass(Disc& disc, nn::Adam<Scalar>& opt, const Tensor<Scalar>& real,
                         const Tensor<Scalar>& fake, double lr) {
  opt.zeroGrad();
  Tensor<Scalar> sReal = disc.forward(real, true);
  const double lossReal = static_cast<double>((sReal.array() - Scalar(1)).square().mean());
  disc.backward(detail::lsganScoreGrad(sReal, Scalar(1)));
  Tensor<Scalar> sFake = disc.forward(fake, true);
  const double lossFake = static_cast<double>(sFake.array().square().mean());
  disc.backward(detail::lsganScoreGrad(sFake, Scalar(0)));
  opt.step(lr);
  return lossReal + lossFake;
}

/// One full alternating update (generators, then both discriminators).
template <typename Scalar>
GanStepLosses trainStep(CycleGan<Scalar>& gan, const Tensor<Scalar>& x0,
                        const Tensor<Scalar>& x1, double lr) {
  gan.optG().zeroGrad();
  gan.optD0().zeroGrad();
  gan.optD1().zeroGrad();

  Tensor<Scalar> fake0, fake1;
  GanStepLosses losses = generatorPass(gan, x0, x1, &fake0, &fake1);
  gan.optG().step(lr);

  // replay buffers operate on single images
  Tensor<Scalar> poolFake0(fake0.shape());
  Tensor<Scalar> poolFake1(fake1.shape());
  for (Index i = 0; i < fake0.dim(0); ++i)
    poolFake0.setSlice(i, gan.pool0().query(fake0.slice(i)));
  for (Index i = 0; i < fake1.dim(0); ++i)
    poolFake1.setSlice(i, gan.pool1().query(fake1.slice(i)));

  losses.d0 = discriminatorPass(gan.d0(), gan.optD0(), x0, poolFake0, lr);
  losses.d1 = discriminatorPass(gan.d1(), gan.optD1(), x1, poolFake1, lr);

  losses.step = ++gan.step;
  if (!losses.finite())
    throw TrainError("gan training diverged at step " + std::to_string(losses.step) +
                     ": d0=" + std::to_string(losses.d0) + " d1=" + std::to_string(losses.d1) +
                     " g_adv=" + std::to_string(losses.gAdv) +
                     " g_cyc=" + std::to_string(losses.gCyc));
  return losses;
}

struct GanEpochStats {
  uint64_t epoch = 0;
  double lr = 0;
  GanStepLosses mean;
  double probeCycle = 0;
};

struct GanTrainResult {
  std::vector<GanStepLosses> history;
  std::vector<GanEpochStats> epochs;
  double initialProbeCycle = 0;
  double finalProbeCycle = 0;
};

/// Deterministic probe batches: the first `probeSize` images per domain.
template <typename Scalar>
Tensor<Scalar> probeBatch(const std::vector<Tensor<Scalar>>& domain, Index probeSize) {
  const Index n = std::min<Index>(probeSize, static_cast<Index>(domain.size()));
  const auto& first = domain.front();
  Tensor<Scalar> batch({n, first.dim(1), first.dim(2), first.dim(3)});
  for (Index i = 0; i < n; ++i) batch.setSlice(i, domain[static_cast<size_t>(i)]);
  return batch;
}

template <typename Scalar>
double probeCycleLoss(CycleGan<Scalar>& gan, const Tensor<Scalar>& probe0,
                      const Tensor<Scalar>& probe1) {
  auto g01 = [&](const Tensor<Scalar>& x) { return gan.g01().forward(x, false); };
  auto g10 = [&](const Tensor<Scalar>& x) { return gan.g10().forward(x, false); };
  return cycleLoss(g01, g10, probe0, probe1);
}

using GanEpochCallback = std::function<void(const GanEpochStats&)>;
using GanCheckpointCallback = std::function<void(uint64_t epoch)>;

/// Alternating training loop over two unpaired domains, each a vector of
/// (1, C, H, W) images. One epoch draws floor(min(n0, n1) / batch) batches
/// from fresh shuffles of both domains. Runs epochs [gan.epoch, cfg.epochs).
template <typename Scalar>
GanTrainResult trainLoop(CycleGan<Scalar>& gan, const std::vector<Tensor<Scalar>>& domain0,
                         const std::vector<Tensor<Scalar>>& domain1,
                         const GanEpochCallback& onEpoch = nullptr,
                         const GanCheckpointCallback& onCheckpoint = nullptr) {
  if (domain0.empty() || domain1.empty())
    throw TrainError("gan training: both classes must be non-empty in the training split");
  const GanConfig& cfg = gan.config();

  GanTrainResult result;
  const Tensor<Scalar> probe0 = probeBatch(domain0, cfg.probeSize);
  const Tensor<Scalar> probe1 = probeBatch(domain1, cfg.probeSize);
  result.initialProbeCycle = probeCycleLoss(gan, probe0, probe1);
  result.finalProbeCycle = result.initialProbeCycle;

  const Index n0 = static_cast<Index>(domain0.size());
  const Index n1 = static_cast<Index>(domain1.size());
  const Index batch = std::max<Index>(1, cfg.batchSize);
  const Index stepsPerEpoch = std::max<Index>(1, std::min(n0, n1) / batch);

  std::vector<Index> order0(static_cast<size_t>(n0)), order1(static_cast<size_t>(n1));
  for (Index i = 0; i < n0; ++i) order0[static_cast<size_t>(i)] = i;
  for (Index i = 0; i < n1; ++i) order1[static_cast<size_t>(i)] = i;

  const auto& shape0 = domain0.front();
  Tensor<Scalar> x0({batch, shape0.dim(1), shape0.dim(2), shape0.dim(3)});
  Tensor<Scalar> x1({batch, shape0.dim(1), shape0.dim(2), shape0.dim(3)});

  for (uint64_t e = gan.epoch; e < static_cast<uint64_t>(cfg.epochs); ++e) {
    const double lr = nn::linearDecayLr(cfg.lr, static_cast<Index>(e), cfg.epochs);
    gan.shuffleRng().shuffle(order0.begin(), order0.end());
    gan.shuffleRng().shuffle(order1.begin(), order1.end());

    GanStepLosses sum;
    for (Index s = 0; s < stepsPerEpoch; ++s) {
      for (Index b = 0; b < batch; ++b) {
        x0.setSlice(b, domain0[static_cast<size_t>(order0[static_cast<size_t>(s * batch + b)])]);
        x1.setSlice(b, domain1[static_cast<size_t>(order1[static_cast<size_t>(s * batch + b)])]);
      }
      const GanStepLosses l = trainStep(gan, x0, x1, lr);
      result.history.push_back(l);
      sum.d0 += l.d0;
      sum.d1 += l.d1;
      sum.gAdv += l.gAdv;
      sum.gCyc += l.gCyc;
      sum.gId += l.gId;
      sum.gTotal += l.gTotal;
    }
    gan.epoch = e + 1;

    GanEpochStats stats;
    stats.epoch = gan.epoch;
    stats.lr = lr;
    const double inv = 1.0 / static_cast<double>(stepsPerEpoch);
    stats.mean = {gan.step,       sum.d0 * inv,  sum.d1 * inv, sum.gAdv * inv,
                  sum.gCyc * inv, sum.gId * inv, sum.gTotal * inv};
    stats.probeCycle = probeCycleLoss(gan, probe0, probe1);
    result.finalProbeCycle = stats.probeCycle;
    result.epochs.push_back(stats);
    if (onEpoch) onEpoch(stats);
    if (onCheckpoint && cfg.checkpointEvery > 0 &&
        (gan.epoch % static_cast<uint64_t>(cfg.checkpointEvery) == 0 ||
         gan.epoch == static_cast<uint64_t>(cfg.epochs)))
      onCheckpoint(gan.epoch);
  }
  return result;
}

}  // namespace cyclebal::gan
