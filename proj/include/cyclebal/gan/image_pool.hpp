#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "cyclebal/core/checkpoint.hpp"
#include "cyclebal/core/rng.hpp"
#include "cyclebal/core/tensor.hpp"

namespace cyclebal::gan {

/// Replay buffer of previously generated images. Until full it stores and
/// returns the new image; afterwards it returns, with probability 1/2, a
/// random stored image (swapping the new one in). Feeding discriminators
/// from the pool keeps their updates from chasing only the newest
/// generator output.
template <typename Scalar>
class ImagePool {
 public:
  ImagePool(Eigen::Index capacity, RandomStream rng)
      : capacity_(capacity), rng_(std::move(rng)) {}

  /// `image` must be a single (1, C, H, W) sample.
  Tensor<Scalar> query(const Tensor<Scalar>& image) {
    if (capacity_ == 0) return image;
    if (static_cast<Eigen::Index>(images_.size()) < capacity_) {
      images_.push_back(image);
      return image;
    }
    if (rng_.uniform() < 0.5) {
      const auto idx = static_cast<size_t>(rng_.uniformInt(static_cast<uint64_t>(capacity_)));
      Tensor<Scalar> out = images_[idx];
      images_[idx] = image;
      return out;
    }
    return image;
  }

  Eigen::Index size() const { return static_cast<Eigen::Index>(images_.size()); }
  Eigen::Index capacity() const { return capacity_; }

  void saveTo(Checkpoint& ck, const std::string& prefix) const {
    ck.addU64(prefix + ".count", images_.size());
    const auto st = rng_.serialize();
    ck.addU64Array(prefix + ".rng", std::vector<uint64_t>(st.begin(), st.end()));
    for (size_t i = 0; i < images_.size(); ++i)
      ck.add(prefix + ".img" + std::to_string(i), images_[i]);
  }

  void loadFrom(const Checkpoint& ck, const std::string& prefix) {
    const auto count = ck.u64(prefix + ".count");
    images_.clear();
    for (uint64_t i = 0; i < count; ++i)
      images_.push_back(ck.template tensor<Scalar>(prefix + ".img" + std::to_string(i)));
    const auto rngWords = ck.u64Array(prefix + ".rng");
    if (rngWords.size() != 6) throw CheckpointError("image pool: bad rng state");
    std::array<uint64_t, 6> st{};
    std::copy(rngWords.begin(), rngWords.end(), st.begin());
    rng_.restore(st);
  }

 private:
  Eigen::Index capacity_;
  std::vector<Tensor<Scalar>> images_;
  RandomStream rng_;
};

}  // namespace cyclebal::gan
