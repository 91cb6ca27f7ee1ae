#pragma once

#include <algorithm>
#include <cmath>

#include "cyclebal/core/error.hpp"
#include "cyclebal/core/tensor.hpp"

namespace cyclebal::data {

/// Bilinear resize of a (C, H, W) tensor to (C, outH, outW). Sample points
/// use half-pixel centers (corner alignment disabled), so a same-size
/// resize is the identity map.
template <typename Scalar>
Tensor<Scalar> resizeBilinear(const Tensor<Scalar>& src, Eigen::Index outH,
                              Eigen::Index outW) {
  using Index = Eigen::Index;
  if (src.rank() != 3) throw DataError("resizeBilinear: expected (C, H, W) tensor");
  const Index c = src.dim(0), h = src.dim(1), w = src.dim(2);
  if (h < 1 || w < 1 || outH < 1 || outW < 1)
    throw DataError("resizeBilinear: zero-sized image");

  Tensor<Scalar> dst({c, outH, outW});
  const double scaleY = static_cast<double>(h) / static_cast<double>(outH);
  const double scaleX = static_cast<double>(w) / static_cast<double>(outW);

  for (Index y = 0; y < outH; ++y) {
    const double sy = (static_cast<double>(y) + 0.5) * scaleY - 0.5;
    const double syc = std::clamp(sy, 0.0, static_cast<double>(h - 1));
    const Index y0 = static_cast<Index>(std::floor(syc));
    const Index y1 = std::min(y0 + 1, h - 1);
    const Scalar fy = static_cast<Scalar>(syc - static_cast<double>(y0));
    for (Index x = 0; x < outW; ++x) {
      const double sx = (static_cast<double>(x) + 0.5) * scaleX - 0.5;
      const double sxc = std::clamp(sx, 0.0, static_cast<double>(w - 1));
      const Index x0 = static_cast<Index>(std::floor(sxc));
      const Index x1 = std::min(x0 + 1, w - 1);
      const Scalar fx = static_cast<Scalar>(sxc - static_cast<double>(x0));
      for (Index ch = 0; ch < c; ++ch) {
        const Scalar* p = src.data() + ch * h * w;
        const Scalar top = p[y0 * w + x0] * (Scalar(1) - fx) + p[y0 * w + x1] * fx;
        const Scalar bot = p[y1 * w + x0] * (Scalar(1) - fx) + p[y1 * w + x1] * fx;
        dst.data()[(ch * outH + y) * outW + x] = top * (Scalar(1) - fy) + bot * fy;
      }
    }
  }
  return dst;
}

/// Declared value range of the input pixels.
enum class PixelRange {
  Unit01,  // raw decoder output, [0, 1]
  Sym11,   // already normalized, [-1, 1]
};

/// Normalize a raw decoded image into the network convention: square
/// `resolution`, values in [-1, 1], channel count replicated or averaged
/// to `channels` (grayscale -> RGB replication, RGB -> grayscale mean).
/// Inputs already in [-1, 1] pass `PixelRange::Sym11`, which makes the
/// call idempotent.
template <typename Scalar>
Tensor<Scalar> preprocess(const Tensor<Scalar>& raw, Eigen::Index resolution,
                          Eigen::Index channels, PixelRange range = PixelRange::Unit01) {
  using Index = Eigen::Index;
  if (raw.rank() != 3) throw DataError("preprocess: expected (C, H, W) tensor");
  if (resolution < 1) throw DataError("preprocess: resolution must be positive");
  if (raw.dim(1) < 1 || raw.dim(2) < 1) throw DataError("preprocess: zero-sized image");
  if (!raw.allFinite()) throw DataError("preprocess: non-finite pixel values");

  Tensor<Scalar> channeled;
  const Index srcC = raw.dim(0);
  if (srcC == channels) {
    channeled = raw;
  } else if (srcC == 1) {
    channeled = Tensor<Scalar>({channels, raw.dim(1), raw.dim(2)});
    const Index plane = raw.dim(1) * raw.dim(2);
    for (Index c = 0; c < channels; ++c)
      std::copy(raw.data(), raw.data() + plane, channeled.data() + c * plane);
  } else if (channels == 1) {
    channeled = Tensor<Scalar>({Index(1), raw.dim(1), raw.dim(2)});
    const Index plane = raw.dim(1) * raw.dim(2);
    for (Index i = 0; i < plane; ++i) {
      Scalar acc = 0;
      for (Index c = 0; c < srcC; ++c) acc += raw.data()[c * plane + i];
      channeled.data()[i] = acc / static_cast<Scalar>(srcC);
    }
  } else {
    throw DataError("preprocess: cannot map " + std::to_string(srcC) + " channels to " +
                    std::to_string(channels));
  }

  Tensor<Scalar> resized = (channeled.dim(1) == resolution && channeled.dim(2) == resolution)
                               ? channeled
                               : resizeBilinear(channeled, resolution, resolution);
  if (range == PixelRange::Unit01)
    resized.array() = resized.array() * Scalar(2) - Scalar(1);
  return resized;
}

/// Inverse of the [-1,1] mapping, for writing network outputs to disk.
template <typename Scalar>
Tensor<Scalar> toUnitRange(const Tensor<Scalar>& img) {
  Tensor<Scalar> out = img;
  out.array() = ((out.array() + Scalar(1)) * Scalar(0.5)).cwiseMin(Scalar(1)).cwiseMax(Scalar(0));
  return out;
}

}  // namespace cyclebal::data
