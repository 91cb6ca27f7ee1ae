#pragma once

#include <string>

#include "cyclebal/core/tensor.hpp"

namespace cyclebal::io {

/// Decode a PNG into a (C, H, W) float tensor with values in [0, 1].
/// Grayscale stays 1 channel, color becomes 3; alpha is dropped,
/// palette images are expanded. 8- and 16-bit depths are supported.
Tensor<float> readPng(const std::string& path);

/// Encode a (C, H, W) tensor with values in [0, 1] as PNG. C must be 1
/// (grayscale) or 3 (RGB). Values outside [0, 1] are clipped. Output is
/// deterministic for identical input.
void writePng(const std::string& path, const Tensor<float>& image, int bitDepth = 8);

}  // namespace cyclebal::io
