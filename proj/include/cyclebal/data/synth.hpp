#pragma once

#include <string>

#include "cyclebal/data/manifest.hpp"

namespace cyclebal::data {

/// Parameters of the synthetic blob benchmark. Class-1 images carry one
/// bright Gaussian blob at a random location over a noisy background;
/// class-0 images are background noise only. Pixel values are on the
/// [0, 1] scale before PNG quantization.
struct SynthConfig {
  Eigen::Index size = 64;
  Eigen::Index trainCount0 = 180;
  Eigen::Index trainCount1 = 20;
  Eigen::Index valCount0 = 45;
  Eigen::Index valCount1 = 5;
  double background = 0.35;
  double noiseSigma = 0.12;
  double blobAmplitude = 0.55;
  double blobSigma = 5.0;
  Eigen::Index blobMargin = 12;  // minimum blob center distance from the border
};

/// Blob placement recorded for each class-1 image; the bounding box is the
/// +-3 sigma extent, clipped to the image.
struct BlobInfo {
  std::string id;
  double cx = 0, cy = 0, sigma = 0;
  Eigen::Index x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

struct SynthResult {
  DatasetManifest manifest;
  std::string manifestPath;
  std::string blobCsvPath;
  std::vector<BlobInfo> blobs;
};

/// Write a deterministic synthetic dataset under `outDir` (images/ + a
/// manifest.csv + blobs.csv). Each image is a pure function of (config,
/// seed, split, class, index): the same call produces byte-identical files.
SynthResult synthBenchmark(const SynthConfig& config, uint64_t seed,
                           const std::string& outDir);

/// Render one synthetic image in memory, (1, size, size) in [0, 1].
/// Exposed for tests; `blob` receives the placement when label == 1.
Tensor<float> synthImage(const SynthConfig& config, uint64_t seed, Split split, int label,
                         Eigen::Index index, BlobInfo* blob = nullptr);

}  // namespace cyclebal::data
