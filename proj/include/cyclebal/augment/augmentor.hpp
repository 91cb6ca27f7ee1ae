#pragma once

#include <string>
#include <vector>

#include "cyclebal/data/manifest.hpp"
#include "cyclebal/gan/trainer.hpp"

namespace cyclebal::augment {

using data::DatasetManifest;
using data::Sample;

/// Originals plus one label-flipped generated complement per original.
/// Class counts over the union are exactly equal: n samples per class,
/// where n is the original count.
struct AugmentedDataset {
  std::vector<Sample> originals;
  std::vector<Sample> generated;
  DatasetManifest manifest;  // covers both; generated rows carry source_id
};

/// Generate the complement of every training sample: label-0 inputs go
/// through g01 and come back labeled 1, label-1 inputs through g10 labeled
/// 0. Generated ids are `<source_id>__gen`. A non-finite generator output
/// aborts (skipping would break the exact-balance invariant).
AugmentedDataset generateComplements(const std::vector<Sample>& trainSamples,
                                     gan::ResnetGenerator<float>& g01,
                                     gan::ResnetGenerator<float>& g10,
                                     Eigen::Index batchSize);

/// generateComplements + persistence: generated images under
/// `<outDir>/gen/`, combined manifest at `<outDir>/manifest.csv` with
/// original rows pointing back at the source files.
AugmentedDataset augment(const std::vector<Sample>& trainSamples,
                         gan::ResnetGenerator<float>& g01, gan::ResnetGenerator<float>& g10,
                         Eigen::Index batchSize, const std::string& outDir);

/// Per-pixel absolute difference, channel-averaged and min-max normalized
/// to [0, 1]; an all-zero difference stays all-zero. Shapes must match and
/// `generated` must derive from `original`.
Tensor<float> differenceImage(const Sample& original, const Sample& generated);

}  // namespace cyclebal::augment
