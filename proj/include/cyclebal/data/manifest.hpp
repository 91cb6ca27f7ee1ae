#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "cyclebal/core/tensor.hpp"

namespace cyclebal::data {

enum class Split { Train, Validation };

const char* splitName(Split s);
Split splitFromName(const std::string& name, int line);

enum class Provenance { Original, Generated };

/// One image with its binary label. Images are (C, H, W) in [-1, 1] after
/// preprocessing. Generated samples carry the id of the original they were
/// translated from and the flipped label.
struct Sample {
  std::string id;
  Tensor<float> image;
  int label = 0;
  Split split = Split::Train;
  Provenance provenance = Provenance::Original;
  std::string sourceId;  // set iff provenance == Generated
  std::string path;      // resolved location on disk
};

struct ManifestRecord {
  std::string path;
  int label = 0;
  Split split = Split::Train;
  std::string sourceId;  // optional column
};

/// Parsed CSV manifest: rows of (path, label, split[, source_id]) plus
/// per-split class counts.
struct DatasetManifest {
  std::vector<ManifestRecord> records;
  std::string dir;  // directory of the manifest file; relative paths resolve against it

  Eigen::Index n() const { return static_cast<Eigen::Index>(records.size()); }
  Eigen::Index count(Split split, int label) const;
  Eigen::Index splitTotal(Split split) const;
  bool hasSourceIds() const;
};

/// Parse a manifest CSV. Errors (missing file, malformed row, label outside
/// {0,1}, duplicate path, unknown split) name the offending row.
DatasetManifest loadManifest(const std::string& path);

/// Write a manifest CSV; emits the source_id column when any record has one.
void saveManifest(const DatasetManifest& manifest, const std::string& path);

struct SplitBalance {
  Eigen::Index count0 = 0;
  Eigen::Index count1 = 0;
  double ratio = 1.0;      // majority / minority; +inf when one class is empty
  bool degenerate = false; // one class empty
};

/// Majority/minority imbalance ratio per split. A split that is entirely
/// one class reports an infinite ratio (flagged degenerate) rather than
/// failing; an empty split is an error.
std::map<Split, SplitBalance> balanceReport(const DatasetManifest& manifest);

/// Load and preprocess the images behind a manifest. `onlySplit` restricts
/// to one split; pass nullptr for all. Safe to call concurrently; loading
/// itself parallelizes across samples.
std::vector<Sample> loadSamples(const DatasetManifest& manifest, Eigen::Index resolution,
                                Eigen::Index channels, const Split* onlySplit = nullptr);

/// Sample id used for a manifest record (the path stem).
std::string idFromPath(const std::string& path);

}  // namespace cyclebal::data
