#include "cyclebal/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cyclebal/core/error.hpp"
#include "cyclebal/core/rng.hpp"
#include "cyclebal/io/png_io.hpp"

namespace fs = std::filesystem;

namespace cyclebal::data {

namespace {

std::string sampleId(Split split, int label, Eigen::Index index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_c%d_%04ld", split == Split::Train ? "train" : "val",
                label, static_cast<long>(index));
  return buf;
}

}  // namespace

Tensor<float> synthImage(const SynthConfig& cfg, uint64_t seed, Split split, int label,
                         Eigen::Index index, BlobInfo* blob) {
  const Eigen::Index n = cfg.size;
  if (n < 4) throw DataError("synth: image size must be at least 4");
  const std::string id = sampleId(split, label, index);
  RandomStream rng = RandomStream::derive(seed, "synth/" + id);

  Tensor<float> img({Eigen::Index(1), n, n});
  for (Eigen::Index i = 0; i < n * n; ++i)
    img.data()[i] = static_cast<float>(cfg.background + cfg.noiseSigma * rng.normal());

  if (label == 1) {
    const double lo = static_cast<double>(std::min(cfg.blobMargin, n / 2));
    const double hi = static_cast<double>(n - 1) - lo;
    const double cx = rng.uniform(lo, hi);
    const double cy = rng.uniform(lo, hi);
    const double sigma = cfg.blobSigma;
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    for (Eigen::Index y = 0; y < n; ++y) {
      for (Eigen::Index x = 0; x < n; ++x) {
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        img.data()[y * n + x] +=
            static_cast<float>(cfg.blobAmplitude * std::exp(-d2 * inv2s2));
      }
    }
    if (blob) {
      blob->id = id;
      blob->cx = cx;
      blob->cy = cy;
      blob->sigma = sigma;
      blob->x0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(cx - 3 * sigma)));
      blob->y0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(cy - 3 * sigma)));
      blob->x1 = std::min<Eigen::Index>(n - 1, static_cast<Eigen::Index>(std::ceil(cx + 3 * sigma)));
      blob->y1 = std::min<Eigen::Index>(n - 1, static_cast<Eigen::Index>(std::ceil(cy + 3 * sigma)));
    }
  }

  img.array() = img.array().cwiseMin(1.0f).cwiseMax(0.0f);
  return img;
}

SynthResult synthBenchmark(const SynthConfig& cfg, uint64_t seed, const std::string& outDir) {
  std::error_code ec;
  fs::create_directories(fs::path(outDir) / "images", ec);
  if (ec) throw DataError("synth: cannot create output directory '" + outDir + "': " + ec.message());

  SynthResult result;
  result.manifest.dir = outDir;

  struct Group {
    Split split;
    int label;
    Eigen::Index count;
  };
  const Group groups[] = {
      {Split::Train, 0, cfg.trainCount0},
      {Split::Train, 1, cfg.trainCount1},
      {Split::Validation, 0, cfg.valCount0},
      {Split::Validation, 1, cfg.valCount1},
  };

  for (const Group& g : groups) {
    for (Eigen::Index i = 0; i < g.count; ++i) {
      BlobInfo blob;
      Tensor<float> img = synthImage(cfg, seed, g.split, g.label, i, &blob);
      const std::string id = sampleId(g.split, g.label, i);
      const std::string rel = "images/" + id + ".png";
      io::writePng((fs::path(outDir) / rel).string(), img, 8);
      ManifestRecord r;
      r.path = rel;
      r.label = g.label;
      r.split = g.split;
      result.manifest.records.push_back(std::move(r));
      if (g.label == 1) result.blobs.push_back(blob);
    }
  }

  result.manifestPath = (fs::path(outDir) / "manifest.csv").string();
  saveManifest(result.manifest, result.manifestPath);

  result.blobCsvPath = (fs::path(outDir) / "blobs.csv").string();
  std::ofstream blobCsv(result.blobCsvPath, std::ios::trunc);
  if (!blobCsv) throw DataError("synth: cannot write '" + result.blobCsvPath + "'");
  blobCsv << "id,cx,cy,sigma,x0,y0,x1,y1\n";
  char buf[256];
  for (const auto& b : result.blobs) {
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.3f,%ld,%ld,%ld,%ld\n", b.id.c_str(), b.cx,
                  b.cy, b.sigma, static_cast<long>(b.x0), static_cast<long>(b.y0),
                  static_cast<long>(b.x1), static_cast<long>(b.y1));
    blobCsv << buf;
  }
  return result;
}

}  // namespace cyclebal::data
