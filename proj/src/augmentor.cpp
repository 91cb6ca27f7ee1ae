#include "cyclebal/augment/augmentor.hpp"

#include <algorithm>
#include <filesystem>

#include "cyclebal/data/image.hpp"
#include "cyclebal/io/png_io.hpp"

namespace fs = std::filesystem;

namespace cyclebal::augment {

namespace {

using data::Provenance;
using data::Split;

Sample makeComplement(const Sample& src, Tensor<float> image) {
  Sample out;
  out.id = src.id + "__gen";
  out.image = std::move(image);
  out.label = 1 - src.label;
  out.split = Split::Train;
  out.provenance = Provenance::Generated;
  out.sourceId = src.id;
  return out;
}

void translateGroup(const std::vector<const Sample*>& group,
                    gan::ResnetGenerator<float>& gen, Eigen::Index batchSize,
                    std::vector<Sample>& out) {
  if (group.empty()) return;
  const auto& shape = group.front()->image;
  const Eigen::Index c = shape.dim(0), h = shape.dim(1), w = shape.dim(2);
  for (size_t start = 0; start < group.size(); start += static_cast<size_t>(batchSize)) {
    const Eigen::Index n =
        std::min<Eigen::Index>(batchSize, static_cast<Eigen::Index>(group.size() - start));
    Tensor<float> batch({n, c, h, w});
    for (Eigen::Index i = 0; i < n; ++i) {
      const Sample& s = *group[start + static_cast<size_t>(i)];
      if (s.image.dim(0) != c || s.image.dim(1) != h || s.image.dim(2) != w)
        throw TrainError("augment: sample '" + s.id + "' resolution mismatch");
      std::copy(s.image.data(), s.image.data() + s.image.size(), batch.sampleData(i));
    }
    const Tensor<float> translated = gan::translate(gen, batch);
    for (Eigen::Index i = 0; i < n; ++i)
      out.push_back(makeComplement(*group[start + static_cast<size_t>(i)],
                                   translated.slice(i).reshaped({c, h, w})));
  }
}

}  // namespace

AugmentedDataset generateComplements(const std::vector<Sample>& trainSamples,
                                     gan::ResnetGenerator<float>& g01,
                                     gan::ResnetGenerator<float>& g10,
                                     Eigen::Index batchSize) {
  if (batchSize < 1) throw TrainError("augment: batch size must be positive");
  for (const auto& s : trainSamples) {
    if (s.provenance != Provenance::Original)
      throw TrainError("augment: input sample '" + s.id + "' is not an original");
    if (s.split != Split::Train)
      throw TrainError("augment: input sample '" + s.id + "' is not in the training split");
  }

  AugmentedDataset out;
  out.originals = trainSamples;

  // keep generation order independent of label interleaving
  std::vector<const Sample*> class0, class1;
  for (const auto& s : trainSamples) (s.label == 0 ? class0 : class1).push_back(&s);
  translateGroup(class0, g01, batchSize, out.generated);
  translateGroup(class1, g10, batchSize, out.generated);

  const auto n = static_cast<Eigen::Index>(out.originals.size());
  Eigen::Index count0 = 0, count1 = 0;
  for (const auto& s : out.originals) (s.label == 0 ? count0 : count1)++;
  for (const auto& s : out.generated) (s.label == 0 ? count0 : count1)++;
  if (static_cast<Eigen::Index>(out.generated.size()) != n || count0 != n || count1 != n)
    throw TrainError("augment: balance invariant violated");
  return out;
}

AugmentedDataset augment(const std::vector<Sample>& trainSamples,
                         gan::ResnetGenerator<float>& g01, gan::ResnetGenerator<float>& g10,
                         Eigen::Index batchSize, const std::string& outDir) {
  AugmentedDataset out = generateComplements(trainSamples, g01, g10, batchSize);

  std::error_code ec;
  fs::create_directories(fs::path(outDir) / "gen", ec);
  if (ec) throw DataError("augment: cannot create '" + outDir + "': " + ec.message());

  out.manifest.dir = outDir;
  const fs::path base = fs::absolute(outDir).lexically_normal();
  for (auto& s : out.originals) {
    data::ManifestRecord r;
    r.path = fs::path(s.path).lexically_proximate(base).generic_string();
    r.label = s.label;
    r.split = s.split;
    out.manifest.records.push_back(std::move(r));
  }
  for (auto& s : out.generated) {
    const std::string rel = "gen/" + s.id + ".png";
    const fs::path file = fs::path(outDir) / rel;
    const int bitDepth = s.image.dim(0) == 1 ? 16 : 8;
    io::writePng(file.string(), data::toUnitRange(s.image), bitDepth);
    s.path = fs::absolute(file).lexically_normal().string();
    data::ManifestRecord r;
    r.path = rel;
    r.label = s.label;
    r.split = s.split;
    r.sourceId = s.sourceId;
    out.manifest.records.push_back(std::move(r));
  }
  data::saveManifest(out.manifest, (fs::path(outDir) / "manifest.csv").string());
  return out;
}

Tensor<float> differenceImage(const Sample& original, const Sample& generated) {
  if (!original.image.sameShape(generated.image))
    throw DataError("differenceImage: shape mismatch between '" + original.id + "' and '" +
                    generated.id + "'");
  if (generated.sourceId != original.id)
    throw DataError("differenceImage: '" + generated.id + "' does not derive from '" +
                    original.id + "'");
  const Eigen::Index c = original.image.dim(0), h = original.image.dim(1),
                     w = original.image.dim(2);
  Tensor<float> diff({h, w});
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      float acc = 0;
      for (Eigen::Index ch = 0; ch < c; ++ch)
        acc += std::abs(original.image.data()[(ch * h + y) * w + x] -
                        generated.image.data()[(ch * h + y) * w + x]);
      diff.at(y, x) = acc / static_cast<float>(c);
    }
  }
  const float lo = diff.array().minCoeff();
  const float hi = diff.array().maxCoeff();
  if (hi > lo)
    diff.array() = (diff.array() - lo) / (hi - lo);
  else
    diff.setZero();
  return diff;
}

}  // namespace cyclebal::augment
