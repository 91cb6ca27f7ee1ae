#include "cyclebal/data/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include "cyclebal/core/error.hpp"
#include "cyclebal/data/image.hpp"
#include "cyclebal/io/png_io.hpp"

namespace fs = std::filesystem;

namespace cyclebal::data {

const char* splitName(Split s) { return s == Split::Train ? "train" : "validation"; }

Split splitFromName(const std::string& name, int line) {
  if (name == "train") return Split::Train;
  if (name == "validation") return Split::Validation;
  throw DataError("manifest row " + std::to_string(line) + ": unknown split '" + name +
                  "' (expected train or validation)");
}

namespace {

std::vector<std::string> splitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  for (auto& f : fields) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.erase(f.begin());
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.pop_back();
  }
  return fields;
}

int parseLabel(const std::string& s, int line) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw DataError("manifest row " + std::to_string(line) + ": label '" + s +
                  "' outside {0,1}");
}

}  // namespace

Eigen::Index DatasetManifest::count(Split split, int label) const {
  Eigen::Index c = 0;
  for (const auto& r : records)
    if (r.split == split && r.label == label) ++c;
  return c;
}

Eigen::Index DatasetManifest::splitTotal(Split split) const {
  return count(split, 0) + count(split, 1);
}

bool DatasetManifest::hasSourceIds() const {
  return std::any_of(records.begin(), records.end(),
                     [](const ManifestRecord& r) { return !r.sourceId.empty(); });
}

DatasetManifest loadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("manifest: cannot open '" + path + "'");

  DatasetManifest m;
  m.dir = fs::path(path).parent_path().string();

  std::string line;
  int lineNo = 0;
  bool withSource = false;
  if (!std::getline(in, line)) throw DataError("manifest '" + path + "': empty file");
  ++lineNo;
  auto header = splitCsvLine(line);
  if (header.size() == 4 && header[3] == "source_id") {
    withSource = true;
  } else if (header.size() != 3) {
    throw DataError("manifest '" + path + "' row 1: expected header path,label,split[,source_id]");
  }
  if (header[0] != "path" || header[1] != "label" || header[2] != "split")
    throw DataError("manifest '" + path + "' row 1: expected header path,label,split[,source_id]");

  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty() || line == "\r") continue;
    auto fields = splitCsvLine(line);
    const size_t expected = withSource ? 4 : 3;
    if (fields.size() != expected)
      throw DataError("manifest row " + std::to_string(lineNo) + ": expected " +
                      std::to_string(expected) + " fields, got " +
                      std::to_string(fields.size()));
    ManifestRecord r;
    r.path = fields[0];
    if (r.path.empty())
      throw DataError("manifest row " + std::to_string(lineNo) + ": empty path");
    if (!seen.insert(r.path).second)
      throw DataError("manifest row " + std::to_string(lineNo) + ": duplicate path '" +
                      r.path + "'");
    r.label = parseLabel(fields[1], lineNo);
    r.split = splitFromName(fields[2], lineNo);
    if (withSource) r.sourceId = fields[3];
    m.records.push_back(std::move(r));
  }
  return m;
}

void saveManifest(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("manifest: cannot open '" + path + "' for writing");
  const bool withSource = manifest.hasSourceIds();
  out << (withSource ? "path,label,split,source_id\n" : "path,label,split\n");
  for (const auto& r : manifest.records) {
    out << r.path << ',' << r.label << ',' << splitName(r.split);
    if (withSource) out << ',' << r.sourceId;
    out << '\n';
  }
  if (!out) throw DataError("manifest: write to '" + path + "' failed");
}

std::map<Split, SplitBalance> balanceReport(const DatasetManifest& manifest) {
  std::map<Split, SplitBalance> report;
  for (Split s : {Split::Train, Split::Validation}) {
    if (manifest.splitTotal(s) == 0) continue;
    SplitBalance b;
    b.count0 = manifest.count(s, 0);
    b.count1 = manifest.count(s, 1);
    const auto majority = std::max(b.count0, b.count1);
    const auto minority = std::min(b.count0, b.count1);
    if (minority == 0) {
      b.ratio = std::numeric_limits<double>::infinity();
      b.degenerate = true;
    } else {
      b.ratio = static_cast<double>(majority) / static_cast<double>(minority);
    }
    report[s] = b;
  }
  if (report.empty()) throw DataError("balance report: manifest is empty");
  return report;
}

std::string idFromPath(const std::string& path) { return fs::path(path).stem().string(); }

std::vector<Sample> loadSamples(const DatasetManifest& manifest, Eigen::Index resolution,
                                Eigen::Index channels, const Split* onlySplit) {
  std::vector<const ManifestRecord*> selected;
  for (const auto& r : manifest.records)
    if (!onlySplit || r.split == *onlySplit) selected.push_back(&r);

  std::vector<Sample> out(selected.size());
  std::vector<std::string> errors(selected.size());

#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(selected.size()); ++i) {
    const ManifestRecord& r = *selected[static_cast<size_t>(i)];
    try {
      fs::path p(r.path);
      if (p.is_relative()) p = fs::path(manifest.dir) / p;
      Sample s;
      s.id = idFromPath(r.path);
      s.image = preprocess(io::readPng(p.string()), resolution, channels);
      s.label = r.label;
      s.split = r.split;
      s.provenance = r.sourceId.empty() ? Provenance::Original : Provenance::Generated;
      s.sourceId = r.sourceId;
      s.path = fs::absolute(p).lexically_normal().string();
      out[static_cast<size_t>(i)] = std::move(s);
    } catch (const std::exception& e) {
      errors[static_cast<size_t>(i)] = std::string(e.what()) + " (while loading '" + r.path + "')";
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw DataError(e);

  std::set<std::string> ids;
  for (const auto& s : out)
    if (!ids.insert(s.id).second)
      throw DataError("dataset: duplicate sample id '" + s.id + "'");
  return out;
}

}  // namespace cyclebal::data
