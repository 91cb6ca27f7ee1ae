#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cyclebal/core/error.hpp"
#include "cyclebal/core/tensor.hpp"

namespace cyclebal {

/// Single-file binary checkpoint container. Layout (little-endian):
///
///   magic   "CBALCKPT"             8 bytes
///   version u32                    currently 1
///   count   u64                    number of entries
///   entry*  name_len u32, name bytes,
///           dtype u8 (0=f32 1=f64 2=u64 3=i64),
///           rank u32, dims u64[rank], raw values
///
/// Everything a run needs to resume lives in one table under dotted names:
/// network parameters, optimizer moments, replay-buffer images, rng states
/// and step counters.
class Checkpoint {
 public:
  enum class DType : uint8_t { F32 = 0, F64 = 1, U64 = 2, I64 = 3 };

  struct Entry {
    DType dtype = DType::F32;
    std::vector<Eigen::Index> dims;
    std::vector<unsigned char> bytes;

    Eigen::Index elementCount() const;
  };

  static constexpr char kMagic[9] = "CBALCKPT";
  static constexpr uint32_t kVersion = 1;

  bool has(const std::string& name) const { return entries_.count(name) != 0; }
  const Entry& at(const std::string& name) const;
  std::vector<std::string> names() const;
  size_t entryCount() const { return entries_.size(); }

  void add(const std::string& name, const Tensor<float>& t);
  void add(const std::string& name, const Tensor<double>& t);
  void addU64(const std::string& name, uint64_t value);
  void addU64Array(const std::string& name, const std::vector<uint64_t>& values);
  void addI64(const std::string& name, int64_t value);
  void addF64(const std::string& name, double value);

  Tensor<float> tensorF32(const std::string& name) const;
  Tensor<double> tensorF64(const std::string& name) const;
  uint64_t u64(const std::string& name) const;
  std::vector<uint64_t> u64Array(const std::string& name) const;
  int64_t i64(const std::string& name) const;
  double f64(const std::string& name) const;

  /// Read a tensor of either float width into Scalar.
  template <typename Scalar>
  Tensor<Scalar> tensor(const std::string& name) const;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

 private:
  std::map<std::string, Entry> entries_;
};

template <>
inline Tensor<float> Checkpoint::tensor<float>(const std::string& name) const {
  return tensorF32(name);
}
template <>
inline Tensor<double> Checkpoint::tensor<double>(const std::string& name) const {
  return tensorF64(name);
}

}  // namespace cyclebal
