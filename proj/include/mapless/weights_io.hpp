#ifndef MAPLESS_WEIGHTS_IO_HPP
#define MAPLESS_WEIGHTS_IO_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include "policy_net.hpp"

namespace mapless {

// Weights file layout (all integers and floats little-endian):
//   "MLPW" | u32 format version | u64 architecture digest | 10 x i32 architecture fields
//   | u32 tensor count | per tensor: u16 name length, name, u32 rank, rank x u32 dims,
//     u64 payload byte offset, u64 element count
//   | payload: f32 values of every tensor in manifest order

inline constexpr char kWeightsMagic[4] = {'M', 'L', 'P', 'W'};
inline constexpr std::uint32_t kWeightsVersion = 1;

class weights_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class weights_version_error : public weights_error {
  using weights_error::weights_error;
};
class weights_shape_error : public weights_error {
  using weights_error::weights_error;
};
class weights_corrupt_error : public weights_error {
  using weights_error::weights_error;
};

namespace detail {

template <typename T>
void put_le(std::string& buf, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  buf.append(bytes, sizeof(T));
}

class Reader {
public:
  explicit Reader(const std::string& data) : data_(data) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > data_.size()) throw weights_corrupt_error("weights file truncated");
    char bytes[sizeof(T)];
    std::memcpy(bytes, data_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return v;
  }

  std::string bytes(std::size_t n) {
    if (pos_ + n > data_.size()) throw weights_corrupt_error("weights file truncated");
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t position() const { return pos_; }
  std::size_t size() const { return data_.size(); }

private:
  const std::string& data_;
  std::size_t pos_ = 0;
};

inline std::string shape_string(const std::vector<int>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
  return s + "]";
}

}  // namespace detail

inline std::string serialize_params(const NetworkParams<float>& p) {
  std::string buf(kWeightsMagic, 4);
  detail::put_le(buf, kWeightsVersion);
  detail::put_le(buf, p.arch.digest());
  const Architecture& a = p.arch;
  for (int v : {a.input_size, a.channels, a.conv1_filters, a.conv1_kernel, a.conv1_stride, a.conv2_filters,
                a.conv2_kernel, a.conv2_stride, a.hidden, a.actions})
    detail::put_le(buf, static_cast<std::int32_t>(v));
  detail::put_le(buf, static_cast<std::uint32_t>(p.tensors.size()));
  std::uint64_t offset = 0;
  for (const auto& t : p.tensors) {
    detail::put_le(buf, static_cast<std::uint16_t>(t.name.size()));
    buf += t.name;
    detail::put_le(buf, static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) detail::put_le(buf, static_cast<std::uint32_t>(d));
    detail::put_le(buf, offset);
    detail::put_le(buf, static_cast<std::uint64_t>(t.data.size()));
    offset += t.data.size() * sizeof(float);
  }
  for (const auto& t : p.tensors)
    for (float v : t.data) detail::put_le(buf, v);
  return buf;
}

/// Parses a weights blob. When `expected` is given, every tensor shape must
/// match that architecture; the first mismatch is reported by name.
inline NetworkParams<float> deserialize_params(const std::string& data, const Architecture* expected = nullptr) {
  detail::Reader in(data);
  if (data.size() < 4 || std::memcmp(data.data(), kWeightsMagic, 4) != 0)
    throw weights_corrupt_error("not a weights file (bad magic)");
  in.bytes(4);
  const auto version = in.get<std::uint32_t>();
  if (version != kWeightsVersion)
    throw weights_version_error("weights format version " + std::to_string(version) + ", expected " +
                                std::to_string(kWeightsVersion));
  const auto digest = in.get<std::uint64_t>();
  Architecture a;
  for (int* field : {&a.input_size, &a.channels, &a.conv1_filters, &a.conv1_kernel, &a.conv1_stride, &a.conv2_filters,
                     &a.conv2_kernel, &a.conv2_stride, &a.hidden, &a.actions})
    *field = in.get<std::int32_t>();
  if (a.digest() != digest) throw weights_corrupt_error("architecture digest does not match header fields");

  NetworkParams<float> file_layout;
  try {
    file_layout = NetworkParams<float>::zeros(a);
  } catch (const parameter_error& e) {
    throw weights_corrupt_error(std::string("invalid architecture in header: ") + e.what());
  }
  const NetworkParams<float> reference = expected ? NetworkParams<float>::zeros(*expected) : file_layout;

  const auto count = in.get<std::uint32_t>();
  if (count != reference.tensors.size())
    throw weights_shape_error("weights file has " + std::to_string(count) + " tensors, expected " +
                              std::to_string(reference.tensors.size()));

  struct Entry {
    std::uint64_t offset;
    std::uint64_t elements;
  };
  std::vector<Entry> entries;
  NetworkParams<float> out = reference;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto name_len = in.get<std::uint16_t>();
    const std::string name = in.bytes(name_len);
    const auto rank = in.get<std::uint32_t>();
    if (rank > 8) throw weights_corrupt_error("tensor '" + name + "' has implausible rank");
    std::vector<int> shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(static_cast<int>(in.get<std::uint32_t>()));
    const Entry e{in.get<std::uint64_t>(), in.get<std::uint64_t>()};
    const auto& want = reference.tensors[k];
    if (name != want.name) throw weights_shape_error("tensor " + std::to_string(k) + " is '" + name + "', expected '" + want.name + "'");
    if (shape != want.shape)
      throw weights_shape_error("tensor '" + name + "' has shape " + detail::shape_string(shape) + ", expected " +
                                detail::shape_string(want.shape));
    if (e.elements != want.data.size()) throw weights_corrupt_error("tensor '" + name + "' element count disagrees with shape");
    entries.push_back(e);
  }
  out.arch = expected ? *expected : a;

  const std::size_t payload = in.position();
  std::uint64_t expected_offset = 0;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (entries[k].offset != expected_offset) throw weights_corrupt_error("tensor offsets are not contiguous");
    expected_offset += entries[k].elements * sizeof(float);
  }
  if (payload + expected_offset != data.size())
    throw weights_corrupt_error(payload + expected_offset > data.size() ? "weights file truncated"
                                                                        : "trailing bytes after weights payload");
  for (auto& t : out.tensors)
    for (auto& v : t.data) {
      v = in.get<float>();
      if (!std::isfinite(v)) throw weights_corrupt_error("tensor '" + t.name + "' contains a non-finite value");
    }
  return out;
}

inline void save_params(const NetworkParams<float>& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write weights file '" + path + "'");
  const std::string blob = serialize_params(p);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw std::runtime_error("failed writing weights file '" + path + "'");
}

inline NetworkParams<float> load_params(const std::string& path, const Architecture* expected = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open weights file '" + path + "'");
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_params(data, expected);
}

}  // namespace mapless

#endif  // MAPLESS_WEIGHTS_IO_HPP
