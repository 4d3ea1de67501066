#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rgn/numerics/params.hpp"

namespace rgn {

namespace io {

template <typename UInt>
void write_le(std::ostream& os, UInt v) {
  unsigned char buf[sizeof(UInt)];
  for (std::size_t i = 0; i < sizeof(UInt); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), sizeof(UInt));
}

inline void write_f64(std::ostream& os, double v) { write_le(os, std::bit_cast<std::uint64_t>(v)); }

/// Little-endian reader that reports the byte offset of any failure.
class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  template <typename UInt>
  UInt read_le(const char* what) {
    unsigned char buf[sizeof(UInt)];
    read_bytes(buf, sizeof(UInt), what);
    UInt v = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= UInt(buf[i]) << (8 * i);
    return v;
  }

  double read_f64(const char* what) { return std::bit_cast<double>(read_le<std::uint64_t>(what)); }

  std::string read_string(std::size_t n, const char* what) {
    std::string s(n, '\0');
    if (n) read_bytes(s.data(), n, what);
    return s;
  }

  void read_bytes(void* dst, std::size_t n, const char* what) {
    is_.read(static_cast<char*>(dst), std::streamsize(n));
    if (std::size_t(is_.gcount()) != n) {
      throw FormatError(std::string("truncated input while reading ") + what + " at offset " +
                        std::to_string(offset_ + std::size_t(is_.gcount())));
    }
    offset_ += n;
  }

  std::size_t offset() const noexcept { return offset_; }
  bool at_end() { return is_.peek() == std::char_traits<char>::eof(); }

 private:
  std::istream& is_;
  std::size_t offset_ = 0;
};

}  // namespace io

// Checkpoint layout (all integers little-endian):
//   "RGN1" | u64 count | count x { u32 name_len | name | u32 rank | rank x u64 extent | values as f64 }
inline constexpr char kCheckpointMagic[4] = {'R', 'G', 'N', '1'};

inline void save_checkpoint(std::ostream& os, const ParameterStore& store) {
  os.write(kCheckpointMagic, 4);
  io::write_le<std::uint64_t>(os, store.size());
  for (const auto& e : store) {
    io::write_le<std::uint32_t>(os, std::uint32_t(e.name.size()));
    os.write(e.name.data(), std::streamsize(e.name.size()));
    io::write_le<std::uint32_t>(os, std::uint32_t(e.tensor.rank()));
    for (auto ext : e.tensor.shape()) io::write_le<std::uint64_t>(os, ext);
    for (auto v : e.tensor.data()) io::write_f64(os, double(v));
  }
}

inline ParameterStore load_checkpoint(std::istream& is) {
  io::Reader in(is);
  char magic[4];
  in.read_bytes(magic, 4, "magic");
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) throw FormatError("not a checkpoint: bad magic at offset 0");
  const auto count = in.read_le<std::uint64_t>("parameter count");
  ParameterStore store;
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto name_len = in.read_le<std::uint32_t>("name length");
    if (name_len > (1u << 20)) {
      throw FormatError("implausible name length at offset " + std::to_string(in.offset() - 4));
    }
    std::string name = in.read_string(name_len, "name");
    const auto rank = in.read_le<std::uint32_t>("rank");
    if (rank == 0 || rank > 8) throw FormatError("invalid rank at offset " + std::to_string(in.offset() - 4));
    Shape shape;
    for (std::uint32_t r = 0; r < rank; ++r) {
      const auto ext = in.read_le<std::uint64_t>("extent");
      if (ext == 0 || ext > (std::uint64_t(1) << 32)) {
        throw FormatError("invalid extent at offset " + std::to_string(in.offset() - 8));
      }
      shape.push_back(std::size_t(ext));
    }
    std::vector<real> values(shape_size(shape));
    for (auto& v : values) v = real(in.read_f64("values"));
    store.add(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  if (!in.at_end()) throw FormatError("trailing bytes after checkpoint at offset " + std::to_string(in.offset()));
  return store;
}

inline void save_checkpoint(const std::string& path, const ParameterStore& store) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("io", "cannot open '" + path + "' for writing");
  save_checkpoint(os, store);
}

inline ParameterStore load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("io", "cannot open '" + path + "'");
  return load_checkpoint(is);
}

/// Copies values from `loaded` into `target`, requiring the same set of names
/// and identical shapes. Extra entries in `loaded` are rejected.
inline void assign_parameters(ParameterStore& target, const ParameterStore& loaded) {
  for (auto& e : target) {
    if (!loaded.contains(e.name)) throw ConfigError("checkpoint is missing parameter '" + e.name + "'");
    const Tensor& src = loaded.get(e.name);
    if (!src.same_shape(e.tensor)) {
      throw DimensionError("checkpoint parameter '" + e.name + "' has shape " + shape_string(src.shape()) +
                           ", model expects " + shape_string(e.tensor.shape()));
    }
    e.tensor.values() = src.values();
  }
  for (const auto& e : loaded) {
    if (!target.contains(e.name)) throw ConfigError("checkpoint has unexpected parameter '" + e.name + "'");
  }
}

}  // namespace rgn
