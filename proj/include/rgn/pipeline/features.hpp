#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "rgn/numerics/checkpoint.hpp"
#include "rgn/numerics/tensor.hpp"

namespace rgn {

/// Feature id -> fixed-width real vector, in insertion order.
class FeatureTable {
 public:
  FeatureTable() = default;
  explicit FeatureTable(std::size_t width) : width_(width) {}

  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  void add(std::string id, std::vector<real> row) {
    if (width_ == 0) width_ = row.size();
    if (row.size() != width_) {
      throw DimensionError("feature '" + id + "' has width " + std::to_string(row.size()) + ", table width is " +
                           std::to_string(width_));
    }
    for (auto v : row)
      if (!std::isfinite(v)) throw DataError("feature '" + id + "' contains a non-finite value");
    if (index_.count(id)) throw DataError("duplicate feature id '" + id + "'");
    index_.emplace(id, ids_.size());
    ids_.push_back(std::move(id));
    data_.insert(data_.end(), row.begin(), row.end());
  }

  bool contains(const std::string& id) const { return index_.count(id) != 0; }

  std::span<const real> row(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw DataError("unknown feature id '" + id + "'");
    return std::span<const real>(data_).subspan(it->second * width_, width_);
  }

 private:
  std::size_t width_ = 0;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<real> data_;
};

// CSV: one "id,v1,...,vD" row per line. A first line starting with "id," is
// treated as a header.
inline FeatureTable parse_features_csv(std::istream& is) {
  FeatureTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("id,", 0) == 0) continue;
    std::stringstream ss(line);
    std::string id, cell;
    std::getline(ss, id, ',');
    std::vector<real> row;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(real(std::stod(cell, &used)));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw FormatError("features line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (id.empty() || row.empty()) throw FormatError("features line " + std::to_string(lineno) + ": expected id,v1,...");
    try {
      table.add(id, std::move(row));
    } catch (const Error& e) {
      throw FormatError("features line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return table;
}

inline void write_features_csv(std::ostream& os, const FeatureTable& t) {
  os << std::setprecision(17);
  for (const auto& id : t.ids()) {
    os << id;
    for (auto v : t.row(id)) os << ',' << v;
    os << '\n';
  }
}

// Binary: "FTB1" | u32 width | rows of { u32 id_len | id | width x f64 }.
inline constexpr char kFeatureMagic[4] = {'F', 'T', 'B', '1'};

inline FeatureTable parse_features_binary(std::istream& is) {
  io::Reader in(is);
  char magic[4];
  in.read_bytes(magic, 4, "magic");
  if (std::memcmp(magic, kFeatureMagic, 4) != 0) throw FormatError("not a binary feature table: bad magic at offset 0");
  const auto width = in.read_le<std::uint32_t>("width");
  if (width == 0) throw FormatError("feature table width is zero at offset 4");
  FeatureTable table(width);
  while (!in.at_end()) {
    const auto id_len = in.read_le<std::uint32_t>("id length");
    if (id_len == 0 || id_len > (1u << 20)) {
      throw FormatError("invalid id length at offset " + std::to_string(in.offset() - 4));
    }
    std::string id = in.read_string(id_len, "id");
    std::vector<real> row(width);
    for (auto& v : row) v = real(in.read_f64("values"));
    table.add(std::move(id), std::move(row));
  }
  return table;
}

inline void write_features_binary(std::ostream& os, const FeatureTable& t) {
  os.write(kFeatureMagic, 4);
  io::write_le<std::uint32_t>(os, std::uint32_t(t.width()));
  for (const auto& id : t.ids()) {
    io::write_le<std::uint32_t>(os, std::uint32_t(id.size()));
    os.write(id.data(), std::streamsize(id.size()));
    for (auto v : t.row(id)) io::write_f64(os, double(v));
  }
}

// Picks the format from the leading magic bytes.
inline FeatureTable load_features(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("io", "cannot open feature table '" + path + "'");
  char head[4] = {};
  is.read(head, 4);
  const bool binary = is.gcount() == 4 && std::memcmp(head, kFeatureMagic, 4) == 0;
  is.clear();
  is.seekg(0);
  return binary ? parse_features_binary(is) : parse_features_csv(is);
}

inline void save_features(const std::string& path, const FeatureTable& t, bool binary) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("io", "cannot open '" + path + "' for writing");
  if (binary) write_features_binary(os, t);
  else write_features_csv(os, t);
}

}  // namespace rgn
