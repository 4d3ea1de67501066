#pragma once

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rgn/model.hpp"

namespace rgn {

inline constexpr int kFoldCount = 5;

/// One sample: a positive (kin) record from the manifest, or a constructed
/// negative. parent2_ref is set for tri-subject relations only.
struct Pair {
  std::string pair_id;
  Relation relation = Relation::FS;
  int fold = 1;
  std::string parent_ref;
  std::string child_ref;
  std::optional<std::string> parent2_ref;
  int label = 1;
};

struct SampleManifest {
  std::vector<Pair> records;

  std::size_t size() const noexcept { return records.size(); }
  bool tri_subject() const { return !records.empty() && records.front().parent2_ref.has_value(); }

  std::vector<Pair> fold(int f) const {
    std::vector<Pair> out;
    for (const auto& r : records)
      if (r.fold == f) out.push_back(r);
    return out;
  }

  // Returns every invariant violation found; empty means valid.
  std::vector<std::string> violations() const {
    std::vector<std::string> errs;
    std::set<std::string> seen;
    bool any_tri = false, any_bi = false;
    for (const auto& r : records) {
      if (r.pair_id.empty()) errs.push_back("record with empty pair_id");
      if (!seen.insert(r.pair_id).second) errs.push_back("duplicate pair_id '" + r.pair_id + "'");
      if (r.fold < 1 || r.fold > kFoldCount) {
        errs.push_back("pair '" + r.pair_id + "' has fold " + std::to_string(r.fold) + " outside 1.." +
                       std::to_string(kFoldCount));
      }
      if (r.parent_ref.empty() || r.child_ref.empty()) errs.push_back("pair '" + r.pair_id + "' is missing a feature ref");
      if (is_tri_subject(r.relation) && !r.parent2_ref) {
        errs.push_back("pair '" + r.pair_id + "' (" + std::string(to_string(r.relation)) + ") is missing parent2_ref");
      }
      if (!is_tri_subject(r.relation) && r.parent2_ref) {
        errs.push_back("pair '" + r.pair_id + "' (" + std::string(to_string(r.relation)) +
                       ") must not carry parent2_ref");
      }
      (is_tri_subject(r.relation) ? any_tri : any_bi) = true;
    }
    if (any_tri && any_bi) errs.push_back("manifest mixes bi-subject and tri-subject relations");
    return errs;
  }

  void validate() const {
    auto errs = violations();
    if (errs.empty()) return;
    std::string msg = "invalid manifest:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw DataError(msg);
  }
};

inline SampleManifest parse_manifest(std::istream& is) {
  SampleManifest m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Pair p;
      p.pair_id = j.at("pair_id").get<std::string>();
      p.relation = parse_relation(j.at("relation").get<std::string>());
      p.fold = j.at("fold").get<int>();
      p.parent_ref = j.at("parent_ref").get<std::string>();
      p.child_ref = j.at("child_ref").get<std::string>();
      if (j.contains("parent2_ref") && !j["parent2_ref"].is_null()) p.parent2_ref = j["parent2_ref"].get<std::string>();
      m.records.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("manifest line " + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
      throw FormatError("manifest line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  m.validate();
  return m;
}

inline SampleManifest load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("io", "cannot open manifest '" + path + "'");
  return parse_manifest(is);
}

inline void write_manifest(std::ostream& os, const SampleManifest& m) {
  for (const auto& r : m.records) {
    nlohmann::json j = {{"pair_id", r.pair_id},       {"relation", std::string(to_string(r.relation))},
                        {"fold", r.fold},             {"parent_ref", r.parent_ref},
                        {"child_ref", r.child_ref}};
    if (r.parent2_ref) j["parent2_ref"] = *r.parent2_ref;
    os << j.dump() << '\n';
  }
}

inline void save_manifest(const std::string& path, const SampleManifest& m) {
  std::ofstream os(path);
  if (!os) throw Error("io", "cannot open '" + path + "' for writing");
  write_manifest(os, m);
}

}  // namespace rgn
