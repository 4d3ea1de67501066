#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "rgn/numerics/random.hpp"
#include "rgn/pipeline/features.hpp"
#include "rgn/pipeline/manifest.hpp"

namespace rgn {

struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t n_families = 400;
  std::size_t d_raw = 32;
  double shared_fraction = 0.5;
  double noise_sigma = 0.1;
  bool tri_subject = false;
};

struct SynthData {
  SampleManifest manifest;
  FeatureTable features;
  std::vector<std::size_t> shared_coords;   // copied from the (first) parent
  std::vector<std::size_t> shared_coords2;  // copied from the second parent
};

/// Families of Gaussian feature vectors. One random coordinate subset of size
/// floor(shared_fraction * d_raw) is fixed for the whole dataset; every child
/// copies those coordinates from its parent and draws the rest fresh. In
/// tri-subject mode the second parent contributes a disjoint subset of the
/// same size (clipped to the coordinates left). Noise is added afterwards to
/// every coordinate of every vector. Families go to folds round-robin.
inline SynthData synth_generate(const SynthConfig& cfg) {
  if (cfg.shared_fraction < 0 || cfg.shared_fraction > 1) throw ConfigError("shared_fraction must lie in [0, 1]");
  if (cfg.d_raw == 0) throw ConfigError("d_raw must be positive");
  if (cfg.noise_sigma < 0) throw ConfigError("noise_sigma must be non-negative");

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> perm(cfg.d_raw);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  shuffle(perm.begin(), perm.end(), rng);
  const auto shared = std::size_t(std::floor(cfg.shared_fraction * double(cfg.d_raw)));

  SynthData out;
  out.features = FeatureTable(cfg.d_raw);
  out.shared_coords.assign(perm.begin(), perm.begin() + std::ptrdiff_t(shared));
  if (cfg.tri_subject) {
    const std::size_t end2 = std::min(cfg.d_raw, 2 * shared);
    out.shared_coords2.assign(perm.begin() + std::ptrdiff_t(shared), perm.begin() + std::ptrdiff_t(end2));
  }

  auto gaussian = [&](std::size_t n) {
    std::vector<real> v(n);
    for (auto& x : v) x = real(standard_normal(rng));
    return v;
  };
  auto add_noise = [&](std::vector<real>& v) {
    if (cfg.noise_sigma == 0) return;
    for (auto& x : v) x += real(cfg.noise_sigma * standard_normal(rng));
  };

  for (std::size_t f = 0; f < cfg.n_families; ++f) {
    Pair rec;
    rec.pair_id = "pair" + std::to_string(f);
    rec.fold = int(f % kFoldCount) + 1;
    rec.relation = cfg.tri_subject ? kTriRelations[uniform_index(rng, 2)] : kBiRelations[uniform_index(rng, 4)];

    auto parent = gaussian(cfg.d_raw);
    auto child = gaussian(cfg.d_raw);
    for (auto c : out.shared_coords) child[c] = parent[c];
    std::vector<real> parent2;
    if (cfg.tri_subject) {
      parent2 = gaussian(cfg.d_raw);
      for (auto c : out.shared_coords2) child[c] = parent2[c];
    }
    add_noise(parent);
    add_noise(child);
    if (cfg.tri_subject) add_noise(parent2);

    const std::string base = "f" + std::to_string(f);
    rec.parent_ref = base + "_p";
    rec.child_ref = base + "_c";
    out.features.add(rec.parent_ref, std::move(parent));
    out.features.add(rec.child_ref, std::move(child));
    if (cfg.tri_subject) {
      rec.parent2_ref = base + "_p2";
      out.features.add(*rec.parent2_ref, std::move(parent2));
    }
    out.manifest.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace rgn
