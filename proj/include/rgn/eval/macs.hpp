#pragma once

#include <cstdint>
#include <iomanip>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "rgn/baselines.hpp"
#include "rgn/hrgn.hpp"
#include "rgn/srgn.hpp"

namespace rgn {

// Counts cover multiply-accumulates of affine and linear maps for one sample;
// activations, pooling and softmax are free and the feature backbone is not
// included.
struct MacReport {
  std::string model;
  std::vector<std::pair<std::string, std::uint64_t>> stages;

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& s : stages) t += s.second;
    return t;
  }

  void print(std::ostream& os) const {
    os << "# MACs per sample for " << model << " (affine/linear maps only; backbone excluded)\n";
    for (const auto& [name, n] : stages) os << std::left << std::setw(32) << name << n << '\n';
    os << std::left << std::setw(32) << "total" << total() << '\n';
  }
};

namespace detail {

inline std::uint64_t head_macs(std::size_t in, const std::vector<std::size_t>& hidden) {
  std::uint64_t n = 0;
  std::size_t prev = in;
  for (auto h : hidden) {
    n += std::uint64_t(prev) * h;
    prev = h;
  }
  return n + prev;
}

}  // namespace detail

inline MacReport count_macs(const SRgnConfig& cfg) {
  cfg.validate();
  MacReport r{"srgn", {}};
  const std::uint64_t D = cfg.d;
  for (std::size_t k = 1; k <= cfg.k; ++k) {
    const std::uint64_t fin = cfg.input_width(k - 1), f = cfg.dims[k - 1];
    const std::string step = "step" + std::to_string(k) + ".";
    r.stages.emplace_back(step + "message", (D + 1) * fin * f);
    r.stages.emplace_back(step + "surrounding_update", D * 2 * f * f);
    r.stages.emplace_back(step + "central_update", 2 * f * f);
  }
  r.stages.emplace_back("head", detail::head_macs((cfg.d + 1) * cfg.dims.back(), cfg.head_hidden));
  return r;
}

inline MacReport count_macs(const HRgnConfig& cfg) {
  cfg.validate();
  const HierTopology topo(cfg.layer_config());
  const std::size_t L = topo.latent_layers();
  MacReport r{"hrgn", {}};
  if (cfg.init_mode == HierInitMode::self_attention) {
    std::uint64_t score = 0, mix = 0;
    const std::uint64_t f0 = cfg.subject_count, a = cfg.attention_hidden;
    for (std::size_t l = 1; l <= L; ++l) {
      const std::uint64_t children = topo.width(l - 1);
      score += children * (f0 * a + a);
      mix += children * f0;
    }
    r.stages.emplace_back("init.attention_scores", score);
    r.stages.emplace_back("init.attention_sum", mix);
  }
  for (std::size_t k = 1; k <= cfg.k; ++k) {
    const std::uint64_t fin = cfg.input_width(k - 1), f = cfg.dims[k - 1];
    const std::string step = "step" + std::to_string(k) + ".";
    std::uint64_t up = 0, down = 0;
    for (std::size_t l = 1; l <= L; ++l) up += std::uint64_t(topo.width(l)) * 2 * f * f;
    for (std::size_t l = 0; l < L; ++l) down += std::uint64_t(topo.width(l)) * 2 * f * f;
    r.stages.emplace_back(step + "transform", std::uint64_t(topo.total_nodes()) * fin * f);
    r.stages.emplace_back(step + "bottom_up", up);
    const std::uint64_t top = topo.width(L);
    if (top > 1) r.stages.emplace_back(step + "top_relation", 2 * top * top * f);
    r.stages.emplace_back(step + "top_down", down);
  }
  r.stages.emplace_back("head", detail::head_macs(topo.total_nodes() * cfg.dims.back(), cfg.head_hidden));
  return r;
}

inline MacReport count_macs(const MlpBaselineConfig& cfg) {
  cfg.validate();
  return MacReport{"mlp-baseline", {{"mlp", detail::head_macs(cfg.subject_count * cfg.d, cfg.hidden)}}};
}

}  // namespace rgn
