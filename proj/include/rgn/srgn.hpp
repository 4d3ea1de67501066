#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rgn/model.hpp"
#include "rgn/topology.hpp"

namespace rgn {

struct SRgnConfig {
  std::size_t d = 512;
  std::size_t subject_count = 2;
  std::size_t k = 2;
  std::vector<std::size_t> dims = {512, 4};  // F_1..F_K
  PoolKind init_pool = PoolKind::avg;
  PoolKind aggre_pool = PoolKind::max;
  // Separate message matrix for the central node (ablation only).
  bool untie_central_message = false;
  std::vector<std::size_t> head_hidden = {};

  void validate() const {
    if (d == 0) throw ConfigError("srgn: d must be positive");
    if (subject_count != 2 && subject_count != 3) throw ConfigError("srgn: subject_count must be 2 or 3");
    if (k == 0) throw ConfigError("srgn: k must be at least 1");
    if (dims.size() != k) {
      throw ConfigError("srgn: dims lists " + std::to_string(dims.size()) + " widths but k = " + std::to_string(k));
    }
    for (auto f : dims)
      if (f == 0) throw ConfigError("srgn: feature widths must be positive");
    for (auto h : head_hidden)
      if (h == 0) throw ConfigError("srgn: head hidden widths must be positive");
  }

  std::size_t input_width(std::size_t step) const { return step == 0 ? subject_count : dims[step - 1]; }
};

/// Node features of the star graph after `step` rounds: surrounding is D x F,
/// central is 1 x F.
struct StarState {
  Var surrounding;
  Var central;
  std::size_t step = 0;
};

/// Star-shaped reasoning graph: D comparison nodes around one latent hub.
class SRgn final : public VerificationModel {
 public:
  explicit SRgn(SRgnConfig cfg, std::uint64_t seed = 1, std::string prefix = "srgn.")
      : cfg_(std::move(cfg)), prefix_(std::move(prefix)) {
    cfg_.validate();
    std::uint64_t salt = 0;
    for (std::size_t k = 1; k <= cfg_.k; ++k) {
      const std::size_t fin = cfg_.input_width(k - 1), f = cfg_.dims[k - 1];
      auto add = [&](const std::string& name, Shape shape) {
        params_.add(layer_name(k, name), init_params(shape, InitScheme::xavier_uniform, mix_seed(seed, salt++)));
      };
      add("w_mess", {fin, f});
      if (cfg_.untie_central_message) add("w_mess_central", {fin, f});
      add("w_surr", {2 * f, f});
      add("w_cen", {2 * f, f});
    }
    head_ = Mlp(params_, prefix_ + "head.", (cfg_.d + 1) * cfg_.dims.back(), cfg_.head_hidden, 1, Activation::relu,
                mix_seed(seed, 1000));
  }

  const SRgnConfig& config() const noexcept { return cfg_; }
  std::string_view kind() const override { return "srgn"; }
  std::size_t feature_dim() const override { return cfg_.d; }
  std::size_t subject_count() const override { return cfg_.subject_count; }

  std::string layer_name(std::size_t k, const std::string& what) const {
    return prefix_ + "layer" + std::to_string(k) + "." + what;
  }

  // Node d starts as the d-th coordinate of every subject, side by side; the
  // hub pools over all of them.
  StarState init_star(Tape&, std::span<const Var> subjects) const {
    check_subjects(subjects);
    std::vector<Var> columns;
    for (const auto& s : subjects) columns.push_back(transpose(s));
    Var nodes = concat(columns, 1);
    return StarState{nodes, pool(cfg_.init_pool, nodes), 0};
  }

  // One message-passing round, step k (1-based).
  StarState layer(Tape& tape, const StarState& in, std::size_t k) const {
    if (k == 0 || k > cfg_.k) throw ConfigError("srgn: layer index " + std::to_string(k) + " out of range");
    if (in.step != k - 1 || in.surrounding.cols() != cfg_.input_width(k - 1)) {
      throw DimensionError("srgn: layer " + std::to_string(k) + " expects step " + std::to_string(k - 1) +
                           " features of width " + std::to_string(cfg_.input_width(k - 1)));
    }
    const Var w_mess = tape.param(params_.get(layer_name(k, "w_mess")));
    const Var w_mess_c = cfg_.untie_central_message ? tape.param(params_.get(layer_name(k, "w_mess_central"))) : w_mess;
    const Var w_surr = tape.param(params_.get(layer_name(k, "w_surr")));
    const Var w_cen = tape.param(params_.get(layer_name(k, "w_cen")));

    const Var m_surr = relu(matmul(in.surrounding, w_mess));
    const Var m_cen = relu(matmul(in.central, w_mess_c));
    const Var h_surr = relu(matmul(concat({m_surr, repeat_rows(m_cen, cfg_.d)}, 1), w_surr));
    const Var m_agg = pool(cfg_.aggre_pool, m_surr);
    const Var h_cen = relu(matmul(concat({m_cen, m_agg}, 1), w_cen));
    return StarState{h_surr, h_cen, k};
  }

  // Central node first, then surrounding nodes in dimension order.
  Var readout(const StarState& s) const {
    Var stacked = concat({s.central, s.surrounding}, 0);
    return reshape(stacked, 1, stacked.size());
  }

  Var logit(Tape& tape, std::span<const Var> subjects) const override {
    StarState s = init_star(tape, subjects);
    for (std::size_t k = 1; k <= cfg_.k; ++k) s = layer(tape, s, k);
    return head_(tape, params_, readout(s));
  }

  const Mlp& head() const noexcept { return head_; }

 private:
  SRgnConfig cfg_;
  std::string prefix_;
  Mlp head_;
};

}  // namespace rgn
