#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rgn/model.hpp"
#include "rgn/topology.hpp"

namespace rgn {

enum class HierInitMode { self_attention, avg, max };

// What the bottom-up stage pools from the layer below: its comprehensive
// features (abstraction compounds layer by layer) or its transformed
// messages (each latent layer only sees one layer down).
enum class LowerInputMode { comprehensive, literal_message };

inline std::string_view to_string(HierInitMode m) {
  switch (m) {
    case HierInitMode::self_attention: return "self-attention";
    case HierInitMode::avg: return "avg";
    case HierInitMode::max: return "max";
  }
  return "?";
}

inline HierInitMode parse_hier_init_mode(std::string_view s) {
  if (s == "self-attention" || s == "attention") return HierInitMode::self_attention;
  if (s == "avg" || s == "mean") return HierInitMode::avg;
  if (s == "max") return HierInitMode::max;
  throw ConfigError("unknown hierarchy init mode '" + std::string(s) + "'");
}

inline std::string_view to_string(LowerInputMode m) {
  return m == LowerInputMode::comprehensive ? "comprehensive" : "literal-message";
}

inline LowerInputMode parse_lower_input_mode(std::string_view s) {
  if (s == "comprehensive") return LowerInputMode::comprehensive;
  if (s == "literal-message" || s == "message") return LowerInputMode::literal_message;
  throw ConfigError("unknown lower input mode '" + std::string(s) + "'");
}

// Best latent configuration per depth L = 1..4.
inline const std::vector<std::vector<std::size_t>>& latent_presets() {
  static const std::vector<std::vector<std::size_t>> presets = {{32}, {128, 16}, {128, 32, 8}, {128, 32, 8, 2}};
  return presets;
}

struct HRgnConfig {
  std::size_t d = 512;
  std::size_t subject_count = 2;
  std::vector<std::size_t> latent = {128, 16};  // N_1..N_L
  std::size_t k = 2;
  std::vector<std::size_t> dims = {512, 4};
  PoolKind aggre_pool = PoolKind::avg;
  HierInitMode init_mode = HierInitMode::self_attention;
  LowerInputMode lower_input_mode = LowerInputMode::comprehensive;
  std::size_t attention_hidden = 8;
  std::vector<std::size_t> head_hidden = {};

  LayerConfig layer_config() const {
    LayerConfig lc;
    lc.node_counts.push_back(d);
    lc.node_counts.insert(lc.node_counts.end(), latent.begin(), latent.end());
    return lc;
  }

  void validate() const {
    if (d == 0) throw ConfigError("hrgn: d must be positive");
    if (subject_count != 2 && subject_count != 3) throw ConfigError("hrgn: subject_count must be 2 or 3");
    if (k == 0) throw ConfigError("hrgn: k must be at least 1");
    if (dims.size() != k) {
      throw ConfigError("hrgn: dims lists " + std::to_string(dims.size()) + " widths but k = " + std::to_string(k));
    }
    for (auto f : dims)
      if (f == 0) throw ConfigError("hrgn: feature widths must be positive");
    if (attention_hidden == 0) throw ConfigError("hrgn: attention_hidden must be positive");
    layer_config().validate();
  }

  std::size_t input_width(std::size_t step) const { return step == 0 ? subject_count : dims[step - 1]; }
};

/// Node features per graph layer (index 0 = comparison nodes), each N_l x F.
struct HierState {
  std::vector<Var> h;
  std::size_t step = 0;
};

// Optional intermediates, filled when a pointer is passed in.
struct HierInitTrace {
  std::vector<Var> attention;  // per latent layer l: N_{l-1} x 1 normalised weights
};

struct HierStepTrace {
  std::vector<Var> m;  // transformed features per layer
  std::vector<Var> c;  // comprehensive features per layer
};

// Top-layer update: every node becomes the sum of all top nodes, itself
// included, weighted by raw cosine similarity.
inline Var relational_update(Var c) {
  const Var unit = normalize_rows(c);
  return matmul(matmul(unit, transpose(unit)), c);
}

/// Hierarchical reasoning graph: comparison nodes under L latent layers joined
/// by contiguous tree-shaped groups, with bottom-up abstraction and top-down
/// propagation every step.
class HRgn final : public VerificationModel {
 public:
  explicit HRgn(HRgnConfig cfg, std::uint64_t seed = 1, std::string prefix = "hrgn.")
      : cfg_(std::move(cfg)), prefix_(std::move(prefix)) {
    cfg_.validate();
    topo_ = HierTopology(cfg_.layer_config());
    if (cfg_.init_mode == HierInitMode::self_attention) {
      attention_ = Mlp(params_, prefix_ + "att.", cfg_.subject_count, {cfg_.attention_hidden}, 1, Activation::tanh,
                       mix_seed(seed, 2000));
    }
    std::uint64_t salt = 0;
    for (std::size_t k = 1; k <= cfg_.k; ++k) {
      const std::size_t fin = cfg_.input_width(k - 1), f = cfg_.dims[k - 1];
      auto add = [&](const std::string& name, Shape shape) {
        params_.add(layer_name(k, name), init_params(shape, InitScheme::xavier_uniform, mix_seed(seed, salt++)));
      };
      add("u_trans", {fin, f});
      add("u_up", {2 * f, f});
      add("u_down", {2 * f, f});
    }
    head_ = Mlp(params_, prefix_ + "head.", topo_.total_nodes() * cfg_.dims.back(), cfg_.head_hidden, 1,
                Activation::relu, mix_seed(seed, 1000));
  }

  const HRgnConfig& config() const noexcept { return cfg_; }
  const HierTopology& topology() const noexcept { return topo_; }
  std::string_view kind() const override { return "hrgn"; }
  std::size_t feature_dim() const override { return cfg_.d; }
  std::size_t subject_count() const override { return cfg_.subject_count; }

  std::string layer_name(std::size_t k, const std::string& what) const {
    return prefix_ + "layer" + std::to_string(k) + "." + what;
  }

  HierState init_hier(Tape& tape, std::span<const Var> subjects, HierInitTrace* trace = nullptr) const {
    check_subjects(subjects);
    std::vector<Var> columns;
    for (const auto& s : subjects) columns.push_back(transpose(s));
    HierState state;
    state.h.push_back(concat(columns, 1));
    for (std::size_t l = 1; l <= topo_.latent_layers(); ++l) {
      const auto& groups = topo_.boundary(l).children();
      const Var lower = state.h.back();
      if (cfg_.init_mode == HierInitMode::self_attention) {
        Var weights = segment_softmax(attention_(tape, params_, lower), groups);
        if (trace) trace->attention.push_back(weights);
        state.h.push_back(segment_weighted_sum(lower, weights, groups));
      } else {
        const auto kind = cfg_.init_mode == HierInitMode::avg ? PoolKind::avg : PoolKind::max;
        state.h.push_back(segment_pool(kind, lower, groups));
      }
    }
    return state;
  }

  // One bottom-up + top-down message-passing step, k is 1-based.
  HierState step(Tape& tape, const HierState& in, std::size_t k, HierStepTrace* trace = nullptr) const {
    if (k == 0 || k > cfg_.k) throw ConfigError("hrgn: step index " + std::to_string(k) + " out of range");
    const std::size_t L = topo_.latent_layers();
    if (in.step != k - 1 || in.h.size() != L + 1) throw DimensionError("hrgn: state does not match step " + std::to_string(k));
    for (std::size_t l = 0; l <= L; ++l) {
      if (in.h[l].rows() != topo_.width(l) || in.h[l].cols() != cfg_.input_width(k - 1)) {
        throw DimensionError("hrgn: layer " + std::to_string(l) + " features have the wrong shape");
      }
    }
    const Var u_trans = tape.param(params_.get(layer_name(k, "u_trans")));
    const Var u_up = tape.param(params_.get(layer_name(k, "u_up")));
    const Var u_down = tape.param(params_.get(layer_name(k, "u_down")));

    std::vector<Var> m(L + 1), c(L + 1);
    for (std::size_t l = 0; l <= L; ++l) m[l] = relu(matmul(in.h[l], u_trans));

    c[0] = m[0];
    for (std::size_t l = 1; l <= L; ++l) {
      const Var& lower = cfg_.lower_input_mode == LowerInputMode::comprehensive ? c[l - 1] : m[l - 1];
      const Var pooled = segment_pool(cfg_.aggre_pool, lower, topo_.boundary(l).children());
      c[l] = relu(matmul(concat({m[l], pooled}, 1), u_up));
    }

    HierState out;
    out.step = k;
    out.h.resize(L + 1);
    out.h[L] = topo_.width(L) == 1 ? c[L] : relational_update(c[L]);
    for (std::size_t l = L; l-- > 0;) {
      const Var from_parent = gather_rows(out.h[l + 1], topo_.boundary(l + 1).parent());
      out.h[l] = relu(matmul(concat({c[l], from_parent}, 1), u_down));
    }
    if (trace) {
      trace->m = m;
      trace->c = c;
    }
    return out;
  }

  // All layers in order 0..L, nodes in index order, flattened to one row.
  Var readout(const HierState& s) const {
    Var stacked = concat(s.h, 0);
    return reshape(stacked, 1, stacked.size());
  }

  Var logit(Tape& tape, std::span<const Var> subjects) const override {
    HierState s = init_hier(tape, subjects);
    for (std::size_t k = 1; k <= cfg_.k; ++k) s = step(tape, s, k);
    return head_(tape, params_, readout(s));
  }

  ParameterStore checkpoint_entries() const override {
    ParameterStore out = params_;
    std::vector<real> widths(topo_.config().node_counts.begin(), topo_.config().node_counts.end());
    const std::size_t n = widths.size();
    out.add(prefix_ + "meta.topology", Tensor({n}, std::move(widths)));
    return out;
  }

  void restore(const ParameterStore& loaded) override {
    const std::string meta = prefix_ + "meta.topology";
    if (!loaded.contains(meta)) throw ConfigError("checkpoint has no hierarchy topology record");
    const auto& stored = loaded.get(meta).values();
    const auto& widths = topo_.config().node_counts;
    if (stored.size() != widths.size() || !std::equal(widths.begin(), widths.end(), stored.begin(),
                                                      [](std::size_t w, real v) { return real(w) == v; })) {
      throw DimensionError("checkpoint topology does not match the configured hierarchy");
    }
    ParameterStore rest;
    for (const auto& e : loaded)
      if (e.name != meta) rest.add(e.name, e.tensor);
    assign_parameters(params_, rest);
  }

  const Mlp& head() const noexcept { return head_; }
  const Mlp& attention() const noexcept { return attention_; }

 private:
  HRgnConfig cfg_;
  std::string prefix_;
  HierTopology topo_;
  Mlp attention_;
  Mlp head_;
};

}  // namespace rgn
