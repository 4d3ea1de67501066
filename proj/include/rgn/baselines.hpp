#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rgn/model.hpp"

namespace rgn {

struct MlpBaselineConfig {
  std::size_t d = 512;
  std::size_t subject_count = 2;
  std::vector<std::size_t> hidden = {64};

  void validate() const {
    if (d == 0) throw ConfigError("mlp-baseline: d must be positive");
    if (subject_count != 2 && subject_count != 3) throw ConfigError("mlp-baseline: subject_count must be 2 or 3");
    for (auto h : hidden)
      if (h == 0) throw ConfigError("mlp-baseline: hidden widths must be positive");
  }
};

// Concatenates the subject features and scores them with a small MLP.
class MlpBaseline final : public VerificationModel {
 public:
  explicit MlpBaseline(MlpBaselineConfig cfg, std::uint64_t seed = 1) : cfg_(std::move(cfg)) {
    cfg_.validate();
    net_ = Mlp(params_, "mlpbase.", cfg_.subject_count * cfg_.d, cfg_.hidden, 1, Activation::relu, seed);
  }

  const MlpBaselineConfig& config() const noexcept { return cfg_; }
  std::string_view kind() const override { return "mlp-baseline"; }
  std::size_t feature_dim() const override { return cfg_.d; }
  std::size_t subject_count() const override { return cfg_.subject_count; }

  Var logit(Tape& tape, std::span<const Var> subjects) const override {
    check_subjects(subjects);
    return net_(tape, params_, concat(subjects, 1));
  }

  const Mlp& net() const noexcept { return net_; }

 private:
  MlpBaselineConfig cfg_;
  Mlp net_;
};

// Untrained cosine score of two feature vectors, in [-1, 1].
inline real cos_baseline(std::span<const real> gx, std::span<const real> gy) { return cosine(gx, gy); }

}  // namespace rgn
