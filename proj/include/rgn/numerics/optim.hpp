#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rgn/numerics/params.hpp"

namespace rgn {

enum class OptimizerKind { sgd_momentum, adam };

inline std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "sgd-momentum"; }

inline OptimizerKind parse_optimizer_kind(std::string_view s) {
  if (s == "adam") return OptimizerKind::adam;
  if (s == "sgd" || s == "sgd-momentum") return OptimizerKind::sgd_momentum;
  throw ConfigError("unknown optimizer '" + std::string(s) + "' (expected adam or sgd-momentum)");
}

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  real lr = real(1e-3);
  real beta1 = real(0.9);
  real beta2 = real(0.999);
  real eps = real(1e-8);
  real momentum = real(0.9);
};

/// In-place update of every parameter from its gradient. State is keyed by
/// parameter name; gradients are zeroed after each step.
class Optimizer {
 public:
  virtual ~Optimizer() = default;

  void step(ParameterStore& store) {
    for (auto& e : store) {
      if (!e.tensor.has_grad()) throw Error("optimizer", "parameter '" + e.name + "' has no gradient");
    }
    ++steps_;
    for (auto& e : store) update(e.name, e.tensor);
    store.zero_grad();
  }

  std::size_t steps() const noexcept { return steps_; }

 protected:
  virtual void update(const std::string& name, Tensor& p) = 0;

  std::vector<real>& slot(std::unordered_map<std::string, std::vector<real>>& table, const std::string& name,
                          std::size_t n) {
    auto& v = table[name];
    if (v.size() != n) v.assign(n, real(0));
    return v;
  }

  std::size_t steps_ = 0;
};

class SgdMomentum final : public Optimizer {
 public:
  SgdMomentum(real lr, real momentum) : lr_(lr), momentum_(momentum) {}

 protected:
  void update(const std::string& name, Tensor& p) override {
    auto& vel = slot(velocity_, name, p.size());
    const auto& g = p.grad();
    for (std::size_t i = 0; i < p.size(); ++i) {
      vel[i] = momentum_ * vel[i] + g[i];
      p[i] -= lr_ * vel[i];
    }
  }

 private:
  real lr_, momentum_;
  std::unordered_map<std::string, std::vector<real>> velocity_;
};

class Adam final : public Optimizer {
 public:
  Adam(real lr, real beta1, real beta2, real eps) : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

 protected:
  void update(const std::string& name, Tensor& p) override {
    auto& m = slot(first_, name, p.size());
    auto& v = slot(second_, name, p.size());
    const auto& g = p.grad();
    const real c1 = 1 - std::pow(beta1_, real(steps_));
    const real c2 = 1 - std::pow(beta2_, real(steps_));
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1_ * m[i] + (1 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1 - beta2_) * g[i] * g[i];
      p[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }

 private:
  real lr_, beta1_, beta2_, eps_;
  std::unordered_map<std::string, std::vector<real>> first_, second_;
};

inline std::unique_ptr<Optimizer> make_optimizer(const OptimizerConfig& cfg) {
  if (cfg.kind == OptimizerKind::adam) return std::make_unique<Adam>(cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
  return std::make_unique<SgdMomentum>(cfg.lr, cfg.momentum);
}

}  // namespace rgn
