#pragma once

#include <string>
#include <vector>

#include "rgn/numerics/ops.hpp"
#include "rgn/numerics/params.hpp"

namespace rgn {

// Stack of affine maps with an activation between them (none after the last).
// Parameters are registered as <prefix>w<i> and <prefix>b<i>; biases start at
// zero, weights use xavier-uniform.
class Mlp {
 public:
  Mlp() = default;

  Mlp(ParameterStore& store, std::string prefix, std::size_t in, const std::vector<std::size_t>& hidden,
      std::size_t out, Activation act, std::uint64_t seed)
      : prefix_(std::move(prefix)), act_(act) {
    std::size_t prev = in;
    std::vector<std::size_t> widths = hidden;
    widths.push_back(out);
    for (std::size_t i = 0; i < widths.size(); ++i) {
      const auto w = prefix_ + "w" + std::to_string(i);
      const auto b = prefix_ + "b" + std::to_string(i);
      store.add(w, init_params({prev, widths[i]}, InitScheme::xavier_uniform, mix_seed(seed, 2 * i)));
      store.add(b, init_params({1, widths[i]}, InitScheme::zeros, 0));
      layers_.push_back({w, b});
      prev = widths[i];
    }
    in_ = in;
    out_ = out;
  }

  // x is n x in; returns n x out.
  Var operator()(Tape& tape, const ParameterStore& store, Var x) const {
    if (x.cols() != in_) {
      throw DimensionError(prefix_ + " expects input width " + std::to_string(in_) + ", got " +
                           std::to_string(x.cols()));
    }
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      x = add_bias(matmul(x, tape.param(store.get(layers_[i].first))), tape.param(store.get(layers_[i].second)));
      if (i + 1 < layers_.size()) x = elementwise(act_, x);
    }
    return x;
  }

  std::size_t in_width() const noexcept { return in_; }
  std::size_t out_width() const noexcept { return out_; }

  // Rows x columns of each affine map, input to output.
  std::vector<std::pair<std::size_t, std::size_t>> shapes(const ParameterStore& store) const {
    std::vector<std::pair<std::size_t, std::size_t>> s;
    for (const auto& l : layers_) {
      const auto& w = store.get(l.first);
      s.emplace_back(w.rows(), w.cols());
    }
    return s;
  }

 private:
  std::string prefix_;
  Activation act_ = Activation::relu;
  std::vector<std::pair<std::string, std::string>> layers_;
  std::size_t in_ = 0, out_ = 0;
};

}  // namespace rgn
