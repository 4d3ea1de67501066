#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "rgn/model.hpp"

namespace rgn {

struct GradCheckReport {
  std::size_t checked = 0;
  real max_rel_error = 0;
  std::string worst;  // "name[index]" of the largest error
  real worst_analytic = 0;
  real worst_numeric = 0;

  bool passed(real tolerance) const { return max_rel_error <= tolerance; }
};

/// Compares backward gradients of the batch loss with central differences for
/// every scalar of every model parameter. Relative error is
/// |a - n| / max(|a|, |n|, floor).
inline GradCheckReport gradient_check(VerificationModel& model, const PairBatch& batch, real step = real(1e-6),
                                      real floor = real(1e-4)) {
  auto loss_value = [&] {
    Tape tape;
    return model.loss(tape, batch).value()[0];
  };
  model.params().zero_grad();
  {
    Tape tape;
    backward(model.loss(tape, batch), model.params());
  }
  GradCheckReport r;
  for (auto& e : model.params()) {
    auto& values = e.tensor.values();
    const auto analytic = e.tensor.grad();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const real saved = values[i];
      values[i] = saved + step;
      const real up = loss_value();
      values[i] = saved - step;
      const real down = loss_value();
      values[i] = saved;
      const real numeric = (up - down) / (2 * step);
      const real err = std::abs(analytic[i] - numeric) / std::max({std::abs(analytic[i]), std::abs(numeric), floor});
      ++r.checked;
      if (err > r.max_rel_error || r.worst.empty()) {
        r.max_rel_error = std::max(err, r.max_rel_error);
        r.worst = e.name + "[" + std::to_string(i) + "]";
        r.worst_analytic = analytic[i];
        r.worst_numeric = numeric;
      }
    }
  }
  model.params().zero_grad();
  return r;
}

}  // namespace rgn
