#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "rgn/rgn.hpp"

namespace fixtures {

inline std::vector<double> uniform_vec(std::mt19937_64& rng, std::size_t n, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline std::vector<std::vector<double>> random_subjects(std::mt19937_64& rng, std::size_t count, std::size_t d) {
  std::vector<std::vector<double>> s;
  for (std::size_t i = 0; i < count; ++i) s.push_back(uniform_vec(rng, d));
  return s;
}

inline double model_logit(const rgn::VerificationModel& m, const std::vector<std::vector<double>>& subjects) {
  rgn::Tape tape;
  std::vector<rgn::Var> vars;
  for (const auto& s : subjects) vars.push_back(tape.constant(rgn::Tensor::row(s)));
  return m.logit(tape, vars).value()[0];
}

// Random inputs in [-1, 1], alternating labels.
inline rgn::PairBatch random_batch(std::mt19937_64& rng, std::size_t n, std::size_t d, std::size_t subjects = 2) {
  rgn::PairBatch b;
  b.parent = rgn::Tensor::matrix(n, d, uniform_vec(rng, n * d));
  b.child = rgn::Tensor::matrix(n, d, uniform_vec(rng, n * d));
  if (subjects == 3) b.parent2 = rgn::Tensor::matrix(n, d, uniform_vec(rng, n * d));
  for (std::size_t i = 0; i < n; ++i) {
    b.labels.push_back(double(i % 2));
    b.relations.push_back(subjects == 3 ? rgn::Relation::FMS : rgn::Relation::FS);
  }
  return b;
}

// Randomises every parameter (including zero-initialised biases) in [-1, 1].
inline void randomize(rgn::ParameterStore& p, std::mt19937_64& rng, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& e : p)
    for (auto& v : e.tensor.values()) v = u(rng);
}

struct FdResult {
  double max_rel = 0;
  std::string worst;
  std::size_t checked = 0;
};

// Central differences of f over every scalar of the store, against the
// gradients already held in the store.
inline FdResult finite_difference(rgn::ParameterStore& p, const std::function<double()>& f, double h = 1e-6,
                                  double floor = 1e-4) {
  FdResult r;
  for (auto& e : p) {
    auto& v = e.tensor.values();
    const std::vector<double> g = e.tensor.grad();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double x = v[i];
      v[i] = x + h;
      const double up = f();
      v[i] = x - h;
      const double down = f();
      v[i] = x;
      const double num = (up - down) / (2 * h);
      const double rel = std::abs(num - g[i]) / std::max({std::abs(num), std::abs(g[i]), floor});
      ++r.checked;
      if (rel >= r.max_rel) {
        r.max_rel = rel;
        r.worst = e.name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return r;
}

// Loss gradient check for a whole model on one batch.
inline FdResult check_model(rgn::VerificationModel& m, const rgn::PairBatch& batch) {
  m.params().zero_grad();
  {
    rgn::Tape tape;
    rgn::backward(m.loss(tape, batch), m.params());
  }
  auto f = [&] {
    rgn::Tape tape;
    return m.loss(tape, batch).value()[0];
  };
  auto r = finite_difference(m.params(), f);
  m.params().zero_grad();
  return r;
}

inline rgn::SRgnConfig tiny_srgn(std::size_t d, std::vector<std::size_t> dims, rgn::PoolKind aggre = rgn::PoolKind::max,
                                 std::size_t subjects = 2) {
  rgn::SRgnConfig c;
  c.d = d;
  c.k = dims.size();
  c.dims = std::move(dims);
  c.aggre_pool = aggre;
  c.subject_count = subjects;
  return c;
}

inline rgn::HRgnConfig tiny_hrgn(std::size_t d, std::vector<std::size_t> latent, std::vector<std::size_t> dims,
                                 rgn::LowerInputMode mode = rgn::LowerInputMode::comprehensive,
                                 std::size_t subjects = 2) {
  rgn::HRgnConfig c;
  c.d = d;
  c.latent = std::move(latent);
  c.k = dims.size();
  c.dims = std::move(dims);
  c.lower_input_mode = mode;
  c.subject_count = subjects;
  return c;
}

}  // namespace fixtures
