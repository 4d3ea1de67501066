#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "rgn/rgn.hpp"
#include "support/fixtures.hpp"

using namespace rgn;

namespace {

using OpFn = std::function<Var(Tape&, const std::vector<Var>&)>;

// Gradient check of a single op: inputs become parameters, the op output is
// contracted with fixed random weights into a scalar.
double op_grad_error(const std::vector<Tensor>& inputs, const OpFn& op, std::uint64_t seed = 7) {
  ParameterStore store;
  for (std::size_t i = 0; i < inputs.size(); ++i) store.add("x" + std::to_string(i), inputs[i]);
  std::mt19937_64 rng(seed);
  std::vector<double> weights;
  auto forward = [&](Tape& tape) {
    std::vector<Var> vars;
    for (const auto& e : store) vars.push_back(tape.param(e.tensor));
    Var out = op(tape, vars);
    if (weights.empty()) weights = fixtures::uniform_vec(rng, out.size());
    Var w = tape.constant(Tensor::matrix(out.size(), 1, weights));
    return matmul(reshape(out, 1, out.size()), w);
  };
  {
    Tape tape;
    backward(forward(tape), store);
  }
  auto f = [&] {
    Tape tape;
    return forward(tape).value()[0];
  };
  return fixtures::finite_difference(store, f).max_rel;
}

Tensor rand_tensor(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  return Tensor::matrix(r, c, fixtures::uniform_vec(rng, r * c));
}

}  // namespace

TEST(Tensor, ShapesAndAccess) {
  Tensor t = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(t.at(1, 2), 6);
  EXPECT_EQ(shape_string(t.shape()), "[2x3]");
  EXPECT_THROW(Tensor::matrix(2, 2, {1, 2, 3}), DimensionError);
  EXPECT_THROW(Tensor({0, 3}), DimensionError);
}

TEST(Ops, MatmulExample) {
  Tape tape;
  Var a = tape.constant(Tensor::matrix(2, 2, {1, 2, 3, 4}));
  Var b = tape.constant(Tensor::matrix(2, 1, {5, 6}));
  Var c = matmul(a, b);
  EXPECT_EQ(c.value().values(), (std::vector<real>{17, 39}));
  EXPECT_THROW(matmul(b, b), DimensionError);
}

TEST(Ops, ReluSubgradientAtZeroIsZero) {
  ParameterStore store;
  store.add("x", Tensor::row({-1, 0, 2}));
  Tape tape;
  Var y = relu(tape.param(store.get("x")));
  EXPECT_EQ(y.value().values(), (std::vector<real>{0, 0, 2}));
  backward(sum(y), store);
  EXPECT_EQ(store.get("x").grad(), (std::vector<real>{0, 0, 1}));
}

TEST(Ops, SigmoidStableAtExtremes) {
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(800.0), 1.0, 1e-300);
  EXPECT_GE(sigmoid(-800.0), 0.0);
  EXPECT_FALSE(std::isnan(sigmoid(-800.0)));
}

TEST(Ops, ConcatBothAxes) {
  Tape tape;
  Var a = tape.constant(Tensor::matrix(1, 2, {1, 2}));
  Var b = tape.constant(Tensor::matrix(1, 2, {3, 4}));
  EXPECT_EQ(concat({a, b}, 0).value().values(), (std::vector<real>{1, 2, 3, 4}));
  EXPECT_EQ(concat({a, b}, 0).rows(), 2u);
  EXPECT_EQ(concat({a, b}, 1).cols(), 4u);
  EXPECT_THROW(concat(std::span<const Var>{}, 0), DimensionError);
}

TEST(Ops, PoolExamples) {
  Tape tape;
  Var x = tape.constant(Tensor::matrix(3, 2, {1, 6, 3, 2, 2, 4}));
  EXPECT_EQ(pool(PoolKind::max, x).value().values(), (std::vector<real>{3, 6}));
  EXPECT_EQ(pool(PoolKind::avg, x).value().values(), (std::vector<real>{2, 4}));
}

TEST(Ops, MaxPoolTieGoesToLowestIndex) {
  ParameterStore store;
  store.add("x", Tensor::matrix(3, 1, {5, 5, 1}));
  Tape tape;
  backward(sum(pool(PoolKind::max, tape.param(store.get("x")))), store);
  EXPECT_EQ(store.get("x").grad(), (std::vector<real>{1, 0, 0}));
}

TEST(Ops, PoolPermutationInvariance) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 9, c = 1 + rng() % 4;
    auto v = fixtures::uniform_vec(rng, n * c);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> w(n * c);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < c; ++j) w[i * c + j] = v[perm[i] * c + j];
    Tape tape;
    Var a = tape.constant(Tensor::matrix(n, c, v)), b = tape.constant(Tensor::matrix(n, c, w));
    EXPECT_EQ(pool(PoolKind::max, a).value().values(), pool(PoolKind::max, b).value().values());
    const auto pa = pool(PoolKind::avg, a).value().values(), pb = pool(PoolKind::avg, b).value().values();
    for (std::size_t j = 0; j < c; ++j) EXPECT_NEAR(pa[j], pb[j], 1e-12);
  }
}

TEST(Ops, SoftmaxSumsToOneAndShiftInvariant) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto z = fixtures::uniform_vec(rng, 1 + rng() % 10, -20, 20);
    const auto p = softmax(std::span<const real>(z));
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
    auto shifted = z;
    for (auto& v : shifted) v += 123.5;
    const auto q = softmax(std::span<const real>(shifted));
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], q[i], 1e-12);
  }
}

TEST(Ops, CosineExamples) {
  const std::vector<real> a{1, 2, 3}, b{-1, -2, -3}, o{3, 0, -1}, z{0, 0, 0};
  EXPECT_NEAR(cosine(a, a), 1.0, 1e-15);
  EXPECT_NEAR(cosine(a, b), -1.0, 1e-15);
  EXPECT_EQ(cosine(a, o), 0.0);
  EXPECT_EQ(cosine(a, z), 0.0);
  EXPECT_THROW(cosine(a, std::vector<real>{1, 2}), DimensionError);
}

TEST(Ops, CosineSymmetricAndScaleInvariant) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 16;
    auto a = fixtures::uniform_vec(rng, n), b = fixtures::uniform_vec(rng, n);
    EXPECT_EQ(cosine(a, b), cosine(b, a));
    const double lambda = std::exp(fixtures::uniform_vec(rng, 1, -5, 5)[0]);
    auto la = a;
    for (auto& v : la) v *= lambda;
    EXPECT_NEAR(cosine(la, b), cosine(a, b), 1e-12);
  }
}

TEST(Ops, BceExamples) {
  EXPECT_NEAR(bce_with_logit(0, 1), std::log(2.0), 1e-15);
  EXPECT_NEAR(bce_with_logit(0, 0), std::log(2.0), 1e-15);
  EXPECT_LT(bce_with_logit(40, 1), 1e-15);
  EXPECT_NEAR(bce_with_logit(-1000, 1), 1000, 1e-9);
}

TEST(Ops, BackwardNeedsScalar) {
  Tape tape;
  ParameterStore s;
  s.add("x", Tensor::row({1, 2}));
  Var x = tape.param(s.get("x"));
  EXPECT_THROW(tape.backward(x), DimensionError);
}

TEST(Ops, GradientChecksPerOp) {
  std::mt19937_64 rng(11);
  const double tol = 1e-5;
  const std::vector<IndexRange> groups{{0, 2}, {2, 3}, {3, 6}};
  const std::vector<std::size_t> index{2, 0, 0, 1};
  EXPECT_LE(op_grad_error({rand_tensor(rng, 3, 4), rand_tensor(rng, 4, 2)},
                          [](Tape&, auto& v) { return matmul(v[0], v[1]); }),
            tol);
  EXPECT_LE(op_grad_error({rand_tensor(rng, 3, 4), rand_tensor(rng, 3, 4)}, [](Tape&, auto& v) { return add(v[0], v[1]); }),
            tol);
  EXPECT_LE(op_grad_error({rand_tensor(rng, 3, 4), rand_tensor(rng, 1, 4)},
                          [](Tape&, auto& v) { return add_bias(v[0], v[1]); }),
            tol);
  for (auto act : {Activation::relu, Activation::sigmoid, Activation::tanh}) {
    EXPECT_LE(op_grad_error({rand_tensor(rng, 3, 4)}, [act](Tape&, auto& v) { return elementwise(act, v[0]); }), tol);
  }
  EXPECT_LE(op_grad_error({rand_tensor(rng, 2, 3), rand_tensor(rng, 2, 2)},
                          [](Tape&, auto& v) { return concat({v[0], v[1]}, 1); }),
            tol);
  EXPECT_LE(op_grad_error({rand_tensor(rng, 2, 3), rand_tensor(rng, 1, 3)},
                          [](Tape&, auto& v) { return concat({v[0], v[1]}, 0); }),
            tol);
  EXPECT_LE(op_grad_error({rand_tensor(rng, 3, 4)}, [](Tape&, auto& v) { return transpose(v[0]); }), tol);
  EXPECT_LE(op_grad_error({rand_tensor(rng, 1, 4)}, [](Tape&, auto& v) { return repeat_rows(v[0], 3); }), tol);
  for (auto kind : {PoolKind::avg, PoolKind::max}) {
    EXPECT_LE(op_grad_error({rand_tensor(rng, 6, 3)},
                            [&, kind](Tape&, auto& v) { return segment_pool(kind, v[0], groups); }),
              tol);
  }
  EXPECT_LE(op_grad_error({rand_tensor(rng, 3, 2)}, [&](Tape&, auto& v) { return gather_rows(v[0], index); }), tol);
  EXPECT_LE(op_grad_error({rand_tensor(rng, 6, 1)}, [&](Tape&, auto& v) { return segment_softmax(v[0], groups); }),
            tol);
  EXPECT_LE(op_grad_error({rand_tensor(rng, 6, 3), rand_tensor(rng, 6, 1)},
                          [&](Tape&, auto& v) { return segment_weighted_sum(v[0], v[1], groups); }),
            tol);
  EXPECT_LE(op_grad_error({rand_tensor(rng, 3, 4)}, [](Tape&, auto& v) { return normalize_rows(v[0]); }), tol);
  EXPECT_LE(op_grad_error({rand_tensor(rng, 1, 5), rand_tensor(rng, 1, 5)},
                          [](Tape&, auto& v) { return cosine(v[0], v[1]); }),
            tol);
  EXPECT_LE(op_grad_error({rand_tensor(rng, 4, 1)},
                          [](Tape&, auto& v) {
                            const std::vector<real> y{1, 0, 1, 0};
                            return bce_with_logits(v[0], y);
                          }),
            tol);
  EXPECT_LE(op_grad_error({rand_tensor(rng, 3, 3)},
                          [](Tape&, auto& v) {
                            Var u = normalize_rows(v[0]);
                            return matmul(matmul(u, transpose(u)), v[0]);
                          }),
            tol);
}

TEST(Ops, BceGradientIsSigmaMinusLabelOverN) {
  ParameterStore s;
  s.add("z", Tensor::matrix(2, 1, {0.3, -1.2}));
  Tape tape;
  const std::vector<real> y{1, 0};
  backward(bce_with_logits(tape.param(s.get("z")), y), s);
  EXPECT_NEAR(s.get("z").grad()[0], (sigmoid(0.3) - 1) / 2, 1e-15);
  EXPECT_NEAR(s.get("z").grad()[1], sigmoid(-1.2) / 2, 1e-15);
}

TEST(Random, DeterministicAndInRange) {
  std::mt19937_64 a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform01(a);
    EXPECT_EQ(u, uniform01(b));
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_NE(mix_seed(1, 2), mix_seed(2, 1));
}

TEST(Init, Examples) {
  const Tensor z = init_params({3, 3}, InitScheme::zeros, 5);
  for (auto v : z.values()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(init_params({4, 4}, InitScheme::xavier_uniform, 9).values(),
            init_params({4, 4}, InitScheme::xavier_uniform, 9).values());
  const Tensor x = init_params({4, 4}, InitScheme::xavier_uniform, 9);
  for (auto v : x.values()) EXPECT_LE(std::abs(v), std::sqrt(6.0 / 8.0));
}

TEST(Params, DuplicateNamesRejected) {
  ParameterStore s;
  s.add("a", Tensor::row({1}));
  EXPECT_THROW(s.add("a", Tensor::row({2})), ConfigError);
  EXPECT_THROW(s.get("missing"), ConfigError);
}

TEST(Optim, SgdMomentumMatchesHandComputation) {
  ParameterStore s;
  s.add("w", Tensor::row({1.0}));
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::sgd_momentum;
  cfg.lr = 0.1;
  cfg.momentum = 0.9;
  auto opt = make_optimizer(cfg);
  // loss = w^2, gradient 2w.
  double w = 1.0, v = 0.0;
  for (int i = 0; i < 5; ++i) {
    Tape tape;
    Var x = tape.param(s.get("w"));
    backward(sum(matmul(x, transpose(x))), s);
    opt->step(s);
    v = 0.9 * v + 2 * w;
    w -= 0.1 * v;
    EXPECT_NEAR(s.get("w")[0], w, 1e-15);
  }
}

TEST(Optim, AdamMatchesHandComputation) {
  ParameterStore s;
  s.add("w", Tensor::row({0.5}));
  OptimizerConfig cfg;
  auto opt = make_optimizer(cfg);
  double w = 0.5, m = 0, v = 0;
  for (int t = 1; t <= 5; ++t) {
    Tape tape;
    Var x = tape.param(s.get("w"));
    backward(sum(matmul(x, transpose(x))), s);
    opt->step(s);
    const double g = 2 * w;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.999, t));
    w -= 1e-3 * mh / (std::sqrt(vh) + 1e-8);
    EXPECT_NEAR(s.get("w")[0], w, 1e-15);
  }
}

TEST(Optim, MissingGradientIsAnError) {
  ParameterStore s;
  s.add("w", Tensor::row({0.5}));
  auto opt = make_optimizer({});
  EXPECT_THROW(opt->step(s), Error);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  std::mt19937_64 rng(17);
  ParameterStore s;
  s.add("a", Tensor::matrix(3, 2, fixtures::uniform_vec(rng, 6, -1e6, 1e6)));
  s.add("b.bias", Tensor::row({std::nextafter(0.0, 1.0), -0.0, 1e-300}));
  s.add("scalar", Tensor::scalar(3.25));
  std::stringstream buf;
  save_checkpoint(buf, s);
  const ParameterStore t = load_checkpoint(buf);
  ASSERT_EQ(t.size(), s.size());
  auto it = t.begin();
  for (const auto& e : s) {
    EXPECT_EQ(it->name, e.name);
    EXPECT_EQ(it->tensor.shape(), e.tensor.shape());
    ASSERT_EQ(it->tensor.size(), e.tensor.size());
    for (std::size_t i = 0; i < e.tensor.size(); ++i)
      EXPECT_EQ(std::bit_cast<std::uint64_t>(double(it->tensor[i])), std::bit_cast<std::uint64_t>(double(e.tensor[i])));
    ++it;
  }
}

TEST(Checkpoint, TruncatedFileReportsOffset) {
  ParameterStore s;
  s.add("a", Tensor::matrix(2, 2, {1, 2, 3, 4}));
  std::stringstream buf;
  save_checkpoint(buf, s);
  const std::string bytes = buf.str();
  for (std::size_t cut : {std::size_t(2), std::size_t(10), bytes.size() - 3}) {
    std::stringstream partial(bytes.substr(0, cut));
    try {
      load_checkpoint(partial);
      FAIL() << "truncated checkpoint accepted";
    } catch (const FormatError& e) {
      EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos) << e.what();
    }
  }
  std::stringstream bad("XXXX");
  EXPECT_THROW(load_checkpoint(bad), FormatError);
}

TEST(Checkpoint, AssignValidatesShapes) {
  ParameterStore target, loaded;
  target.add("w", Tensor::matrix(2, 2, {0, 0, 0, 0}));
  loaded.add("w", Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
  EXPECT_THROW(assign_parameters(target, loaded), DimensionError);
}
