#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rgn/rgn.hpp"
#include "support/fixtures.hpp"

using namespace rgn;

TEST(CosBaseline, Examples) {
  const std::vector<real> a{0.5, -1, 2}, o{2, 1, 0}, neg{-0.5, 1, -2};
  EXPECT_NEAR(cos_baseline(a, a), 1.0, 1e-15);
  EXPECT_EQ(cos_baseline(a, o), 0.0);
  EXPECT_NEAR(cos_baseline(a, neg), -1.0, 1e-15);
}

TEST(CosBaseline, SymmetricAndScaleInvariant) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    auto a = fixtures::uniform_vec(rng, 8), b = fixtures::uniform_vec(rng, 8);
    EXPECT_EQ(cos_baseline(a, b), cos_baseline(b, a));
    auto la = a;
    for (auto& v : la) v *= 7.5;
    EXPECT_NEAR(cos_baseline(la, b), cos_baseline(a, b), 1e-12);
  }
}

TEST(MlpBaseline, ZeroParamsGiveHalf) {
  MlpBaseline m({8, 2, {64}});
  m.params().fill(0);
  std::mt19937_64 rng(1);
  EXPECT_EQ(sigmoid(fixtures::model_logit(m, fixtures::random_subjects(rng, 2, 8))), 0.5);
}

TEST(MlpBaseline, DefaultShape) {
  MlpBaseline m({});
  EXPECT_EQ(m.params().get("mlpbase.w0").rows(), 1024u);
  EXPECT_EQ(m.params().get("mlpbase.w0").cols(), 64u);
  EXPECT_EQ(m.params().get("mlpbase.w1").cols(), 1u);
}

TEST(MlpBaseline, GradientMatchesFiniteDifferences) {
  for (std::size_t subjects : {2u, 3u}) {
    std::mt19937_64 rng(5);
    MlpBaseline m({8, subjects, {6}}, 3);
    const auto r = fixtures::check_model(m, fixtures::random_batch(rng, 4, 8, subjects));
    EXPECT_LE(r.max_rel, 1e-5) << r.worst;
  }
}

TEST(MlpBaseline, FitsSeparableSyntheticTask) {
  SynthConfig sc;
  sc.n_families = 200;
  const SynthData data = synth_generate(sc);
  const Split split = cv_split(data.manifest, 1, 1);
  MlpBaseline m({32, 2, {64}}, 2);
  PrecomputedExtractor ex(32);
  TrainConfig tc;
  tc.model = ModelKind::mlp_baseline;
  tc.epochs = 150;
  const RunRecord r = train(tc, Split{split.train, {}}, data.features, m, ex);
  EXPECT_GE(r.points.back().train_accuracy, 0.9);
}
