#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "rgn/rgn.hpp"
#include "support/fixtures.hpp"

using namespace rgn;

namespace {

struct Fixture {
  SynthData data;
  Split split;
};

Fixture synth_split(std::size_t families, std::uint64_t seed = 1) {
  SynthConfig c;
  c.n_families = families;
  c.seed = seed;
  Fixture f{synth_generate(c), {}};
  f.split = cv_split(f.data.manifest, 1, seed);
  return f;
}

std::string checkpoint_bytes(const VerificationModel& m, const FeatureExtractor& ex) {
  std::ostringstream os;
  save_checkpoint(os, checkpoint_store(m, ex));
  return os.str();
}

SRgnConfig small_srgn() { return fixtures::tiny_srgn(32, {16, 4}); }

}  // namespace

TEST(Train, ZeroLrSingleStepKeepsParametersAndLossIsLn2) {
  auto f = synth_split(50);
  SRgn m(small_srgn(), 3);
  m.params().fill(0);
  const ParameterStore before = m.params();
  PrecomputedExtractor ex(32);
  TrainConfig tc;
  tc.iterations = 1;
  tc.optimizer.lr = 0;
  const RunRecord r = train(tc, f.split, f.data.features, m, ex);
  ASSERT_EQ(r.points.size(), 1u);
  EXPECT_NEAR(r.points[0].train_loss, std::log(2.0), 1e-15);
  auto it = before.begin();
  for (const auto& e : m.params()) {
    EXPECT_EQ(e.tensor.values(), it->tensor.values()) << e.name;
    ++it;
  }
}

TEST(Train, SameSeedGivesIdenticalCheckpoints) {
  auto f = synth_split(50);
  std::string bytes[2];
  for (int run = 0; run < 2; ++run) {
    HRgn m(fixtures::tiny_hrgn(32, {8, 4}, {8, 4}), 11);
    ToyExtractor ex(32, 32, 12);
    TrainConfig tc;
    tc.iterations = 30;
    tc.batch_size = 8;
    tc.seed = 5;
    tc.resample_negatives = true;
    train(tc, f.split, f.data.features, m, ex);
    bytes[run] = checkpoint_bytes(m, ex);
  }
  EXPECT_EQ(bytes[0], bytes[1]);
}

TEST(Train, ToyExtractorIsTrainedJointly) {
  auto f = synth_split(50);
  SRgn m(small_srgn(), 3);
  ToyExtractor ex(32, 32, 4);
  const ParameterStore before = ex.params();
  TrainConfig tc;
  tc.iterations = 3;
  tc.extractor = ExtractorMode::toy;
  train(tc, f.split, f.data.features, m, ex);
  EXPECT_NE(ex.params().get("extractor.w0").values(), before.get("extractor.w0").values());
}

TEST(Train, EvalPointsStrictlyIncreasing) {
  auto f = synth_split(50);
  SRgn m(small_srgn(), 3);
  PrecomputedExtractor ex(32);
  TrainConfig tc;
  tc.iterations = 25;
  tc.eval_every = 10;
  std::ostringstream log;
  const RunRecord r = train(tc, f.split, f.data.features, m, ex, &log);
  ASSERT_EQ(r.points.size(), 3u);
  EXPECT_EQ(r.points[0].iteration, 10u);
  EXPECT_EQ(r.points[2].iteration, 25u);
  std::istringstream lines(log.str());
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("train_loss"));
    ++n;
  }
  EXPECT_EQ(n, 3u);
}

TEST(Train, BatchComposition) {
  TrainConfig tc;
  tc.batch_size = 7;
  EXPECT_EQ(tc.positives_per_batch(), 4u);
  EXPECT_EQ(tc.negatives_per_batch(), 3u);
  tc.batch_size = 32;
  EXPECT_EQ(tc.positives_per_batch(), 16u);
  EXPECT_EQ(tc.total_iterations(160), 100u * 10u);
  tc.iterations = 7;
  EXPECT_EQ(tc.total_iterations(160), 7u);
}

TEST(Train, Errors) {
  auto f = synth_split(50);
  SRgn m(small_srgn(), 3);
  PrecomputedExtractor wrong(16), ok(32);
  TrainConfig tc;
  tc.iterations = 1;
  EXPECT_THROW(train(tc, f.split, f.data.features, m, wrong), DimensionError);
  EXPECT_THROW(train(tc, Split{}, f.data.features, m, ok), DataError);
  tc.batch_size = 0;
  EXPECT_THROW(train(tc, f.split, f.data.features, m, ok), ConfigError);
}

TEST(Train, SmallLrLossNonIncreasingOnFixedBatch) {
  auto f = synth_split(50);
  SRgn m(small_srgn(), 8);
  const PairBatch b = make_batch(f.split.train, f.data.features);
  OptimizerConfig oc;
  oc.lr = 1e-4;
  auto opt = make_optimizer(oc);
  double first = 0, last = 0;
  for (int it = 0; it <= 20; ++it) {
    Tape tape;
    Var loss = m.loss(tape, b);
    (it == 0 ? first : last) = loss.value()[0];
    backward(loss, m.params());
    opt->step(m.params());
  }
  EXPECT_LE(last, first);
}

TEST(Train, CheckpointRestoresPredictions) {
  auto f = synth_split(50);
  const auto path = std::filesystem::temp_directory_path() / "rgn_train_ckpt.bin";
  HRgn m(fixtures::tiny_hrgn(32, {8, 4}, {8, 4}), 2);
  ToyExtractor ex(32, 32, 3);
  TrainConfig tc;
  tc.iterations = 5;
  tc.checkpoint_path = path.string();
  const RunRecord r = train(tc, f.split, f.data.features, m, ex);
  EXPECT_EQ(r.checkpoint, path.string());
  HRgn m2(fixtures::tiny_hrgn(32, {8, 4}, {8, 4}), 99);
  ToyExtractor ex2(32, 32, 98);
  restore_checkpoint(load_checkpoint(path.string()), m2, ex2);
  const PairBatch b = make_batch(f.split.test, f.data.features);
  EXPECT_EQ(m.probabilities(b, &ex), m2.probabilities(b, &ex2));
  std::filesystem::remove(path);
}

TEST(Train, SRgnFitsSyntheticTask) {
  auto f = synth_split(200);
  SRgn m(small_srgn(), 1);
  PrecomputedExtractor ex(32);
  TrainConfig tc;
  tc.epochs = 300;
  tc.eval_every = 100;
  const RunRecord r = train(tc, Split{f.split.train, {}}, f.data.features, m, ex);
  double best = 0;
  for (const auto& p : r.points) best = std::max(best, p.train_accuracy);
  EXPECT_GE(best, 0.95);
}
