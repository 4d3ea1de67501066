#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rgn/baselines.hpp"
#include "rgn/eval/metrics.hpp"
#include "rgn/hrgn.hpp"
#include "rgn/numerics/checkpoint.hpp"
#include "rgn/numerics/optim.hpp"
#include "rgn/pipeline/protocol.hpp"
#include "rgn/srgn.hpp"

namespace rgn {

enum class ModelKind { srgn, hrgn, mlp_baseline, cos_baseline };

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::srgn: return "srgn";
    case ModelKind::hrgn: return "hrgn";
    case ModelKind::mlp_baseline: return "mlp-baseline";
    case ModelKind::cos_baseline: return "cos-baseline";
  }
  return "?";
}

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "srgn") return ModelKind::srgn;
  if (s == "hrgn") return ModelKind::hrgn;
  if (s == "mlp-baseline" || s == "mlp") return ModelKind::mlp_baseline;
  if (s == "cos-baseline" || s == "cos") return ModelKind::cos_baseline;
  throw ConfigError("unknown model '" + std::string(s) + "'");
}

struct ModelSpec {
  SRgnConfig srgn;
  HRgnConfig hrgn;
  MlpBaselineConfig mlp;
};

inline std::unique_ptr<VerificationModel> make_model(ModelKind kind, const ModelSpec& spec, std::uint64_t seed) {
  switch (kind) {
    case ModelKind::srgn: return std::make_unique<SRgn>(spec.srgn, seed);
    case ModelKind::hrgn: return std::make_unique<HRgn>(spec.hrgn, seed);
    case ModelKind::mlp_baseline: return std::make_unique<MlpBaseline>(spec.mlp, seed);
    case ModelKind::cos_baseline: break;
  }
  throw ConfigError("cos-baseline has no trainable model");
}

inline std::unique_ptr<FeatureExtractor> make_extractor(ExtractorMode mode, std::size_t raw_width, std::size_t out_width,
                                                        std::uint64_t seed) {
  if (mode == ExtractorMode::toy) return std::make_unique<ToyExtractor>(raw_width, out_width, mix_seed(seed, 3000));
  if (raw_width != out_width) {
    throw DimensionError("precomputed features have width " + std::to_string(raw_width) + " but the model expects " +
                         std::to_string(out_width));
  }
  return std::make_unique<PrecomputedExtractor>(raw_width);
}

struct TrainConfig {
  ModelKind model = ModelKind::srgn;
  std::size_t iterations = 0;  // mini-batch updates; 0 means derive from epochs
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  OptimizerConfig optimizer;
  std::uint64_t seed = 1;
  bool resample_negatives = false;
  std::size_t eval_every = 0;  // 0: evaluate only after the last iteration
  ExtractorMode extractor = ExtractorMode::precomputed;
  std::string checkpoint_path;  // written after training when non-empty

  void validate() const {
    if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
    if (iterations == 0 && epochs == 0) throw ConfigError("need at least one iteration");
  }

  std::size_t positives_per_batch() const { return (batch_size + 1) / 2; }
  std::size_t negatives_per_batch() const { return batch_size / 2; }

  // An epoch visits every training positive once (and as many negatives).
  std::size_t total_iterations(std::size_t train_positives) const {
    if (iterations > 0) return iterations;
    const std::size_t per_epoch = (train_positives + positives_per_batch() - 1) / positives_per_batch();
    return epochs * std::max<std::size_t>(per_epoch, 1);
  }
};

struct EvalPoint {
  std::size_t iteration = 0;
  real train_loss = 0;      // mean mini-batch loss since the previous point
  real train_accuracy = 0;  // full training split, threshold 0.5
  real test_accuracy = std::numeric_limits<real>::quiet_NaN();
};

struct RunRecord {
  std::vector<EvalPoint> points;
  std::string checkpoint;

  void write_jsonl(std::ostream& os) const {
    for (const auto& p : points) os << to_json(p).dump() << '\n';
  }

  static nlohmann::json to_json(const EvalPoint& p) {
    nlohmann::json j = {{"iteration", p.iteration}, {"train_loss", p.train_loss}, {"train_accuracy", p.train_accuracy}};
    j["test_accuracy"] = std::isnan(p.test_accuracy) ? nlohmann::json(nullptr) : nlohmann::json(p.test_accuracy);
    return j;
  }
};

inline real batch_accuracy(const VerificationModel& model, const PairBatch& batch, const FeatureExtractor* extractor) {
  const auto probs = model.probabilities(batch, extractor);
  return verification_rate(probs, batch.labels, ThresholdPolicy::fixed_half);
}

// Everything a run checkpoints: model entries followed by extractor weights.
inline ParameterStore checkpoint_store(const VerificationModel& model, const FeatureExtractor& extractor) {
  ParameterStore all = model.checkpoint_entries();
  all.merge(extractor.params());
  return all;
}

inline void restore_checkpoint(const ParameterStore& loaded, VerificationModel& model, FeatureExtractor& extractor) {
  ParameterStore model_part, extractor_part;
  for (const auto& e : loaded) {
    if (extractor.params().contains(e.name)) extractor_part.add(e.name, e.tensor);
    else model_part.add(e.name, e.tensor);
  }
  model.restore(model_part);
  assign_parameters(extractor.params(), extractor_part);
}

/// Mini-batch training: balanced batches (ceil(B/2) positives, floor(B/2)
/// negatives), mean BCE, one optimizer step per batch. A toy extractor is
/// optimised jointly with the model. Deterministic for a fixed seed.
inline RunRecord train(const TrainConfig& cfg, const Split& data, const FeatureTable& features,
                       VerificationModel& model, FeatureExtractor& extractor, std::ostream* metrics_log = nullptr) {
  cfg.validate();
  if (data.train.empty()) throw DataError("empty training split");
  if (extractor.output_width() != model.feature_dim()) {
    throw DimensionError("extractor produces width " + std::to_string(extractor.output_width()) +
                         ", model expects " + std::to_string(model.feature_dim()));
  }
  if (extractor.raw_width() != features.width()) {
    throw DimensionError("feature table width " + std::to_string(features.width()) + " does not match extractor input " +
                         std::to_string(extractor.raw_width()));
  }

  std::vector<Pair> pos, neg;
  for (const auto& p : data.train) (p.label == 1 ? pos : neg).push_back(p);
  if (pos.empty() || neg.empty()) throw DataError("training split needs positives and negatives");

  const std::size_t total = cfg.total_iterations(pos.size());
  auto model_opt = make_optimizer(cfg.optimizer);
  auto extractor_opt = make_optimizer(cfg.optimizer);
  const bool train_extractor = extractor.params().size() > 0;

  std::mt19937_64 rng(mix_seed(cfg.seed, 0x7a11));
  std::vector<std::size_t> pos_order(pos.size()), neg_order(neg.size());
  std::iota(pos_order.begin(), pos_order.end(), std::size_t{0});
  std::iota(neg_order.begin(), neg_order.end(), std::size_t{0});
  shuffle(pos_order.begin(), pos_order.end(), rng);
  shuffle(neg_order.begin(), neg_order.end(), rng);
  std::size_t pos_cursor = 0, neg_cursor = 0, epoch = 0;

  const PairBatch train_all = make_batch(data.train, features);
  const std::optional<PairBatch> test_all =
      data.test.empty() ? std::nullopt : std::optional<PairBatch>(make_batch(data.test, features));

  RunRecord record;
  real loss_sum = 0;
  std::size_t loss_count = 0;
  std::vector<Pair> batch_pairs;
  for (std::size_t it = 1; it <= total; ++it) {
    batch_pairs.clear();
    for (std::size_t i = 0; i < cfg.positives_per_batch(); ++i) {
      if (pos_cursor == pos.size()) {
        pos_cursor = 0;
        ++epoch;
        shuffle(pos_order.begin(), pos_order.end(), rng);
        if (cfg.resample_negatives) {
          std::vector<Pair> fresh;
          for (const auto& p : resample_training_negatives(pos, mix_seed(cfg.seed, epoch)))
            if (p.label == 0) fresh.push_back(p);
          neg = std::move(fresh);
          neg_cursor = neg.size();
        }
      }
      batch_pairs.push_back(pos[pos_order[pos_cursor++]]);
    }
    for (std::size_t i = 0; i < cfg.negatives_per_batch(); ++i) {
      if (neg_cursor >= neg.size()) {
        neg_cursor = 0;
        neg_order.resize(neg.size());
        std::iota(neg_order.begin(), neg_order.end(), std::size_t{0});
        shuffle(neg_order.begin(), neg_order.end(), rng);
      }
      batch_pairs.push_back(neg[neg_order[neg_cursor++]]);
    }

    const PairBatch batch = make_batch(batch_pairs, features);
    Tape tape;
    Var loss = model.loss(tape, batch, &extractor);
    tape.backward(loss);
    accumulate_grads(tape, model.params());
    model_opt->step(model.params());
    if (train_extractor) {
      accumulate_grads(tape, extractor.params());
      extractor_opt->step(extractor.params());
    }
    loss_sum += loss.value()[0];
    ++loss_count;

    if (it == total || (cfg.eval_every > 0 && it % cfg.eval_every == 0)) {
      EvalPoint p;
      p.iteration = it;
      p.train_loss = loss_sum / real(loss_count);
      p.train_accuracy = batch_accuracy(model, train_all, &extractor);
      if (test_all) p.test_accuracy = batch_accuracy(model, *test_all, &extractor);
      record.points.push_back(p);
      if (metrics_log) *metrics_log << RunRecord::to_json(p).dump() << '\n';
      loss_sum = 0;
      loss_count = 0;
    }
  }
  if (!cfg.checkpoint_path.empty()) {
    save_checkpoint(cfg.checkpoint_path, checkpoint_store(model, extractor));
    record.checkpoint = cfg.checkpoint_path;
  }
  return record;
}

}  // namespace rgn
