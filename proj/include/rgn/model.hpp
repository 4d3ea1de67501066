#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rgn/numerics/checkpoint.hpp"
#include "rgn/numerics/mlp.hpp"
#include "rgn/numerics/ops.hpp"
#include "rgn/numerics/params.hpp"

namespace rgn {

enum class Relation { FS, FD, MS, MD, FMS, FMD };

inline constexpr Relation kBiRelations[] = {Relation::FS, Relation::FD, Relation::MS, Relation::MD};
inline constexpr Relation kTriRelations[] = {Relation::FMS, Relation::FMD};

inline std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::FS: return "F-S";
    case Relation::FD: return "F-D";
    case Relation::MS: return "M-S";
    case Relation::MD: return "M-D";
    case Relation::FMS: return "FM-S";
    case Relation::FMD: return "FM-D";
  }
  return "?";
}

inline Relation parse_relation(std::string_view s) {
  for (auto r : {Relation::FS, Relation::FD, Relation::MS, Relation::MD, Relation::FMS, Relation::FMD})
    if (to_string(r) == s) return r;
  throw DataError("unknown relation '" + std::string(s) + "'");
}

inline bool is_tri_subject(Relation r) { return r == Relation::FMS || r == Relation::FMD; }

/// Row i of every subject matrix belongs to pair i. Subject order is
/// parent, child and, for tri-subject data, the second parent.
struct PairBatch {
  Tensor parent;
  Tensor child;
  std::optional<Tensor> parent2;
  std::vector<real> labels;
  std::vector<Relation> relations;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t subject_count() const noexcept { return parent2 ? 3 : 2; }

  void validate() const {
    if (labels.empty()) throw DataError("empty batch");
    const auto n = labels.size();
    if (parent.rows() != n || child.rows() != n || (parent2 && parent2->rows() != n)) {
      throw DimensionError("batch subject matrices disagree with label count " + std::to_string(n));
    }
    if (parent.cols() != child.cols() || (parent2 && parent2->cols() != parent.cols())) {
      throw DimensionError("batch subject matrices have different widths");
    }
    for (auto y : labels)
      if (y != 0 && y != 1) throw DataError("labels must be 0 or 1");
  }
};

// ---------------------------------------------------------------------------
// Feature extractors map a raw feature row to the D-dimensional vector the
// reasoning graphs consume.

enum class ExtractorMode { precomputed, toy };

inline std::string_view to_string(ExtractorMode m) { return m == ExtractorMode::toy ? "toy" : "precomputed"; }

inline ExtractorMode parse_extractor_mode(std::string_view s) {
  if (s == "precomputed") return ExtractorMode::precomputed;
  if (s == "toy" || s == "toy-trainable") return ExtractorMode::toy;
  throw ConfigError("unknown extractor mode '" + std::string(s) + "'");
}

class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;

  // raw is 1 x raw_width; result is 1 x output_width.
  virtual Var extract(Tape& tape, Var raw) const = 0;
  virtual std::size_t raw_width() const = 0;
  virtual std::size_t output_width() const = 0;

  ParameterStore& params() noexcept { return params_; }
  const ParameterStore& params() const noexcept { return params_; }

 protected:
  ParameterStore params_;
};

// Frozen features: identity over the loaded table rows.
class PrecomputedExtractor final : public FeatureExtractor {
 public:
  explicit PrecomputedExtractor(std::size_t width) : width_(width) {}

  Var extract(Tape&, Var raw) const override {
    if (raw.cols() != width_) {
      throw DimensionError("feature width " + std::to_string(raw.cols()) + " does not match expected " +
                           std::to_string(width_));
    }
    return raw;
  }
  std::size_t raw_width() const override { return width_; }
  std::size_t output_width() const override { return width_; }

 private:
  std::size_t width_;
};

// Small trainable affine map raw -> D, optimised jointly with the model.
class ToyExtractor final : public FeatureExtractor {
 public:
  ToyExtractor(std::size_t raw, std::size_t out, std::uint64_t seed)
      : map_(params_, "extractor.", raw, {}, out, Activation::relu, seed) {}

  Var extract(Tape& tape, Var raw) const override { return map_(tape, params_, raw); }
  std::size_t raw_width() const override { return map_.in_width(); }
  std::size_t output_width() const override { return map_.out_width(); }

 private:
  Mlp map_;
};

// ---------------------------------------------------------------------------

/// Common surface of every trainable verifier: a logit for one pair (or
/// triple) of D-dimensional feature vectors.
class VerificationModel {
 public:
  virtual ~VerificationModel() = default;

  virtual std::string_view kind() const = 0;
  virtual std::size_t feature_dim() const = 0;
  virtual std::size_t subject_count() const = 0;

  // subjects: parent, child[, parent2], each 1 x feature_dim. Returns 1 x 1.
  virtual Var logit(Tape& tape, std::span<const Var> subjects) const = 0;

  ParameterStore& params() noexcept { return params_; }
  const ParameterStore& params() const noexcept { return params_; }

  // Everything written to a checkpoint: the parameters plus any shape
  // metadata the model wants validated on load.
  virtual ParameterStore checkpoint_entries() const { return params_; }
  virtual void restore(const ParameterStore& loaded) { assign_parameters(params_, loaded); }

  // n x 1 logits for a batch, features passed through the extractor.
  Var logits(Tape& tape, const PairBatch& batch, const FeatureExtractor* extractor = nullptr) const {
    batch.validate();
    if (batch.subject_count() != subject_count()) {
      throw DimensionError(std::string(kind()) + " expects " + std::to_string(subject_count()) +
                           " subjects per sample, batch has " + std::to_string(batch.subject_count()));
    }
    std::vector<Var> out;
    out.reserve(batch.size());
    std::vector<Var> subjects(subject_count());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      subjects[0] = subject(tape, batch.parent, i, extractor);
      subjects[1] = subject(tape, batch.child, i, extractor);
      if (batch.parent2) subjects[2] = subject(tape, *batch.parent2, i, extractor);
      out.push_back(logit(tape, subjects));
    }
    return concat(out, 0);
  }

  // Mean binary cross-entropy over the batch.
  Var loss(Tape& tape, const PairBatch& batch, const FeatureExtractor* extractor = nullptr) const {
    return bce_with_logits(logits(tape, batch, extractor), batch.labels);
  }

  std::vector<real> probabilities(const PairBatch& batch, const FeatureExtractor* extractor = nullptr) const {
    std::vector<real> p;
    p.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      Tape tape;
      std::vector<Var> subjects(subject_count());
      subjects[0] = subject(tape, batch.parent, i, extractor);
      subjects[1] = subject(tape, batch.child, i, extractor);
      if (batch.parent2) subjects[2] = subject(tape, *batch.parent2, i, extractor);
      p.push_back(sigmoid(logit(tape, subjects).value()[0]));
    }
    return p;
  }

 protected:
  void check_subjects(std::span<const Var> subjects) const {
    if (subjects.size() != subject_count()) {
      throw DimensionError(std::string(kind()) + " expects " + std::to_string(subject_count()) + " subjects, got " +
                           std::to_string(subjects.size()));
    }
    for (const auto& s : subjects) {
      if (s.rows() != 1 || s.cols() != feature_dim()) {
        throw DimensionError(std::string(kind()) + " expects 1x" + std::to_string(feature_dim()) +
                             " feature vectors, got " + std::to_string(s.rows()) + "x" + std::to_string(s.cols()));
      }
    }
  }

  ParameterStore params_;

 private:
  static Var subject(Tape& tape, const Tensor& m, std::size_t row, const FeatureExtractor* extractor) {
    auto r = m.row_span(row);
    Var raw = tape.constant(Tensor::row(std::vector<real>(r.begin(), r.end())));
    return extractor ? extractor->extract(tape, raw) : raw;
  }
};

}  // namespace rgn
