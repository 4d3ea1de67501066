#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "rgn/numerics/random.hpp"
#include "rgn/pipeline/features.hpp"
#include "rgn/pipeline/manifest.hpp"

namespace rgn {

/// One negative per positive: positive i keeps its parent(s) and receives the
/// child of another positive j != i drawn uniformly from the same relation
/// within the same fold. When a relation has a single positive in the fold,
/// j is drawn from the whole fold instead.
inline std::vector<Pair> build_negatives(const std::vector<Pair>& positives, std::uint64_t seed) {
  if (positives.size() < 2) {
    throw DataError("need at least 2 positives to build negatives, got " + std::to_string(positives.size()));
  }
  const int fold = positives.front().fold;
  std::map<Relation, std::vector<std::size_t>> by_relation;
  for (std::size_t i = 0; i < positives.size(); ++i) {
    if (positives[i].fold != fold) throw DataError("build_negatives expects positives from a single fold");
    by_relation[positives[i].relation].push_back(i);
  }
  std::vector<std::size_t> everyone(positives.size());
  for (std::size_t i = 0; i < everyone.size(); ++i) everyone[i] = i;

  std::mt19937_64 rng(seed);
  std::vector<Pair> negatives;
  negatives.reserve(positives.size());
  for (std::size_t i = 0; i < positives.size(); ++i) {
    const auto& group = by_relation[positives[i].relation];
    const auto& pool = group.size() >= 2 ? group : everyone;
    // Draw among pool minus i.
    std::size_t self = 0;
    while (pool[self] != i) ++self;
    std::size_t pick = std::size_t(uniform_index(rng, pool.size() - 1));
    if (pick >= self) ++pick;
    const Pair& a = positives[i];
    const Pair& b = positives[pool[pick]];
    Pair neg;
    neg.pair_id = "neg:" + a.pair_id + ":" + b.pair_id;
    neg.relation = a.relation;
    neg.fold = a.fold;
    neg.parent_ref = a.parent_ref;
    neg.parent2_ref = a.parent2_ref;
    neg.child_ref = b.child_ref;
    neg.label = 0;
    negatives.push_back(std::move(neg));
  }
  return negatives;
}

struct Split {
  std::vector<Pair> train;
  std::vector<Pair> test;

  static std::vector<Pair> positives(const std::vector<Pair>& pairs) {
    std::vector<Pair> out;
    for (const auto& p : pairs)
      if (p.label == 1) out.push_back(p);
    return out;
  }
};

inline std::uint64_t fold_seed(std::uint64_t seed, int fold) { return mix_seed(seed, std::uint64_t(fold)); }

// Positives of every fold plus negatives built inside that fold.
inline std::vector<Pair> with_negatives(const SampleManifest& m, const std::vector<int>& folds, std::uint64_t seed) {
  std::vector<Pair> out;
  for (int f : folds) {
    auto pos = m.fold(f);
    auto neg = build_negatives(pos, fold_seed(seed, f));
    out.insert(out.end(), pos.begin(), pos.end());
    out.insert(out.end(), neg.begin(), neg.end());
  }
  return out;
}

/// Held-out fold for testing, the remaining folds for training. Negatives are
/// built within each fold, so no pair links samples across the split.
inline Split cv_split(const SampleManifest& m, int held_out_fold, std::uint64_t seed) {
  if (held_out_fold < 1 || held_out_fold > kFoldCount) {
    throw DataError("held-out fold " + std::to_string(held_out_fold) + " outside 1.." + std::to_string(kFoldCount));
  }
  std::set<int> present;
  for (const auto& r : m.records) present.insert(r.fold);
  for (int f = 1; f <= kFoldCount; ++f)
    if (!present.count(f)) throw DataError("manifest has no samples in fold " + std::to_string(f));
  std::vector<int> train_folds;
  for (int f = 1; f <= kFoldCount; ++f)
    if (f != held_out_fold) train_folds.push_back(f);
  return Split{with_negatives(m, train_folds, seed), with_negatives(m, {held_out_fold}, seed)};
}

// Fresh negatives for the training positives, fold by fold.
inline std::vector<Pair> resample_training_negatives(const std::vector<Pair>& train, std::uint64_t seed) {
  std::map<int, std::vector<Pair>> by_fold;
  for (const auto& p : train)
    if (p.label == 1) by_fold[p.fold].push_back(p);
  std::vector<Pair> out;
  for (auto& [f, pos] : by_fold) {
    auto neg = build_negatives(pos, fold_seed(seed, f));
    out.insert(out.end(), pos.begin(), pos.end());
    out.insert(out.end(), neg.begin(), neg.end());
  }
  return out;
}

/// Resolves feature references into a batch; order follows `pairs`.
inline PairBatch make_batch(const std::vector<Pair>& pairs, const FeatureTable& features) {
  if (pairs.empty()) throw DataError("cannot build a batch from no pairs");
  const std::size_t n = pairs.size(), w = features.width();
  const bool tri = pairs.front().parent2_ref.has_value();
  std::vector<real> parent, child, parent2;
  parent.reserve(n * w);
  child.reserve(n * w);
  PairBatch b;
  for (const auto& p : pairs) {
    auto pr = features.row(p.parent_ref);
    auto cr = features.row(p.child_ref);
    parent.insert(parent.end(), pr.begin(), pr.end());
    child.insert(child.end(), cr.begin(), cr.end());
    if (tri != p.parent2_ref.has_value()) throw DataError("batch mixes bi-subject and tri-subject pairs");
    if (tri) {
      auto qr = features.row(*p.parent2_ref);
      parent2.insert(parent2.end(), qr.begin(), qr.end());
    }
    b.labels.push_back(real(p.label));
    b.relations.push_back(p.relation);
  }
  b.parent = Tensor::matrix(n, w, std::move(parent));
  b.child = Tensor::matrix(n, w, std::move(child));
  if (tri) b.parent2 = Tensor::matrix(n, w, std::move(parent2));
  return b;
}

}  // namespace rgn
