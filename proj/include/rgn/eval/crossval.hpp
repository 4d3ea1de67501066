#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rgn/eval/metrics.hpp"
#include "rgn/training.hpp"

namespace rgn {

struct CrossvalConfig {
  ModelKind model = ModelKind::srgn;
  ModelSpec spec;
  TrainConfig train;
};

struct FoldResult {
  int fold = 0;
  std::map<Relation, real> rate;  // relations with test samples in this fold
  real mean = 0;                  // mean over relations
};

/// Verification rates per fold and relation, their means, and a ROC curve
/// pooled over every held-out score.
struct EvalReport {
  std::string model;
  std::vector<Relation> relations;
  std::vector<FoldResult> folds;
  std::map<Relation, real> relation_mean;
  real mean = 0;
  RocCurve roc;
  std::vector<real> scores;
  std::vector<real> labels;

  void finalize() {
    relation_mean.clear();
    real sum = 0;
    std::size_t used = 0;
    for (auto r : relations) {
      real s = 0;
      std::size_t n = 0;
      for (const auto& f : folds)
        if (auto it = f.rate.find(r); it != f.rate.end()) {
          s += it->second;
          ++n;
        }
      if (n == 0) continue;
      relation_mean[r] = s / real(n);
      sum += relation_mean[r];
      ++used;
    }
    mean = used ? sum / real(used) : real(0);
    if (!scores.empty()) roc = roc_auc(scores, labels);
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["model"] = model;
    for (auto r : relations) j["relations"].push_back(std::string(to_string(r)));
    for (const auto& f : folds) {
      nlohmann::json jf = {{"fold", f.fold}, {"mean", f.mean}};
      for (const auto& [r, v] : f.rate) jf["rate"][std::string(to_string(r))] = v;
      j["folds"].push_back(jf);
    }
    for (const auto& [r, v] : relation_mean) j["relation_mean"][std::string(to_string(r))] = v;
    j["mean"] = mean;
    j["auc"] = roc.auc;
    return j;
  }

  // Rows: folds then the mean; columns: relations then the mean.
  void write_csv(std::ostream& os) const {
    os << std::setprecision(17) << "fold";
    for (auto r : relations) os << ',' << to_string(r);
    os << ",mean\n";
    for (const auto& f : folds) {
      os << f.fold;
      for (auto r : relations) {
        os << ',';
        if (auto it = f.rate.find(r); it != f.rate.end()) os << it->second;
      }
      os << ',' << f.mean << '\n';
    }
    os << "mean";
    for (auto r : relations) {
      os << ',';
      if (auto it = relation_mean.find(r); it != relation_mean.end()) os << it->second;
    }
    os << ',' << mean << '\n';
  }

  void write_roc_csv(std::ostream& os) const {
    os << std::setprecision(17) << "fpr,tpr\n";
    for (const auto& [fpr, tpr] : roc.points) os << fpr << ',' << tpr << '\n';
  }

  // Human-readable table, percentages with one decimal.
  void print_table(std::ostream& os) const {
    auto pct = [](real v) {
      std::ostringstream s;
      s << std::fixed << std::setprecision(1) << 100 * v;
      return s.str();
    };
    os << "Mean verification rate (%) - " << model << '\n';
    os << std::left << std::setw(8) << "fold";
    for (auto r : relations) os << std::right << std::setw(8) << to_string(r);
    os << std::setw(8) << "Mean" << '\n';
    for (const auto& f : folds) {
      os << std::left << std::setw(8) << f.fold;
      for (auto r : relations) {
        auto it = f.rate.find(r);
        os << std::right << std::setw(8) << (it == f.rate.end() ? std::string("-") : pct(it->second));
      }
      os << std::setw(8) << pct(f.mean) << '\n';
    }
    os << std::left << std::setw(8) << "mean";
    for (auto r : relations) {
      auto it = relation_mean.find(r);
      os << std::right << std::setw(8) << (it == relation_mean.end() ? std::string("-") : pct(it->second));
    }
    os << std::setw(8) << pct(mean) << '\n';
    os << "AUC " << std::fixed << std::setprecision(4) << roc.auc << '\n';
  }
};

inline std::vector<Relation> relations_in(const SampleManifest& m) {
  std::set<Relation> present;
  for (const auto& r : m.records) present.insert(r.relation);
  return {present.begin(), present.end()};
}

// Per-relation decision accuracy of one fold's scores.
inline FoldResult score_fold(int fold, const std::vector<Pair>& pairs, std::span<const real> scores, real threshold,
                             const std::vector<Relation>& relations) {
  FoldResult res;
  res.fold = fold;
  real sum = 0;
  for (auto r : relations) {
    std::vector<real> s, y;
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (pairs[i].relation == r) {
        s.push_back(scores[i]);
        y.push_back(real(pairs[i].label));
      }
    if (s.empty()) continue;
    res.rate[r] = accuracy_at_threshold(s, y, threshold);
    sum += res.rate[r];
  }
  res.mean = res.rate.empty() ? real(0) : sum / real(res.rate.size());
  return res;
}

inline std::vector<real> cosine_scores(const std::vector<Pair>& pairs, const FeatureTable& features) {
  std::vector<real> s;
  s.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (p.parent2_ref) throw ConfigError("cos-baseline supports bi-subject pairs only");
    s.push_back(cos_baseline(features.row(p.parent_ref), features.row(p.child_ref)));
  }
  return s;
}

/// Five-fold protocol: for every held-out fold, a fresh model is trained on
/// the other four and scored on the held-out positives and their negatives.
inline EvalReport crossval(const SampleManifest& manifest, const FeatureTable& features, const CrossvalConfig& cfg,
                           std::ostream* log = nullptr) {
  manifest.validate();
  EvalReport report;
  report.model = std::string(to_string(cfg.model));
  report.relations = relations_in(manifest);
  for (int fold = 1; fold <= kFoldCount; ++fold) {
    const Split split = cv_split(manifest, fold, cfg.train.seed);
    std::vector<real> test_labels;
    for (const auto& p : split.test) test_labels.push_back(real(p.label));
    std::vector<real> scores;
    real threshold = real(0.5);
    if (cfg.model == ModelKind::cos_baseline) {
      const auto train_scores = cosine_scores(split.train, features);
      std::vector<real> train_labels;
      for (const auto& p : split.train) train_labels.push_back(real(p.label));
      threshold = tune_threshold(train_scores, train_labels);
      scores = cosine_scores(split.test, features);
    } else {
      const std::uint64_t seed = mix_seed(cfg.train.seed, std::uint64_t(100 + fold));
      auto model = make_model(cfg.model, cfg.spec, seed);
      auto extractor = make_extractor(cfg.train.extractor, features.width(), model->feature_dim(), seed);
      TrainConfig tc = cfg.train;
      tc.checkpoint_path.clear();
      const auto run = train(tc, Split{split.train, {}}, features, *model, *extractor);
      scores = model->probabilities(make_batch(split.test, features), extractor.get());
      if (log) {
        *log << "fold " << fold << ": train loss " << run.points.back().train_loss << ", train acc "
             << run.points.back().train_accuracy << '\n';
      }
    }
    report.folds.push_back(score_fold(fold, split.test, scores, threshold, report.relations));
    report.scores.insert(report.scores.end(), scores.begin(), scores.end());
    report.labels.insert(report.labels.end(), test_labels.begin(), test_labels.end());
    if (log) *log << "fold " << fold << ": held-out rate " << report.folds.back().mean << '\n';
  }
  report.finalize();
  return report;
}

}  // namespace rgn
