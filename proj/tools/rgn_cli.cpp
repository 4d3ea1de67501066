// Command-line front end: training, evaluation, cross-validation, gradient
// checks, the synthetic benchmark and MAC counting.
//
// Every command prints JSON (full precision) on stdout; commands producing
// verification rates also print a percent table. Failures print one JSON
// error line on stderr and exit nonzero.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "rgn/rgn.hpp"

using namespace rgn;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string manifest;
  std::string features;
  std::string model;
  int fold = 1;
  std::string checkpoint;
  std::size_t pairs = 4;
  bool table = true;
  bool presets = false;
  std::size_t families = 400;
  double shared = 0.5;
  double sigma = 0.1;
  std::size_t d_raw = 32;
  bool tri = false;
};

// Desk-scale settings for the synthetic benchmark, overridden by --config.
ExperimentConfig bench_defaults(std::size_t d_raw, bool tri) {
  ExperimentConfig c;
  c.set_d(d_raw);
  c.set_subject_count(tri ? 3 : 2);
  c.set_dims({16, 4});
  c.spec.hrgn.latent = {8, 4};
  c.spec.mlp.hidden = {64};
  c.train.epochs = 100;
  return c;
}

ExperimentConfig resolve(const Options& o, ExperimentConfig base = {}) {
  ExperimentConfig c = o.config.empty() ? base : load_config(o.config, base);
  if (o.seed) c.train.seed = *o.seed;
  if (!o.model.empty()) c.model = parse_model_kind(o.model);
  c.train.model = c.model;
  return c;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ConfigError(std::string("missing required flag ") + flag);
}

void prepare_out(const Options& o) {
  if (!o.out.empty()) fs::create_directories(o.out);
}

std::string out_path(const Options& o, const std::string& name) { return (fs::path(o.out) / name).string(); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw Error("io", "cannot open '" + path + "' for writing");
  os << text;
}

void print_json(const json& j) { std::cout << j.dump(-1) << '\n'; }

std::string config_text(const ExperimentConfig& c) {
  std::ostringstream os;
  dump_config(os, c);
  return os.str();
}

void emit_report(const Options& o, const EvalReport& r, const std::string& stem) {
  if (o.table) r.print_table(std::cout);
  if (o.out.empty()) return;
  std::ostringstream csv, roc;
  r.write_csv(csv);
  r.write_roc_csv(roc);
  write_text(out_path(o, stem + ".json"), r.to_json().dump(2) + "\n");
  write_text(out_path(o, stem + ".csv"), csv.str());
  write_text(out_path(o, stem + "_roc.csv"), roc.str());
}

int cmd_train(const Options& o) {
  require(o.manifest, "--manifest");
  require(o.features, "--features");
  ExperimentConfig c = resolve(o);
  if (c.model == ModelKind::cos_baseline) throw ConfigError("cos-baseline has nothing to train");
  const SampleManifest m = load_manifest(o.manifest);
  const FeatureTable f = load_features(o.features);
  const Split split = cv_split(m, o.fold, c.train.seed);
  auto model = make_model(c.model, c.spec, c.train.seed);
  auto ex = make_extractor(c.train.extractor, f.width(), model->feature_dim(), c.train.seed);
  prepare_out(o);
  TrainConfig tc = c.train;
  if (!o.out.empty()) tc.checkpoint_path = out_path(o, "model.ckpt");
  std::ofstream log;
  if (!o.out.empty()) {
    log.open(out_path(o, "train_log.jsonl"));
    write_text(out_path(o, "config.txt"), config_text(c));
  }
  const RunRecord run = train(tc, split, f, *model, *ex, o.out.empty() ? nullptr : &log);
  json j = {{"command", "train"}, {"model", to_string(c.model)}, {"held_out_fold", o.fold}};
  j["final"] = RunRecord::to_json(run.points.back());
  j["checkpoint"] = run.checkpoint.empty() ? json(nullptr) : json(run.checkpoint);
  print_json(j);
  return 0;
}

int cmd_eval(const Options& o) {
  require(o.manifest, "--manifest");
  require(o.features, "--features");
  require(o.checkpoint, "--checkpoint");
  ExperimentConfig c = resolve(o);
  const SampleManifest m = load_manifest(o.manifest);
  const FeatureTable f = load_features(o.features);
  const Split split = cv_split(m, o.fold, c.train.seed);
  auto model = make_model(c.model, c.spec, c.train.seed);
  auto ex = make_extractor(c.train.extractor, f.width(), model->feature_dim(), c.train.seed);
  restore_checkpoint(load_checkpoint(o.checkpoint), *model, *ex);
  const auto scores = model->probabilities(make_batch(split.test, f), ex.get());
  std::vector<real> labels;
  for (const auto& p : split.test) labels.push_back(real(p.label));

  EvalReport r;
  r.model = std::string(to_string(c.model));
  r.relations = relations_in(m);
  r.folds.push_back(score_fold(o.fold, split.test, scores, real(0.5), r.relations));
  r.scores = scores;
  r.labels = labels;
  r.finalize();
  prepare_out(o);
  emit_report(o, r, "eval");
  json j = r.to_json();
  j["command"] = "eval";
  print_json(j);
  return 0;
}

int cmd_crossval(const Options& o) {
  require(o.manifest, "--manifest");
  require(o.features, "--features");
  const ExperimentConfig c = resolve(o);
  const SampleManifest m = load_manifest(o.manifest);
  const FeatureTable f = load_features(o.features);
  const EvalReport r = crossval(m, f, c.crossval(), &std::cerr);
  prepare_out(o);
  emit_report(o, r, "crossval_" + r.model);
  json j = r.to_json();
  j["command"] = "crossval";
  print_json(j);
  return 0;
}

int cmd_gradcheck(const Options& o) {
  ExperimentConfig base;
  base.set_d(8);
  base.set_dims({6, 3});
  base.spec.hrgn.latent = {4, 2};
  base.spec.mlp.hidden = {8};
  const ExperimentConfig c = resolve(o, base);
  if (c.model == ModelKind::cos_baseline) throw ConfigError("cos-baseline has no parameters to check");
  auto model = make_model(c.model, c.spec, c.train.seed);
  if (std::numeric_limits<real>::digits < 53) throw ConfigError("gradient checks need a 64-bit build");

  std::mt19937_64 rng(c.train.seed);
  std::uniform_real_distribution<double> u(-1, 1);
  const std::size_t d = model->feature_dim(), n = std::max<std::size_t>(o.pairs, 1);
  auto fill = [&] {
    Tensor t({n, d});
    for (auto& v : t.values()) v = real(u(rng));
    return t;
  };
  PairBatch b;
  b.parent = fill();
  b.child = fill();
  if (model->subject_count() == 3) b.parent2 = fill();
  for (std::size_t i = 0; i < n; ++i) b.labels.push_back(real(i % 2));
  for (auto& e : model->params())
    for (auto& v : e.tensor.values()) v = real(u(rng));

  const GradCheckReport r = gradient_check(*model, b);
  print_json({{"command", "gradcheck"},
              {"model", to_string(c.model)},
              {"checked", r.checked},
              {"max_rel_error", r.max_rel_error},
              {"worst", r.worst},
              {"analytic", r.worst_analytic},
              {"numeric", r.worst_numeric},
              {"passed", r.passed(1e-5)}});
  return r.passed(1e-5) ? 0 : 3;
}

int cmd_synth_bench(const Options& o) {
  SynthConfig sc;
  sc.seed = o.seed.value_or(1);
  sc.n_families = o.families;
  sc.shared_fraction = o.shared;
  sc.noise_sigma = o.sigma;
  sc.d_raw = o.d_raw;
  sc.tri_subject = o.tri;
  const SynthData data = synth_generate(sc);
  prepare_out(o);
  if (!o.out.empty()) {
    save_manifest(out_path(o, "manifest.jsonl"), data.manifest);
    save_features(out_path(o, "features.csv"), data.features, false);
  }

  const ExperimentConfig base = resolve(o, bench_defaults(o.d_raw, o.tri));
  std::vector<ModelKind> models = {ModelKind::srgn, ModelKind::hrgn, ModelKind::cos_baseline};
  if (!o.model.empty()) models = {base.model};
  json j = {{"command", "synth-bench"},
            {"synth", {{"seed", sc.seed}, {"families", sc.n_families}, {"d_raw", sc.d_raw},
                       {"shared_fraction", sc.shared_fraction}, {"noise_sigma", sc.noise_sigma},
                       {"tri_subject", sc.tri_subject}}}};
  for (ModelKind k : models) {
    ExperimentConfig c = base;
    c.model = k;
    const EvalReport r = crossval(data.manifest, data.features, c.crossval());
    emit_report(o, r, "synth_" + r.model);
    j["results"][r.model] = {{"mean", r.mean}, {"auc", r.roc.auc}};
  }
  print_json(j);
  return 0;
}

int cmd_count_macs(const Options& o) {
  const ExperimentConfig c = resolve(o);
  auto report = [&](const ExperimentConfig& e) {
    switch (e.model) {
      case ModelKind::srgn: return count_macs(e.spec.srgn);
      case ModelKind::hrgn: return count_macs(e.spec.hrgn);
      case ModelKind::mlp_baseline: return count_macs(e.spec.mlp);
      case ModelKind::cos_baseline: break;
    }
    throw ConfigError("cos-baseline performs no affine maps");
  };
  std::vector<ExperimentConfig> configs = {c};
  if (o.presets) {
    if (c.model != ModelKind::hrgn) throw ConfigError("--presets applies to hrgn only");
    configs.clear();
    for (const auto& latent : latent_presets()) {
      ExperimentConfig e = c;
      e.spec.hrgn.latent = latent;
      configs.push_back(e);
    }
  }
  json j = {{"command", "count-macs"}};
  for (const auto& e : configs) {
    const MacReport r = report(e);
    if (o.table) r.print(std::cout);
    json entry = {{"model", r.model}, {"total", r.total()}};
    if (e.model == ModelKind::hrgn) entry["latent"] = e.spec.hrgn.latent;
    for (const auto& [name, n] : r.stages) entry["stages"][name] = n;
    j["reports"].push_back(entry);
  }
  print_json(j);
  return 0;
}

void error_line(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reasoning graph networks for kinship verification"};
  app.require_subcommand(1);
  Options o;

  auto shared = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "random seed (overrides the config)");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--manifest", o.manifest, "JSON-lines sample manifest");
    sub->add_option("--features", o.features, "feature table (CSV or binary)");
    sub->add_option("--model", o.model, "srgn, hrgn, mlp-baseline or cos-baseline")
        ->check(CLI::IsMember({"srgn", "hrgn", "mlp-baseline", "cos-baseline"}));
    sub->add_flag("!--no-table", o.table, "suppress the human-readable table");
    return sub;
  };
  auto* train_cmd = shared(app.add_subcommand("train", "train one model with one fold held out"));
  train_cmd->add_option("--fold", o.fold, "held-out fold")->check(CLI::Range(1, kFoldCount));
  auto* eval_cmd = shared(app.add_subcommand("eval", "score a held-out fold with a checkpoint"));
  eval_cmd->add_option("--fold", o.fold, "held-out fold")->check(CLI::Range(1, kFoldCount));
  eval_cmd->add_option("--checkpoint", o.checkpoint, "checkpoint written by train")->check(CLI::ExistingFile);
  auto* cv_cmd = shared(app.add_subcommand("crossval", "five-fold cross-validation"));
  auto* gc_cmd = shared(app.add_subcommand("gradcheck", "compare backward gradients with finite differences"));
  gc_cmd->add_option("--pairs", o.pairs, "pairs in the random batch");
  auto* sb_cmd = shared(app.add_subcommand("synth-bench", "cross-validate on generated kinship data"));
  sb_cmd->add_option("--families", o.families, "number of families");
  sb_cmd->add_option("--shared", o.shared, "fraction of inherited coordinates");
  sb_cmd->add_option("--sigma", o.sigma, "inheritance noise");
  sb_cmd->add_option("--d-raw", o.d_raw, "feature width");
  sb_cmd->add_flag("--tri", o.tri, "tri-subject families");
  auto* mac_cmd = shared(app.add_subcommand("count-macs", "multiply-accumulates per sample"));
  mac_cmd->add_flag("--presets", o.presets, "evaluate every latent preset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    error_line("usage", e.what());
    return 2;
  }

  try {
    if (*train_cmd) return cmd_train(o);
    if (*eval_cmd) return cmd_eval(o);
    if (*cv_cmd) return cmd_crossval(o);
    if (*gc_cmd) return cmd_gradcheck(o);
    if (*sb_cmd) return cmd_synth_bench(o);
    if (*mac_cmd) return cmd_count_macs(o);
  } catch (const Error& e) {
    error_line(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    error_line("internal", e.what());
    return 1;
  }
  return 1;
}
