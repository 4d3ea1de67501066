#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rgn/eval/crossval.hpp"

namespace rgn {

/// Every knob of a run in one place; round-trips through a plain-text
/// "key = value" file. The shared keys d, subject_count, k and dims apply to
/// all models.
struct ExperimentConfig {
  ModelKind model = ModelKind::srgn;
  ModelSpec spec;
  TrainConfig train;

  CrossvalConfig crossval() const {
    CrossvalConfig c;
    c.model = model;
    c.spec = spec;
    c.train = train;
    c.train.model = model;
    return c;
  }

  void set_d(std::size_t d) { spec.srgn.d = spec.hrgn.d = spec.mlp.d = d; }
  void set_subject_count(std::size_t n) { spec.srgn.subject_count = spec.hrgn.subject_count = spec.mlp.subject_count = n; }
  void set_dims(const std::vector<std::size_t>& dims) {
    spec.srgn.dims = spec.hrgn.dims = dims;
    spec.srgn.k = spec.hrgn.k = dims.size();
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::size_t> parse_list(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::string t = v;
  for (auto& ch : t)
    if (ch == '(' || ch == ')' || ch == '[' || ch == ']') ch = ' ';
  std::stringstream ss(t);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (cell.empty()) continue;
    try {
      std::size_t used = 0;
      const long long n = std::stoll(cell, &used);
      if (used != cell.size() || n <= 0) throw std::invalid_argument(cell);
      out.push_back(std::size_t(n));
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': expected a list of positive integers, got '" + v + "'");
    }
  }
  return out;
}

inline std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  std::istringstream is(v);
  T out{};
  is >> out;
  if (is.fail() || !(is >> std::ws).eof()) throw ConfigError("key '" + key + "': bad number '" + v + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

}  // namespace detail

inline void apply_config_entry(ExperimentConfig& c, const std::string& key, const std::string& v) {
  using namespace detail;
  auto size = [&] {
    const auto n = parse_number<long long>(key, v);
    if (n < 0) throw ConfigError("key '" + key + "' must be non-negative");
    return std::size_t(n);
  };
  if (key == "model") c.model = parse_model_kind(v);
  else if (key == "seed") c.train.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "d") c.set_d(size());
  else if (key == "subject_count") c.set_subject_count(size());
  else if (key == "k") c.spec.srgn.k = c.spec.hrgn.k = size();
  else if (key == "dims") c.set_dims(parse_list(key, v));
  else if (key == "srgn.init_pool") c.spec.srgn.init_pool = parse_pool_kind(v);
  else if (key == "srgn.aggre_pool") c.spec.srgn.aggre_pool = parse_pool_kind(v);
  else if (key == "srgn.untie_central_message") c.spec.srgn.untie_central_message = parse_bool(key, v);
  else if (key == "srgn.head_hidden") c.spec.srgn.head_hidden = parse_list(key, v);
  else if (key == "hrgn.latent") c.spec.hrgn.latent = parse_list(key, v);
  else if (key == "hrgn.aggre_pool") c.spec.hrgn.aggre_pool = parse_pool_kind(v);
  else if (key == "hrgn.init_mode") c.spec.hrgn.init_mode = parse_hier_init_mode(v);
  else if (key == "hrgn.lower_input_mode") c.spec.hrgn.lower_input_mode = parse_lower_input_mode(v);
  else if (key == "hrgn.attention_hidden") c.spec.hrgn.attention_hidden = size();
  else if (key == "hrgn.head_hidden") c.spec.hrgn.head_hidden = parse_list(key, v);
  else if (key == "mlp.hidden") c.spec.mlp.hidden = parse_list(key, v);
  else if (key == "train.iterations") c.train.iterations = size();
  else if (key == "train.epochs") c.train.epochs = size();
  else if (key == "train.batch_size") c.train.batch_size = size();
  else if (key == "train.optimizer") c.train.optimizer.kind = parse_optimizer_kind(v);
  else if (key == "train.lr") c.train.optimizer.lr = parse_number<real>(key, v);
  else if (key == "train.beta1") c.train.optimizer.beta1 = parse_number<real>(key, v);
  else if (key == "train.beta2") c.train.optimizer.beta2 = parse_number<real>(key, v);
  else if (key == "train.eps") c.train.optimizer.eps = parse_number<real>(key, v);
  else if (key == "train.momentum") c.train.optimizer.momentum = parse_number<real>(key, v);
  else if (key == "train.resample_negatives") c.train.resample_negatives = parse_bool(key, v);
  else if (key == "train.eval_every") c.train.eval_every = size();
  else if (key == "train.extractor") c.train.extractor = parse_extractor_mode(v);
  else throw ConfigError("unknown configuration key '" + key + "'");
}

inline void parse_config(std::istream& is, ExperimentConfig& c) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    try {
      apply_config_entry(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream is(path);
  if (!is) throw Error("io", "cannot open config '" + path + "'");
  parse_config(is, base);
  return base;
}

// Writes every key with its current value, in the order parse_config accepts.
inline void dump_config(std::ostream& os, const ExperimentConfig& c) {
  using detail::join;
  const auto& s = c.spec.srgn;
  const auto& h = c.spec.hrgn;
  const auto& t = c.train;
  auto real_str = [](real v) {
    std::ostringstream o;
    o << std::setprecision(17) << v;
    return o.str();
  };
  os << "model = " << to_string(c.model) << '\n'
     << "seed = " << t.seed << '\n'
     << "d = " << s.d << '\n'
     << "subject_count = " << s.subject_count << '\n'
     << "k = " << s.k << '\n'
     << "dims = " << join(s.dims) << '\n'
     << "srgn.init_pool = " << to_string(s.init_pool) << '\n'
     << "srgn.aggre_pool = " << to_string(s.aggre_pool) << '\n'
     << "srgn.untie_central_message = " << (s.untie_central_message ? "true" : "false") << '\n'
     << "srgn.head_hidden = " << join(s.head_hidden) << '\n'
     << "hrgn.latent = " << join(h.latent) << '\n'
     << "hrgn.aggre_pool = " << to_string(h.aggre_pool) << '\n'
     << "hrgn.init_mode = " << to_string(h.init_mode) << '\n'
     << "hrgn.lower_input_mode = " << to_string(h.lower_input_mode) << '\n'
     << "hrgn.attention_hidden = " << h.attention_hidden << '\n'
     << "hrgn.head_hidden = " << join(h.head_hidden) << '\n'
     << "mlp.hidden = " << join(c.spec.mlp.hidden) << '\n'
     << "train.iterations = " << t.iterations << '\n'
     << "train.epochs = " << t.epochs << '\n'
     << "train.batch_size = " << t.batch_size << '\n'
     << "train.optimizer = " << to_string(t.optimizer.kind) << '\n'
     << "train.lr = " << real_str(t.optimizer.lr) << '\n'
     << "train.beta1 = " << real_str(t.optimizer.beta1) << '\n'
     << "train.beta2 = " << real_str(t.optimizer.beta2) << '\n'
     << "train.eps = " << real_str(t.optimizer.eps) << '\n'
     << "train.momentum = " << real_str(t.optimizer.momentum) << '\n'
     << "train.resample_negatives = " << (t.resample_negatives ? "true" : "false") << '\n'
     << "train.eval_every = " << t.eval_every << '\n'
     << "train.extractor = " << to_string(t.extractor) << '\n';
}

}  // namespace rgn
