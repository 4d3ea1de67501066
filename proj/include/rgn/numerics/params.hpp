#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rgn/numerics/random.hpp"
#include "rgn/numerics/tape.hpp"

namespace rgn {

/// Named trainable tensors in insertion order. References returned by add()
/// and get() stay valid while the store is alive.
class ParameterStore {
 public:
  struct Entry {
    std::string name;
    Tensor tensor;
  };

  ParameterStore() = default;
  ParameterStore(const ParameterStore& other) { *this = other; }
  ParameterStore& operator=(const ParameterStore& other) {
    if (this == &other) return *this;
    entries_ = other.entries_;
    rebuild_index();
    return *this;
  }
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  Tensor& add(std::string name, Tensor t) {
    if (index_.count(name)) throw ConfigError("duplicate parameter name '" + name + "'");
    t.set_requires_grad(true);
    entries_.push_back(Entry{name, std::move(t)});
    index_.emplace(std::move(name), entries_.size() - 1);
    return entries_.back().tensor;
  }

  bool contains(std::string_view name) const { return index_.count(std::string(name)) != 0; }

  Tensor& get(std::string_view name) { return entries_[lookup(name)].tensor; }
  const Tensor& get(std::string_view name) const { return entries_[lookup(name)].tensor; }

  std::size_t size() const noexcept { return entries_.size(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.tensor.size();
    return n;
  }

  void zero_grad() {
    for (auto& e : entries_) e.tensor.zero_grad();
  }

  void fill(real v) {
    for (auto& e : entries_) std::fill(e.tensor.values().begin(), e.tensor.values().end(), v);
  }

  // Appends every entry of `other` (names must not collide).
  void merge(const ParameterStore& other) {
    for (const auto& e : other) add(e.name, e.tensor);
  }

 private:
  std::size_t lookup(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw ConfigError("unknown parameter '" + std::string(name) + "'");
    return it->second;
  }

  void rebuild_index() {
    index_.clear();
    for (std::size_t i = 0; i < entries_.size(); ++i) index_.emplace(entries_[i].name, i);
  }

  std::deque<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Reverse sweep from a scalar loss, then accumulation into every parameter of
/// the store. Parameters the loss never touched end up with a zero gradient.
inline void accumulate_grads(const Tape& tape, ParameterStore& store) {
  for (auto& e : store) {
    auto& g = e.tensor.grad();
    if (const auto* tg = tape.param_grad(e.tensor)) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += (*tg)[i];
    }
  }
}

inline void backward(Var loss, ParameterStore& store) {
  loss.tape->backward(loss);
  accumulate_grads(*loss.tape, store);
}

// ---------------------------------------------------------------------------
// Initialisation

enum class InitScheme { xavier_uniform, zeros };

inline Tensor init_params(const Shape& shape, InitScheme scheme, std::uint64_t seed) {
  Tensor t(shape);
  if (scheme == InitScheme::zeros) return t;
  const std::size_t fan_out = shape.size() >= 2 ? shape.back() : shape.front();
  const std::size_t fan_in = shape.size() >= 2 ? t.size() / fan_out : shape.front();
  const double bound = std::sqrt(6.0 / double(fan_in + fan_out));
  std::mt19937_64 rng(seed);
  for (auto& v : t.values()) v = real((2 * uniform01(rng) - 1) * bound);
  return t;
}

}  // namespace rgn
