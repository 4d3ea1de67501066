#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "rgn/numerics/tensor.hpp"

namespace rgn {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
/// tape that produced it is alive and has not been cleared.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  std::size_t size() const { return value().size(); }
};

/// Records operations in execution order so the reverse sweep can replay them.
/// Every node's inputs have smaller ids than the node itself, so reverse id
/// order is a valid reverse topological order.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, {}, {}, false});
    return Var{this, nodes_.size() - 1};
  }

  // Leaf bound to a parameter. Repeated calls with the same tensor return the
  // same node, so gradients from every use accumulate in one place.
  Var param(const Tensor& p) {
    if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var{this, it->second};
    nodes_.push_back(Node{p, {}, {}, {}, true});
    param_nodes_.emplace(&p, nodes_.size() - 1);
    return Var{this, nodes_.size() - 1};
  }

  Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn) {
    bool needs = false;
    for (auto in : inputs) needs = needs || nodes_[in].needs_grad;
    Node node{std::move(value), {}, std::move(inputs), needs ? std::move(fn) : BackwardFn{}, needs};
    nodes_.push_back(std::move(node));
    return Var{this, nodes_.size() - 1};
  }

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  const std::vector<std::size_t>& inputs(std::size_t id) const { return nodes_[id].inputs; }

  // Gradient buffer of a node; valid during and after backward().
  std::span<real> grad(std::size_t id) { return nodes_[id].grad; }
  std::span<const real> grad(std::size_t id) const { return nodes_[id].grad; }

  void backward(Var loss) {
    if (loss.tape != this) throw Error("tape", "backward called with a value from another tape");
    if (value(loss.id).size() != 1) {
      throw DimensionError("backward requires a scalar loss, got shape " +
                           shape_string(value(loss.id).shape()));
    }
    for (auto& n : nodes_) {
      if (n.needs_grad) n.grad.assign(n.value.size(), real{0});
      else n.grad.clear();
    }
    if (!nodes_[loss.id].needs_grad) return;
    nodes_[loss.id].grad[0] = 1;
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      if (nodes_[i].backward) nodes_[i].backward(*this, i);
    }
  }

  // Gradient accumulated for a parameter leaf, or nullptr when the parameter
  // never entered this tape.
  const std::vector<real>* param_grad(const Tensor& p) const {
    auto it = param_nodes_.find(&p);
    if (it == param_nodes_.end()) return nullptr;
    const auto& g = nodes_[it->second].grad;
    return g.empty() ? nullptr : &g;
  }

  std::size_t size() const noexcept { return nodes_.size(); }

  void clear() {
    nodes_.clear();
    param_nodes_.clear();
  }

 private:
  struct Node {
    Tensor value;
    std::vector<real> grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool needs_grad = false;
  };

  std::deque<Node> nodes_;  // stable references while the tape grows
  std::unordered_map<const Tensor*, std::size_t> param_nodes_;
};

inline const Tensor& Var::value() const { return tape->value(id); }

}  // namespace rgn
