#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "rgn/numerics/ops.hpp"

namespace rgn {

/// Widths of the hierarchical graph: node_counts[0] is the number of visual
/// comparison nodes D, node_counts[1..L] the latent layers.
struct LayerConfig {
  std::vector<std::size_t> node_counts;

  std::size_t latent_layers() const noexcept { return node_counts.empty() ? 0 : node_counts.size() - 1; }

  // Throws ConfigError on a hard violation; returns warnings for equal
  // consecutive widths.
  std::vector<std::string> validate() const {
    if (node_counts.size() < 2) throw ConfigError("hierarchy needs at least one latent layer");
    std::vector<std::string> warnings;
    for (std::size_t l = 0; l < node_counts.size(); ++l) {
      if (node_counts[l] == 0) throw ConfigError("layer " + std::to_string(l) + " has zero nodes");
      if (l == 0) continue;
      if (node_counts[l] > node_counts[l - 1]) {
        throw ConfigError("layer " + std::to_string(l) + " has " + std::to_string(node_counts[l]) +
                          " nodes, more than the " + std::to_string(node_counts[l - 1]) + " below it");
      }
      if (node_counts[l] == node_counts[l - 1]) {
        warnings.push_back("layer " + std::to_string(l) + " keeps the width of layer " + std::to_string(l - 1) +
                           " (" + std::to_string(node_counts[l]) + ")");
      }
    }
    return warnings;
  }
};

/// Tree-shaped connection between two adjacent layers. Every lower node has
/// exactly one parent; the children of a parent are a contiguous run. With
/// C = n_prev mod n_cur, the first C parents receive ceil(n_prev / n_cur)
/// children and the rest floor(n_prev / n_cur). Indices are zero-based.
class Boundary {
 public:
  Boundary() = default;

  Boundary(std::size_t n_prev, std::size_t n_cur) : n_prev_(n_prev), n_cur_(n_cur) {
    if (n_cur == 0 || n_prev == 0) throw ConfigError("layer widths must be positive");
    if (n_cur > n_prev) {
      throw ConfigError("upper layer (" + std::to_string(n_cur) + ") wider than lower layer (" +
                        std::to_string(n_prev) + ")");
    }
    const std::size_t remainder = n_prev % n_cur;
    const std::size_t small = n_prev / n_cur;
    const std::size_t large = small + (remainder ? 1 : 0);
    parent_.resize(n_prev);
    children_.reserve(n_cur);
    std::size_t begin = 0;
    for (std::size_t p = 0; p < n_cur; ++p) {
      const std::size_t count = p < remainder ? large : small;
      children_.push_back({begin, begin + count});
      for (std::size_t i = begin; i < begin + count; ++i) parent_[i] = p;
      begin += count;
    }
  }

  std::size_t lower_width() const noexcept { return n_prev_; }
  std::size_t upper_width() const noexcept { return n_cur_; }
  std::size_t remainder() const noexcept { return n_prev_ % n_cur_; }

  const std::vector<std::size_t>& parent() const noexcept { return parent_; }
  const std::vector<IndexRange>& children() const noexcept { return children_; }

  std::vector<std::size_t> parent_one_based() const {
    std::vector<std::size_t> p(parent_);
    for (auto& v : p) ++v;
    return p;
  }

 private:
  std::size_t n_prev_ = 0, n_cur_ = 0;
  std::vector<std::size_t> parent_;
  std::vector<IndexRange> children_;
};

inline Boundary build_boundary(std::size_t n_prev, std::size_t n_cur) { return Boundary(n_prev, n_cur); }

class HierTopology {
 public:
  HierTopology() = default;

  explicit HierTopology(const LayerConfig& cfg) : cfg_(cfg) {
    warnings_ = cfg.validate();
    for (std::size_t l = 1; l < cfg.node_counts.size(); ++l)
      boundaries_.emplace_back(cfg.node_counts[l - 1], cfg.node_counts[l]);
  }

  const LayerConfig& config() const noexcept { return cfg_; }
  std::size_t latent_layers() const noexcept { return boundaries_.size(); }
  std::size_t width(std::size_t layer) const { return cfg_.node_counts.at(layer); }
  std::size_t total_nodes() const {
    std::size_t n = 0;
    for (auto w : cfg_.node_counts) n += w;
    return n;
  }

  // Boundary between layer l-1 and layer l, for l in 1..L.
  const Boundary& boundary(std::size_t l) const {
    if (l == 0 || l > boundaries_.size()) {
      throw ConfigError("no boundary below layer " + std::to_string(l) + " (L = " +
                        std::to_string(boundaries_.size()) + ")");
    }
    return boundaries_[l - 1];
  }

  // Lower-layer indices whose parent is node n of layer l (l in 1..L).
  IndexRange children_of(std::size_t l, std::size_t n) const {
    const auto& b = boundary(l);
    if (n >= b.upper_width()) {
      throw ConfigError("node " + std::to_string(n) + " out of range for layer " + std::to_string(l) + " of width " +
                        std::to_string(b.upper_width()));
    }
    return b.children()[n];
  }

  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  // "layer l: parent[1..N] = ..." per boundary, one-based as in the docs.
  void dump(std::ostream& os) const {
    for (std::size_t l = 1; l <= boundaries_.size(); ++l) {
      const auto& b = boundaries_[l - 1];
      os << "layer " << l << ": parent[1.." << b.lower_width() << "] =";
      for (auto p : b.parent_one_based()) os << ' ' << p;
      os << '\n';
    }
    os << "boundary  lower  upper  C  children(large/small)\n";
    for (std::size_t l = 1; l <= boundaries_.size(); ++l) {
      const auto& b = boundaries_[l - 1];
      const std::size_t small = b.lower_width() / b.upper_width();
      os << l - 1 << "->" << l << "      " << b.lower_width() << "  " << b.upper_width() << "  " << b.remainder()
         << "  " << (b.remainder() ? small + 1 : small) << "/" << small << '\n';
    }
  }

 private:
  LayerConfig cfg_;
  std::vector<Boundary> boundaries_;
  std::vector<std::string> warnings_;
};

inline HierTopology build_hierarchy(const LayerConfig& cfg) { return HierTopology(cfg); }

/// The star graph: D surrounding nodes each joined to one central node.
struct StarTopology {
  std::size_t d = 1;

  explicit StarTopology(std::size_t surrounding) : d(surrounding) {
    if (d == 0) throw ConfigError("star graph needs at least one surrounding node");
  }
  std::size_t node_count() const noexcept { return d + 1; }
  std::size_t edge_count() const noexcept { return d; }
};

}  // namespace rgn
