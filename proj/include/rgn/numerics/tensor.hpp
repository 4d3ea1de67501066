#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "rgn/numerics/error.hpp"

namespace rgn {

#ifdef RGN_SINGLE_PRECISION
using real = float;
#else
using real = double;
#endif

using Shape = std::vector<std::size_t>;

inline std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

inline std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

/// Dense row-major array of reals. Rank 1 and rank 2 tensors are what the
/// models use; a rank-1 tensor of length n behaves as a 1 x n row when viewed
/// as a matrix.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape, real fill = 0) : shape_(std::move(shape)) {
    check_extents();
    data_.assign(shape_size(shape_), fill);
  }

  Tensor(Shape shape, std::vector<real> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    check_extents();
    if (data_.size() != shape_size(shape_)) {
      throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                           " does not match shape " + shape_string(shape_));
    }
  }

  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<real> data) {
    return Tensor({rows, cols}, std::move(data));
  }

  static Tensor row(std::vector<real> data) {
    const std::size_t n = data.size();
    return Tensor({1, n}, std::move(data));
  }

  static Tensor scalar(real v) { return Tensor({1, 1}, std::vector<real>{v}); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  // Matrix view: rank 1 is a single row.
  std::size_t rows() const noexcept {
    if (shape_.empty()) return 0;
    return shape_.size() == 1 ? 1 : shape_[0];
  }
  std::size_t cols() const noexcept {
    if (shape_.empty()) return 0;
    return shape_.size() == 1 ? shape_[0] : size() / shape_[0];
  }

  std::span<real> data() noexcept { return data_; }
  std::span<const real> data() const noexcept { return data_; }
  std::vector<real>& values() noexcept { return data_; }
  const std::vector<real>& values() const noexcept { return data_; }

  real& operator[](std::size_t i) { return data_[i]; }
  real operator[](std::size_t i) const { return data_[i]; }

  real& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  real at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  std::span<const real> row_span(std::size_t r) const {
    return std::span<const real>(data_).subspan(r * cols(), cols());
  }

  bool requires_grad() const noexcept { return requires_grad_; }
  void set_requires_grad(bool on) noexcept { requires_grad_ = on; }

  bool has_grad() const noexcept { return grad_.has_value(); }
  std::vector<real>& grad() {
    if (!grad_) grad_.emplace(data_.size(), real{0});
    return *grad_;
  }
  const std::optional<std::vector<real>>& grad_opt() const noexcept { return grad_; }
  void zero_grad() {
    if (grad_) std::fill(grad_->begin(), grad_->end(), real{0});
  }
  void clear_grad() noexcept { grad_.reset(); }

  bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }

 private:
  void check_extents() const {
    for (auto e : shape_) {
      if (e == 0) throw DimensionError("tensor extents must be positive, got " + shape_string(shape_));
    }
  }

  Shape shape_;
  std::vector<real> data_;
  bool requires_grad_ = false;
  std::optional<std::vector<real>> grad_;
};

}  // namespace rgn
