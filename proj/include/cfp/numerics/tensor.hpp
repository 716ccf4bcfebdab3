#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace cfp::numerics {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

// Dense row-major array of doubles. Value type; gradient bookkeeping lives on
// the Tape, which pairs each recorded Tensor with its gradient buffer.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  // Rank-2 literal, e.g. Tensor::matrix({{1, 2}, {3, 4}}).
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  // 1 x n row vector.
  static Tensor row(std::initializer_list<double> values);
  static Tensor row(std::span<const double> values);
  static Tensor scalar(double value);
  static Tensor identity(std::size_t n);

  [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
  [[nodiscard]] std::size_t rank() const noexcept { return shape_.size(); }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  // Rank-2 accessors. rows()/cols() throw ShapeError on other ranks.
  [[nodiscard]] std::size_t rows() const;
  [[nodiscard]] std::size_t cols() const;

  [[nodiscard]] std::span<double> data() noexcept { return data_; }
  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
  [[nodiscard]] std::span<double> row_span(std::size_t r);
  [[nodiscard]] std::span<const double> row_span(std::size_t r) const;

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  // Scalar value of a one-element tensor.
  [[nodiscard]] double item() const;

  void fill(double value);
  [[nodiscard]] Tensor reshaped(Shape shape) const;

  // Bitwise equality of shape and payload (distinguishes -0.0 from 0.0 only
  // through ==, which treats them equal; NaN never compares equal).
  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

[[nodiscard]] bool all_finite(std::span<const double> values) noexcept;
[[nodiscard]] double max_abs_diff(const Tensor& a, const Tensor& b);
[[nodiscard]] double frobenius_norm(const Tensor& a);

// Same shape and every double has an identical bit pattern.
[[nodiscard]] bool bitwise_equal(const Tensor& a, const Tensor& b);

}  // namespace cfp::numerics
