#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ordgen/rng.hpp"

namespace ordgen {

// Dense 64-bit float tensor. Rank 1 (vectors) and rank 2 (matrices) cover
// everything the models need; scalars are shape {1}.
struct Tensor {
  std::vector<size_t> shape;
  std::vector<double> values;
  bool requires_grad = false;
  std::optional<std::vector<double>> grad;

  Tensor() = default;

  static Tensor zeros(std::vector<size_t> shape);
  static Tensor full(std::vector<size_t> shape, double v);
  static Tensor scalar(double v);
  static Tensor from(std::vector<double> v);  // rank-1
  static Tensor matrix(size_t rows, size_t cols, std::vector<double> v);

  // uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out))
  static Tensor glorot(size_t rows, size_t cols, Rng& rng);
  // uniform(-0.1, 0.1), the embedding-table initialization
  static Tensor embedding(size_t rows, size_t cols, Rng& rng);

  size_t size() const { return values.size(); }
  size_t rank() const { return shape.size(); }
  bool is_scalar() const { return size() == 1 && rank() <= 1; }
  bool is_vector() const { return rank() == 1; }
  bool is_matrix() const { return rank() == 2; }
  size_t rows() const { return shape.at(0); }
  size_t cols() const { return shape.at(1); }

  double& operator[](size_t i) { return values[i]; }
  double operator[](size_t i) const { return values[i]; }
  double& at(size_t r, size_t c) { return values[r * cols() + c]; }
  double at(size_t r, size_t c) const { return values[r * cols() + c]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  std::string shape_str() const;

  // Allocates a zero gradient buffer if absent.
  void ensure_grad();
  void zero_grad();
};

size_t shape_product(const std::vector<size_t>& shape);

}  // namespace ordgen
