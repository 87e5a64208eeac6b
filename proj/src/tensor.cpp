#include "ordgen/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ordgen {

size_t shape_product(const std::vector<size_t>& shape) {
  size_t n = 1;
  for (size_t d : shape) n *= d;
  return n;
}

Tensor Tensor::zeros(std::vector<size_t> shape) {
  Tensor t;
  t.values.assign(shape_product(shape), 0.0);
  t.shape = std::move(shape);
  return t;
}

Tensor Tensor::full(std::vector<size_t> shape, double v) {
  Tensor t = zeros(std::move(shape));
  for (double& x : t.values) x = v;
  return t;
}

Tensor Tensor::scalar(double v) {
  Tensor t;
  t.shape = {1};
  t.values = {v};
  return t;
}

Tensor Tensor::from(std::vector<double> v) {
  Tensor t;
  t.shape = {v.size()};
  t.values = std::move(v);
  return t;
}

Tensor Tensor::matrix(size_t rows, size_t cols, std::vector<double> v) {
  if (v.size() != rows * cols) {
    throw std::invalid_argument("matrix data length " + std::to_string(v.size()) +
                                " does not match " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
  Tensor t;
  t.shape = {rows, cols};
  t.values = std::move(v);
  return t;
}

Tensor Tensor::glorot(size_t rows, size_t cols, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor t = zeros({rows, cols});
  for (double& x : t.values) x = rng.uniform(-a, a);
  return t;
}

Tensor Tensor::embedding(size_t rows, size_t cols, Rng& rng) {
  Tensor t = zeros({rows, cols});
  for (double& x : t.values) x = rng.uniform(-0.1, 0.1);
  return t;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

void Tensor::ensure_grad() {
  if (!grad) grad.emplace(values.size(), 0.0);
}

void Tensor::zero_grad() {
  if (grad) {
    grad->assign(values.size(), 0.0);
  }
}

}  // namespace ordgen
