#pragma once

#include <cstdint>
#include <vector>

#include "ordgen/tensor.hpp"

namespace ordgen {

// Per-parameter Adam state with bias correction.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  int64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr = 1e-3;

  AdamState() = default;
  AdamState(size_t n, double lr_) : m(n, 0.0), v(n, 0.0), lr(lr_) {}
};

// One Adam update of param from grad; increments s.t.
void adam_step(Tensor& param, const std::vector<double>& grad, AdamState& s);

// Drives a fixed-order parameter list through Adam using each tensor's own
// grad buffer.
class AdamOptimizer {
 public:
  AdamOptimizer(std::vector<Tensor*> params, double lr);

  void zero_grad();
  void scale_grads(double factor);
  void step();

  double lr() const { return lr_; }

 private:
  std::vector<Tensor*> params_;
  std::vector<AdamState> states_;
  double lr_;
};

}  // namespace ordgen
