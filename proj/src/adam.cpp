#include "ordgen/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace ordgen {

void adam_step(Tensor& param, const std::vector<double>& grad, AdamState& s) {
  if (grad.size() != param.size() || s.m.size() != param.size()) {
    throw std::invalid_argument("adam_step: size mismatch, param " + param.shape_str() +
                                " vs grad length " + std::to_string(grad.size()));
  }
  s.t += 1;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  for (size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * g;
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * g * g;
    const double mhat = s.m[i] / bc1;
    const double vhat = s.v[i] / bc2;
    param.values[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
  }
}

AdamOptimizer::AdamOptimizer(std::vector<Tensor*> params, double lr)
    : params_(std::move(params)), lr_(lr) {
  states_.reserve(params_.size());
  for (Tensor* p : params_) {
    states_.emplace_back(p->size(), lr);
  }
}

void AdamOptimizer::zero_grad() {
  for (Tensor* p : params_) {
    p->ensure_grad();
    p->zero_grad();
  }
}

void AdamOptimizer::scale_grads(double factor) {
  for (Tensor* p : params_) {
    if (!p->grad) continue;
    for (double& g : *p->grad) g *= factor;
  }
}

void AdamOptimizer::step() {
  for (size_t i = 0; i < params_.size(); ++i) {
    Tensor* p = params_[i];
    p->ensure_grad();
    adam_step(*p, *p->grad, states_[i]);
  }
}

}  // namespace ordgen
