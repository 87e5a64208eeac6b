#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ordgen/rng.hpp"
#include "ordgen/tensor.hpp"

namespace ordgen {

using VarId = int32_t;

// Reverse-mode differentiation over a linear tape of primitive applications.
// Nodes are appended in execution order, so the tape is topological by
// construction and one reverse sweep visits each record exactly once.
//
// Parameters enter through param(), which binds an external Tensor; after
// backward() their gradients are *accumulated* into Tensor::grad, so callers
// zero the grads once per batch and run backward per example.
class Tape {
 public:
  Tape() = default;
  explicit Tape(bool grad_enabled) : grad_enabled_(grad_enabled) {}

  bool grad_enabled() const { return grad_enabled_; }

  // --- leaves -------------------------------------------------------------
  VarId constant(Tensor value);
  // Binds an external tensor; requires_grad follows the tensor's flag
  // (forced off on a grad-disabled tape).
  VarId param(Tensor& external);

  // --- primitives ----------------------------------------------------------
  VarId add(VarId a, VarId b);
  VarId sub(VarId a, VarId b);
  VarId mul(VarId a, VarId b);  // elementwise
  // scale * a + shift, elementwise with scalar constants
  VarId affine(VarId a, double scale, double shift = 0.0);
  // ca * a + cb * b with scalar constants
  VarId add_scaled(VarId a, VarId b, double ca, double cb);
  VarId matvec(VarId w, VarId x);  // [m,n] x [n] -> [m]
  VarId sigmoid(VarId a);
  VarId tanh(VarId a);
  VarId softmax(VarId a);      // vector -> vector
  VarId log_softmax(VarId a);  // vector -> vector
  VarId concat(std::span<const VarId> parts);
  VarId concat(VarId a, VarId b);
  VarId sum(VarId a);   // -> scalar
  VarId mean(VarId a);  // -> scalar
  VarId dot(VarId a, VarId b);
  // <a,b> / (|a| |b|); defined as 0 (with zero gradient) when either norm is 0
  VarId cosine(VarId a, VarId b);
  VarId pick(VarId a, size_t index);  // vector element -> scalar
  VarId row(VarId m, size_t r);       // matrix row -> vector
  // sum / mean of matrix rows selected by ids (bag-of-words kernels)
  VarId rows_sum(VarId m, std::span<const int> ids);
  VarId rows_mean(VarId m, std::span<const int> ids);
  // sum_i weights[i] * scalars[i]
  VarId weighted_sum(std::span<const VarId> scalars, std::span<const double> weights);
  // Inverted dropout: zero with probability rate, survivors scaled by
  // 1/(1-rate). Identity when training is false or rate is 0.
  VarId dropout(VarId a, double rate, bool training, Rng* rng);

  // --- execution ------------------------------------------------------------
  // root must be scalar. Accumulates into every bound tensor's grad buffer
  // (allocating zeros for bound leaves the root does not depend on).
  void backward(VarId root);

  const Tensor& value(VarId v) const { return nodes_[static_cast<size_t>(v)].val; }
  double scalar(VarId v) const;
  // Gradient of the last backward() root w.r.t. this node.
  std::span<const double> grad(VarId v) const;

  size_t size() const { return nodes_.size(); }

 private:
  enum class Op : uint8_t {
    kLeaf,
    kAdd,
    kSub,
    kMul,
    kAffine,
    kAddScaled,
    kMatVec,
    kSigmoid,
    kTanh,
    kSoftmax,
    kLogSoftmax,
    kConcat,
    kSum,
    kMean,
    kDot,
    kCosine,
    kPick,
    kRow,
    kRowsSum,
    kRowsMean,
    kWeightedSum,
    kDropout,
  };

  struct Node {
    Op op = Op::kLeaf;
    VarId a = -1;
    VarId b = -1;
    std::vector<VarId> ins;     // concat / weighted_sum operands
    std::vector<int> idx;       // row / bag indices
    std::vector<double> aux;    // saved intermediates (masks, weights, norms)
    double c0 = 0.0;
    double c1 = 0.0;
    Tensor val;
    std::vector<double> grad;   // sized during backward
    Tensor* bound = nullptr;
    bool requires_grad = false;
  };

  VarId push(Node n);
  Node& at(VarId v) { return nodes_[static_cast<size_t>(v)]; }
  const Node& at(VarId v) const { return nodes_[static_cast<size_t>(v)]; }
  bool needs(VarId v) const { return at(v).requires_grad; }
  void check_same_shape(const char* op, VarId a, VarId b) const;
  void check_vector(const char* op, VarId a) const;
  void add_grad(VarId v, std::span<const double> g);
  std::vector<double>& grad_buf(VarId v);

  std::vector<Node> nodes_;
  bool grad_enabled_ = true;
};

}  // namespace ordgen
