#include "ordgen/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ordgen {

namespace {

std::string shape_err(const char* op, const Tensor& a, const Tensor& b) {
  return std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str();
}

}  // namespace

VarId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<VarId>(nodes_.size() - 1);
}

void Tape::check_same_shape(const char* op, VarId a, VarId b) const {
  if (!at(a).val.same_shape(at(b).val)) {
    throw std::invalid_argument(shape_err(op, at(a).val, at(b).val));
  }
}

void Tape::check_vector(const char* op, VarId a) const {
  if (!at(a).val.is_vector()) {
    throw std::invalid_argument(std::string(op) + ": expected vector, got shape " +
                                at(a).val.shape_str());
  }
}

VarId Tape::constant(Tensor value) {
  Node n;
  n.val = std::move(value);
  return push(std::move(n));
}

VarId Tape::param(Tensor& external) {
  Node n;
  n.val = external;  // copy of the current values
  n.bound = &external;
  n.requires_grad = grad_enabled_ && external.requires_grad;
  return push(std::move(n));
}

VarId Tape::add(VarId a, VarId b) {
  check_same_shape("add", a, b);
  Node n;
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  n.requires_grad = needs(a) || needs(b);
  n.val = at(a).val;
  const auto& bv = at(b).val.values;
  for (size_t i = 0; i < n.val.values.size(); ++i) n.val.values[i] += bv[i];
  return push(std::move(n));
}

VarId Tape::sub(VarId a, VarId b) {
  check_same_shape("sub", a, b);
  Node n;
  n.op = Op::kSub;
  n.a = a;
  n.b = b;
  n.requires_grad = needs(a) || needs(b);
  n.val = at(a).val;
  const auto& bv = at(b).val.values;
  for (size_t i = 0; i < n.val.values.size(); ++i) n.val.values[i] -= bv[i];
  return push(std::move(n));
}

VarId Tape::mul(VarId a, VarId b) {
  check_same_shape("mul", a, b);
  Node n;
  n.op = Op::kMul;
  n.a = a;
  n.b = b;
  n.requires_grad = needs(a) || needs(b);
  n.val = at(a).val;
  const auto& bv = at(b).val.values;
  for (size_t i = 0; i < n.val.values.size(); ++i) n.val.values[i] *= bv[i];
  return push(std::move(n));
}

VarId Tape::affine(VarId a, double scale, double shift) {
  Node n;
  n.op = Op::kAffine;
  n.a = a;
  n.c0 = scale;
  n.c1 = shift;
  n.requires_grad = needs(a);
  n.val = at(a).val;
  for (double& x : n.val.values) x = scale * x + shift;
  return push(std::move(n));
}

VarId Tape::add_scaled(VarId a, VarId b, double ca, double cb) {
  check_same_shape("add_scaled", a, b);
  Node n;
  n.op = Op::kAddScaled;
  n.a = a;
  n.b = b;
  n.c0 = ca;
  n.c1 = cb;
  n.requires_grad = needs(a) || needs(b);
  n.val = at(a).val;
  const auto& bv = at(b).val.values;
  for (size_t i = 0; i < n.val.values.size(); ++i) {
    n.val.values[i] = ca * n.val.values[i] + cb * bv[i];
  }
  return push(std::move(n));
}

VarId Tape::matvec(VarId w, VarId x) {
  const Tensor& wv = at(w).val;
  const Tensor& xv = at(x).val;
  if (!wv.is_matrix() || !xv.is_vector() || wv.cols() != xv.size()) {
    throw std::invalid_argument(shape_err("matvec", wv, xv));
  }
  Node n;
  n.op = Op::kMatVec;
  n.a = w;
  n.b = x;
  n.requires_grad = needs(w) || needs(x);
  n.val = Tensor::zeros({wv.rows()});
  const size_t rows = wv.rows(), cols = wv.cols();
  const double* wp = wv.values.data();
  const double* xp = xv.values.data();
  for (size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    const double* wr = wp + r * cols;
    for (size_t c = 0; c < cols; ++c) acc += wr[c] * xp[c];
    n.val.values[r] = acc;
  }
  return push(std::move(n));
}

VarId Tape::sigmoid(VarId a) {
  Node n;
  n.op = Op::kSigmoid;
  n.a = a;
  n.requires_grad = needs(a);
  n.val = at(a).val;
  for (double& x : n.val.values) x = 1.0 / (1.0 + std::exp(-x));
  return push(std::move(n));
}

VarId Tape::tanh(VarId a) {
  Node n;
  n.op = Op::kTanh;
  n.a = a;
  n.requires_grad = needs(a);
  n.val = at(a).val;
  for (double& x : n.val.values) x = std::tanh(x);
  return push(std::move(n));
}

VarId Tape::softmax(VarId a) {
  check_vector("softmax", a);
  Node n;
  n.op = Op::kSoftmax;
  n.a = a;
  n.requires_grad = needs(a);
  n.val = at(a).val;
  double mx = n.val.values[0];
  for (double x : n.val.values) mx = std::max(mx, x);
  double z = 0.0;
  for (double& x : n.val.values) {
    x = std::exp(x - mx);
    z += x;
  }
  for (double& x : n.val.values) x /= z;
  return push(std::move(n));
}

VarId Tape::log_softmax(VarId a) {
  check_vector("log_softmax", a);
  Node n;
  n.op = Op::kLogSoftmax;
  n.a = a;
  n.requires_grad = needs(a);
  n.val = at(a).val;
  double mx = n.val.values[0];
  for (double x : n.val.values) mx = std::max(mx, x);
  double z = 0.0;
  for (double x : n.val.values) z += std::exp(x - mx);
  const double lz = mx + std::log(z);
  for (double& x : n.val.values) x -= lz;
  return push(std::move(n));
}

VarId Tape::concat(std::span<const VarId> parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  Node n;
  n.op = Op::kConcat;
  size_t total = 0;
  for (VarId p : parts) {
    check_vector("concat", p);
    total += at(p).val.size();
    n.requires_grad = n.requires_grad || needs(p);
  }
  n.ins.assign(parts.begin(), parts.end());
  n.val = Tensor::zeros({total});
  size_t off = 0;
  for (VarId p : parts) {
    const auto& src = at(p).val.values;
    std::copy(src.begin(), src.end(), n.val.values.begin() + static_cast<long>(off));
    off += src.size();
  }
  return push(std::move(n));
}

VarId Tape::concat(VarId a, VarId b) {
  const VarId parts[] = {a, b};
  return concat(std::span<const VarId>(parts, 2));
}

VarId Tape::sum(VarId a) {
  Node n;
  n.op = Op::kSum;
  n.a = a;
  n.requires_grad = needs(a);
  double acc = 0.0;
  for (double x : at(a).val.values) acc += x;
  n.val = Tensor::scalar(acc);
  return push(std::move(n));
}

VarId Tape::mean(VarId a) {
  if (at(a).val.size() == 0) throw std::invalid_argument("mean: empty tensor");
  Node n;
  n.op = Op::kMean;
  n.a = a;
  n.requires_grad = needs(a);
  double acc = 0.0;
  for (double x : at(a).val.values) acc += x;
  n.val = Tensor::scalar(acc / static_cast<double>(at(a).val.size()));
  return push(std::move(n));
}

VarId Tape::dot(VarId a, VarId b) {
  check_same_shape("dot", a, b);
  Node n;
  n.op = Op::kDot;
  n.a = a;
  n.b = b;
  n.requires_grad = needs(a) || needs(b);
  double acc = 0.0;
  const auto& av = at(a).val.values;
  const auto& bv = at(b).val.values;
  for (size_t i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
  n.val = Tensor::scalar(acc);
  return push(std::move(n));
}

VarId Tape::cosine(VarId a, VarId b) {
  check_same_shape("cosine", a, b);
  Node n;
  n.op = Op::kCosine;
  n.a = a;
  n.b = b;
  n.requires_grad = needs(a) || needs(b);
  const auto& av = at(a).val.values;
  const auto& bv = at(b).val.values;
  double s = 0.0, na2 = 0.0, nb2 = 0.0;
  for (size_t i = 0; i < av.size(); ++i) {
    s += av[i] * bv[i];
    na2 += av[i] * av[i];
    nb2 += bv[i] * bv[i];
  }
  const double na = std::sqrt(na2), nb = std::sqrt(nb2);
  // zero-norm guard: value 0, gradient 0
  const double c = (na == 0.0 || nb == 0.0) ? 0.0 : s / (na * nb);
  n.aux = {na, nb, c};
  n.val = Tensor::scalar(c);
  return push(std::move(n));
}

VarId Tape::pick(VarId a, size_t index) {
  check_vector("pick", a);
  if (index >= at(a).val.size()) {
    throw std::invalid_argument("pick: index " + std::to_string(index) +
                                " out of range for shape " + at(a).val.shape_str());
  }
  Node n;
  n.op = Op::kPick;
  n.a = a;
  n.idx = {static_cast<int>(index)};
  n.requires_grad = needs(a);
  n.val = Tensor::scalar(at(a).val.values[index]);
  return push(std::move(n));
}

VarId Tape::row(VarId m, size_t r) {
  const Tensor& mv = at(m).val;
  if (!mv.is_matrix() || r >= mv.rows()) {
    throw std::invalid_argument("row: index " + std::to_string(r) +
                                " out of range for shape " + mv.shape_str());
  }
  Node n;
  n.op = Op::kRow;
  n.a = m;
  n.idx = {static_cast<int>(r)};
  n.requires_grad = needs(m);
  n.val = Tensor::zeros({mv.cols()});
  const double* src = mv.values.data() + r * mv.cols();
  std::copy(src, src + mv.cols(), n.val.values.begin());
  return push(std::move(n));
}

VarId Tape::rows_sum(VarId m, std::span<const int> ids) {
  const Tensor& mv = at(m).val;
  if (!mv.is_matrix()) {
    throw std::invalid_argument("rows_sum: expected matrix, got " + mv.shape_str());
  }
  if (ids.empty()) throw std::invalid_argument("rows_sum: empty id list");
  Node n;
  n.op = Op::kRowsSum;
  n.a = m;
  n.requires_grad = needs(m);
  n.idx.assign(ids.begin(), ids.end());
  n.val = Tensor::zeros({mv.cols()});
  for (int id : ids) {
    if (id < 0 || static_cast<size_t>(id) >= mv.rows()) {
      throw std::invalid_argument("rows_sum: row " + std::to_string(id) +
                                  " out of range for shape " + mv.shape_str());
    }
    const double* src = mv.values.data() + static_cast<size_t>(id) * mv.cols();
    for (size_t c = 0; c < mv.cols(); ++c) n.val.values[c] += src[c];
  }
  return push(std::move(n));
}

VarId Tape::rows_mean(VarId m, std::span<const int> ids) {
  VarId s = rows_sum(m, ids);
  // reuse the sum node, then rescale; keeps backward simple
  nodes_.back().op = Op::kRowsMean;
  const double inv = 1.0 / static_cast<double>(ids.size());
  for (double& x : nodes_.back().val.values) x *= inv;
  return s;
}

VarId Tape::weighted_sum(std::span<const VarId> scalars, std::span<const double> weights) {
  if (scalars.size() != weights.size()) {
    throw std::invalid_argument("weighted_sum: " + std::to_string(scalars.size()) +
                                " scalars vs " + std::to_string(weights.size()) + " weights");
  }
  Node n;
  n.op = Op::kWeightedSum;
  double acc = 0.0;
  for (size_t i = 0; i < scalars.size(); ++i) {
    if (!at(scalars[i]).val.is_scalar()) {
      throw std::invalid_argument("weighted_sum: operand " + std::to_string(i) +
                                  " is not scalar: " + at(scalars[i]).val.shape_str());
    }
    acc += weights[i] * at(scalars[i]).val.values[0];
    n.requires_grad = n.requires_grad || needs(scalars[i]);
  }
  n.ins.assign(scalars.begin(), scalars.end());
  n.aux.assign(weights.begin(), weights.end());
  n.val = Tensor::scalar(acc);
  return push(std::move(n));
}

VarId Tape::dropout(VarId a, double rate, bool training, Rng* rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw std::invalid_argument("dropout: rate " + std::to_string(rate) +
                                " outside [0, 1)");
  }
  if (!training || rate == 0.0) return a;  // identity
  if (rng == nullptr) throw std::invalid_argument("dropout: training mode needs an rng");
  Node n;
  n.op = Op::kDropout;
  n.a = a;
  n.requires_grad = needs(a);
  n.val = at(a).val;
  const double keep_scale = 1.0 / (1.0 - rate);
  n.aux.resize(n.val.values.size());
  for (size_t i = 0; i < n.val.values.size(); ++i) {
    const double m = rng->uniform() < rate ? 0.0 : keep_scale;
    n.aux[i] = m;
    n.val.values[i] *= m;
  }
  return push(std::move(n));
}

double Tape::scalar(VarId v) const {
  if (!at(v).val.is_scalar()) {
    throw std::invalid_argument("scalar: node has shape " + at(v).val.shape_str());
  }
  return at(v).val.values[0];
}

std::span<const double> Tape::grad(VarId v) const {
  static const std::vector<double> kEmpty;
  const Node& n = at(v);
  return n.grad.empty() ? std::span<const double>(kEmpty) : std::span<const double>(n.grad);
}

std::vector<double>& Tape::grad_buf(VarId v) {
  Node& n = at(v);
  if (n.grad.empty()) n.grad.assign(n.val.size(), 0.0);
  return n.grad;
}

void Tape::add_grad(VarId v, std::span<const double> g) {
  auto& buf = grad_buf(v);
  for (size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
}

void Tape::backward(VarId root) {
  if (!grad_enabled_) {
    throw std::invalid_argument("backward: tape was created with gradients disabled");
  }
  if (!at(root).val.is_scalar()) {
    throw std::invalid_argument("backward: root must be scalar, got shape " +
                                at(root).val.shape_str());
  }
  grad_buf(root)[0] += 1.0;

  for (VarId i = root; i >= 0; --i) {
    Node& n = at(i);
    if (!n.requires_grad || n.grad.empty()) continue;
    const std::vector<double>& g = n.grad;
    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kAdd:
        if (needs(n.a)) add_grad(n.a, g);
        if (needs(n.b)) add_grad(n.b, g);
        break;
      case Op::kSub:
        if (needs(n.a)) add_grad(n.a, g);
        if (needs(n.b)) {
          auto& gb = grad_buf(n.b);
          for (size_t k = 0; k < g.size(); ++k) gb[k] -= g[k];
        }
        break;
      case Op::kMul:
        if (needs(n.a)) {
          auto& ga = grad_buf(n.a);
          const auto& bv = at(n.b).val.values;
          for (size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * bv[k];
        }
        if (needs(n.b)) {
          auto& gb = grad_buf(n.b);
          const auto& av = at(n.a).val.values;
          for (size_t k = 0; k < g.size(); ++k) gb[k] += g[k] * av[k];
        }
        break;
      case Op::kAffine: {
        auto& ga = grad_buf(n.a);
        for (size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * n.c0;
        break;
      }
      case Op::kAddScaled:
        if (needs(n.a)) {
          auto& ga = grad_buf(n.a);
          for (size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * n.c0;
        }
        if (needs(n.b)) {
          auto& gb = grad_buf(n.b);
          for (size_t k = 0; k < g.size(); ++k) gb[k] += g[k] * n.c1;
        }
        break;
      case Op::kMatVec: {
        const Tensor& wv = at(n.a).val;
        const Tensor& xv = at(n.b).val;
        const size_t rows = wv.rows(), cols = wv.cols();
        if (needs(n.a)) {
          auto& gw = grad_buf(n.a);
          for (size_t r = 0; r < rows; ++r) {
            const double gr = g[r];
            if (gr == 0.0) continue;
            double* dst = gw.data() + r * cols;
            for (size_t c = 0; c < cols; ++c) dst[c] += gr * xv.values[c];
          }
        }
        if (needs(n.b)) {
          auto& gx = grad_buf(n.b);
          for (size_t r = 0; r < rows; ++r) {
            const double gr = g[r];
            if (gr == 0.0) continue;
            const double* wr = wv.values.data() + r * cols;
            for (size_t c = 0; c < cols; ++c) gx[c] += gr * wr[c];
          }
        }
        break;
      }
      case Op::kSigmoid: {
        auto& ga = grad_buf(n.a);
        for (size_t k = 0; k < g.size(); ++k) {
          const double y = n.val.values[k];
          ga[k] += g[k] * y * (1.0 - y);
        }
        break;
      }
      case Op::kTanh: {
        auto& ga = grad_buf(n.a);
        for (size_t k = 0; k < g.size(); ++k) {
          const double y = n.val.values[k];
          ga[k] += g[k] * (1.0 - y * y);
        }
        break;
      }
      case Op::kSoftmax: {
        auto& ga = grad_buf(n.a);
        double dotv = 0.0;
        for (size_t k = 0; k < g.size(); ++k) dotv += g[k] * n.val.values[k];
        for (size_t k = 0; k < g.size(); ++k) {
          ga[k] += n.val.values[k] * (g[k] - dotv);
        }
        break;
      }
      case Op::kLogSoftmax: {
        auto& ga = grad_buf(n.a);
        double gsum = 0.0;
        for (double gk : g) gsum += gk;
        for (size_t k = 0; k < g.size(); ++k) {
          ga[k] += g[k] - std::exp(n.val.values[k]) * gsum;
        }
        break;
      }
      case Op::kConcat: {
        size_t off = 0;
        for (VarId p : n.ins) {
          const size_t len = at(p).val.size();
          if (needs(p)) {
            auto& gp = grad_buf(p);
            for (size_t k = 0; k < len; ++k) gp[k] += g[off + k];
          }
          off += len;
        }
        break;
      }
      case Op::kSum: {
        auto& ga = grad_buf(n.a);
        for (double& x : ga) x += g[0];
        break;
      }
      case Op::kMean: {
        auto& ga = grad_buf(n.a);
        const double s = g[0] / static_cast<double>(ga.size());
        for (double& x : ga) x += s;
        break;
      }
      case Op::kDot: {
        if (needs(n.a)) {
          auto& ga = grad_buf(n.a);
          const auto& bv = at(n.b).val.values;
          for (size_t k = 0; k < ga.size(); ++k) ga[k] += g[0] * bv[k];
        }
        if (needs(n.b)) {
          auto& gb = grad_buf(n.b);
          const auto& av = at(n.a).val.values;
          for (size_t k = 0; k < gb.size(); ++k) gb[k] += g[0] * av[k];
        }
        break;
      }
      case Op::kCosine: {
        const double na = n.aux[0], nb = n.aux[1], c = n.aux[2];
        if (na == 0.0 || nb == 0.0) break;  // defined-as-zero branch
        const auto& av = at(n.a).val.values;
        const auto& bv = at(n.b).val.values;
        if (needs(n.a)) {
          auto& ga = grad_buf(n.a);
          for (size_t k = 0; k < av.size(); ++k) {
            ga[k] += g[0] * (bv[k] / (na * nb) - c * av[k] / (na * na));
          }
        }
        if (needs(n.b)) {
          auto& gb = grad_buf(n.b);
          for (size_t k = 0; k < bv.size(); ++k) {
            gb[k] += g[0] * (av[k] / (na * nb) - c * bv[k] / (nb * nb));
          }
        }
        break;
      }
      case Op::kPick: {
        grad_buf(n.a)[static_cast<size_t>(n.idx[0])] += g[0];
        break;
      }
      case Op::kRow: {
        auto& gm = grad_buf(n.a);
        const size_t cols = at(n.a).val.cols();
        double* dst = gm.data() + static_cast<size_t>(n.idx[0]) * cols;
        for (size_t k = 0; k < cols; ++k) dst[k] += g[k];
        break;
      }
      case Op::kRowsSum:
      case Op::kRowsMean: {
        auto& gm = grad_buf(n.a);
        const size_t cols = at(n.a).val.cols();
        const double scale =
            n.op == Op::kRowsMean ? 1.0 / static_cast<double>(n.idx.size()) : 1.0;
        for (int id : n.idx) {
          double* dst = gm.data() + static_cast<size_t>(id) * cols;
          for (size_t k = 0; k < cols; ++k) dst[k] += g[k] * scale;
        }
        break;
      }
      case Op::kWeightedSum: {
        for (size_t k = 0; k < n.ins.size(); ++k) {
          if (needs(n.ins[k])) grad_buf(n.ins[k])[0] += g[0] * n.aux[k];
        }
        break;
      }
      case Op::kDropout: {
        auto& ga = grad_buf(n.a);
        for (size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * n.aux[k];
        break;
      }
    }
  }

  // flush into bound tensors; untouched leaves get a zero grad buffer
  for (Node& n : nodes_) {
    if (n.bound == nullptr || !n.bound->requires_grad) continue;
    n.bound->ensure_grad();
    if (n.grad.empty()) continue;
    auto& dst = *n.bound->grad;
    for (size_t k = 0; k < n.grad.size(); ++k) dst[k] += n.grad[k];
  }
}

}  // namespace ordgen
