#include "ordgen/gru.hpp"

#include <stdexcept>

namespace ordgen {

GruParams GruParams::init(size_t input, size_t hidden, Rng& rng) {
  GruParams p;
  p.w_z = Tensor::glorot(hidden, input, rng);
  p.w_r = Tensor::glorot(hidden, input, rng);
  p.w_h = Tensor::glorot(hidden, input, rng);
  p.u_z = Tensor::glorot(hidden, hidden, rng);
  p.u_r = Tensor::glorot(hidden, hidden, rng);
  p.u_h = Tensor::glorot(hidden, hidden, rng);
  p.b_z = Tensor::zeros({hidden});
  p.b_r = Tensor::zeros({hidden});
  p.b_h = Tensor::zeros({hidden});
  return p;
}

GruParams GruParams::zeros(size_t input, size_t hidden) {
  GruParams p;
  p.w_z = Tensor::zeros({hidden, input});
  p.w_r = Tensor::zeros({hidden, input});
  p.w_h = Tensor::zeros({hidden, input});
  p.u_z = Tensor::zeros({hidden, hidden});
  p.u_r = Tensor::zeros({hidden, hidden});
  p.u_h = Tensor::zeros({hidden, hidden});
  p.b_z = Tensor::zeros({hidden});
  p.b_r = Tensor::zeros({hidden});
  p.b_h = Tensor::zeros({hidden});
  return p;
}

void GruParams::set_requires_grad(bool on) {
  for (auto& [name, t] : named_parameters("")) t->requires_grad = on;
}

std::vector<std::pair<std::string, Tensor*>> GruParams::named_parameters(
    const std::string& prefix) {
  return {
      {prefix + "w_z", &w_z}, {prefix + "w_r", &w_r}, {prefix + "w_h", &w_h},
      {prefix + "u_z", &u_z}, {prefix + "u_r", &u_r}, {prefix + "u_h", &u_h},
      {prefix + "b_z", &b_z}, {prefix + "b_r", &b_r}, {prefix + "b_h", &b_h},
  };
}

std::vector<Tensor*> GruParams::parameters() {
  std::vector<Tensor*> out;
  for (auto& [name, t] : named_parameters("")) out.push_back(t);
  return out;
}

GruVars gru_on_tape(Tape& tape, GruParams& p) {
  GruVars g;
  g.w_z = tape.param(p.w_z);
  g.w_r = tape.param(p.w_r);
  g.w_h = tape.param(p.w_h);
  g.u_z = tape.param(p.u_z);
  g.u_r = tape.param(p.u_r);
  g.u_h = tape.param(p.u_h);
  g.b_z = tape.param(p.b_z);
  g.b_r = tape.param(p.b_r);
  g.b_h = tape.param(p.b_h);
  return g;
}

VarId gru_step(Tape& tape, VarId x, VarId h_prev, const GruVars& g) {
  const size_t in = tape.value(g.w_z).cols();
  const size_t hid = tape.value(g.w_z).rows();
  if (tape.value(x).size() != in || tape.value(h_prev).size() != hid) {
    throw std::invalid_argument(
        "gru_step: input " + tape.value(x).shape_str() + " / hidden " +
        tape.value(h_prev).shape_str() + " do not match params expecting [" +
        std::to_string(in) + "] / [" + std::to_string(hid) + "]");
  }
  VarId z = tape.sigmoid(
      tape.add(tape.add(tape.matvec(g.w_z, x), tape.matvec(g.u_z, h_prev)), g.b_z));
  VarId r = tape.sigmoid(
      tape.add(tape.add(tape.matvec(g.w_r, x), tape.matvec(g.u_r, h_prev)), g.b_r));
  VarId cand = tape.tanh(tape.add(
      tape.add(tape.matvec(g.w_h, x), tape.matvec(g.u_h, tape.mul(r, h_prev))), g.b_h));
  // (1 - z) .* h_prev + z .* cand
  return tape.add(tape.mul(tape.affine(z, -1.0, 1.0), h_prev), tape.mul(z, cand));
}

VarId gru_fold(Tape& tape, std::span<const VarId> inputs, const GruVars& g, size_t hidden) {
  VarId h = tape.constant(Tensor::zeros({hidden}));
  for (VarId x : inputs) h = gru_step(tape, x, h, g);
  return h;
}

}  // namespace ordgen
