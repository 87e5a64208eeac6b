#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ordgen/tape.hpp"
#include "ordgen/tensor.hpp"

namespace ordgen {

// Gated recurrent unit weights (reset/update-gate formulation):
//   z = sigmoid(W_z x + U_z h + b_z)
//   r = sigmoid(W_r x + U_r h + b_r)
//   hcand = tanh(W_h x + U_h (r .* h) + b_h)
//   h' = (1 - z) .* h + z .* hcand
struct GruParams {
  Tensor w_z, w_r, w_h;  // [hidden, input]
  Tensor u_z, u_r, u_h;  // [hidden, hidden]
  Tensor b_z, b_r, b_h;  // [hidden]

  static GruParams init(size_t input, size_t hidden, Rng& rng);
  static GruParams zeros(size_t input, size_t hidden);

  size_t input_size() const { return w_z.cols(); }
  size_t hidden_size() const { return w_z.rows(); }

  void set_requires_grad(bool on);
  // Fixed iteration order; used for optimizers, checkpoints and checksums.
  std::vector<std::pair<std::string, Tensor*>> named_parameters(const std::string& prefix);
  std::vector<Tensor*> parameters();
};

// Parameter nodes of one GRU registered on a tape.
struct GruVars {
  VarId w_z, w_r, w_h, u_z, u_r, u_h, b_z, b_r, b_h;
};

GruVars gru_on_tape(Tape& tape, GruParams& p);

// One recurrence step; dimensions are validated against the registered params.
VarId gru_step(Tape& tape, VarId x, VarId h_prev, const GruVars& g);

// Folds gru_step over a sequence from a zero initial hidden state and
// returns the final hidden state.
VarId gru_fold(Tape& tape, std::span<const VarId> inputs, const GruVars& g, size_t hidden);

}  // namespace ordgen
