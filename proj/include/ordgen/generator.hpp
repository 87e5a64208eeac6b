#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ordgen/checkpoint.hpp"
#include "ordgen/corpus.hpp"
#include "ordgen/gru.hpp"
#include "ordgen/tape.hpp"

namespace ordgen {

struct GeneratorConfig {
  size_t embedding_dim = 256;   // shared by the three embedding tables
  size_t encoder_hidden = 256;  // per direction of the ingredient encoder
  size_t decoder_hidden = 256;
  double dropout = 0.3;
  bool title_sum = false;  // title bag: mean (default) or sum
};

// Title/ingredient-conditioned encoder-decoder. The encoder context
// h_e = [title bag, bidirectional ingredient encoding]; the decoder gates
// h_e into its input at every step:
//   a_t = sigmoid(W1 h_prev + W2 x_t + b1)    (vector gate, |a_t| = |h_e|)
//   z_t = a_t .* h_e
//   x~_t = [x_t, z_t]
struct GeneratorParams {
  GeneratorConfig cfg;
  Tensor title_embedding;       // [V, emb]
  Tensor ingredient_embedding;  // [V, emb]
  Tensor text_embedding;        // [V, emb]
  Tensor empty_ingredient;      // [emb], stands in when a record has no ingredients
  GruParams ingredient_fwd;     // emb -> enc_hidden
  GruParams ingredient_bwd;
  Tensor gate_w1;  // [ctx, dec_hidden]
  Tensor gate_w2;  // [ctx, emb]
  Tensor gate_b;   // [ctx]
  Tensor init_w;   // [dec_hidden, ctx], decoder state init from h_e
  Tensor init_b;   // [dec_hidden]
  GruParams decoder;  // (emb + ctx) -> dec_hidden
  Tensor out_w;       // [V, dec_hidden]
  Tensor out_b;       // [V]

  static GeneratorParams init(size_t vocab_size, const GeneratorConfig& cfg, Rng& rng);

  size_t vocab_size() const { return out_w.rows(); }
  size_t context_dim() const { return cfg.embedding_dim + 2 * cfg.encoder_hidden; }

  std::vector<std::pair<std::string, Tensor*>> named_parameters();
  std::vector<Tensor*> parameters();
  void set_requires_grad(bool on);
  uint64_t checksum() const;

  Checkpoint to_checkpoint(const Vocab& vocab, uint64_t seed) const;
  static GeneratorParams from_checkpoint(const Checkpoint& ck);
};

// Encoder output on a tape: h_e plus its two halves.
struct EncodedContext {
  VarId h_e = -1;
  VarId title_bag = -1;           // g
  VarId ingredient_summary = -1;  // e
};

struct GeneratorNet {
  Tape* tape = nullptr;
  const GeneratorParams* params = nullptr;
  VarId title_embedding = -1, ingredient_embedding = -1, text_embedding = -1;
  VarId empty_ingredient = -1;
  GruVars ingredient_fwd, ingredient_bwd, decoder;
  VarId gate_w1 = -1, gate_w2 = -1, gate_b = -1;
  VarId init_w = -1, init_b = -1, out_w = -1, out_b = -1;
  bool training = false;
  Rng* rng = nullptr;

  EncodedContext encode(const EncodedRecord& record) const;
  VarId initial_hidden(const EncodedContext& ctx) const;
  // One decode step: (logits over the vocab, new hidden state).
  std::pair<VarId, VarId> decode_step(VarId x_emb, VarId h_prev, const EncodedContext& ctx) const;
  VarId token_embedding(int token_id) const;
};

GeneratorNet bind_generator(Tape& tape, GeneratorParams& params, bool training, Rng* rng);

enum class Termination { kEos, kMaxLength };

struct DecodeResult {
  std::vector<int> tokens;           // includes the final EOS when it fired
  std::vector<double> log_probs;     // of the chosen tokens
  std::vector<VarId> log_prob_vars;  // same, as nodes on the decoding tape
  Termination termination = Termination::kMaxLength;

  std::vector<int> text_tokens() const;  // tokens minus a trailing EOS
  size_t size() const { return tokens.size(); }
};

// min(0.05 * floor(epoch / 5), 0.5)
double schedule_rate(size_t epoch);

// Negative log-likelihood of body + EOS given the context. Each input token
// is the gold one, replaced by a sample from the model's own distribution
// with probability schedule_rate.
VarId mle_loss(const GeneratorNet& net, const EncodedContext& ctx, std::span<const int> body,
               double schedule_rate, Rng* sample_rng);
VarId mle_loss(const GeneratorNet& net, const EncodedRecord& record, double schedule_rate,
               Rng* sample_rng);

// Ancestral sampling from softmax(beta * logits); stops at EOS or max_len.
// Log-probs are recorded under the tempered distribution.
DecodeResult sample_decode(const GeneratorNet& net, const EncodedContext& ctx, double beta,
                           size_t max_len, Rng& rng);

// Argmax decoding; ties resolve to the lowest token id.
DecodeResult greedy_decode(const GeneratorNet& net, const EncodedContext& ctx, size_t max_len);

// Tempered log-probs of a fixed token sequence (teacher-forced); the
// differentiable piece of the policy-gradient loss.
std::vector<VarId> forced_log_probs(const GeneratorNet& net, const EncodedContext& ctx,
                                    std::span<const int> tokens, double beta);

struct PretrainConfig {
  GeneratorConfig model;
  double lr = 3e-4;
  size_t epochs = 30;
  size_t batch_size = 32;
  size_t patience = 0;  // 0 disables early stopping
  uint64_t seed = 1;
};

struct PretrainResult {
  GeneratorParams params;  // best dev-loss snapshot
  double untrained_dev_loss = 0.0;
  std::vector<double> dev_losses;
  size_t best_epoch = 0;
};

// Adam on the mean per-record mle_loss with the scheduled-sampling ramp.
PretrainResult pretrain(const std::vector<RecipeRecord>& train,
                        const std::vector<RecipeRecord>& dev, const Vocab& vocab,
                        const PretrainConfig& cfg);

// Mean eval-mode dev loss (teacher forcing, no dropout); used for model
// selection and as the degeneration reference during policy learning.
double dev_mle_loss(GeneratorParams& params, const std::vector<EncodedRecord>& dev);

}  // namespace ordgen
