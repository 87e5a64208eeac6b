#include "ordgen/generator.hpp"

#include <algorithm>
#include <cmath>

#include "ordgen/adam.hpp"
#include "ordgen/checksum.hpp"

namespace ordgen {

GeneratorParams GeneratorParams::init(size_t vocab_size, const GeneratorConfig& cfg, Rng& rng) {
  GeneratorParams p;
  p.cfg = cfg;
  const size_t emb = cfg.embedding_dim;
  const size_t ctx = emb + 2 * cfg.encoder_hidden;
  p.title_embedding = Tensor::embedding(vocab_size, emb, rng);
  p.ingredient_embedding = Tensor::embedding(vocab_size, emb, rng);
  p.text_embedding = Tensor::embedding(vocab_size, emb, rng);
  p.empty_ingredient = Tensor::zeros({emb});
  for (double& x : p.empty_ingredient.values) x = rng.uniform(-0.1, 0.1);
  p.ingredient_fwd = GruParams::init(emb, cfg.encoder_hidden, rng);
  p.ingredient_bwd = GruParams::init(emb, cfg.encoder_hidden, rng);
  p.gate_w1 = Tensor::glorot(ctx, cfg.decoder_hidden, rng);
  p.gate_w2 = Tensor::glorot(ctx, emb, rng);
  p.gate_b = Tensor::zeros({ctx});
  p.init_w = Tensor::glorot(cfg.decoder_hidden, ctx, rng);
  p.init_b = Tensor::zeros({cfg.decoder_hidden});
  p.decoder = GruParams::init(emb + ctx, cfg.decoder_hidden, rng);
  p.out_w = Tensor::glorot(vocab_size, cfg.decoder_hidden, rng);
  p.out_b = Tensor::zeros({vocab_size});
  return p;
}

std::vector<std::pair<std::string, Tensor*>> GeneratorParams::named_parameters() {
  std::vector<std::pair<std::string, Tensor*>> out = {
      {"title_embedding", &title_embedding},
      {"ingredient_embedding", &ingredient_embedding},
      {"text_embedding", &text_embedding},
      {"empty_ingredient", &empty_ingredient},
  };
  for (auto& kv : ingredient_fwd.named_parameters("ingredient_fwd.")) out.push_back(kv);
  for (auto& kv : ingredient_bwd.named_parameters("ingredient_bwd.")) out.push_back(kv);
  out.emplace_back("gate_w1", &gate_w1);
  out.emplace_back("gate_w2", &gate_w2);
  out.emplace_back("gate_b", &gate_b);
  out.emplace_back("init_w", &init_w);
  out.emplace_back("init_b", &init_b);
  for (auto& kv : decoder.named_parameters("decoder.")) out.push_back(kv);
  out.emplace_back("out_w", &out_w);
  out.emplace_back("out_b", &out_b);
  return out;
}

std::vector<Tensor*> GeneratorParams::parameters() {
  std::vector<Tensor*> out;
  for (auto& [name, t] : named_parameters()) out.push_back(t);
  return out;
}

void GeneratorParams::set_requires_grad(bool on) {
  for (Tensor* t : parameters()) t->requires_grad = on;
}

uint64_t GeneratorParams::checksum() const {
  Fnv1a h;
  for (auto& [name, t] : const_cast<GeneratorParams*>(this)->named_parameters()) {
    h.update(name);
    h.update(t->values);
  }
  return h.digest();
}

Checkpoint GeneratorParams::to_checkpoint(const Vocab& vocab, uint64_t seed) const {
  Checkpoint ck;
  ck.meta["kind"] = "generator";
  ck.meta["embedding_dim"] = cfg.embedding_dim;
  ck.meta["encoder_hidden"] = cfg.encoder_hidden;
  ck.meta["decoder_hidden"] = cfg.decoder_hidden;
  ck.meta["dropout"] = cfg.dropout;
  ck.meta["title_sum"] = cfg.title_sum;
  ck.meta["seed"] = seed;
  ck.meta["vocab_checksum"] = checksum_hex(vocab.checksum());
  ck.meta["vocab"] = {{"tokens", vocab.tokens()}, {"delimiters", vocab.delimiter_tokens()}};
  for (auto& [name, t] : const_cast<GeneratorParams*>(this)->named_parameters()) {
    ck.add(name, *t);
  }
  return ck;
}

GeneratorParams GeneratorParams::from_checkpoint(const Checkpoint& ck) {
  if (ck.kind() != "generator") {
    throw CheckpointError("expected a generator checkpoint, got kind '" + ck.kind() + "'");
  }
  GeneratorParams p;
  p.cfg.embedding_dim = ck.meta.at("embedding_dim").get<size_t>();
  p.cfg.encoder_hidden = ck.meta.at("encoder_hidden").get<size_t>();
  p.cfg.decoder_hidden = ck.meta.at("decoder_hidden").get<size_t>();
  p.cfg.dropout = ck.meta.value("dropout", 0.3);
  p.cfg.title_sum = ck.meta.value("title_sum", false);
  for (auto& [name, t] : p.named_parameters()) *t = ck.get(name);
  return p;
}

GeneratorNet bind_generator(Tape& tape, GeneratorParams& params, bool training, Rng* rng) {
  GeneratorNet n;
  n.tape = &tape;
  n.params = &params;
  n.title_embedding = tape.param(params.title_embedding);
  n.ingredient_embedding = tape.param(params.ingredient_embedding);
  n.text_embedding = tape.param(params.text_embedding);
  n.empty_ingredient = tape.param(params.empty_ingredient);
  n.ingredient_fwd = gru_on_tape(tape, params.ingredient_fwd);
  n.ingredient_bwd = gru_on_tape(tape, params.ingredient_bwd);
  n.gate_w1 = tape.param(params.gate_w1);
  n.gate_w2 = tape.param(params.gate_w2);
  n.gate_b = tape.param(params.gate_b);
  n.init_w = tape.param(params.init_w);
  n.init_b = tape.param(params.init_b);
  n.decoder = gru_on_tape(tape, params.decoder);
  n.out_w = tape.param(params.out_w);
  n.out_b = tape.param(params.out_b);
  n.training = training;
  n.rng = rng;
  return n;
}

EncodedContext GeneratorNet::encode(const EncodedRecord& record) const {
  Tape& t = *tape;
  const double drop = params->cfg.dropout;

  // g: title bag (mean by default; sum behind cfg.title_sum)
  std::vector<int> title = record.title;
  if (title.empty()) title.push_back(Vocab::kUnk);
  std::sort(title.begin(), title.end());
  VarId g = params->cfg.title_sum ? t.rows_sum(title_embedding, title)
                                  : t.rows_mean(title_embedding, title);

  // each ingredient phrase -> bag vector, dropout before the recurrent layer
  std::vector<VarId> phrase_vecs;
  for (const auto& phrase : record.ingredients) {
    std::vector<int> ids = phrase;
    std::sort(ids.begin(), ids.end());
    VarId e_i = t.rows_sum(ingredient_embedding, ids);
    phrase_vecs.push_back(t.dropout(e_i, drop, training, rng));
  }
  if (phrase_vecs.empty()) phrase_vecs.push_back(empty_ingredient);

  const size_t hid = params->cfg.encoder_hidden;
  VarId fwd = gru_fold(t, phrase_vecs, ingredient_fwd, hid);
  std::vector<VarId> rev(phrase_vecs.rbegin(), phrase_vecs.rend());
  VarId bwd = gru_fold(t, rev, ingredient_bwd, hid);
  VarId e = t.concat(fwd, bwd);

  EncodedContext ctx;
  ctx.title_bag = g;
  ctx.ingredient_summary = e;
  ctx.h_e = t.concat(g, e);
  return ctx;
}

VarId GeneratorNet::initial_hidden(const EncodedContext& ctx) const {
  return tape->add(tape->matvec(init_w, ctx.h_e), init_b);
}

std::pair<VarId, VarId> GeneratorNet::decode_step(VarId x_emb, VarId h_prev,
                                                  const EncodedContext& ctx) const {
  Tape& t = *tape;
  VarId a = t.sigmoid(
      t.add(t.add(t.matvec(gate_w1, h_prev), t.matvec(gate_w2, x_emb)), gate_b));
  VarId z = t.mul(a, ctx.h_e);
  VarId x_tilde = t.concat(x_emb, z);
  VarId h = gru_step(t, x_tilde, h_prev, decoder);
  VarId h_out = t.dropout(h, params->cfg.dropout, training, rng);
  VarId logits = t.add(t.matvec(out_w, h_out), out_b);
  return {logits, h};
}

VarId GeneratorNet::token_embedding(int token_id) const {
  return tape->row(text_embedding, static_cast<size_t>(token_id));
}

std::vector<int> DecodeResult::text_tokens() const {
  std::vector<int> out = tokens;
  if (termination == Termination::kEos && !out.empty()) out.pop_back();
  return out;
}

double schedule_rate(size_t epoch) {
  return std::min(0.05 * static_cast<double>(epoch / 5), 0.5);
}

namespace {

// CDF draw over exp(log_probs); the values sum to 1 up to rounding.
int sample_from_log_probs(const Tensor& log_probs, Rng& rng) {
  const double r = rng.uniform();
  double acc = 0.0;
  const size_t n = log_probs.size();
  for (size_t i = 0; i < n; ++i) {
    acc += std::exp(log_probs[i]);
    if (r < acc) return static_cast<int>(i);
  }
  return static_cast<int>(n - 1);
}

int argmax_lowest(const Tensor& v) {
  size_t best = 0;
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return static_cast<int>(best);
}

}  // namespace

VarId mle_loss(const GeneratorNet& net, const EncodedContext& ctx, std::span<const int> body,
               double schedule_rate, Rng* sample_rng) {
  if (body.empty()) throw std::invalid_argument("mle_loss: empty body");
  if (schedule_rate > 0.0 && sample_rng == nullptr) {
    throw std::invalid_argument("mle_loss: scheduled sampling needs an rng");
  }
  Tape& t = *net.tape;
  std::vector<int> targets(body.begin(), body.end());
  targets.push_back(Vocab::kEos);

  VarId h = net.initial_hidden(ctx);
  VarId x = net.token_embedding(Vocab::kBos);
  std::vector<VarId> terms;
  terms.reserve(targets.size());
  for (size_t step = 0; step < targets.size(); ++step) {
    auto [logits, h_next] = net.decode_step(x, h, ctx);
    VarId logp = t.log_softmax(logits);
    terms.push_back(t.pick(logp, static_cast<size_t>(targets[step])));
    h = h_next;
    if (step + 1 < targets.size()) {
      int next_input = targets[step];
      if (schedule_rate > 0.0 && sample_rng->uniform() < schedule_rate) {
        next_input = sample_from_log_probs(t.value(logp), *sample_rng);
      }
      x = net.token_embedding(next_input);
    }
  }
  const std::vector<double> weights(terms.size(), -1.0);
  return t.weighted_sum(terms, weights);
}

VarId mle_loss(const GeneratorNet& net, const EncodedRecord& record, double schedule_rate,
               Rng* sample_rng) {
  const EncodedContext ctx = net.encode(record);
  return mle_loss(net, ctx, record.body, schedule_rate, sample_rng);
}

DecodeResult sample_decode(const GeneratorNet& net, const EncodedContext& ctx, double beta,
                           size_t max_len, Rng& rng) {
  if (beta <= 0.0) throw std::invalid_argument("sample_decode: beta must be positive");
  Tape& t = *net.tape;
  DecodeResult out;
  VarId h = net.initial_hidden(ctx);
  VarId x = net.token_embedding(Vocab::kBos);
  for (size_t step = 0; step < max_len; ++step) {
    auto [logits, h_next] = net.decode_step(x, h, ctx);
    VarId logp = t.log_softmax(t.affine(logits, beta));
    const int token = sample_from_log_probs(t.value(logp), rng);
    VarId lp = t.pick(logp, static_cast<size_t>(token));
    out.tokens.push_back(token);
    out.log_probs.push_back(t.scalar(lp));
    out.log_prob_vars.push_back(lp);
    if (token == Vocab::kEos) {
      out.termination = Termination::kEos;
      return out;
    }
    h = h_next;
    x = net.token_embedding(token);
  }
  out.termination = Termination::kMaxLength;
  return out;
}

DecodeResult greedy_decode(const GeneratorNet& net, const EncodedContext& ctx, size_t max_len) {
  Tape& t = *net.tape;
  DecodeResult out;
  VarId h = net.initial_hidden(ctx);
  VarId x = net.token_embedding(Vocab::kBos);
  for (size_t step = 0; step < max_len; ++step) {
    auto [logits, h_next] = net.decode_step(x, h, ctx);
    VarId logp = t.log_softmax(logits);
    const int token = argmax_lowest(t.value(logits));
    VarId lp = t.pick(logp, static_cast<size_t>(token));
    out.tokens.push_back(token);
    out.log_probs.push_back(t.scalar(lp));
    out.log_prob_vars.push_back(lp);
    if (token == Vocab::kEos) {
      out.termination = Termination::kEos;
      return out;
    }
    h = h_next;
    x = net.token_embedding(token);
  }
  out.termination = Termination::kMaxLength;
  return out;
}

std::vector<VarId> forced_log_probs(const GeneratorNet& net, const EncodedContext& ctx,
                                    std::span<const int> tokens, double beta) {
  Tape& t = *net.tape;
  std::vector<VarId> out;
  out.reserve(tokens.size());
  VarId h = net.initial_hidden(ctx);
  VarId x = net.token_embedding(Vocab::kBos);
  for (size_t step = 0; step < tokens.size(); ++step) {
    auto [logits, h_next] = net.decode_step(x, h, ctx);
    VarId logp = t.log_softmax(t.affine(logits, beta));
    out.push_back(t.pick(logp, static_cast<size_t>(tokens[step])));
    h = h_next;
    if (step + 1 < tokens.size()) x = net.token_embedding(tokens[step]);
  }
  return out;
}

double dev_mle_loss(GeneratorParams& params, const std::vector<EncodedRecord>& dev) {
  if (dev.empty()) throw DataError("dev_mle_loss: empty dev set");
  double total = 0.0;
  for (const auto& rec : dev) {
    Tape tape(false);
    GeneratorNet net = bind_generator(tape, params, false, nullptr);
    total += tape.scalar(mle_loss(net, rec, 0.0, nullptr));
  }
  return total / static_cast<double>(dev.size());
}

PretrainResult pretrain(const std::vector<RecipeRecord>& train,
                        const std::vector<RecipeRecord>& dev, const Vocab& vocab,
                        const PretrainConfig& cfg) {
  if (train.empty()) throw DataError("pretrain: empty training corpus");
  if (dev.empty()) throw DataError("pretrain: empty dev corpus");
  Rng master(cfg.seed);
  Rng init_rng(master.fork());
  Rng data_rng(master.fork());
  Rng dropout_rng(master.fork());
  Rng schedule_rng(master.fork());

  const std::vector<EncodedRecord> train_enc = encode_records(train, vocab);
  const std::vector<EncodedRecord> dev_enc = encode_records(dev, vocab);

  GeneratorParams params = GeneratorParams::init(vocab.size(), cfg.model, init_rng);
  params.set_requires_grad(true);
  AdamOptimizer opt(params.parameters(), cfg.lr);

  PretrainResult result;
  result.untrained_dev_loss = dev_mle_loss(params, dev_enc);
  double best = result.untrained_dev_loss;
  GeneratorParams best_params = params;
  size_t since_best = 0;

  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double rate = schedule_rate(epoch);
    for (const Batch& batch : make_batches(train, vocab, cfg.batch_size, data_rng)) {
      Tape tape;
      GeneratorNet net = bind_generator(tape, params, true, &dropout_rng);
      std::vector<VarId> losses;
      losses.reserve(batch.size());
      for (size_t idx : batch.indices) {
        losses.push_back(mle_loss(net, train_enc[idx], rate, &schedule_rng));
      }
      const std::vector<double> weights(losses.size(), 1.0 / static_cast<double>(losses.size()));
      const VarId batch_loss = tape.weighted_sum(losses, weights);
      opt.zero_grad();
      tape.backward(batch_loss);
      opt.step();
    }

    const double dev_loss = dev_mle_loss(params, dev_enc);
    result.dev_losses.push_back(dev_loss);
    if (dev_loss < best) {
      best = dev_loss;
      best_params = params;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
      break;
    }
  }

  best_params.set_requires_grad(false);
  result.params = std::move(best_params);
  return result;
}

}  // namespace ordgen
