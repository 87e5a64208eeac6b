#include "ordgen/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "ordgen/adam.hpp"
#include "ordgen/metrics.hpp"

namespace ordgen {

std::string reward_kind_name(RewardKind k) {
  switch (k) {
    case RewardKind::kAbsoluteOrder: return "AO";
    case RewardKind::kRelativeOrder: return "RO";
    case RewardKind::kRelativeOrderBleu4: return "RO+B4";
    case RewardKind::kBleu1: return "BLEU-1";
    case RewardKind::kBleu4: return "BLEU-4";
    case RewardKind::kRougeL: return "ROUGE-L";
  }
  return "?";
}

RewardKind parse_reward_kind(const std::string& name) {
  if (name == "AO") return RewardKind::kAbsoluteOrder;
  if (name == "RO") return RewardKind::kRelativeOrder;
  if (name == "RO+B4") return RewardKind::kRelativeOrderBleu4;
  if (name == "BLEU-1") return RewardKind::kBleu1;
  if (name == "BLEU-4") return RewardKind::kBleu4;
  if (name == "ROUGE-L") return RewardKind::kRougeL;
  throw DataError("unknown reward kind: " + name +
                  " (expected AO, RO, RO+B4, BLEU-1, BLEU-4 or ROUGE-L)");
}

std::optional<TeacherKind> required_teacher_kind(RewardKind k) {
  switch (k) {
    case RewardKind::kAbsoluteOrder: return TeacherKind::kAbsolute;
    case RewardKind::kRelativeOrder:
    case RewardKind::kRelativeOrderBleu4: return TeacherKind::kRelative;
    default: return std::nullopt;
  }
}

void PolicyConfig::validate() const {
  if (gamma < 0.0 || gamma > 1.0) {
    throw DataError("policy config: gamma " + std::to_string(gamma) + " outside [0, 1]");
  }
  if (l_min > l_max || l_min < 1) {
    throw DataError("policy config: window bounds l_min=" + std::to_string(l_min) +
                    " l_max=" + std::to_string(l_max));
  }
  if (beta <= 0.0) throw DataError("policy config: beta must be positive");
  if (batch_size < 1 || max_decode_len < 1) {
    throw DataError("policy config: batch_size and max_decode_len must be >= 1");
  }
}

double RewardTrace::total() const {
  double s = 0.0;
  for (double r : token_rewards) s += r;
  return s;
}

double RewardTrace::mean() const {
  return token_rewards.empty() ? 0.0 : total() / static_cast<double>(token_rewards.size());
}

namespace {

std::vector<VarId> sentence_bows(const TeacherNet& net, const SegmentedDoc& doc) {
  std::vector<VarId> out;
  out.reserve(doc.size());
  for (const auto& s : doc.sentences) out.push_back(net.sentence_bow(s));
  return out;
}

VarId encode_window(const TeacherNet& net, std::span<const VarId> bows, size_t lo, size_t hi,
                    bool reversed) {
  std::vector<VarId> w(bows.begin() + static_cast<long>(lo),
                       bows.begin() + static_cast<long>(hi));
  if (reversed) std::reverse(w.begin(), w.end());
  return net.encode(w);
}

}  // namespace

double reward_absolute(const SegmentedDoc& generated, const SegmentedDoc& gold,
                       const TeacherParams& teacher) {
  if (generated.empty() || gold.empty()) {
    throw std::invalid_argument("reward_absolute: documents must be nonempty");
  }
  Tape tape(false);
  TeacherNet net = bind_teacher(tape, const_cast<TeacherParams&>(teacher), false, nullptr);
  const std::vector<VarId> gen_bows = sentence_bows(net, generated);
  const std::vector<VarId> gold_bows = sentence_bows(net, gold);
  VarId f_gen = net.encode(gen_bows);
  VarId f_fwd = encode_window(net, gold_bows, 0, gold_bows.size(), false);
  VarId f_rev = encode_window(net, gold_bows, 0, gold_bows.size(), true);
  return tape.scalar(tape.cosine(f_gen, f_fwd)) - tape.scalar(tape.cosine(f_gen, f_rev));
}

std::vector<double> reward_relative(const SegmentedDoc& generated, const SegmentedDoc& gold,
                                    const TeacherParams& teacher, size_t l_min, size_t l_max) {
  if (generated.empty() || gold.empty()) {
    throw std::invalid_argument("reward_relative: documents must be nonempty");
  }
  if (l_min > l_max || l_min < 1) {
    throw std::invalid_argument("reward_relative: bad window bounds");
  }
  Tape tape(false);
  TeacherNet net = bind_teacher(tape, const_cast<TeacherParams&>(teacher), false, nullptr);
  const std::vector<VarId> gen_bows = sentence_bows(net, generated);
  const std::vector<VarId> gold_bows = sentence_bows(net, gold);

  std::vector<double> rewards;
  rewards.reserve(generated.size());
  const double terms = static_cast<double>(l_max - l_min + 1);
  for (size_t j = 0; j < generated.size(); ++j) {
    if (j >= gold.size()) {
      rewards.push_back(0.0);  // no corresponding gold window
      continue;
    }
    double acc = 0.0;
    for (size_t l = l_min; l <= l_max; ++l) {
      const size_t lo = j + 1 >= l ? j + 1 - l : 0;  // trailing window, clipped at 0
      VarId f_gen = encode_window(net, gen_bows, lo, j + 1, false);
      VarId f_fwd = encode_window(net, gold_bows, lo, j + 1, false);
      VarId f_rev = encode_window(net, gold_bows, lo, j + 1, true);
      acc += tape.scalar(tape.cosine(f_gen, f_fwd)) - tape.scalar(tape.cosine(f_gen, f_rev));
    }
    rewards.push_back(acc / terms);
  }
  return rewards;
}

CreditSegmentation segment_for_credit(std::span<const int> decoded, const Vocab& vocab) {
  CreditSegmentation seg;
  std::vector<int> text(decoded.begin(), decoded.end());
  bool had_eos = false;
  if (!text.empty() && text.back() == Vocab::kEos) {
    text.pop_back();
    had_eos = true;
  }

  // sentence spans over the text tokens
  std::vector<std::pair<size_t, size_t>> spans;
  size_t cur = 0;
  bool has_content = false;
  for (size_t t = 0; t < text.size(); ++t) {
    if (!vocab.is_delimiter(text[t])) {
      has_content = true;
      continue;
    }
    if (has_content) {
      spans.emplace_back(cur, t + 1);
    } else if (!spans.empty()) {
      spans.back().second = t + 1;  // delimiter-only run joins the previous sentence
    } else {
      continue;  // leading delimiter-only run merges forward
    }
    cur = t + 1;
    has_content = false;
  }
  if (cur < text.size()) {
    if (has_content || spans.empty()) {
      spans.emplace_back(cur, text.size());
    } else {
      spans.back().second = text.size();
    }
  }

  for (size_t i = 0; i < spans.size(); ++i) {
    seg.doc.sentences.emplace_back(text.begin() + static_cast<long>(spans[i].first),
                                   text.begin() + static_cast<long>(spans[i].second));
    for (size_t t = spans[i].first; t < spans[i].second; ++t) {
      seg.token_sentence.push_back(static_cast<int>(i));
    }
  }
  if (had_eos) {
    seg.token_sentence.push_back(spans.empty() ? 0 : static_cast<int>(spans.size() - 1));
  }
  return seg;
}

RewardTrace assign_credit(RewardKind kind, const CreditSegmentation& seg,
                          double sequence_reward, std::span<const double> sentence_rewards) {
  RewardTrace trace;
  trace.sentence_index = seg.token_sentence;
  trace.sequence_reward = sequence_reward;
  trace.sentence_rewards.assign(sentence_rewards.begin(), sentence_rewards.end());
  const size_t n = seg.token_sentence.size();
  if (seg.doc.empty()) {
    trace.token_rewards.assign(n, 0.0);
    return trace;
  }
  const bool relative =
      kind == RewardKind::kRelativeOrder || kind == RewardKind::kRelativeOrderBleu4;
  if (relative && sentence_rewards.size() != seg.doc.size()) {
    throw std::invalid_argument("assign_credit: " + std::to_string(sentence_rewards.size()) +
                                " sentence rewards for " + std::to_string(seg.doc.size()) +
                                " sentences");
  }
  trace.token_rewards.reserve(n);
  for (size_t t = 0; t < n; ++t) {
    switch (kind) {
      case RewardKind::kAbsoluteOrder:
      case RewardKind::kBleu1:
      case RewardKind::kBleu4:
      case RewardKind::kRougeL:
        trace.token_rewards.push_back(sequence_reward);
        break;
      case RewardKind::kRelativeOrder:
        trace.token_rewards.push_back(
            sentence_rewards[static_cast<size_t>(seg.token_sentence[t])]);
        break;
      case RewardKind::kRelativeOrderBleu4:
        trace.token_rewards.push_back(
            sequence_reward + sentence_rewards[static_cast<size_t>(seg.token_sentence[t])]);
        break;
    }
  }
  return trace;
}

RewardTrace compute_trace(std::span<const int> decoded, const EncodedRecord& gold,
                          Teachers& teachers, const Vocab& vocab, const PolicyConfig& cfg) {
  const CreditSegmentation seg = segment_for_credit(decoded, vocab);
  const SegmentedDoc gold_doc = split_sentences(gold.body, vocab.delimiter_ids());
  std::vector<int> text(decoded.begin(), decoded.end());
  if (!text.empty() && text.back() == Vocab::kEos) text.pop_back();

  double seq = 0.0;
  std::vector<double> sent;
  switch (cfg.kind) {
    case RewardKind::kAbsoluteOrder:
      if (!seg.doc.empty()) seq = reward_absolute(seg.doc, gold_doc, *teachers.absolute);
      break;
    case RewardKind::kRelativeOrder:
      if (!seg.doc.empty()) {
        sent = reward_relative(seg.doc, gold_doc, *teachers.relative, cfg.l_min, cfg.l_max);
      }
      break;
    case RewardKind::kRelativeOrderBleu4:
      if (!seg.doc.empty()) {
        sent = reward_relative(seg.doc, gold_doc, *teachers.relative, cfg.l_min, cfg.l_max);
      }
      seq = bleu(text, gold.body, 4);
      break;
    case RewardKind::kBleu1: seq = bleu(text, gold.body, 1); break;
    case RewardKind::kBleu4: seq = bleu(text, gold.body, 4); break;
    case RewardKind::kRougeL: seq = rouge_l(text, gold.body); break;
  }
  return assign_credit(cfg.kind, seg, seq, sent);
}

std::vector<double> advantages(const RewardTrace& sampled, const RewardTrace& greedy) {
  const double greedy_mean = greedy.mean();
  std::vector<double> adv;
  adv.reserve(sampled.size());
  for (size_t t = 0; t < sampled.size(); ++t) {
    const double baseline = t < greedy.size() ? greedy.token_rewards[t] : greedy_mean;
    adv.push_back(sampled.token_rewards[t] - baseline);
  }
  return adv;
}

double self_critical_loss(const DecodeResult& sampled, const RewardTrace& sampled_trace,
                          const DecodeResult& greedy, const RewardTrace& greedy_trace) {
  if (sampled.size() != sampled_trace.size() || greedy.size() != greedy_trace.size()) {
    throw std::invalid_argument("self_critical_loss: trace/decode length mismatch");
  }
  const std::vector<double> adv = advantages(sampled_trace, greedy_trace);
  double loss = 0.0;
  for (size_t t = 0; t < sampled.size(); ++t) {
    loss -= adv[t] * sampled.log_probs[t];
  }
  return loss;
}

VarId self_critical_loss_node(Tape& tape, std::span<const VarId> log_prob_vars,
                              std::span<const double> advantage) {
  if (log_prob_vars.size() != advantage.size()) {
    throw std::invalid_argument("self_critical_loss: advantage/log-prob length mismatch");
  }
  std::vector<double> weights(advantage.size());
  for (size_t t = 0; t < advantage.size(); ++t) weights[t] = -advantage[t];
  return tape.weighted_sum(log_prob_vars, weights);
}

double mixed_loss(double l_rl, double l_mle, double gamma) {
  if (gamma < 0.0 || gamma > 1.0) {
    throw std::invalid_argument("mixed_loss: gamma outside [0, 1]");
  }
  return gamma * l_rl + (1.0 - gamma) * l_mle;
}

double model_selection_score(std::span<const DevGeneration> dev) {
  if (dev.empty()) throw std::invalid_argument("model_selection_score: empty dev set");
  double total = 0.0;
  for (const auto& g : dev) {
    if (g.ro_trace.size() == 0) continue;  // empty generation contributes 0
    total += g.bleu4 / static_cast<double>(g.ro_trace.size()) * g.ro_trace.total();
  }
  return total / static_cast<double>(dev.size());
}

PolicyEpochStats eval_policy(GeneratorParams& params, Teachers& teachers,
                             const std::vector<EncodedRecord>& dev, const Vocab& vocab,
                             const PolicyConfig& cfg) {
  if (dev.empty()) throw DataError("eval_policy: empty dev set");
  PolicyEpochStats stats;
  std::vector<DevGeneration> selections;
  PolicyConfig ro_cfg = cfg;
  ro_cfg.kind = RewardKind::kRelativeOrder;
  for (const auto& rec : dev) {
    Tape tape(false);
    GeneratorNet net = bind_generator(tape, params, false, nullptr);
    const EncodedContext ctx = net.encode(rec);
    const DecodeResult greedy = greedy_decode(net, ctx, cfg.max_decode_len);
    const RewardTrace trace = compute_trace(greedy.tokens, rec, teachers, vocab, cfg);
    stats.dev_reward += trace.mean();
    stats.dev_mean_len += static_cast<double>(greedy.text_tokens().size());
    if (cfg.kind == RewardKind::kRelativeOrderBleu4) {
      DevGeneration g;
      g.bleu4 = bleu(greedy.text_tokens(), rec.body, 4);
      g.ro_trace = compute_trace(greedy.tokens, rec, teachers, vocab, ro_cfg);
      selections.push_back(std::move(g));
    }
  }
  const double n = static_cast<double>(dev.size());
  stats.dev_reward /= n;
  stats.dev_mean_len /= n;
  stats.dev_mle = dev_mle_loss(params, dev);
  // Selection rule: AO/RO and the metric kinds select on their own mean dev
  // reward; RO+B4 selects on the geometric-mean-style score.
  stats.selection = cfg.kind == RewardKind::kRelativeOrderBleu4
                        ? model_selection_score(selections)
                        : stats.dev_reward;
  return stats;
}

PolicyTrainResult train_policy(const GeneratorParams& pretrained, Teachers& teachers,
                               const std::vector<RecipeRecord>& train,
                               const std::vector<RecipeRecord>& dev, const Vocab& vocab,
                               const PolicyConfig& cfg, std::ostream* batch_log) {
  cfg.validate();
  if (train.empty() || dev.empty()) throw DataError("train_policy: empty corpus");
  const auto needed = required_teacher_kind(cfg.kind);
  if (needed.has_value()) {
    const TeacherParams* t = needed == TeacherKind::kAbsolute
                                 ? (teachers.absolute ? &*teachers.absolute : nullptr)
                                 : (teachers.relative ? &*teachers.relative : nullptr);
    if (t == nullptr) {
      throw DataError("train_policy: reward kind " + reward_kind_name(cfg.kind) +
                      " needs a " + teacher_kind_name(*needed) + " teacher");
    }
    if (t->embedding.rows() != vocab.size()) {
      throw DataError("train_policy: teacher vocabulary size " +
                      std::to_string(t->embedding.rows()) + " does not match corpus vocab " +
                      std::to_string(vocab.size()));
    }
  }

  Rng master(cfg.seed);
  Rng data_rng(master.fork());
  Rng sample_rng(master.fork());
  Rng dropout_rng(master.fork());

  const std::vector<EncodedRecord> train_enc = encode_records(train, vocab);
  const std::vector<EncodedRecord> dev_enc = encode_records(dev, vocab);

  GeneratorParams params = pretrained;
  params.set_requires_grad(true);
  AdamOptimizer opt(params.parameters(), cfg.lr);  // fresh optimizer state

  PolicyTrainResult result;
  result.pretrained = eval_policy(params, teachers, dev_enc, vocab, cfg);
  result.best_selection = result.pretrained.selection;
  GeneratorParams best_params = params;

  size_t step = 0;
  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const Batch& batch : make_batches(train, vocab, cfg.batch_size, data_rng)) {
      const double inv_n = 1.0 / static_cast<double>(batch.size());
      double log_reward = 0.0, log_rl = 0.0, log_mle = 0.0, log_mixed = 0.0;

      if (cfg.gamma == 0.0) {
        // Eq.-16 collapse: pure MLE, no decoding or rewards
        Tape tape;
        GeneratorNet net = bind_generator(tape, params, true, &dropout_rng);
        std::vector<VarId> losses;
        losses.reserve(batch.size());
        for (size_t idx : batch.indices) {
          losses.push_back(mle_loss(net, train_enc[idx], 0.0, nullptr));
        }
        const std::vector<double> weights(losses.size(), inv_n);
        const VarId batch_loss = tape.weighted_sum(losses, weights);
        opt.zero_grad();
        tape.backward(batch_loss);
        opt.step();
        log_mle = tape.scalar(batch_loss);
        log_mixed = log_mle;
      } else {
        opt.zero_grad();
        for (size_t idx : batch.indices) {
          const EncodedRecord& rec = train_enc[idx];
          // decode pass (no gradients)
          Tape decode_tape(false);
          GeneratorNet decode_net = bind_generator(decode_tape, params, false, nullptr);
          const EncodedContext dctx = decode_net.encode(rec);
          const DecodeResult sampled =
              sample_decode(decode_net, dctx, cfg.beta, cfg.max_decode_len, sample_rng);
          const DecodeResult greedy = greedy_decode(decode_net, dctx, cfg.max_decode_len);
          const RewardTrace s_trace = compute_trace(sampled.tokens, rec, teachers, vocab, cfg);
          const RewardTrace g_trace = compute_trace(greedy.tokens, rec, teachers, vocab, cfg);
          const std::vector<double> adv = advantages(s_trace, g_trace);

          // gradient pass
          Tape tape;
          GeneratorNet net = bind_generator(tape, params, true, &dropout_rng);
          const EncodedContext ctx = net.encode(rec);
          const std::vector<VarId> lps = forced_log_probs(net, ctx, sampled.tokens, cfg.beta);
          const VarId l_rl = self_critical_loss_node(tape, lps, adv);
          const VarId l_mle = mle_loss(net, ctx, rec.body, 0.0, nullptr);
          const VarId l_mix = tape.add_scaled(l_rl, l_mle, cfg.gamma, 1.0 - cfg.gamma);
          const VarId scaled = tape.affine(l_mix, inv_n);
          tape.backward(scaled);

          log_reward += s_trace.mean() * inv_n;
          log_rl += tape.scalar(l_rl) * inv_n;
          log_mle += tape.scalar(l_mle) * inv_n;
          log_mixed += tape.scalar(l_mix) * inv_n;
        }
        opt.step();
      }

      if (batch_log != nullptr) {
        nlohmann::json j = {{"step", step},
                            {"mean_reward", log_reward},
                            {"l_rl", log_rl},
                            {"l_mle", log_mle},
                            {"mixed", log_mixed}};
        (*batch_log) << j.dump() << "\n";
      }
      ++step;
    }

    PolicyEpochStats stats = eval_policy(params, teachers, dev_enc, vocab, cfg);
    result.epochs.push_back(stats);
    if (stats.selection > result.best_selection) {
      result.best_selection = stats.selection;
      result.best_epoch = static_cast<long>(epoch);
      best_params = params;
    }
  }

  best_params.set_requires_grad(false);
  result.params = std::move(best_params);
  return result;
}

DegenerationDiagnostic detect_reward_exploitation(const PolicyTrainResult& result) {
  DegenerationDiagnostic d;
  d.pretrained_mean_len = result.pretrained.dev_mean_len;
  d.pretrained_dev_mle = result.pretrained.dev_mle;
  const PolicyEpochStats& last = result.epochs.empty() ? result.pretrained : result.epochs.back();
  d.tuned_mean_len = last.dev_mean_len;
  d.tuned_dev_mle = last.dev_mle;
  return d;
}

}  // namespace ordgen
