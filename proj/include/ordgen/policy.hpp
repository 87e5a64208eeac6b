#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ordgen/corpus.hpp"
#include "ordgen/generator.hpp"
#include "ordgen/teacher.hpp"

namespace ordgen {

enum class RewardKind {
  kAbsoluteOrder,       // AO
  kRelativeOrder,       // RO
  kRelativeOrderBleu4,  // RO+B4
  kBleu1,
  kBleu4,
  kRougeL,
};

std::string reward_kind_name(RewardKind k);
RewardKind parse_reward_kind(const std::string& name);
// Which (if any) teacher kind a reward requires.
std::optional<TeacherKind> required_teacher_kind(RewardKind k);

struct PolicyConfig {
  RewardKind kind = RewardKind::kRelativeOrder;
  double gamma = 0.97;
  size_t l_min = 3;
  size_t l_max = 6;
  double lr = 3e-5;
  double beta = 2.0;  // sampling temperature, shared with pretraining
  size_t max_decode_len = 150;
  size_t epochs = 10;
  size_t batch_size = 32;
  uint64_t seed = 1;

  void validate() const;  // gamma in [0,1], l_min <= l_max, beta > 0
};

// Per-token rewards for one decoded sequence plus the pieces they came from.
struct RewardTrace {
  std::vector<double> token_rewards;
  std::vector<int> sentence_index;       // parallel to token_rewards, non-decreasing
  std::vector<double> sentence_rewards;  // per generated sentence (relative kinds)
  double sequence_reward = 0.0;          // r_abs, the metric reward, or the B4 term

  size_t size() const { return token_rewards.size(); }
  double total() const;
  double mean() const;  // 0 for an empty trace
};

// cosine(f(S'), f(S_fwd)) - cosine(f(S'), f(S_rev)) under the fixed teacher;
// in [-2, 2]. Zero-norm encodings contribute 0 to their cosine term.
double reward_absolute(const SegmentedDoc& generated, const SegmentedDoc& gold,
                       const TeacherParams& teacher);

// Per generated sentence j: the mean over window lengths l in [l_min, l_max]
// of the forward-minus-reverse cosine difference on the trailing window of
// sentences ending at j (clipped at 0). Sentences beyond the gold sentence
// count get reward 0.
std::vector<double> reward_relative(const SegmentedDoc& generated, const SegmentedDoc& gold,
                                    const TeacherParams& teacher, size_t l_min, size_t l_max);

// Partition of a decoded token sequence into credit sentences. Delimiters
// close sentences; delimiter-only runs merge into the previous sentence; a
// trailing EOS joins the final sentence. token_sentence has one entry per
// decoded token.
struct CreditSegmentation {
  SegmentedDoc doc;
  std::vector<int> token_sentence;
};

CreditSegmentation segment_for_credit(std::span<const int> decoded, const Vocab& vocab);

// Uniform sequence-level credit for AO and metric kinds; per-sentence credit
// for RO; their sum for RO+B4. An empty generation yields an all-zero trace.
RewardTrace assign_credit(RewardKind kind, const CreditSegmentation& seg,
                          double sequence_reward, std::span<const double> sentence_rewards);

// Frozen reward models (held by value; immutability is contractual and
// verified by checksum in the tests).
struct Teachers {
  std::optional<TeacherParams> absolute;
  std::optional<TeacherParams> relative;
};

// End-to-end: segment the decoded tokens, score them against the gold
// document under cfg.kind, and assign per-token credit.
RewardTrace compute_trace(std::span<const int> decoded, const EncodedRecord& gold,
                          Teachers& teachers, const Vocab& vocab, const PolicyConfig& cfg);

// Baseline-subtracted advantages; past the greedy length the baseline is the
// greedy sequence's mean token reward.
std::vector<double> advantages(const RewardTrace& sampled, const RewardTrace& greedy);

// -sum_t (r(y^_t) - r(y*_t)) log P(y^_t | ...), from the recorded log-probs.
double self_critical_loss(const DecodeResult& sampled, const RewardTrace& sampled_trace,
                          const DecodeResult& greedy, const RewardTrace& greedy_trace);
// Same quantity as a tape node for training.
VarId self_critical_loss_node(Tape& tape, std::span<const VarId> log_prob_vars,
                              std::span<const double> advantage);

// gamma * l_rl + (1 - gamma) * l_mle
double mixed_loss(double l_rl, double l_mle, double gamma);

// One dev generation's ingredients for the Eq.-17-style selection score.
struct DevGeneration {
  double bleu4 = 0.0;
  RewardTrace ro_trace;  // relative-order credit assignment
};

// mean over examples of (r_b4(y) / T) * sum_t r_RO(y_t)
double model_selection_score(std::span<const DevGeneration> dev);

struct PolicyEpochStats {
  double dev_reward = 0.0;    // mean per-token reward of greedy dev decodes
  double dev_mle = 0.0;       // eval-mode dev NLL
  double dev_mean_len = 0.0;  // mean generated text length
  double selection = 0.0;     // checkpoint-selection value for cfg.kind
};

struct PolicyTrainResult {
  GeneratorParams params;  // best checkpoint under the kind's selection rule
  PolicyEpochStats pretrained;
  std::vector<PolicyEpochStats> epochs;
  long best_epoch = -1;  // -1 means the pretrained model was never beaten
  double best_selection = 0.0;
};

// Self-critical fine-tuning with the mixed objective. Adam is re-initialized
// at cfg.lr and scheduled sampling is off. With gamma == 0 the objective
// collapses to plain MLE and no decoding or reward computation runs, so the
// trajectory is the one an MLE-only loop (same seed discipline) produces.
// Per-batch log lines {step, mean_reward, l_rl, l_mle, mixed} go to
// batch_log when given.
PolicyTrainResult train_policy(const GeneratorParams& pretrained, Teachers& teachers,
                               const std::vector<RecipeRecord>& train,
                               const std::vector<RecipeRecord>& dev, const Vocab& vocab,
                               const PolicyConfig& cfg, std::ostream* batch_log = nullptr);

// Dev-set statistics for a parameter snapshot (greedy decoding).
PolicyEpochStats eval_policy(GeneratorParams& params, Teachers& teachers,
                             const std::vector<EncodedRecord>& dev, const Vocab& vocab,
                             const PolicyConfig& cfg);

// The reward-exploitation diagnostic: generations collapse in length or the
// language model deteriorates.
struct DegenerationDiagnostic {
  double pretrained_mean_len = 0.0;
  double tuned_mean_len = 0.0;
  double pretrained_dev_mle = 0.0;
  double tuned_dev_mle = 0.0;

  bool length_collapsed() const { return tuned_mean_len < 0.5 * pretrained_mean_len; }
  bool mle_blown_up() const { return tuned_dev_mle > 2.0 * pretrained_dev_mle; }
  bool degenerate() const { return length_collapsed() || mle_blown_up(); }
};

// Compares the final epoch against the pretrained reference.
DegenerationDiagnostic detect_reward_exploitation(const PolicyTrainResult& result);

}  // namespace ordgen
