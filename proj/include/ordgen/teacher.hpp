#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ordgen/checkpoint.hpp"
#include "ordgen/corpus.hpp"
#include "ordgen/gru.hpp"
#include "ordgen/tape.hpp"

namespace ordgen {

enum class TeacherKind { kAbsolute, kRelative };

std::string teacher_kind_name(TeacherKind k);
TeacherKind parse_teacher_kind(const std::string& name);

// Sentence-order scorer: bag-of-words sentence embeddings fed to a GRU over
// sentences. Trained to push the encodings of forward- and reverse-ordered
// documents apart; frozen afterwards and used as a reward model.
struct TeacherParams {
  TeacherKind kind = TeacherKind::kRelative;
  Tensor embedding;  // [vocab, embedding_dim]
  GruParams gru;     // embedding_dim -> hidden_dim
  double dropout_rate = 0.3;

  static TeacherParams init(TeacherKind kind, size_t vocab_size, size_t embedding_dim,
                            size_t hidden_dim, double dropout, Rng& rng);

  size_t embedding_dim() const { return embedding.cols(); }
  size_t hidden_dim() const { return gru.hidden_size(); }

  std::vector<std::pair<std::string, Tensor*>> named_parameters();
  std::vector<Tensor*> parameters();
  void set_requires_grad(bool on);
  uint64_t checksum() const;

  Checkpoint to_checkpoint(const Vocab& vocab, uint64_t seed) const;
  static TeacherParams from_checkpoint(const Checkpoint& ck);
};

// Teacher parameters registered on a tape, plus the training-mode dropout
// context.
struct TeacherNet {
  Tape* tape = nullptr;
  const TeacherParams* params = nullptr;
  VarId embedding = -1;
  GruVars gru;
  bool training = false;
  Rng* rng = nullptr;

  // s_j = sum_i x_ij over the sentence's word embeddings (token ids are
  // summed in sorted order so any within-sentence permutation produces the
  // bit-identical vector); dropout follows in training mode.
  VarId sentence_bow(std::span<const int> sentence) const;

  // Fold the GRU over sentence vectors from a zero state; returns the final
  // hidden state f(S).
  VarId encode(std::span<const VarId> sentence_vecs) const;

  // cosine(f(forward), f(reverse)) of a sentence slice; the training
  // objective for both teacher kinds.
  VarId order_loss(std::span<const std::vector<int>> sentences) const;
};

TeacherNet bind_teacher(Tape& tape, TeacherParams& params, bool training, Rng* rng);

// Eval-mode document encoding on a private tape; used by tests and rewards.
Tensor teacher_encode(const TeacherParams& p, std::span<const std::vector<int>> sentences,
                      bool reversed);

// A window of a document's sentence list.
struct SubsequenceSample {
  size_t start = 0;
  size_t length = 0;
};

// k windows with replacement: length uniform over the feasible subrange of
// [l_min, l_max], start uniform over valid positions. Documents shorter than
// l_min yield no samples.
std::vector<SubsequenceSample> sample_subsequences(size_t n_sentences, size_t l_min,
                                                   size_t l_max, size_t k, Rng& rng);

struct TeacherConfig {
  TeacherKind kind = TeacherKind::kRelative;
  size_t embedding_dim = 100;
  size_t hidden_dim = 100;
  double dropout = 0.3;
  double lr = 1e-3;
  size_t epochs = 20;
  size_t patience = 5;  // early stop after this many non-improving epochs
  size_t batch_size = 32;
  size_t l_min = 3;
  size_t l_max = 6;
  size_t windows_per_doc = 20;
  uint64_t seed = 1;
};

struct TeacherTrainResult {
  TeacherParams params;  // best dev-loss snapshot
  double untrained_dev_loss = 0.0;
  std::vector<double> dev_losses;  // one per trained epoch
  size_t best_epoch = 0;
};

// Minimizes the mean order loss with Adam. The absolute kind trains on whole
// documents (>= 2 sentences); the relative kind trains on sampled windows.
// Throws DataError when filtering leaves no trainable document.
TeacherTrainResult train_teacher(const std::vector<SegmentedDoc>& train_docs,
                                 const std::vector<SegmentedDoc>& dev_docs, size_t vocab_size,
                                 const TeacherConfig& cfg);

}  // namespace ordgen
