#include "ordgen/teacher.hpp"

#include <algorithm>
#include <numeric>

#include "ordgen/adam.hpp"
#include "ordgen/checksum.hpp"

namespace ordgen {

std::string teacher_kind_name(TeacherKind k) {
  return k == TeacherKind::kAbsolute ? "absolute" : "relative";
}

TeacherKind parse_teacher_kind(const std::string& name) {
  if (name == "absolute") return TeacherKind::kAbsolute;
  if (name == "relative") return TeacherKind::kRelative;
  throw DataError("unknown teacher kind: " + name);
}

TeacherParams TeacherParams::init(TeacherKind kind, size_t vocab_size, size_t embedding_dim,
                                  size_t hidden_dim, double dropout, Rng& rng) {
  TeacherParams p;
  p.kind = kind;
  p.embedding = Tensor::embedding(vocab_size, embedding_dim, rng);
  p.gru = GruParams::init(embedding_dim, hidden_dim, rng);
  p.dropout_rate = dropout;
  return p;
}

std::vector<std::pair<std::string, Tensor*>> TeacherParams::named_parameters() {
  std::vector<std::pair<std::string, Tensor*>> out = {{"embedding", &embedding}};
  for (auto& kv : gru.named_parameters("gru.")) out.push_back(kv);
  return out;
}

std::vector<Tensor*> TeacherParams::parameters() {
  std::vector<Tensor*> out;
  for (auto& [name, t] : named_parameters()) out.push_back(t);
  return out;
}

void TeacherParams::set_requires_grad(bool on) {
  for (Tensor* t : parameters()) t->requires_grad = on;
}

uint64_t TeacherParams::checksum() const {
  Fnv1a h;
  for (auto& [name, t] : const_cast<TeacherParams*>(this)->named_parameters()) {
    h.update(name);
    h.update(t->values);
  }
  return h.digest();
}

Checkpoint TeacherParams::to_checkpoint(const Vocab& vocab, uint64_t seed) const {
  Checkpoint ck;
  ck.meta["kind"] = "teacher-" + teacher_kind_name(kind);
  ck.meta["embedding_dim"] = embedding_dim();
  ck.meta["hidden_dim"] = hidden_dim();
  ck.meta["dropout"] = dropout_rate;
  ck.meta["seed"] = seed;
  ck.meta["vocab_checksum"] = checksum_hex(vocab.checksum());
  ck.meta["vocab"] = {{"tokens", vocab.tokens()}, {"delimiters", vocab.delimiter_tokens()}};
  for (auto& [name, t] : const_cast<TeacherParams*>(this)->named_parameters()) {
    ck.add(name, *t);
  }
  return ck;
}

TeacherParams TeacherParams::from_checkpoint(const Checkpoint& ck) {
  const std::string kind = ck.kind();
  if (kind != "teacher-absolute" && kind != "teacher-relative") {
    throw CheckpointError("expected a teacher checkpoint, got kind '" + kind + "'");
  }
  TeacherParams p;
  p.kind = parse_teacher_kind(kind.substr(std::string("teacher-").size()));
  p.dropout_rate = ck.meta.value("dropout", 0.3);
  p.embedding = ck.get("embedding");
  for (auto& [name, t] : p.gru.named_parameters("gru.")) *t = ck.get(name);
  return p;
}

VarId TeacherNet::sentence_bow(std::span<const int> sentence) const {
  if (sentence.empty()) {
    throw std::invalid_argument("sentence_bow: empty sentence");
  }
  std::vector<int> ids(sentence.begin(), sentence.end());
  std::sort(ids.begin(), ids.end());  // canonical summation order
  VarId s = tape->rows_sum(embedding, ids);
  return tape->dropout(s, params->dropout_rate, training, rng);
}

VarId TeacherNet::encode(std::span<const VarId> sentence_vecs) const {
  if (sentence_vecs.empty()) {
    throw std::invalid_argument("teacher encode: empty sentence list");
  }
  return gru_fold(*tape, sentence_vecs, gru, params->hidden_dim());
}

VarId TeacherNet::order_loss(std::span<const std::vector<int>> sentences) const {
  std::vector<VarId> vecs;
  vecs.reserve(sentences.size());
  for (const auto& s : sentences) vecs.push_back(sentence_bow(s));
  std::vector<VarId> rev(vecs.rbegin(), vecs.rend());
  return tape->cosine(encode(vecs), encode(rev));
}

TeacherNet bind_teacher(Tape& tape, TeacherParams& params, bool training, Rng* rng) {
  TeacherNet net;
  net.tape = &tape;
  net.params = &params;
  net.embedding = tape.param(params.embedding);
  net.gru = gru_on_tape(tape, params.gru);
  net.training = training;
  net.rng = rng;
  return net;
}

Tensor teacher_encode(const TeacherParams& p, std::span<const std::vector<int>> sentences,
                      bool reversed) {
  Tape tape(false);
  TeacherNet net = bind_teacher(tape, const_cast<TeacherParams&>(p), false, nullptr);
  std::vector<VarId> vecs;
  vecs.reserve(sentences.size());
  for (const auto& s : sentences) vecs.push_back(net.sentence_bow(s));
  if (reversed) std::reverse(vecs.begin(), vecs.end());
  return tape.value(net.encode(vecs));
}

std::vector<SubsequenceSample> sample_subsequences(size_t n_sentences, size_t l_min,
                                                   size_t l_max, size_t k, Rng& rng) {
  std::vector<SubsequenceSample> out;
  if (l_min > l_max || n_sentences < l_min) return out;
  const size_t hi = std::min(l_max, n_sentences);
  out.reserve(k);
  for (size_t i = 0; i < k; ++i) {
    const size_t len = l_min + rng.below(hi - l_min + 1);
    const size_t start = rng.below(n_sentences - len + 1);
    out.push_back({start, len});
  }
  return out;
}

namespace {

std::vector<std::vector<int>> slice(const SegmentedDoc& doc, size_t start, size_t len) {
  return {doc.sentences.begin() + static_cast<long>(start),
          doc.sentences.begin() + static_cast<long>(start + len)};
}

// mean order loss over fixed evaluation slices, eval mode
double eval_loss(TeacherParams& params,
                 const std::vector<std::vector<std::vector<int>>>& slices) {
  double total = 0.0;
  for (const auto& s : slices) {
    Tape tape(false);
    TeacherNet net = bind_teacher(tape, params, false, nullptr);
    total += tape.scalar(net.order_loss(s));
  }
  return total / static_cast<double>(slices.size());
}

}  // namespace

TeacherTrainResult train_teacher(const std::vector<SegmentedDoc>& train_docs,
                                 const std::vector<SegmentedDoc>& dev_docs, size_t vocab_size,
                                 const TeacherConfig& cfg) {
  Rng master(cfg.seed);
  Rng init_rng(master.fork());
  Rng data_rng(master.fork());
  Rng dropout_rng(master.fork());
  Rng dev_rng(master.fork());

  const bool relative = cfg.kind == TeacherKind::kRelative;
  const size_t min_sentences = relative ? cfg.l_min : 2;

  std::vector<size_t> trainable;
  for (size_t i = 0; i < train_docs.size(); ++i) {
    if (train_docs[i].size() >= min_sentences) trainable.push_back(i);
  }
  if (trainable.empty()) {
    throw DataError("train_teacher: no document has the required " +
                    std::to_string(min_sentences) + " sentences");
  }

  // fixed dev slices so per-epoch losses are comparable
  std::vector<std::vector<std::vector<int>>> dev_slices;
  for (const auto& doc : dev_docs) {
    if (doc.size() < min_sentences) continue;
    if (relative) {
      for (const auto& w :
           sample_subsequences(doc.size(), cfg.l_min, cfg.l_max, cfg.windows_per_doc, dev_rng)) {
        dev_slices.push_back(slice(doc, w.start, w.length));
      }
    } else {
      dev_slices.push_back(doc.sentences);
    }
  }
  if (dev_slices.empty()) {
    throw DataError("train_teacher: dev set has no usable document");
  }

  TeacherParams params = TeacherParams::init(cfg.kind, vocab_size, cfg.embedding_dim,
                                             cfg.hidden_dim, cfg.dropout, init_rng);
  params.set_requires_grad(true);
  AdamOptimizer opt(params.parameters(), cfg.lr);

  TeacherTrainResult result;
  result.untrained_dev_loss = eval_loss(params, dev_slices);
  double best = result.untrained_dev_loss;
  TeacherParams best_params = params;
  size_t since_best = 0;

  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<size_t> order = trainable;
    data_rng.shuffle(order);
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t end = std::min(order.size(), start + cfg.batch_size);
      Tape tape;
      TeacherNet net = bind_teacher(tape, params, true, &dropout_rng);
      std::vector<VarId> losses;
      for (size_t i = start; i < end; ++i) {
        const SegmentedDoc& doc = train_docs[order[i]];
        if (relative) {
          for (const auto& w : sample_subsequences(doc.size(), cfg.l_min, cfg.l_max,
                                                   cfg.windows_per_doc, data_rng)) {
            if (w.length < 2) continue;  // degenerate: forward == reverse
            losses.push_back(net.order_loss(slice(doc, w.start, w.length)));
          }
        } else {
          losses.push_back(net.order_loss(doc.sentences));
        }
      }
      if (losses.empty()) continue;
      const std::vector<double> weights(losses.size(), 1.0 / static_cast<double>(losses.size()));
      const VarId batch_loss = tape.weighted_sum(losses, weights);
      opt.zero_grad();
      tape.backward(batch_loss);
      opt.step();
    }

    const double dev = eval_loss(params, dev_slices);
    result.dev_losses.push_back(dev);
    if (dev < best) {
      best = dev;
      best_params = params;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }

  best_params.set_requires_grad(false);
  result.params = std::move(best_params);
  return result;
}

}  // namespace ordgen
