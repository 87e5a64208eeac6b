#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ordgen/rng.hpp"

namespace ordgen {

// Thrown for malformed corpus/lexicon/report inputs; the CLI maps it to
// exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One recipe: the unit of training and evaluation.
struct RecipeRecord {
  std::vector<std::string> title_tokens;
  std::vector<std::vector<std::string>> ingredients;  // one token list per phrase
  std::vector<std::string> body_tokens;
};

// Lowercases, separates punctuation into standalone tokens, splits on
// whitespace.
std::vector<std::string> tokenize(const std::string& text);

// A document as delimiter-segmented sentences of token ids.
struct SegmentedDoc {
  std::vector<std::vector<int>> sentences;

  size_t size() const { return sentences.size(); }
  bool empty() const { return sentences.empty(); }
  std::vector<size_t> lengths() const;
  size_t total_tokens() const;
};

// Each delimiter closes a sentence; a trailing undelimited run forms a final
// sentence; sentences containing only delimiters are dropped.
SegmentedDoc split_sentences(std::span<const int> tokens, const std::set<int>& delimiters);

// Token <-> id bijection with reserved PAD/UNK/BOS/EOS ids and a declared
// sentence-delimiter set.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;

  // Counts tokens over titles, ingredients and bodies; tokens below
  // min_count map to UNK. Reserved and delimiter tokens are always present.
  static Vocab build(const std::vector<RecipeRecord>& corpus, int min_count,
                     const std::vector<std::string>& delimiters);
  static Vocab from_tokens(std::vector<std::string> tokens,
                           std::vector<std::string> delimiters);

  int id(const std::string& token) const;  // UNK for unseen tokens
  const std::string& token(int id) const;
  bool contains(const std::string& token) const;
  size_t size() const { return tokens_.size(); }

  std::vector<int> encode(std::span<const std::string> tokens) const;
  std::vector<std::string> decode(std::span<const int> ids) const;

  const std::set<int>& delimiter_ids() const { return delimiter_ids_; }
  const std::vector<std::string>& delimiter_tokens() const { return delimiters_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  bool is_delimiter(int id) const { return delimiter_ids_.count(id) > 0; }

  uint64_t checksum() const;

 private:
  std::vector<std::string> tokens_;              // id -> token
  std::map<std::string, int> ids_;               // token -> id
  std::vector<std::string> delimiters_;
  std::set<int> delimiter_ids_;
};

// A record with every field mapped through the vocab.
struct EncodedRecord {
  std::vector<int> title;
  std::vector<std::vector<int>> ingredients;
  std::vector<int> body;
};

EncodedRecord encode_record(const RecipeRecord& r, const Vocab& v);
std::vector<EncodedRecord> encode_records(const std::vector<RecipeRecord>& rs, const Vocab& v);

// Padded minibatch. Masks are 1 on real tokens and 0 exactly on padding.
struct Batch {
  std::vector<size_t> indices;  // positions in the source corpus
  std::vector<std::vector<int>> title_ids;
  std::vector<std::vector<double>> title_mask;
  std::vector<std::vector<std::vector<int>>> ingredient_ids;
  std::vector<std::vector<std::vector<double>>> ingredient_mask;
  std::vector<std::vector<int>> body_ids;
  std::vector<std::vector<double>> body_mask;

  size_t size() const { return indices.size(); }
};

// Buckets records by (body length, ingredient count) so padding within a
// batch is small, then shuffles batch order with the provided rng.
std::vector<Batch> make_batches(const std::vector<RecipeRecord>& corpus, const Vocab& vocab,
                                size_t batch_size, Rng& rng);

// Raw (untokenized) record as stored on disk.
struct RawRecipe {
  std::string title;
  std::vector<std::string> ingredients;
  std::string text;
};

// Line-delimited JSON: {"title": str, "ingredients": [str], "text": str}.
std::vector<RecipeRecord> load_corpus(const std::string& path);
void save_corpus(const std::string& path, const std::vector<RawRecipe>& records);
RecipeRecord to_record(const RawRecipe& raw);

}  // namespace ordgen
