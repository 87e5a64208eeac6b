#include "ordgen/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "ordgen/checksum.hpp"

namespace ordgen {

namespace {
const std::vector<std::string> kReserved = {"<pad>", "<unk>", "<bos>", "<eos>"};
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      flush();
    } else if (std::ispunct(c)) {
      flush();
      out.emplace_back(1, static_cast<char>(c));
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return out;
}

std::vector<size_t> SegmentedDoc::lengths() const {
  std::vector<size_t> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(s.size());
  return out;
}

size_t SegmentedDoc::total_tokens() const {
  size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

SegmentedDoc split_sentences(std::span<const int> tokens, const std::set<int>& delimiters) {
  if (delimiters.empty()) throw DataError("split_sentences: empty delimiter set");
  SegmentedDoc doc;
  std::vector<int> cur;
  bool has_content = false;
  auto close = [&] {
    if (has_content) doc.sentences.push_back(cur);
    cur.clear();
    has_content = false;
  };
  for (int t : tokens) {
    cur.push_back(t);
    if (delimiters.count(t)) {
      close();
    } else {
      has_content = true;
    }
  }
  close();  // trailing run with no delimiter
  return doc;
}

Vocab Vocab::build(const std::vector<RecipeRecord>& corpus, int min_count,
                   const std::vector<std::string>& delimiters) {
  if (min_count < 1) throw DataError("build_vocab: min_count must be >= 1");
  if (corpus.empty()) throw DataError("build_vocab: empty corpus");
  std::map<std::string, long> counts;
  auto tally = [&](const std::vector<std::string>& toks) {
    for (const auto& t : toks) counts[t] += 1;
  };
  for (const auto& r : corpus) {
    tally(r.title_tokens);
    for (const auto& ing : r.ingredients) tally(ing);
    tally(r.body_tokens);
  }
  std::vector<std::pair<std::string, long>> kept(counts.begin(), counts.end());
  std::erase_if(kept, [&](const auto& kv) { return kv.second < min_count; });
  // frequency-major, then lexicographic: a deterministic id assignment
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> toks;
  for (auto& [t, c] : kept) toks.push_back(t);
  return from_tokens(std::move(toks), delimiters);
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens, std::vector<std::string> delimiters) {
  if (delimiters.empty()) throw DataError("vocab: delimiter set must be nonempty");
  Vocab v;
  auto add = [&](const std::string& t) {
    if (v.ids_.count(t)) return;
    v.ids_[t] = static_cast<int>(v.tokens_.size());
    v.tokens_.push_back(t);
  };
  for (const auto& t : kReserved) add(t);
  for (const auto& d : delimiters) add(d);
  for (auto& t : tokens) add(t);
  v.delimiters_ = std::move(delimiters);
  for (const auto& d : v.delimiters_) v.delimiter_ids_.insert(v.ids_.at(d));
  return v;
}

int Vocab::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || static_cast<size_t>(id) >= tokens_.size()) {
    throw DataError("vocab: id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<size_t>(id)];
}

bool Vocab::contains(const std::string& token) const { return ids_.count(token) > 0; }

std::vector<int> Vocab::encode(std::span<const std::string> tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

std::vector<std::string> Vocab::decode(std::span<const int> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

uint64_t Vocab::checksum() const {
  Fnv1a h;
  for (const auto& t : tokens_) {
    h.update(t);
    h.update("\n", 1);
  }
  h.update("|delims|", 8);
  for (const auto& d : delimiters_) {
    h.update(d);
    h.update("\n", 1);
  }
  return h.digest();
}

EncodedRecord encode_record(const RecipeRecord& r, const Vocab& v) {
  EncodedRecord e;
  e.title = v.encode(r.title_tokens);
  for (const auto& ing : r.ingredients) e.ingredients.push_back(v.encode(ing));
  e.body = v.encode(r.body_tokens);
  return e;
}

std::vector<EncodedRecord> encode_records(const std::vector<RecipeRecord>& rs, const Vocab& v) {
  std::vector<EncodedRecord> out;
  out.reserve(rs.size());
  for (const auto& r : rs) out.push_back(encode_record(r, v));
  return out;
}

std::vector<Batch> make_batches(const std::vector<RecipeRecord>& corpus, const Vocab& vocab,
                                size_t batch_size, Rng& rng) {
  if (batch_size < 1) throw DataError("make_batches: batch size must be >= 1");
  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const auto ka = std::make_tuple(corpus[a].body_tokens.size(), corpus[a].ingredients.size(), a);
    const auto kb = std::make_tuple(corpus[b].body_tokens.size(), corpus[b].ingredients.size(), b);
    return ka < kb;
  });

  std::vector<Batch> batches;
  for (size_t start = 0; start < order.size(); start += batch_size) {
    const size_t end = std::min(order.size(), start + batch_size);
    Batch b;
    b.indices.assign(order.begin() + static_cast<long>(start),
                     order.begin() + static_cast<long>(end));
    size_t max_t = 0, max_b = 0, max_i = 0, max_w = 0;
    for (size_t i : b.indices) {
      const auto& r = corpus[i];
      max_t = std::max(max_t, r.title_tokens.size());
      max_b = std::max(max_b, r.body_tokens.size());
      max_i = std::max(max_i, r.ingredients.size());
      for (const auto& ing : r.ingredients) max_w = std::max(max_w, ing.size());
    }
    for (size_t i : b.indices) {
      const auto& r = corpus[i];
      const EncodedRecord enc = encode_record(r, vocab);
      auto pad_row = [&](const std::vector<int>& ids, size_t width, std::vector<int>& out_ids,
                         std::vector<double>& out_mask) {
        out_ids.assign(width, Vocab::kPad);
        out_mask.assign(width, 0.0);
        for (size_t k = 0; k < ids.size(); ++k) {
          out_ids[k] = ids[k];
          out_mask[k] = 1.0;
        }
      };
      b.title_ids.emplace_back();
      b.title_mask.emplace_back();
      pad_row(enc.title, max_t, b.title_ids.back(), b.title_mask.back());
      b.body_ids.emplace_back();
      b.body_mask.emplace_back();
      pad_row(enc.body, max_b, b.body_ids.back(), b.body_mask.back());
      b.ingredient_ids.emplace_back(max_i);
      b.ingredient_mask.emplace_back(max_i);
      for (size_t j = 0; j < max_i; ++j) {
        const std::vector<int> empty;
        pad_row(j < enc.ingredients.size() ? enc.ingredients[j] : empty, max_w,
                b.ingredient_ids.back()[j], b.ingredient_mask.back()[j]);
      }
    }
    batches.push_back(std::move(b));
  }
  rng.shuffle(batches);
  return batches;
}

RecipeRecord to_record(const RawRecipe& raw) {
  RecipeRecord r;
  r.title_tokens = tokenize(raw.title);
  for (const auto& ing : raw.ingredients) r.ingredients.push_back(tokenize(ing));
  r.body_tokens = tokenize(raw.text);
  return r;
}

std::vector<RecipeRecord> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);
  std::vector<RecipeRecord> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": bad record: " + e.what());
    }
    if (!j.contains("title") || !j.contains("ingredients") || !j.contains("text")) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": record needs title/ingredients/text");
    }
    RawRecipe raw;
    raw.title = j.at("title").get<std::string>();
    raw.ingredients = j.at("ingredients").get<std::vector<std::string>>();
    raw.text = j.at("text").get<std::string>();
    RecipeRecord r = to_record(raw);
    if (r.body_tokens.empty()) {
      throw DataError(path + ":" + std::to_string(lineno) + ": empty recipe body");
    }
    for (const auto& ing : r.ingredients) {
      if (ing.empty()) {
        throw DataError(path + ":" + std::to_string(lineno) + ": empty ingredient phrase");
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

void save_corpus(const std::string& path, const std::vector<RawRecipe>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus file: " + path);
  for (const auto& r : records) {
    nlohmann::json j;
    j["title"] = r.title;
    j["ingredients"] = r.ingredients;
    j["text"] = r.text;
    out << j.dump() << "\n";
  }
}

}  // namespace ordgen
