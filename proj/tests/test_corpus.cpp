#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ordgen/corpus.hpp"
#include "ordgen/lexicon.hpp"
#include "ordgen/synthetic.hpp"

using namespace ordgen;
namespace fs = std::filesystem;

namespace {

RecipeRecord record_from(const std::string& title, std::vector<std::string> ings,
                         const std::string& text) {
  RawRecipe raw;
  raw.title = title;
  raw.ingredients = std::move(ings);
  raw.text = text;
  return to_record(raw);
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("ordgen_test_" + name);
}

}  // namespace

TEST_CASE("tokenize lowercases and splits punctuation") {
  CHECK(tokenize("Melt butter.") == std::vector<std::string>{"melt", "butter", "."});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("Add flour, stirring.") ==
        std::vector<std::string>{"add", "flour", ",", "stirring", "."});
}

TEST_CASE("split_sentences") {
  const std::set<int> delims = {9};
  SUBCASE("delimiters close sentences") {
    const std::vector<int> toks = {1, 2, 9, 3, 4, 9};
    const SegmentedDoc doc = split_sentences(toks, delims);
    REQUIRE(doc.size() == 2);
    CHECK(doc.sentences[0] == std::vector<int>{1, 2, 9});
    CHECK(doc.sentences[1] == std::vector<int>{3, 4, 9});
  }
  SUBCASE("no delimiter: one sentence") {
    const std::vector<int> toks = {1, 2, 3};
    CHECK(split_sentences(toks, delims).size() == 1);
  }
  SUBCASE("delimiter-only input: zero sentences") {
    const std::vector<int> toks = {9, 9};
    CHECK(split_sentences(toks, delims).size() == 0);
  }
  SUBCASE("concatenation of sentences reproduces delimiter-terminated input") {
    const std::vector<int> toks = {5, 9, 1, 2, 9, 7, 7, 7, 9};
    const SegmentedDoc doc = split_sentences(toks, delims);
    std::vector<int> flat;
    for (const auto& s : doc.sentences) flat.insert(flat.end(), s.begin(), s.end());
    CHECK(flat == toks);
  }
}

TEST_CASE("vocab: min_count, reserved ids, unknown lookup") {
  const std::vector<RecipeRecord> corpus = {record_from("x", {}, "a a b c.")};
  const Vocab v = Vocab::build(corpus, 2, {"."});
  CHECK(v.contains("a"));
  CHECK_FALSE(v.contains("b"));
  CHECK_FALSE(v.contains("c"));
  CHECK(v.id("zzz") == Vocab::kUnk);
  CHECK(v.id("<pad>") == Vocab::kPad);
  CHECK(v.id("<eos>") == Vocab::kEos);
  CHECK(v.is_delimiter(v.id(".")));

  const Vocab all = Vocab::build(corpus, 1, {"."});
  CHECK(all.contains("b"));
  CHECK(all.contains("c"));

  CHECK_THROWS_AS(Vocab::build({}, 1, {"."}), DataError);
  CHECK_THROWS_AS(Vocab::build(corpus, 0, {"."}), DataError);
}

TEST_CASE("vocab checksum is stable and content-sensitive") {
  const std::vector<RecipeRecord> corpus = {record_from("x", {"y"}, "x y z.")};
  const Vocab a = Vocab::build(corpus, 1, {"."});
  const Vocab b = Vocab::build(corpus, 1, {"."});
  CHECK(a.checksum() == b.checksum());
  const Vocab c = Vocab::build(corpus, 2, {"."});
  CHECK(a.checksum() != c.checksum());
}

TEST_CASE("make_batches: coverage, fullness, masks") {
  std::vector<RecipeRecord> corpus;
  for (int i = 0; i < 64; ++i) corpus.push_back(record_from("t", {"x"}, "a b c."));
  const Vocab v = Vocab::build(corpus, 1, {"."});
  Rng rng(1);

  SUBCASE("64 identical records, size 32: two full batches") {
    const auto batches = make_batches(corpus, v, 32, rng);
    REQUIRE(batches.size() == 2);
    CHECK(batches[0].size() == 32);
    CHECK(batches[1].size() == 32);
  }
  SUBCASE("one record: one batch of one") {
    const std::vector<RecipeRecord> single = {corpus[0]};
    const auto batches = make_batches(single, v, 32, rng);
    REQUIRE(batches.size() == 1);
    CHECK(batches[0].size() == 1);
  }
  SUBCASE("every record appears exactly once") {
    const auto batches = make_batches(corpus, v, 10, rng);
    std::vector<int> seen(corpus.size(), 0);
    for (const auto& b : batches) {
      for (size_t idx : b.indices) seen[idx]++;
    }
    for (int s : seen) CHECK(s == 1);
  }
  SUBCASE("mixed lengths: masks mark padding exactly") {
    std::vector<RecipeRecord> mixed = {record_from("t", {"x"}, "a."),
                                       record_from("t", {"x", "y y"}, "a b c d e.")};
    const Vocab mv = Vocab::build(mixed, 1, {"."});
    const auto batches = make_batches(mixed, mv, 2, rng);
    REQUIRE(batches.size() == 1);
    const Batch& b = batches[0];
    for (size_t r = 0; r < b.size(); ++r) {
      const auto& rec = mixed[b.indices[r]];
      for (size_t t = 0; t < b.body_ids[r].size(); ++t) {
        const bool real = t < rec.body_tokens.size();
        CHECK(b.body_mask[r][t] == (real ? 1.0 : 0.0));
        if (!real) CHECK(b.body_ids[r][t] == Vocab::kPad);
      }
    }
  }
}

TEST_CASE("lexicon: load, categories, errors, round-trip") {
  const fs::path path = temp_file("lexicon.tsv");
  {
    std::ofstream out(path);
    out << "melt\tmelt\tTEMPERATURE,COMPOSITION\n";
    out << "add\tadd\tLOCATION\n";
    out << "measure\tmeasure\t\n";
  }
  const EventLexicon lex = EventLexicon::load(path.string());
  CHECK(lex.size() == 3);
  const LexiconEntry* melt = lex.find_lemma("melt");
  REQUIRE(melt != nullptr);
  CHECK(melt->action == "melt");
  CHECK(melt->state_changes ==
        std::set<StateChange>{StateChange::kTemperature, StateChange::kComposition});
  CHECK(lex.find_lemma("measure")->state_changes.empty());

  SUBCASE("unknown category names the line") {
    const fs::path bad = temp_file("lexicon_bad.tsv");
    {
      std::ofstream out(bad);
      out << "melt\tmelt\tTEMPERATURE\n";
      out << "paint\tpaint\tCOLOR\n";
    }
    CHECK_THROWS_WITH_AS(EventLexicon::load(bad.string()), doctest::Contains(":2"), DataError);
    fs::remove(bad);
  }
  SUBCASE("empty file is a valid empty lexicon") {
    const fs::path empty = temp_file("lexicon_empty.tsv");
    { std::ofstream out(empty); }
    CHECK(EventLexicon::load(empty.string()).empty());
    fs::remove(empty);
  }
  SUBCASE("load-save-load round-trips") {
    const fs::path copy = temp_file("lexicon_copy.tsv");
    lex.save(copy.string());
    const EventLexicon again = EventLexicon::load(copy.string());
    REQUIRE(again.size() == lex.size());
    for (const auto& [lemma, entry] : lex.entries()) {
      const LexiconEntry* e = again.find_lemma(lemma);
      REQUIRE(e != nullptr);
      CHECK(e->action == entry.action);
      CHECK(e->state_changes == entry.state_changes);
    }
    fs::remove(copy);
  }
  fs::remove(path);
}

TEST_CASE("stem candidates cover the s/es/ed/ing rules") {
  auto has = [](const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
  };
  CHECK(has(stem_candidates("stirring"), "stir"));   // ing + undouble
  CHECK(has(stem_candidates("baking"), "bake"));     // ing + restore e
  CHECK(has(stem_candidates("added"), "add"));       // ed
  CHECK(has(stem_candidates("dishes"), "dish"));     // es
  CHECK(has(stem_candidates("onions"), "onion"));    // s
  CHECK(has(stem_candidates("melt"), "melt"));       // identity
}

TEST_CASE("corpus file round-trip and validation") {
  const fs::path path = temp_file("corpus.jsonl");
  std::vector<RawRecipe> raws = {{"Cheese Bake", {"cheese", "fresh milk"}, "Melt cheese. Serve."},
                                 {"Salt Soup", {}, "Boil water."}};
  save_corpus(path.string(), raws);
  const auto records = load_corpus(path.string());
  REQUIRE(records.size() == 2);
  CHECK(records[0].title_tokens == std::vector<std::string>{"cheese", "bake"});
  CHECK(records[0].ingredients.size() == 2);
  CHECK(records[1].ingredients.empty());
  CHECK(records[0].body_tokens.front() == "melt");

  SUBCASE("empty body rejected with line number") {
    std::ofstream out(path);
    out << R"({"title": "x", "ingredients": [], "text": "ok."})" << "\n";
    out << R"({"title": "y", "ingredients": [], "text": ""})" << "\n";
    out.close();
    CHECK_THROWS_WITH_AS(load_corpus(path.string()), doctest::Contains(":2"), DataError);
  }
  SUBCASE("malformed json rejected") {
    std::ofstream out(path);
    out << "{not json}\n";
    out.close();
    CHECK_THROWS_AS(load_corpus(path.string()), DataError);
  }
  fs::remove(path);
}

TEST_CASE("synthetic corpus: determinism, stage order, boundaries") {
  const SyntheticGrammar g = SyntheticGrammar::standard();

  SUBCASE("fixed seed reruns bitwise-identically") {
    const auto a = generate_synthetic_corpus(99, 40, g);
    const auto b = generate_synthetic_corpus(99, 40, g);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].title == b[i].title);
      CHECK(a[i].text == b[i].text);
      CHECK(a[i].ingredients == b[i].ingredients);
    }
  }
  SUBCASE("stage labels are sorted in every document") {
    for (const auto& raw : generate_synthetic_corpus(3, 60, g)) {
      const RecipeRecord rec = to_record(raw);
      const Vocab v = Vocab::build({rec}, 1, {"."});
      const SegmentedDoc doc = split_sentences(v.encode(rec.body_tokens), v.delimiter_ids());
      int prev_stage = -1;
      for (const auto& sent : doc.sentences) {
        const int stage = g.stage_of_sentence(v.decode(sent));
        REQUIRE(stage >= 0);
        CHECK(stage >= prev_stage);
        prev_stage = stage;
      }
    }
  }
  SUBCASE("zero recipes yields an empty corpus") {
    CHECK(generate_synthetic_corpus(1, 0, g).empty());
  }
  SUBCASE("records are pairwise distinct") {
    const auto all = generate_synthetic_corpus(7, 120, g);
    std::set<std::string> keys;
    for (const auto& r : all) {
      std::string k = r.title + "|" + r.text;
      for (const auto& i : r.ingredients) k += "|" + i;
      keys.insert(k);
    }
    CHECK(keys.size() == all.size());
  }
}

TEST_CASE("synthetic lexicon covers the grammar verbs") {
  const EventLexicon lex = synthetic_lexicon();
  const SyntheticGrammar g = SyntheticGrammar::standard();
  for (const auto& stage : g.stages) {
    for (const auto& tpl : stage.templates) {
      const auto toks = tokenize(tpl);
      CHECK(lex.match_token(toks.front()) != nullptr);
    }
  }
}
