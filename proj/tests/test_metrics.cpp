#include <map>

#include "doctest.h"
#include "oracles.hpp"
#include "ordgen/metrics.hpp"
#include "ordgen/synthetic.hpp"

using namespace ordgen;

namespace {

std::vector<std::string> random_tokens(size_t len, size_t alphabet, Rng& rng) {
  std::vector<std::string> out;
  for (size_t i = 0; i < len; ++i) {
    out.push_back(std::string(1, static_cast<char>('a' + rng.below(alphabet))));
  }
  return out;
}

}  // namespace

TEST_CASE("bleu: worked examples") {
  using V = std::vector<std::string>;
  const V abc = {"a", "b", "c"};
  const V abd = {"a", "b", "d"};
  CHECK(bleu(abc, abc, 1) == 1.0);
  CHECK(bleu(abc, abc, 4) == 1.0);
  CHECK(bleu(abc, abd, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(bleu(V{"x", "y"}, abc, 1) == 0.0);  // no shared unigram
  CHECK(bleu(V{}, abc, 4) == 0.0);          // empty candidate
}

TEST_CASE("rouge-l: worked examples") {
  using V = std::vector<std::string>;
  const V ref = {"a", "b", "c", "d"};
  CHECK(rouge_l(ref, ref) == 1.0);
  // LCS = 3, P = 1, R = 0.75 -> F1 = 2 * 0.75 / 1.75
  CHECK(rouge_l(V{"a", "c", "d"}, ref) == doctest::Approx(2.0 * 0.75 / 1.75).epsilon(1e-12));
  CHECK(rouge_l(V{"x", "y"}, ref) == 0.0);
  CHECK(rouge_l(V{}, V{}) == 0.0);
}

TEST_CASE("bleu and rouge match independent oracles on 100 random pairs") {
  Rng rng(101);
  for (int it = 0; it < 100; ++it) {
    const auto cand = random_tokens(1 + rng.below(15), 4, rng);
    const auto ref = random_tokens(1 + rng.below(15), 4, rng);
    for (int n : {1, 2, 4}) {
      CHECK(bleu(cand, ref, n) == doctest::Approx(oracle::bleu(cand, ref, n)).epsilon(1e-12));
    }
    CHECK(rouge_l(cand, ref) == doctest::Approx(oracle::rouge_l(cand, ref)).epsilon(1e-12));
    // identical pairs are exactly 1
    CHECK(bleu(cand, cand, 4) == 1.0);
    CHECK(rouge_l(cand, cand) == 1.0);
  }
}

TEST_CASE("metrics are invariant under vocabulary relabeling") {
  Rng rng(103);
  for (int it = 0; it < 30; ++it) {
    const auto cand = random_tokens(1 + rng.below(12), 5, rng);
    const auto ref = random_tokens(1 + rng.below(12), 5, rng);
    auto relabel = [](const std::vector<std::string>& v) {
      std::vector<std::string> out;
      for (const auto& s : v) out.push_back("tok_" + s + "_renamed");
      return out;
    };
    CHECK(bleu(cand, ref, 4) == bleu(relabel(cand), relabel(ref), 4));
    CHECK(rouge_l(cand, ref) == rouge_l(relabel(cand), relabel(ref)));
  }
}

TEST_CASE("bleu-1 never drops when a non-matching token is replaced by a reference token") {
  Rng rng(107);
  for (int it = 0; it < 200; ++it) {
    // candidate over {a..d} plus an out-of-reference symbol "z"
    auto cand = random_tokens(2 + rng.below(10), 4, rng);
    const auto ref = random_tokens(2 + rng.below(10), 4, rng);
    const size_t pos = rng.below(cand.size());
    cand[pos] = "z";  // certainly non-matching
    const double before = bleu(cand, ref, 1);
    cand[pos] = ref[rng.below(ref.size())];  // now a matching unigram
    CHECK(bleu(cand, ref, 1) >= before - 1e-12);
  }
}

TEST_CASE("extract_actions: lexicon hits in token order, stems included") {
  const EventLexicon lex = synthetic_lexicon();
  const std::vector<std::string> tokens = {"melt",  "butter", ".",     "add",
                                           "flour", ",",      "stirring", "."};
  CHECK(extract_actions(tokens, lex) == std::vector<std::string>{"melt", "add", "stir"});
  CHECK(extract_actions({"nothing", "matches", "here"}, lex).empty());
  CHECK(extract_actions({"stirring"}, lex) == std::vector<std::string>{"stir"});
}

TEST_CASE("extract_state_changes: sorted expansion with multiset semantics") {
  const EventLexicon lex = synthetic_lexicon();
  CHECK(extract_state_changes({"melt"}, lex) ==
        std::vector<std::string>{"COMPOSITION", "TEMPERATURE"});
  CHECK(extract_state_changes({}, lex).empty());
  // two actions sharing a category repeat it in the sequence
  const auto seq = extract_state_changes({"mix", "stir"}, lex);
  CHECK(seq == std::vector<std::string>{"COMPOSITION", "COMPOSITION"});
  CHECK_THROWS_AS(extract_state_changes({"launch"}, lex), DataError);
}

TEST_CASE("evaluate_corpus") {
  const EventLexicon lex = synthetic_lexicon();
  const std::vector<std::vector<std::string>> golds = {
      tokenize("melt the butter . add the flour . serve warm ."),
      tokenize("wash the beans . cook the mixture . garnish with cheese ."),
  };

  SUBCASE("identical pairs score 1.0 everywhere") {
    const ScoreReport r = evaluate_corpus(golds, golds, lex);
    for (double v : {r.bleu1, r.bleu4, r.rouge, r.action_bleu1, r.action_bleu4,
                     r.action_rouge, r.state_bleu1, r.state_bleu4, r.state_rouge}) {
      CHECK(v == 1.0);
    }
  }
  SUBCASE("empty input and mismatched lengths are rejected") {
    CHECK_THROWS_AS(evaluate_corpus({}, {}, lex), DataError);
    CHECK_THROWS_AS(evaluate_corpus({golds[0]}, golds, lex), DataError);
  }
  SUBCASE("random fixture equals the mean of per-example oracle scores") {
    Rng rng(109);
    std::vector<std::vector<std::string>> gens, refs;
    const std::vector<std::string> verbs = {"melt", "add",  "stir", "wash",
                                            "cook", "bake", "serve", "x"};
    for (int i = 0; i < 20; ++i) {
      auto draw = [&] {
        std::vector<std::string> out;
        const size_t len = 1 + rng.below(10);
        for (size_t t = 0; t < len; ++t) out.push_back(verbs[rng.below(verbs.size())]);
        return out;
      };
      gens.push_back(draw());
      refs.push_back(draw());
    }
    const ScoreReport got = evaluate_corpus(gens, refs, lex);
    double b1 = 0, scb4 = 0, arl = 0;
    for (size_t i = 0; i < gens.size(); ++i) {
      b1 += oracle::bleu(gens[i], refs[i], 1);
      const auto ga = extract_actions(gens[i], lex);
      const auto ra = extract_actions(refs[i], lex);
      arl += oracle::rouge_l(ga, ra);
      scb4 += oracle::bleu(extract_state_changes(ga, lex), extract_state_changes(ra, lex), 4);
    }
    const double n = static_cast<double>(gens.size());
    CHECK(got.bleu1 == doctest::Approx(b1 / n).epsilon(1e-12));
    CHECK(got.action_rouge == doctest::Approx(arl / n).epsilon(1e-12));
    CHECK(got.state_bleu4 == doctest::Approx(scb4 / n).epsilon(1e-12));
  }
  SUBCASE("permutation invariance over example pairs") {
    std::vector<std::vector<std::string>> gens = {tokenize("melt the butter ."),
                                                  tokenize("wash the beans . serve .")};
    const ScoreReport fwd = evaluate_corpus(gens, golds, lex);
    std::vector<std::vector<std::string>> gens_r = {gens[1], gens[0]};
    std::vector<std::vector<std::string>> golds_r = {golds[1], golds[0]};
    const ScoreReport rev = evaluate_corpus(gens_r, golds_r, lex);
    CHECK(fwd.bleu1 == doctest::Approx(rev.bleu1).epsilon(1e-12));
    CHECK(fwd.state_rouge == doctest::Approx(rev.state_rouge).epsilon(1e-12));
  }
}

TEST_CASE("score report formatting") {
  ScoreReport r;
  r.bleu1 = 0.26855;
  r.state_rouge = 1.0;
  const std::string table = r.format_table();
  CHECK(table.find("BLEU-1") != std::string::npos);
  CHECK(table.find("26.86") != std::string::npos);   // x100, two decimals
  CHECK(table.find("100.00") != std::string::npos);
  const auto j = r.to_json();
  CHECK(j.at("BLEU-1").get<double>() == doctest::Approx(0.26855));
  CHECK(j.size() == 9);
}
