#pragma once

#include <string>
#include <vector>

#include "ordgen/corpus.hpp"
#include "ordgen/lexicon.hpp"
#include "ordgen/rng.hpp"

namespace ordgen {

// One stage of the scripted procedure; templates may reference {ing},
// {ing2} (a different ingredient of the same recipe) and {n} (minutes).
struct SyntheticStage {
  std::string name;
  size_t min_sentences = 1;
  size_t max_sentences = 1;
  std::vector<std::string> templates;
};

// An ordered-stage grammar for desk-scale corpora. Every generated body
// walks the stages in declared order, so gold documents carry a known
// canonical ordering.
struct SyntheticGrammar {
  std::vector<SyntheticStage> stages;
  std::vector<std::string> ingredient_pool;
  std::vector<std::string> phrase_patterns;  // ingredient phrase variants
  std::vector<std::string> dish_types;
  std::vector<int> minute_choices;
  size_t min_ingredients = 2;
  size_t max_ingredients = 4;

  // prep -> combine -> heat -> finish with distinct verbs per stage.
  static SyntheticGrammar standard();

  // Stage index of a sentence (by its leading verb), or -1 if unknown.
  int stage_of_sentence(const std::vector<std::string>& sentence_tokens) const;
};

// Deterministic for a given seed; duplicate records are re-drawn so all
// returned records are distinct (callers slice one stream into disjoint
// splits).
std::vector<RawRecipe> generate_synthetic_corpus(uint64_t seed, size_t n_recipes,
                                                 const SyntheticGrammar& grammar);

// Sample event lexicon covering the standard grammar's cooking verbs.
EventLexicon synthetic_lexicon();

}  // namespace ordgen
