#include "ordgen/synthetic.hpp"

#include <set>
#include <stdexcept>

namespace ordgen {

namespace {

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

}  // namespace

SyntheticGrammar SyntheticGrammar::standard() {
  SyntheticGrammar g;
  g.stages = {
      {"prep",
       1,
       2,
       {
           "wash the {ing} .",
           "chop the {ing} into small pieces .",
           "measure out the {ing} .",
           "peel the {ing} .",
           "rinse the {ing} well .",
       }},
      {"combine",
       1,
       2,
       {
           "add the {ing} to the bowl .",
           "mix the {ing} with the {ing2} .",
           "stir in the {ing} .",
           "combine the {ing} and the {ing2} .",
           "whisk the {ing} until smooth .",
       }},
      {"heat",
       1,
       2,
       {
           "heat the pan over medium heat .",
           "cook the mixture until done .",
           "bake in the oven for {n} minutes .",
           "simmer over low heat for {n} minutes .",
           "boil the mixture gently .",
       }},
      {"finish",
       1,
       2,
       {
           "serve warm .",
           "garnish with the {ing} .",
           "cool before serving .",
           "season to taste and serve .",
           "sprinkle the {ing} on top .",
       }},
  };
  g.ingredient_pool = {"butter", "flour",  "sugar",  "eggs",   "milk",     "salt",   "pepper",
                       "onions", "cheese", "cream",  "garlic", "chicken",  "rice",   "tomatoes",
                       "beans",  "carrots"};
  g.phrase_patterns = {"{ing}", "fresh {ing}", "chopped {ing}", "{ing} , diced"};
  g.dish_types = {"casserole", "soup", "salad", "bake", "stew", "pie"};
  g.minute_choices = {10, 15, 20, 25, 30};
  return g;
}

int SyntheticGrammar::stage_of_sentence(const std::vector<std::string>& sentence_tokens) const {
  if (sentence_tokens.empty()) return -1;
  const std::string& verb = sentence_tokens.front();
  for (size_t s = 0; s < stages.size(); ++s) {
    for (const auto& tpl : stages[s].templates) {
      const auto toks = tokenize(tpl);
      if (!toks.empty() && toks.front() == verb) return static_cast<int>(s);
    }
  }
  return -1;
}

std::vector<RawRecipe> generate_synthetic_corpus(uint64_t seed, size_t n_recipes,
                                                 const SyntheticGrammar& grammar) {
  if (grammar.stages.empty() || grammar.ingredient_pool.empty()) {
    throw std::invalid_argument("synthetic grammar needs stages and an ingredient pool");
  }
  Rng rng(seed);
  std::vector<RawRecipe> out;
  std::set<std::string> seen;
  while (out.size() < n_recipes) {
    RawRecipe r;
    // distinct ingredients for this recipe
    const size_t n_ing = static_cast<size_t>(rng.uniform_int(
        static_cast<int>(grammar.min_ingredients), static_cast<int>(grammar.max_ingredients)));
    std::vector<std::string> pool = grammar.ingredient_pool;
    rng.shuffle(pool);
    std::vector<std::string> heads;
    for (size_t i = 0; i < n_ing && i < pool.size(); ++i) {
      const std::string& pattern =
          grammar.phrase_patterns[rng.below(grammar.phrase_patterns.size())];
      r.ingredients.push_back(replace_all(pattern, "{ing}", pool[i]));
      heads.push_back(pool[i]);
    }
    r.title = heads.front() + " " + grammar.dish_types[rng.below(grammar.dish_types.size())];

    auto pick_ing = [&] { return heads[rng.below(heads.size())]; };
    std::string body;
    for (const auto& stage : grammar.stages) {
      const size_t n_sent = static_cast<size_t>(rng.uniform_int(
          static_cast<int>(stage.min_sentences), static_cast<int>(stage.max_sentences)));
      for (size_t s = 0; s < n_sent; ++s) {
        std::string sent = stage.templates[rng.below(stage.templates.size())];
        const std::string ing = pick_ing();
        std::string ing2 = pick_ing();
        if (heads.size() > 1) {
          while (ing2 == ing) ing2 = heads[rng.below(heads.size())];
        }
        sent = replace_all(sent, "{ing2}", ing2);
        sent = replace_all(sent, "{ing}", ing);
        if (!grammar.minute_choices.empty()) {
          sent = replace_all(
              sent, "{n}",
              std::to_string(grammar.minute_choices[rng.below(grammar.minute_choices.size())]));
        }
        if (!body.empty()) body += " ";
        body += sent;
      }
    }
    r.text = body;

    std::string key = r.title + "\x1e" + r.text;
    for (const auto& ing : r.ingredients) key += "\x1e" + ing;
    if (seen.insert(key).second) out.push_back(std::move(r));
  }
  return out;
}

EventLexicon synthetic_lexicon() {
  using S = StateChange;
  EventLexicon lex;
  auto add = [&](const std::string& lemma, std::set<S> cats) {
    lex.insert(lemma, LexiconEntry{lemma, std::move(cats)});
  };
  add("wash", {S::kCleanliness});
  add("rinse", {S::kCleanliness});
  add("chop", {S::kShape});
  add("dice", {S::kShape});
  add("peel", {S::kShape, S::kComposition});
  add("measure", {});
  add("add", {S::kLocation});
  add("mix", {S::kComposition});
  add("stir", {S::kComposition});
  add("combine", {S::kComposition, S::kLocation});
  add("whisk", {S::kComposition});
  add("pour", {S::kLocation});
  add("heat", {S::kTemperature});
  add("cook", {S::kCookedness, S::kTemperature});
  add("bake", {S::kCookedness, S::kTemperature});
  add("simmer", {S::kCookedness, S::kTemperature});
  add("boil", {S::kCookedness, S::kTemperature});
  add("melt", {S::kTemperature, S::kComposition});
  add("drain", {S::kComposition, S::kLocation});
  add("serve", {S::kLocation});
  add("garnish", {S::kComposition});
  add("cool", {S::kTemperature});
  add("season", {S::kComposition});
  add("sprinkle", {S::kLocation, S::kComposition});
  return lex;
}

}  // namespace ordgen
