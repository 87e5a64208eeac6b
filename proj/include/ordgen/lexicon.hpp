#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ordgen/corpus.hpp"

namespace ordgen {

// The six state-change categories an action can induce.
enum class StateChange {
  kLocation,
  kComposition,
  kCookedness,
  kTemperature,
  kShape,
  kCleanliness,
};

const std::string& state_change_name(StateChange c);
// Throws DataError for names outside the six categories.
StateChange parse_state_change(const std::string& name);

struct LexiconEntry {
  std::string action;
  std::set<StateChange> state_changes;
};

// lemma -> (action, state changes). File format: one entry per line,
// tab-separated "lemma<TAB>action<TAB>CAT1,CAT2"; the category field may be
// empty. Lemmas are lowercase.
class EventLexicon {
 public:
  static EventLexicon load(const std::string& path);
  void save(const std::string& path) const;

  void insert(const std::string& lemma, LexiconEntry entry);
  const LexiconEntry* find_lemma(const std::string& lemma) const;

  // Stem-aware lookup: the token matches an entry when any of its stem
  // candidates equals a lemma. Among several matches the longest lemma wins,
  // ties broken lexicographically.
  const LexiconEntry* match_token(const std::string& token) const;

  // Union of the state changes of every entry whose action equals `action`;
  // throws DataError when no entry has that action.
  std::set<StateChange> action_state_changes(const std::string& action) const;

  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<std::string, LexiconEntry>& entries() const { return entries_; }

 private:
  std::map<std::string, LexiconEntry> entries_;
};

// Candidate base forms for a token under the s/es/ed/ing suffix rules
// (with doubled-consonant and trailing-e repair), most specific first.
// A deliberately small stand-in for a real lemmatizer.
std::vector<std::string> stem_candidates(const std::string& token);

}  // namespace ordgen
