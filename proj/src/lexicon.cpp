#include "ordgen/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace ordgen {

namespace {

const std::vector<std::string> kNames = {"LOCATION",    "COMPOSITION", "COOKEDNESS",
                                         "TEMPERATURE", "SHAPE",       "CLEANLINESS"};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

void push_unique(std::vector<std::string>& v, const std::string& s) {
  if (s.empty()) return;
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

// base after stripping ing/ed: also try un-doubling ("stirr" -> "stir") and
// restoring a dropped final e ("bak" -> "bake")
void push_base_variants(std::vector<std::string>& out, const std::string& base) {
  push_unique(out, base);
  if (base.size() >= 3 && base.back() == base[base.size() - 2] && !is_vowel(base.back())) {
    push_unique(out, base.substr(0, base.size() - 1));
  }
  push_unique(out, base + "e");
}

}  // namespace

const std::string& state_change_name(StateChange c) {
  return kNames[static_cast<size_t>(c)];
}

StateChange parse_state_change(const std::string& name) {
  for (size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<StateChange>(i);
  }
  throw DataError("unknown state-change category: " + name);
}

std::vector<std::string> stem_candidates(const std::string& token) {
  std::vector<std::string> out;
  push_unique(out, token);
  if (ends_with(token, "ing") && token.size() > 4) {
    push_base_variants(out, token.substr(0, token.size() - 3));
  }
  if (ends_with(token, "ed") && token.size() > 3) {
    push_base_variants(out, token.substr(0, token.size() - 2));
  }
  if (ends_with(token, "es") && token.size() > 3) {
    push_unique(out, token.substr(0, token.size() - 2));
  }
  if (ends_with(token, "s") && !ends_with(token, "ss") && token.size() > 2) {
    push_unique(out, token.substr(0, token.size() - 1));
  }
  return out;
}

EventLexicon EventLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon file: " + path);
  EventLexicon lex;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() < 2 || fields.size() > 3) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected lemma<TAB>action<TAB>categories");
    }
    LexiconEntry entry;
    entry.action = fields[1];
    if (fields.size() == 3 && !fields[2].empty()) {
      std::stringstream cs(fields[2]);
      std::string cat;
      while (std::getline(cs, cat, ',')) {
        try {
          entry.state_changes.insert(parse_state_change(cat));
        } catch (const DataError& e) {
          throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
      }
    }
    std::string lemma = fields[0];
    std::transform(lemma.begin(), lemma.end(), lemma.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    lex.insert(lemma, std::move(entry));
  }
  return lex;
}

void EventLexicon::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write lexicon file: " + path);
  for (const auto& [lemma, entry] : entries_) {
    out << lemma << "\t" << entry.action << "\t";
    bool first = true;
    for (StateChange c : entry.state_changes) {
      if (!first) out << ",";
      out << state_change_name(c);
      first = false;
    }
    out << "\n";
  }
}

void EventLexicon::insert(const std::string& lemma, LexiconEntry entry) {
  entries_[lemma] = std::move(entry);
}

const LexiconEntry* EventLexicon::find_lemma(const std::string& lemma) const {
  auto it = entries_.find(lemma);
  return it == entries_.end() ? nullptr : &it->second;
}

const LexiconEntry* EventLexicon::match_token(const std::string& token) const {
  const LexiconEntry* best = nullptr;
  std::string best_lemma;
  for (const std::string& cand : stem_candidates(token)) {
    auto it = entries_.find(cand);
    if (it == entries_.end()) continue;
    if (best == nullptr || cand.size() > best_lemma.size() ||
        (cand.size() == best_lemma.size() && cand < best_lemma)) {
      best = &it->second;
      best_lemma = cand;
    }
  }
  return best;
}

std::set<StateChange> EventLexicon::action_state_changes(const std::string& action) const {
  std::set<StateChange> out;
  bool found = false;
  for (const auto& [lemma, entry] : entries_) {
    if (entry.action == action) {
      found = true;
      out.insert(entry.state_changes.begin(), entry.state_changes.end());
    }
  }
  if (!found) throw DataError("action not present in lexicon: " + action);
  return out;
}

}  // namespace ordgen
