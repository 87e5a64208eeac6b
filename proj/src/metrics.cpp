#include "ordgen/metrics.hpp"

#include <iomanip>
#include <sstream>

namespace ordgen {

std::vector<std::string> extract_actions(const std::vector<std::string>& tokens,
                                         const EventLexicon& lexicon) {
  std::vector<std::string> out;
  for (const auto& tok : tokens) {
    const LexiconEntry* entry = lexicon.match_token(tok);
    if (entry != nullptr) out.push_back(entry->action);
  }
  return out;
}

std::vector<std::string> extract_state_changes(const std::vector<std::string>& actions,
                                               const EventLexicon& lexicon) {
  std::vector<std::string> out;
  for (const auto& action : actions) {
    std::vector<std::string> names;
    for (StateChange c : lexicon.action_state_changes(action)) {
      names.push_back(state_change_name(c));
    }
    std::sort(names.begin(), names.end());
    out.insert(out.end(), names.begin(), names.end());
  }
  return out;
}

nlohmann::json ScoreReport::to_json() const {
  return {
      {"BLEU-1", bleu1},        {"BLEU-4", bleu4},        {"R-L", rouge},
      {"AB1", action_bleu1},    {"AB4", action_bleu4},    {"AR-L", action_rouge},
      {"SCB1", state_bleu1},    {"SCB4", state_bleu4},    {"SCR-L", state_rouge},
  };
}

std::string ScoreReport::format_table() const {
  const char* names[] = {"BLEU-1", "BLEU-4", "R-L",  "AB1",  "AB4",
                         "AR-L",   "SCB1",   "SCB4", "SCR-L"};
  const double vals[] = {bleu1,        bleu4,        rouge,       action_bleu1, action_bleu4,
                         action_rouge, state_bleu1,  state_bleu4, state_rouge};
  std::ostringstream os;
  for (int i = 0; i < 9; ++i) os << std::setw(i == 0 ? 6 : 8) << names[i];
  os << "\n";
  os << std::fixed << std::setprecision(2);
  for (int i = 0; i < 9; ++i) os << std::setw(i == 0 ? 6 : 8) << vals[i] * 100.0;
  os << "\n";
  return os.str();
}

ScoreReport evaluate_corpus(const std::vector<std::vector<std::string>>& generations,
                            const std::vector<std::vector<std::string>>& golds,
                            const EventLexicon& lexicon) {
  if (generations.empty()) throw DataError("evaluate_corpus: no generation/gold pairs");
  if (generations.size() != golds.size()) {
    throw DataError("evaluate_corpus: " + std::to_string(generations.size()) +
                    " generations vs " + std::to_string(golds.size()) + " golds");
  }
  ScoreReport total;
  for (size_t i = 0; i < generations.size(); ++i) {
    const auto& cand = generations[i];
    const auto& ref = golds[i];
    total.bleu1 += bleu(cand, ref, 1);
    total.bleu4 += bleu(cand, ref, 4);
    total.rouge += rouge_l(cand, ref);
    const auto cand_actions = extract_actions(cand, lexicon);
    const auto ref_actions = extract_actions(ref, lexicon);
    total.action_bleu1 += bleu(cand_actions, ref_actions, 1);
    total.action_bleu4 += bleu(cand_actions, ref_actions, 4);
    total.action_rouge += rouge_l(cand_actions, ref_actions);
    const auto cand_states = extract_state_changes(cand_actions, lexicon);
    const auto ref_states = extract_state_changes(ref_actions, lexicon);
    total.state_bleu1 += bleu(cand_states, ref_states, 1);
    total.state_bleu4 += bleu(cand_states, ref_states, 4);
    total.state_rouge += rouge_l(cand_states, ref_states);
  }
  const double n = static_cast<double>(generations.size());
  total.bleu1 /= n;
  total.bleu4 /= n;
  total.rouge /= n;
  total.action_bleu1 /= n;
  total.action_bleu4 /= n;
  total.action_rouge /= n;
  total.state_bleu1 /= n;
  total.state_bleu4 /= n;
  total.state_rouge /= n;
  return total;
}

}  // namespace ordgen
