#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "ordgen/lexicon.hpp"

namespace ordgen {

// Example-level BLEU-n: geometric mean of modified k-gram precisions with
// brevity penalty. With smoothing (the default), higher-order precisions get
// add-one smoothing so short texts do not collapse to 0.
template <typename T>
double bleu(const std::vector<T>& candidate, const std::vector<T>& reference, int max_n,
            bool smooth = true) {
  if (max_n < 1) throw std::invalid_argument("bleu: order must be >= 1");
  if (candidate.empty()) return 0.0;
  double log_score = 0.0;
  for (int k = 1; k <= max_n; ++k) {
    std::map<std::vector<T>, long> cand_counts, ref_counts;
    for (size_t i = 0; i + k <= candidate.size(); ++i) {
      cand_counts[{candidate.begin() + i, candidate.begin() + i + k}] += 1;
    }
    for (size_t i = 0; i + k <= reference.size(); ++i) {
      ref_counts[{reference.begin() + i, reference.begin() + i + k}] += 1;
    }
    long matched = 0, total = 0;
    for (const auto& [gram, count] : cand_counts) {
      total += count;
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matched += std::min(count, it->second);
    }
    double num = static_cast<double>(matched);
    double den = static_cast<double>(total);
    if (smooth && k >= 2) {
      num += 1.0;
      den += 1.0;
    }
    if (num == 0.0 || den == 0.0) return 0.0;
    log_score += std::log(num / den) / static_cast<double>(max_n);
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_score);
}

// LCS-based F-measure; beta weights recall vs precision (balanced default).
template <typename T>
double rouge_l(const std::vector<T>& candidate, const std::vector<T>& reference,
               double beta = 1.0) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const size_t n = candidate.size(), m = reference.size();
  std::vector<size_t> prev(m + 1, 0), cur(m + 1, 0);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      cur[j] = candidate[i - 1] == reference[j - 1] ? prev[j - 1] + 1
                                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const double lcs = static_cast<double>(prev[m]);
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(n);
  const double r = lcs / static_cast<double>(m);
  const double b2 = beta * beta;
  return (1.0 + b2) * p * r / (r + b2 * p);
}

// Tokens whose stems match a lexicon lemma, mapped to action labels in token
// order; unmatched tokens are skipped.
std::vector<std::string> extract_actions(const std::vector<std::string>& tokens,
                                         const EventLexicon& lexicon);

// Each action expanded to its category set, flattened in lexicographically
// sorted order so the n-gram metrics apply; throws DataError for actions the
// lexicon does not know.
std::vector<std::string> extract_state_changes(const std::vector<std::string>& actions,
                                               const EventLexicon& lexicon);

// The nine columns: word-, action- and state-change-level BLEU-1/BLEU-4/
// ROUGE-L, each a corpus mean of example-level scores in [0, 1].
struct ScoreReport {
  double bleu1 = 0, bleu4 = 0, rouge = 0;
  double action_bleu1 = 0, action_bleu4 = 0, action_rouge = 0;
  double state_bleu1 = 0, state_bleu4 = 0, state_rouge = 0;

  nlohmann::json to_json() const;            // {metric: value in [0,1]}
  std::string format_table() const;          // x100, two decimals
};

ScoreReport evaluate_corpus(const std::vector<std::vector<std::string>>& generations,
                            const std::vector<std::vector<std::string>>& golds,
                            const EventLexicon& lexicon);

}  // namespace ordgen
