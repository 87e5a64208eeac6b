// Independent reference implementations used to cross-check the library.
// Everything here is plain loops over raw vectors: no Tape, no shared code
// with the implementation under test.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "ordgen/gru.hpp"
#include "ordgen/teacher.hpp"
#include "ordgen/tensor.hpp"

namespace oracle {

using Vec = std::vector<double>;

inline Vec matvec(const ordgen::Tensor& w, const Vec& x) {
  Vec y(w.rows(), 0.0);
  for (size_t r = 0; r < w.rows(); ++r) {
    for (size_t c = 0; c < w.cols(); ++c) y[r] += w.at(r, c) * x[c];
  }
  return y;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double cosine(const Vec& a, const Vec& b) {
  const double na = norm(a), nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

inline double dot_row(const ordgen::Tensor& m, size_t row, const Vec& v) {
  double s = 0.0;
  for (size_t c = 0; c < m.cols(); ++c) s += m.at(row, c) * v[c];
  return s;
}

inline Vec gru_step(const ordgen::GruParams& p, const Vec& x, const Vec& h) {
  const size_t hid = p.hidden_size();
  Vec z = matvec(p.w_z, x), r = matvec(p.w_r, x);
  for (size_t i = 0; i < hid; ++i) {
    z[i] = 1.0 / (1.0 + std::exp(-(z[i] + dot_row(p.u_z, i, h) + p.b_z[i])));
    r[i] = 1.0 / (1.0 + std::exp(-(r[i] + dot_row(p.u_r, i, h) + p.b_r[i])));
  }
  Vec cand = matvec(p.w_h, x);
  for (size_t i = 0; i < hid; ++i) {
    double u = 0.0;
    for (size_t j = 0; j < hid; ++j) u += p.u_h.at(i, j) * (r[j] * h[j]);
    cand[i] = std::tanh(cand[i] + u + p.b_h[i]);
  }
  Vec out(hid);
  for (size_t i = 0; i < hid; ++i) out[i] = (1.0 - z[i]) * h[i] + z[i] * cand[i];
  return out;
}

// bag-of-words sentence embedding (ids summed in sorted order, matching the
// documented canonical order)
inline Vec sentence_bow(const ordgen::TeacherParams& p, std::vector<int> ids) {
  std::sort(ids.begin(), ids.end());
  Vec s(p.embedding_dim(), 0.0);
  for (int id : ids) {
    for (size_t c = 0; c < p.embedding_dim(); ++c) {
      s[c] += p.embedding.at(static_cast<size_t>(id), c);
    }
  }
  return s;
}

inline Vec encode_doc(const ordgen::TeacherParams& p,
                      const std::vector<std::vector<int>>& sentences, bool reversed) {
  std::vector<Vec> bows;
  for (const auto& s : sentences) bows.push_back(sentence_bow(p, s));
  if (reversed) std::reverse(bows.begin(), bows.end());
  Vec h(p.hidden_dim(), 0.0);
  for (const auto& b : bows) h = gru_step(p.gru, b, h);
  return h;
}

// --- reward oracles -----------------------------------------------------------

// brute-force recomputation of the absolute-order reward
inline double reward_absolute(const ordgen::TeacherParams& t,
                              const std::vector<std::vector<int>>& gen,
                              const std::vector<std::vector<int>>& gold) {
  const Vec f_gen = encode_doc(t, gen, false);
  const Vec f_fwd = encode_doc(t, gold, false);
  const Vec f_rev = encode_doc(t, gold, true);
  return cosine(f_gen, f_fwd) - cosine(f_gen, f_rev);
}

// brute-force window-by-window recomputation of the relative-order reward
inline std::vector<double> reward_relative(const ordgen::TeacherParams& t,
                                           const std::vector<std::vector<int>>& gen,
                                           const std::vector<std::vector<int>>& gold,
                                           size_t lmin, size_t lmax) {
  std::vector<double> out;
  for (size_t j = 0; j < gen.size(); ++j) {
    if (j >= gold.size()) {
      out.push_back(0.0);
      continue;
    }
    double acc = 0.0;
    for (size_t l = lmin; l <= lmax; ++l) {
      const size_t lo = j + 1 >= l ? j + 1 - l : 0;
      const std::vector<std::vector<int>> gw(gen.begin() + static_cast<long>(lo),
                                             gen.begin() + static_cast<long>(j + 1));
      const std::vector<std::vector<int>> dw(gold.begin() + static_cast<long>(lo),
                                             gold.begin() + static_cast<long>(j + 1));
      acc += cosine(encode_doc(t, gw, false), encode_doc(t, dw, false));
      acc -= cosine(encode_doc(t, gw, false), encode_doc(t, dw, true));
    }
    out.push_back(acc / static_cast<double>(lmax - lmin + 1));
  }
  return out;
}

// --- metric oracles ---------------------------------------------------------

// BLEU via explicit n-gram multiset intersection, O(n^2) matching.
template <typename T>
double bleu(const std::vector<T>& cand, const std::vector<T>& ref, int max_n, bool smooth = true) {
  if (cand.empty()) return 0.0;
  double log_sum = 0.0;
  for (int k = 1; k <= max_n; ++k) {
    std::vector<std::vector<T>> cgrams, rgrams;
    for (size_t i = 0; i + k <= cand.size(); ++i) {
      cgrams.push_back({cand.begin() + i, cand.begin() + i + k});
    }
    for (size_t i = 0; i + k <= ref.size(); ++i) {
      rgrams.push_back({ref.begin() + i, ref.begin() + i + k});
    }
    std::vector<bool> used(rgrams.size(), false);
    long matched = 0;
    for (const auto& g : cgrams) {
      for (size_t j = 0; j < rgrams.size(); ++j) {
        if (!used[j] && rgrams[j] == g) {
          used[j] = true;
          ++matched;
          break;
        }
      }
    }
    double num = static_cast<double>(matched);
    double den = static_cast<double>(cgrams.size());
    if (smooth && k >= 2) {
      num += 1.0;
      den += 1.0;
    }
    if (num == 0.0 || den == 0.0) return 0.0;
    log_sum += std::log(num / den) / max_n;
  }
  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(ref.size());
  return (c >= r ? 1.0 : std::exp(1.0 - r / c)) * std::exp(log_sum);
}

// ROUGE-L via the full O(nm) LCS table (recursive definition, memoized).
template <typename T>
double rouge_l(const std::vector<T>& cand, const std::vector<T>& ref, double beta = 1.0) {
  if (cand.empty() || ref.empty()) return 0.0;
  const size_t n = cand.size(), m = ref.size();
  std::vector<std::vector<size_t>> dp(n + 1, std::vector<size_t>(m + 1, 0));
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      dp[i][j] = cand[i - 1] == ref[j - 1] ? dp[i - 1][j - 1] + 1
                                           : std::max(dp[i - 1][j], dp[i][j - 1]);
    }
  }
  const double lcs = static_cast<double>(dp[n][m]);
  if (lcs == 0.0) return 0.0;
  const double p = lcs / n, r = lcs / m, b2 = beta * beta;
  return (1.0 + b2) * p * r / (r + b2 * p);
}

// --- finite differences -------------------------------------------------------

// Central finite-difference gradient check of `loss` w.r.t. every entry of
// every parameter in `params`. `loss` must rebuild its computation from
// scratch on each call (same rng seeds) and leave gradients in param.grad
// when `fill_grads` runs first.
//
// The relative error divides by max(|fd|, |analytic|, floor). The floor keeps
// gradients whose magnitude sits below the float64 central-difference noise
// (~ eps * |loss| / step) from being compared as pure noise; for them the
// check degrades to an absolute tolerance of tol * floor.
struct FdReport {
  double max_rel_err = 0.0;
  size_t checked = 0;
};

inline FdReport fd_check(const std::function<double()>& loss,
                         const std::function<void()>& fill_grads,
                         const std::vector<ordgen::Tensor*>& params, double step = 1e-6,
                         double floor = 1e-3) {
  for (ordgen::Tensor* p : params) {
    p->ensure_grad();
    p->zero_grad();
  }
  fill_grads();
  FdReport rep;
  for (ordgen::Tensor* p : params) {
    for (size_t i = 0; i < p->size(); ++i) {
      const double saved = p->values[i];
      p->values[i] = saved + step;
      const double up = loss();
      p->values[i] = saved - step;
      const double down = loss();
      p->values[i] = saved;
      const double fd = (up - down) / (2.0 * step);
      const double an = (*p->grad)[i];
      const double denom = std::max({std::abs(fd), std::abs(an), floor});
      rep.max_rel_err = std::max(rep.max_rel_err, std::abs(fd - an) / denom);
      ++rep.checked;
    }
  }
  return rep;
}

}  // namespace oracle
