#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "natc/errors.hpp"
#include "natc/mat.hpp"
#include "natc/vocab.hpp"

namespace natc {

// T x V row-normalized log-probabilities over the upsampled positions.
template <class Real>
struct LogProbLattice {
  Mat<Real> lp;

  std::size_t frames() const { return lp.rows; }
  std::size_t vocab() const { return lp.cols; }

  void validate() const {
    if (lp.rows < 1 || lp.cols < 1) throw DataError("lattice must be at least 1x1");
    for (std::size_t t = 0; t < lp.rows; ++t) {
      for (Real v : lp.row(t)) {
        if (std::isnan(v)) throw NumericError("lattice contains NaN");
        if (v > Real(1e-9)) throw NumericError("lattice entry above 0");
      }
      const Real lse = log_sum(lp.row(t));
      if (std::abs(lse) > Real(1e-6))
        throw NumericError("lattice row " + std::to_string(t) + " is not normalized");
    }
  }
};

// Row-wise log-softmax with max subtraction.
template <class Real>
LogProbLattice<Real> log_softmax_lattice(const Mat<Real>& logits) {
  if (logits.rows < 1 || logits.cols < 1) throw DataError("logits must be at least 1x1");
  LogProbLattice<Real> lattice{Mat<Real>(logits.rows, logits.cols)};
  for (std::size_t t = 0; t < logits.rows; ++t) {
    Real max = kNegInf<Real>;
    for (Real v : logits.row(t)) {
      if (!std::isfinite(v)) throw NumericError("logits must be finite");
      max = std::max(max, v);
    }
    Real z = 0;
    for (Real v : logits.row(t)) z += std::exp(v - max);
    const Real log_z = max + std::log(z);
    for (std::size_t v = 0; v < logits.cols; ++v) lattice.lp(t, v) = logits(t, v) - log_z;
  }
  return lattice;
}

// Merge maximal runs of equal tokens, then delete blanks.
inline std::vector<TokenId> collapse(std::span<const TokenId> alignment, TokenId blank_id) {
  std::vector<TokenId> out;
  TokenId prev = -1;
  for (TokenId a : alignment) {
    if (a != prev && a != blank_id) out.push_back(a);
    prev = a;
  }
  return out;
}

enum class CtcStatus { kOk, kInfeasibleLength };

template <class Real>
struct CtcResult {
  Real loss = 0;
  CtcStatus status = CtcStatus::kOk;
  Mat<Real> grad_logits;  // d loss / d logits, zero when infeasible
};

// Shortest alignment that collapses to y: every token plus one separating
// blank per adjacent repeat.
inline std::size_t min_alignment_length(std::span<const TokenId> y) {
  std::size_t len = y.size();
  for (std::size_t i = 0; i + 1 < y.size(); ++i)
    if (y[i] == y[i + 1]) ++len;
  return len;
}

// Marginal -log p(y | lattice) over all alignments, via the extended-label
// forward-backward recursion in log space, with the exact gradient with
// respect to pre-softmax logits. Infeasible target lengths are a status, not
// an error, so training loops can skip and count them.
template <class Real>
CtcResult<Real> ctc_loss(const LogProbLattice<Real>& lattice, std::span<const TokenId> y,
                         TokenId blank_id) {
  if (y.empty()) throw DataError("ctc target must be non-empty");
  for (TokenId t : y) {
    if (t == blank_id) throw DataError("ctc target contains the blank token");
    if (t < 0 || t >= static_cast<TokenId>(lattice.vocab()))
      throw DataError("ctc target id out of lattice range");
  }
  const std::size_t frames = lattice.frames();
  CtcResult<Real> result;
  result.grad_logits = Mat<Real>(frames, lattice.vocab(), Real(0));
  if (min_alignment_length(y) > frames) {
    result.loss = std::numeric_limits<Real>::infinity();
    result.status = CtcStatus::kInfeasibleLength;
    return result;
  }

  // Extended label sequence: blanks interleaved around every target token.
  const std::size_t states = 2 * y.size() + 1;
  const auto label = [&](std::size_t k) -> TokenId {
    return k % 2 == 0 ? blank_id : y[k / 2];
  };
  const auto lp = [&](std::size_t t, std::size_t k) -> Real {
    return lattice.lp(t, static_cast<std::size_t>(label(k)));
  };
  // A state may skip its predecessor blank only when the labels two back
  // differ (repeats must keep their separating blank).
  const auto can_skip = [&](std::size_t k) -> bool {
    return k % 2 == 1 && k >= 2 && label(k) != label(k - 2);
  };

  Mat<Real> alpha(frames, states, kNegInf<Real>);
  alpha(0, 0) = lp(0, 0);
  if (states > 1) alpha(0, 1) = lp(0, 1);
  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t k = 0; k < states; ++k) {
      Real acc = alpha(t - 1, k);
      if (k >= 1) acc = log_add(acc, alpha(t - 1, k - 1));
      if (can_skip(k)) acc = log_add(acc, alpha(t - 1, k - 2));
      alpha(t, k) = acc == kNegInf<Real> ? acc : acc + lp(t, k);
    }
  }
  Real log_marginal = alpha(frames - 1, states - 1);
  if (states > 1) log_marginal = log_add(log_marginal, alpha(frames - 1, states - 2));
  result.loss = -log_marginal;
  if (log_marginal == kNegInf<Real>) return result;  // zero-probability target

  Mat<Real> beta(frames, states, kNegInf<Real>);
  beta(frames - 1, states - 1) = lp(frames - 1, states - 1);
  if (states > 1) beta(frames - 1, states - 2) = lp(frames - 1, states - 2);
  for (std::size_t t = frames - 1; t-- > 0;) {
    for (std::size_t k = 0; k < states; ++k) {
      Real acc = beta(t + 1, k);
      if (k + 1 < states) acc = log_add(acc, beta(t + 1, k + 1));
      if (k + 2 < states && can_skip(k + 2)) acc = log_add(acc, beta(t + 1, k + 2));
      beta(t, k) = acc == kNegInf<Real> ? acc : acc + lp(t, k);
    }
  }

  // grad(logit[t][v]) = p(v|t) - (1/P) * sum of path mass through v-states,
  // both emissions counted once.
  std::vector<Real> occupancy(lattice.vocab());
  for (std::size_t t = 0; t < frames; ++t) {
    std::fill(occupancy.begin(), occupancy.end(), kNegInf<Real>);
    for (std::size_t k = 0; k < states; ++k) {
      if (alpha(t, k) == kNegInf<Real> || beta(t, k) == kNegInf<Real>) continue;
      const auto v = static_cast<std::size_t>(label(k));
      occupancy[v] = log_add(occupancy[v], alpha(t, k) + beta(t, k) - lp(t, k));
    }
    for (std::size_t v = 0; v < lattice.vocab(); ++v) {
      const Real posterior =
          occupancy[v] == kNegInf<Real> ? Real(0) : std::exp(occupancy[v] - log_marginal);
      result.grad_logits(t, v) = std::exp(lattice.lp(t, v)) - posterior;
    }
  }
  return result;
}

// Per-frame argmax (ties to the smallest id) followed by collapse.
template <class Real>
std::vector<TokenId> greedy_decode(const LogProbLattice<Real>& lattice, TokenId blank_id) {
  std::vector<TokenId> best_path(lattice.frames());
  for (std::size_t t = 0; t < lattice.frames(); ++t) {
    std::size_t best = 0;
    for (std::size_t v = 1; v < lattice.vocab(); ++v)
      if (lattice.lp(t, v) > lattice.lp(t, best)) best = v;
    best_path[t] = static_cast<TokenId>(best);
  }
  return collapse(best_path, blank_id);
}

// Exhaustive alignment set { a in V^T : collapse(a) = y }. Test oracle with a
// hard budget; intentionally brute force.
inline std::vector<std::vector<TokenId>> enumerate_alignments(std::span<const TokenId> y,
                                                              std::size_t frames,
                                                              TokenId blank_id,
                                                              std::int32_t vocab_size) {
  if (frames > 8 || y.size() > 4 || vocab_size > 4)
    throw UsageError("enumerate_alignments budget exceeded (T<=8, |y|<=4, V<=4)");
  if (vocab_size < 1) throw UsageError("vocab must be non-empty");
  std::vector<std::vector<TokenId>> result;
  std::vector<TokenId> a(frames, 0);
  while (true) {
    const auto collapsed = collapse(a, blank_id);
    if (collapsed.size() == y.size() && std::equal(collapsed.begin(), collapsed.end(), y.begin()))
      result.push_back(a);
    std::size_t pos = frames;
    while (pos > 0) {
      --pos;
      if (++a[pos] < vocab_size) break;
      a[pos] = 0;
      if (pos == 0) return result;
    }
    if (frames == 0) return result;
  }
}

}  // namespace natc
