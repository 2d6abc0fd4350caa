#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "natc/ctc.hpp"
#include "natc/errors.hpp"
#include "natc/mat.hpp"
#include "natc/ngram.hpp"
#include "natc/vocab.hpp"

namespace natc {

struct BeamConfig {
  double alpha = 0.3;  // language-model weight
  double beta = 0.9;   // per-token length bonus
  int beam_size = 20;
  const NgramModel* lm = nullptr;

  void validate() const {
    if (beam_size < 1) throw UsageError("beam size must be at least 1");
    if (alpha < 0) throw UsageError("alpha must be non-negative");
    if (lm == nullptr && alpha != 0) throw UsageError("alpha > 0 requires a language model");
  }
};

struct BeamHypothesis {
  std::vector<TokenId> tokens;
  double log_p_blank = kNegInf<double>;     // alignment mass ending in blank
  double log_p_nonblank = kNegInf<double>;  // alignment mass ending in the last token
  double lm_logprob = 0;                    // accumulated LM score incl. </s>
  double score = kNegInf<double>;           // combined ranking objective

  double log_p_total() const { return log_add(log_p_blank, log_p_nonblank); }
};

namespace detail {

struct PrefixMass {
  double pb = kNegInf<double>;
  double pnb = kNegInf<double>;
  double lm = 0;  // sum of incremental LM log-probs for this prefix
};

inline bool hypothesis_order(const BeamHypothesis& a, const BeamHypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
  return a.tokens < b.tokens;
}

}  // namespace detail

// CTC prefix beam search with shallow LM fusion: each surviving prefix is
// extended by blank, by a repeat of its last token, and by every new token.
// New-token extensions pay alpha * (incremental LM log-prob) + beta into the
// fusion score so the LM shapes pruning, not just final ranking. The final
// ranking adds the LM end-of-sentence term.
inline std::vector<BeamHypothesis> ctc_beam_search(const LogProbLattice<double>& lattice,
                                                   const BeamConfig& cfg, TokenId blank_id) {
  cfg.validate();
  using detail::PrefixMass;
  using PrefixMap = std::unordered_map<std::vector<TokenId>, PrefixMass, detail::IdSeqHash>;

  // LM context for a prefix: the sentence start marker plus the prefix; the
  // model truncates to its own order.
  const auto lm_context = [](const std::vector<TokenId>& prefix) {
    std::vector<TokenId> ctx;
    ctx.reserve(prefix.size() + 1);
    ctx.push_back(Vocab::kBos);
    ctx.insert(ctx.end(), prefix.begin(), prefix.end());
    return ctx;
  };
  const auto lm_increment = [&](const std::vector<TokenId>& prefix, TokenId token) -> double {
    if (cfg.lm == nullptr) return 0;
    return cfg.lm->cond_logprob(lm_context(prefix), token);
  };
  const auto pruning_score = [&](const std::vector<TokenId>& prefix,
                                 const PrefixMass& mass) -> double {
    return log_add(mass.pb, mass.pnb) + cfg.alpha * mass.lm +
           cfg.beta * static_cast<double>(prefix.size());
  };

  PrefixMap beams;
  beams[{}] = PrefixMass{0.0, kNegInf<double>, 0.0};

  std::vector<std::pair<std::vector<TokenId>, PrefixMass>> survivors;
  for (std::size_t t = 0; t < lattice.frames(); ++t) {
    PrefixMap next;
    next.reserve(beams.size() * (lattice.vocab() + 1));
    for (const auto& [prefix, mass] : beams) {
      const double total = log_add(mass.pb, mass.pnb);
      // Stay on this prefix: emit blank, or repeat the trailing token.
      {
        PrefixMass& stay = next[prefix];
        stay.lm = mass.lm;
        stay.pb = log_add(stay.pb, total + lattice.lp(t, static_cast<std::size_t>(blank_id)));
        if (!prefix.empty()) {
          const auto last = static_cast<std::size_t>(prefix.back());
          stay.pnb = log_add(stay.pnb, mass.pnb + lattice.lp(t, last));
        }
      }
      // Extend with a new collapsed token.
      for (std::size_t v = 0; v < lattice.vocab(); ++v) {
        if (static_cast<TokenId>(v) == blank_id) continue;
        const double emit = lattice.lp(t, v);
        // A repeat of the trailing token only starts a new run from the
        // blank-terminated mass; anything else extends the full mass.
        const double source =
            (!prefix.empty() && static_cast<TokenId>(v) == prefix.back()) ? mass.pb : total;
        if (source == kNegInf<double>) continue;
        std::vector<TokenId> extended = prefix;
        extended.push_back(static_cast<TokenId>(v));
        auto [it, inserted] = next.try_emplace(std::move(extended));
        if (inserted) it->second.lm = mass.lm + lm_increment(prefix, static_cast<TokenId>(v));
        it->second.pnb = log_add(it->second.pnb, source + emit);
      }
    }
    // Prune to the beam width by the in-search combined score.
    survivors.assign(std::make_move_iterator(next.begin()), std::make_move_iterator(next.end()));
    const auto width = std::min<std::size_t>(static_cast<std::size_t>(cfg.beam_size),
                                             survivors.size());
    std::partial_sort(survivors.begin(), survivors.begin() + static_cast<std::ptrdiff_t>(width),
                      survivors.end(), [&](const auto& a, const auto& b) {
                        const double sa = pruning_score(a.first, a.second);
                        const double sb = pruning_score(b.first, b.second);
                        if (sa != sb) return sa > sb;
                        if (a.first.size() != b.first.size()) return a.first.size() < b.first.size();
                        return a.first < b.first;
                      });
    beams.clear();
    for (std::size_t i = 0; i < width; ++i)
      beams.emplace(std::move(survivors[i].first), survivors[i].second);
  }

  std::vector<BeamHypothesis> result;
  result.reserve(beams.size());
  for (auto& [prefix, mass] : beams) {
    BeamHypothesis hyp;
    hyp.log_p_blank = mass.pb;
    hyp.log_p_nonblank = mass.pnb;
    hyp.lm_logprob = mass.lm;
    if (cfg.lm != nullptr) hyp.lm_logprob += cfg.lm->cond_logprob(lm_context(prefix), Vocab::kEos);
    hyp.score = hyp.log_p_total() + cfg.alpha * hyp.lm_logprob +
                cfg.beta * static_cast<double>(prefix.size());
    hyp.tokens = prefix;
    result.push_back(std::move(hyp));
  }
  std::sort(result.begin(), result.end(), detail::hypothesis_order);
  return result;
}

// Exact evaluation of the decoding objective for a candidate sequence: the
// full CTC marginal plus the weighted LM score and length bonus. Small-
// instance oracle for search results.
inline double rescore(std::span<const TokenId> y, const LogProbLattice<double>& lattice,
                      const BeamConfig& cfg, TokenId blank_id) {
  cfg.validate();
  double log_marginal;
  if (y.empty()) {
    log_marginal = 0;
    for (std::size_t t = 0; t < lattice.frames(); ++t)
      log_marginal += lattice.lp(t, static_cast<std::size_t>(blank_id));
  } else {
    const auto ctc = ctc_loss(lattice, y, blank_id);
    if (ctc.status != CtcStatus::kOk || !std::isfinite(ctc.loss)) return kNegInf<double>;
    log_marginal = -ctc.loss;
  }
  double lm_term = 0;
  if (cfg.lm != nullptr) lm_term = cfg.lm->sentence_logprob(y);
  return log_marginal + cfg.alpha * lm_term + cfg.beta * static_cast<double>(y.size());
}

}  // namespace natc
