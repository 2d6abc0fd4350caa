#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "natc/errors.hpp"
#include "natc/mat.hpp"
#include "natc/rational.hpp"
#include "natc/vocab.hpp"

namespace natc {

enum class UpsampleScheme { kInsertTokens, kInsertMasks };
enum class RatioMode { kFixed, kDynamic };

struct UpsampleConfig {
  UpsampleScheme scheme = UpsampleScheme::kInsertMasks;
  Rational ratio{3};
  RatioMode mode = RatioMode::kDynamic;
  int l_pos = 512;

  void validate() const {
    if (!ratio.positive()) throw UsageError("upsampling ratio must be positive");
    if (l_pos < 1) throw UsageError("position budget must be at least 1");
  }
};

struct UpsampledSource {
  std::vector<TokenId> tokens;
  // Source index that produced each position; kMaskedProvenance at positions
  // filled with <mask> under the mask-insertion scheme.
  std::vector<std::int32_t> provenance;

  static constexpr std::int32_t kMaskedProvenance = -1;
};

// Ratio actually applied to a sentence of the given length: the dynamic mode
// shrinks it just enough that the upsampled length stays within l_pos.
inline Rational effective_ratio(std::int64_t src_len, const UpsampleConfig& cfg) {
  cfg.validate();
  if (src_len < 1) throw UsageError("source length must be at least 1");
  if (cfg.mode == RatioMode::kFixed) return cfg.ratio;
  // s * |x| <= l_pos  <=>  num * |x| <= l_pos * den
  if (cfg.ratio.num * src_len <= static_cast<std::int64_t>(cfg.l_pos) * cfg.ratio.den)
    return cfg.ratio;
  return Rational(cfg.l_pos, src_len);
}

namespace detail {
// Source index whose insertion point (i + 1/2) * s is nearest to output
// position j, compared exactly over integers. Equidistant positions go to
// the larger index, which reproduces the [A,A,B,B,...] duplication pattern
// for integer ratios and keeps provenance monotone.
inline std::int32_t nearest_source_index(std::int64_t j, std::int64_t src_len,
                                         const Rational& s) {
  std::int32_t best = 0;
  std::int64_t best_dist = -1;
  for (std::int64_t i = 0; i < src_len; ++i) {
    // | j - (i+1)s + s/2 | scaled by 2*den: | 2*den*j - (2i+1)*num |
    std::int64_t d = 2 * s.den * j - (2 * i + 1) * s.num;
    if (d < 0) d = -d;
    if (best_dist < 0 || d <= best_dist) {
      best_dist = d;
      best = static_cast<std::int32_t>(i);
    }
  }
  return best;
}
}  // namespace detail

inline UpsampledSource upsample_tokens(std::span<const TokenId> x, const UpsampleConfig& cfg,
                                       TokenId mask_id) {
  if (x.empty()) throw DataError("cannot upsample an empty source sequence");
  const auto n = static_cast<std::int64_t>(x.size());
  const Rational s = effective_ratio(n, cfg);
  const std::int64_t length = s.floor_times(n);
  if (length < 1) throw DataError("upsampled length is zero for ratio " + s.str());

  UpsampledSource out;
  out.tokens.reserve(static_cast<std::size_t>(length));
  out.provenance.reserve(static_cast<std::size_t>(length));
  std::int32_t last_source = -1;
  for (std::int64_t j = 0; j < length; ++j) {
    const std::int32_t i = detail::nearest_source_index(j, n, s);
    if (cfg.scheme == UpsampleScheme::kInsertTokens || i != last_source) {
      out.tokens.push_back(x[static_cast<std::size_t>(i)]);
      out.provenance.push_back(i);
    } else {
      out.tokens.push_back(mask_id);
      out.provenance.push_back(UpsampledSource::kMaskedProvenance);
    }
    last_source = i;
  }
  // Fixed-ratio mode keeps the ratio and drops everything past the position
  // budget instead.
  if (cfg.mode == RatioMode::kFixed && length > cfg.l_pos) {
    out.tokens.resize(static_cast<std::size_t>(cfg.l_pos));
    out.provenance.resize(static_cast<std::size_t>(cfg.l_pos));
  }
  return out;
}

// Distance-kernel upsampling of hidden vectors: each output position is a
// softmax(-|j-i|/tau) mixture of the inputs. Kept as a standalone reference
// operation; the training path uses token-level upsampling.
template <class Real>
Mat<Real> softcopy(const Mat<Real>& h, const Rational& s, Real tau) {
  if (h.rows < 1) throw DataError("softcopy needs at least one input vector");
  if (!(tau > Real(0))) throw NumericError("softcopy temperature must be positive");
  if (!s.positive()) throw UsageError("softcopy ratio must be positive");
  const std::int64_t length = s.floor_times(static_cast<std::int64_t>(h.rows));
  Mat<Real> out(static_cast<std::size_t>(length), h.cols, Real(0));
  std::vector<Real> w(h.rows);
  for (std::int64_t j = 0; j < length; ++j) {
    Real max_logit = kNegInf<Real>;
    for (std::size_t i = 0; i < h.rows; ++i) {
      w[i] = -std::abs(static_cast<Real>(j) - static_cast<Real>(i)) / tau;
      max_logit = std::max(max_logit, w[i]);
    }
    Real z = 0;
    for (auto& wi : w) {
      wi = std::exp(wi - max_logit);
      z += wi;
    }
    for (std::size_t i = 0; i < h.rows; ++i) {
      const Real weight = w[i] / z;
      for (std::size_t k = 0; k < h.cols; ++k)
        out(static_cast<std::size_t>(j), k) += weight * h(i, k);
    }
  }
  return out;
}

}  // namespace natc
