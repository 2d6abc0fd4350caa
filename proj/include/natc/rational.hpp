#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>

#include "natc/errors.hpp"

namespace natc {

// Exact rational with positive denominator. Upsampling ratios are kept exact
// so that length floors and insertion-point comparisons never depend on
// floating-point rounding.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den == 0) throw UsageError("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  explicit Rational(std::int64_t n) : num(n), den(1) {}

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool positive() const { return num > 0; }

  // floor(this * n) for non-negative n
  std::int64_t floor_times(std::int64_t n) const { return num * n / den; }

  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }

  std::string str() const {
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
  }

  // Accepts "4", "3/2" and short decimals like "2.56".
  static Rational parse(std::string_view text) {
    if (text.empty()) throw UsageError("empty ratio");
    const auto to_int = [](std::string_view s) -> std::int64_t {
      if (s.empty()) throw UsageError("bad ratio component");
      std::int64_t v = 0;
      for (char c : s) {
        if (c < '0' || c > '9') throw UsageError("bad ratio: non-numeric character");
        v = v * 10 + (c - '0');
        if (v > (std::int64_t(1) << 40)) throw UsageError("ratio out of range");
      }
      return v;
    };
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
      return Rational(to_int(text.substr(0, slash)), to_int(text.substr(slash + 1)));
    }
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
      const std::string_view frac = text.substr(dot + 1);
      if (frac.size() > 9) throw UsageError("ratio has too many decimal places");
      std::int64_t scale = 1;
      for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
      return Rational(to_int(text.substr(0, dot)) * scale + to_int(frac), scale);
    }
    return Rational(to_int(text));
  }
};

}  // namespace natc
