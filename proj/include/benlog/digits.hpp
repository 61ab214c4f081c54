#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace benlog {

using BigInt = boost::multiprecision::cpp_int;

inline constexpr int kMinBase = 2;
inline constexpr int kMaxBase = 64;

// Relative distance to a prefix-interval endpoint below which a floating
// verdict is reported as boundary-flagged instead of hit/miss.
inline constexpr double kBoundaryGuard = 1e-12;

/// A nonempty base-b digit string with nonzero leading digit, read as the
/// integer it spells. This is the event parameter of every leading-digit
/// question: x "begins with" S iff S*b^t <= |x| < (S+1)*b^t for some t.
class DigitString {
 public:
  DigitString(std::vector<int> digits, int base);

  /// Digits use 0-9, then a-z (10..35); above base 36 the letters are
  /// case-sensitive with A-Z = 36..61, '+' = 62, '/' = 63.
  static DigitString parse(std::string_view text, int base);

  int base() const { return base_; }
  std::span<const int> digits() const { return digits_; }
  std::size_t length() const { return digits_.size(); }
  std::uint64_t value() const { return value_; }

  std::string str() const;

  friend bool operator==(const DigitString&, const DigitString&) = default;

 private:
  std::vector<int> digits_;
  int base_;
  std::uint64_t value_;
};

/// Digit character for `digit` under the alphabet accepted by parse().
char digit_char(int digit, int base);

/// x = mantissa * 2^exponent with mantissa in [0.5, 1) (frexp convention).
struct ScaledFloat {
  double mantissa = 0.0;
  std::int64_t exponent = 0;

  static ScaledFloat from_double(double x);
  double to_double() const;
  bool is_zero() const { return mantissa == 0.0; }
  /// Natural log of |x|, valid far outside the double exponent range.
  double log_abs() const;
};

/// A sequence term as consumed by digit tests: either an exact integer or
/// a scaled float.
class RealTermValue {
 public:
  static RealTermValue exact(BigInt v);
  static RealTermValue exact(std::int64_t v);
  static RealTermValue scaled(double v);
  static RealTermValue scaled(ScaledFloat v);

  bool is_exact() const { return std::holds_alternative<BigInt>(value_); }
  const BigInt& as_exact() const { return std::get<BigInt>(value_); }
  const ScaledFloat& as_scaled() const { return std::get<ScaledFloat>(value_); }

  /// Decimal for exact values, shortest round-trip form for floats.
  std::string repr() const;
  double approx() const;

 private:
  explicit RealTermValue(std::variant<BigInt, ScaledFloat> v) : value_(std::move(v)) {}
  std::variant<BigInt, ScaledFloat> value_;
};

struct PrefixVerdict {
  bool begins = false;
  bool boundary = false;  // only ever set for floating values

  friend bool operator==(const PrefixVerdict&, const PrefixVerdict&) = default;
};

// Exact tests. Throw DomainError for x == 0.
bool begins_with(std::int64_t x, const DigitString& s);
bool begins_with(const BigInt& x, const DigitString& s);
// Fractional part of log_b|x| against [log_b S, log_b(S+1)) modulo 1.
PrefixVerdict begins_with(const ScaledFloat& x, const DigitString& s);
PrefixVerdict begins_with(const RealTermValue& x, const DigitString& s);

/// log_b(1 + 1/S): the Benford frequency of prefix S.
double benford_probability(const DigitString& s);

/// Hot-loop variant of the scaled-float test for finite doubles. Locates
/// the decade by binary exponent and compares against a table of b^t, so
/// no logarithm is taken per call. Agrees with the log-based test except
/// possibly on flagged terms.
class PrefixMatcher {
 public:
  explicit PrefixMatcher(const DigitString& s);

  PrefixVerdict operator()(double x) const;

  const DigitString& event() const { return event_; }

 private:
  DigitString event_;
  double lo_;  // S
  double hi_;  // S + 1
  double log_b2_;
  double log_b_s_;
  int t_min_;
  std::vector<double> pow_;             // pow_[k] = b^(t_min_ + k)
  std::vector<std::uint32_t> start_;    // by biased binary exponent: largest k with S b^t <= 2^e
};

}  // namespace benlog
