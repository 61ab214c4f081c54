#include "benlog/digits.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

#include "benlog/errors.hpp"

namespace benlog {
namespace {

void check_base(int base) {
  if (base < kMinBase || base > kMaxBase) {
    throw ParseError("base must be in [2, 64], got " + std::to_string(base));
  }
}

int digit_value(char c, int base) {
  if (c >= '0' && c <= '9') return c - '0';
  if (base <= 36) {
    if (c >= 'a' && c <= 'z') return c - 'a' + 10;
    if (c >= 'A' && c <= 'Z') return c - 'A' + 10;
    return -1;
  }
  if (c >= 'a' && c <= 'z') return c - 'a' + 10;
  if (c >= 'A' && c <= 'Z') return c - 'A' + 36;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

}  // namespace

DigitString::DigitString(std::vector<int> digits, int base)
    : digits_(std::move(digits)), base_(base), value_(0) {
  check_base(base);
  if (digits_.empty()) throw ParseError("digit string is empty");
  if (digits_.front() == 0) throw ParseError("digit string has a leading zero");
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max() >> 2;
  for (int d : digits_) {
    if (d < 0 || d >= base) {
      throw ParseError("digit " + std::to_string(d) + " out of range for base " +
                       std::to_string(base));
    }
    if (value_ > (kMax - static_cast<std::uint64_t>(d)) / static_cast<std::uint64_t>(base)) {
      throw ParseError("digit string too long");
    }
    value_ = value_ * static_cast<std::uint64_t>(base) + static_cast<std::uint64_t>(d);
  }
}

DigitString DigitString::parse(std::string_view text, int base) {
  check_base(base);
  if (text.empty()) throw ParseError("digit string is empty");
  std::vector<int> digits;
  digits.reserve(text.size());
  for (char c : text) {
    const int d = digit_value(c, base);
    if (d < 0 || d >= base) {
      throw ParseError(std::string("invalid character '") + c + "' for base " +
                       std::to_string(base));
    }
    digits.push_back(d);
  }
  return DigitString(std::move(digits), base);
}

char digit_char(int digit, int base) {
  static constexpr std::string_view kLower = "0123456789abcdefghijklmnopqrstuvwxyz";
  static constexpr std::string_view kWide =
      "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ+/";
  return base <= 36 ? kLower[static_cast<std::size_t>(digit)]
                    : kWide[static_cast<std::size_t>(digit)];
}

std::string DigitString::str() const {
  std::string out;
  out.reserve(digits_.size());
  for (int d : digits_) out.push_back(digit_char(d, base_));
  return out;
}

ScaledFloat ScaledFloat::from_double(double x) {
  if (!std::isfinite(x)) throw DomainError("scaled float must be finite");
  int e = 0;
  const double m = std::frexp(x, &e);
  return {m, m == 0.0 ? 0 : e};
}

double ScaledFloat::to_double() const {
  return std::ldexp(mantissa, static_cast<int>(exponent));
}

double ScaledFloat::log_abs() const {
  return std::log(std::fabs(mantissa)) + static_cast<double>(exponent) * std::numbers::ln2;
}

RealTermValue RealTermValue::exact(BigInt v) {
  if (v == 0) throw DomainError("sequence terms must be nonzero");
  return RealTermValue(std::move(v));
}

RealTermValue RealTermValue::exact(std::int64_t v) { return exact(BigInt(v)); }

RealTermValue RealTermValue::scaled(double v) { return scaled(ScaledFloat::from_double(v)); }

RealTermValue RealTermValue::scaled(ScaledFloat v) {
  if (v.is_zero()) throw DomainError("sequence terms must be nonzero");
  return RealTermValue(v);
}

std::string RealTermValue::repr() const {
  if (is_exact()) return as_exact().str();
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, as_scaled().to_double());
  return std::string(buf, res.ptr);
}

double RealTermValue::approx() const {
  if (is_exact()) return as_exact().convert_to<double>();
  return as_scaled().to_double();
}

bool begins_with(std::int64_t x, const DigitString& s) {
  if (x == 0) throw DomainError("begins_with: x must be nonzero");
  const std::uint64_t base = static_cast<std::uint64_t>(s.base());
  const std::size_t len = s.length();
  // b^L * |x| must stay inside 128 bits; otherwise defer to BigInt.
  if (len * static_cast<std::size_t>(std::bit_width(base)) > 60) return begins_with(BigInt(x), s);

  const std::uint64_t v = x < 0 ? static_cast<std::uint64_t>(-(x + 1)) + 1
                                : static_cast<std::uint64_t>(x);
  std::uint64_t top = 1;
  for (std::size_t k = 0; k < len; ++k) top *= base;
  const std::uint64_t floor_len = top / base;
  if (v < floor_len) {
    std::uint64_t up = v;
    while (up < floor_len) up *= base;
    return up == s.value();
  }
  // Smallest b^k with v < top * b^k; then the leading L digits are v / b^k.
  unsigned __int128 scale = 1;
  while (static_cast<unsigned __int128>(v) >= top * scale) scale *= base;
  return static_cast<std::uint64_t>(v / scale) == s.value();
}

bool begins_with(const BigInt& x, const DigitString& s) {
  if (x == 0) throw DomainError("begins_with: x must be nonzero");
  const unsigned base = static_cast<unsigned>(s.base());
  BigInt v = abs(x);
  BigInt top = 1;
  for (std::size_t k = 0; k < s.length(); ++k) top *= base;
  const BigInt floor_len = top / base;
  while (v < floor_len) v *= base;
  // Drop L digits at a time while at least L would remain, then one by one.
  const BigInt chunk_floor = top * floor_len;
  while (v >= chunk_floor) v /= top;
  while (v >= top) v /= base;
  return v == s.value();
}

PrefixVerdict begins_with(const ScaledFloat& x, const DigitString& s) {
  if (x.is_zero()) throw DomainError("begins_with: x must be nonzero");
  const double ln_b = std::log(static_cast<double>(s.base()));
  const double sv = static_cast<double>(s.value());
  const double y = (x.log_abs() - std::log(sv)) / ln_b;
  const double f = y - std::floor(y);
  const double width = std::log1p(1.0 / sv) / ln_b;
  const double dist = std::min({f, 1.0 - f, std::fabs(f - width)});
  return {f < width, dist * ln_b < kBoundaryGuard};
}

PrefixVerdict begins_with(const RealTermValue& x, const DigitString& s) {
  if (x.is_exact()) return {begins_with(x.as_exact(), s), false};
  return begins_with(x.as_scaled(), s);
}

double benford_probability(const DigitString& s) {
  return std::log1p(1.0 / static_cast<double>(s.value())) /
         std::log(static_cast<double>(s.base()));
}

PrefixMatcher::PrefixMatcher(const DigitString& s)
    : event_(s),
      lo_(static_cast<double>(s.value())),
      hi_(static_cast<double>(s.value()) + 1.0),
      log_b2_(std::numbers::ln2 / std::log(static_cast<double>(s.base()))),
      log_b_s_(std::log(lo_) / std::log(static_cast<double>(s.base()))) {
  const double ln_b = std::log(static_cast<double>(s.base()));
  // Cover b^t for |x| in [2^-1000, 2^1000] with a little slack either side.
  t_min_ = static_cast<int>(std::floor(-1000.0 * std::numbers::ln2 / ln_b - log_b_s_)) - 3;
  const int t_max = static_cast<int>(std::ceil(1000.0 * std::numbers::ln2 / ln_b)) + 3;
  pow_.reserve(static_cast<std::size_t>(t_max - t_min_ + 1));
  for (int t = t_min_; t <= t_max; ++t) {
    pow_.push_back(static_cast<double>(std::pow(static_cast<long double>(s.base()), t)));
  }
  start_.assign(2048, 0);
  std::uint32_t k = 0;
  for (int biased = 1023 - 990; biased <= 1023 + 990; ++biased) {
    const double floor_x = std::ldexp(1.0, biased - 1023);
    while (lo_ * pow_[k + 1] <= floor_x) ++k;
    start_[static_cast<std::size_t>(biased)] = k;
  }
}

PrefixVerdict PrefixMatcher::operator()(double x) const {
  const double ax = std::fabs(x);
  const auto biased = static_cast<int>(std::bit_cast<std::uint64_t>(ax) >> 52);
  if (ax == 0.0 || biased < 1023 - 990 || biased > 1023 + 990) {
    return begins_with(ScaledFloat::from_double(x), event_);
  }
  std::size_t k = start_[static_cast<std::size_t>(biased)];
  while (lo_ * pow_[k + 1] <= ax) ++k;
  const double start = lo_ * pow_[k];
  const double stop = hi_ * pow_[k];
  const double next = lo_ * pow_[k + 1];
  const double guard = kBoundaryGuard * ax;
  const bool near = std::fabs(ax - start) <= guard || std::fabs(ax - stop) <= guard ||
                    std::fabs(next - ax) <= guard;
  return {ax < stop, near};
}

}  // namespace benlog
