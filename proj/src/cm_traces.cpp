#include "benlog/cm_traces.hpp"

#include <cmath>
#include <ostream>

#include "benlog/errors.hpp"
#include "benlog/modarith.hpp"

namespace benlog {
namespace {

const CMCurve kCurve32a{CurveId::k32a, "32a", -4, 32, 2, "y^2 = x^3 - x"};
const CMCurve kCurve27a{CurveId::k27a, "27a", -3, 27, 2, "y^2 + y = x^3"};

std::int64_t mod(std::int64_t a, std::int64_t m) { return ((a % m) + m) % m; }

void check_good_prime(const CMCurve& curve, std::uint64_t p) {
  if (p < 2) throw DomainError("trace: p must be prime");
  if (curve.is_bad_prime(p)) {
    throw DomainError("prime " + std::to_string(p) + " divides the level of " + curve.label);
  }
}

std::int64_t trace_32a(std::uint64_t p) {
  if (p % 4 == 3) return 0;
  const auto ab = cornacchia(1, p);
  if (!ab) throw IntegrityError("no two-square representation for split prime");
  auto a = static_cast<std::int64_t>(ab->first);
  const auto b = static_cast<std::int64_t>(ab->second);
  // b is even; a + b = 1 (mod 4) pins the sign of a for either sign of b.
  if (mod(a + b, 4) != 1) a = -a;
  return 2 * a;
}

std::int64_t trace_27a(std::uint64_t p) {
  if (p % 3 == 2) return 0;
  const auto xy = cornacchia(3, p);
  if (!xy) throw IntegrityError("no x^2 + 3y^2 representation for split prime");
  const auto x = static_cast<std::int64_t>(xy->first);
  const auto y = static_cast<std::int64_t>(xy->second);
  // 4p = (2x)^2 + 12y^2 = (x + 3y)^2 + 3(x - y)^2 = (x - 3y)^2 + 3(x + y)^2;
  // pick the form whose second square is divisible by 9.
  std::int64_t big_l = 0;
  if (y % 3 == 0) {
    big_l = 2 * x;
  } else if ((x - y) % 3 == 0) {
    big_l = x + 3 * y;
  } else {
    big_l = x - 3 * y;
  }
  if (mod(big_l, 3) != 1) big_l = -big_l;
  return -big_l;
}

}  // namespace

const CMCurve& CMCurve::get(CurveId id) { return id == CurveId::k32a ? kCurve32a : kCurve27a; }

const CMCurve& CMCurve::parse(std::string_view label) {
  if (label == "32a" || label == "curve-32a") return kCurve32a;
  if (label == "27a" || label == "curve-27a") return kCurve27a;
  throw ParseError("unknown curve '" + std::string(label) + "'");
}

std::optional<std::uint64_t> sqrt_mod(std::uint64_t a, std::uint64_t p) {
  a %= p;
  if (a == 0) return 0;
  if (p == 2) return a;
  if (powmod(a, (p - 1) / 2, p) != 1) return std::nullopt;
  if (p % 4 == 3) return powmod(a, (p + 1) / 4, p);

  std::uint64_t q = p - 1;
  int s = 0;
  while ((q & 1U) == 0) {
    q >>= 1U;
    ++s;
  }
  // Both loops below terminate for prime p; the bounds turn a composite
  // p (a caller contract violation) into an error instead of a hang.
  std::uint64_t z = 2;
  while (powmod(z, (p - 1) / 2, p) != p - 1) {
    if (++z == p) throw DomainError("sqrt_mod: p is not prime");
  }

  std::uint64_t c = powmod(z, q, p);
  std::uint64_t r = powmod(a, (q + 1) / 2, p);
  std::uint64_t t = powmod(a, q, p);
  int m = s;
  while (t != 1) {
    int i = 0;
    std::uint64_t t2 = t;
    while (t2 != 1) {
      t2 = mulmod(t2, t2, p);
      if (++i == m) throw DomainError("sqrt_mod: p is not prime");
    }
    std::uint64_t b = c;
    for (int k = 0; k < m - i - 1; ++k) b = mulmod(b, b, p);
    r = mulmod(r, b, p);
    c = mulmod(b, b, p);
    t = mulmod(t, c, p);
    m = i;
  }
  return r;
}

std::optional<std::pair<std::uint64_t, std::uint64_t>> cornacchia(std::uint64_t d,
                                                                  std::uint64_t p) {
  if (p < 3 || p % 2 == 0) throw DomainError("cornacchia: p must be an odd prime");
  if (d == 0 || d % p == 0) throw DomainError("cornacchia: gcd(d, p) must be 1");
#ifndef NDEBUG
  if (!is_prime(p)) throw DomainError("cornacchia: p must be prime");
#endif
  const auto root = sqrt_mod(p - d % p, p);
  if (!root) return std::nullopt;
  std::uint64_t r0 = *root;
  if (2 * r0 < p) r0 = p - r0;
  std::uint64_t a = p;
  std::uint64_t b = r0;
  while (static_cast<unsigned __int128>(b) * b > p) {
    const std::uint64_t r = a % b;
    a = b;
    b = r;
  }
  const std::uint64_t rest = p - b * b;
  if (rest % d != 0) return std::nullopt;
  const std::uint64_t c = rest / d;
  const std::uint64_t y = isqrt(c);
  if (y * y != c || y == 0) return std::nullopt;
  if (d == 1 && b % 2 == 0) return std::pair{y, b};
  return std::pair{b, y};
}

std::int64_t trace(const CMCurve& curve, std::uint64_t p) {
  check_good_prime(curve, p);
  return curve.id == CurveId::k32a ? trace_32a(p) : trace_27a(p);
}

std::uint64_t brute_force_point_count(const CMCurve& curve, std::uint64_t p) {
  check_good_prime(curve, p);
  if (p > kPointCountCeiling) throw DomainError("point counting oracle refuses p > 10^6");
  if (p == 2) {
    std::uint64_t count = 1;
    for (std::uint64_t x = 0; x < 2; ++x) {
      for (std::uint64_t y = 0; y < 2; ++y) {
        const std::uint64_t lhs = curve.id == CurveId::k32a ? y * y : y * y + y;
        const std::uint64_t rhs = curve.id == CurveId::k32a ? x * x * x + x : x * x * x;
        if (lhs % 2 == rhs % 2) ++count;
      }
    }
    return count;
  }
  std::vector<std::uint8_t> roots(p, 0);  // number of y with y^2 = v
  for (std::uint64_t y = 0; y < p; ++y) ++roots[y * y % p];
  std::uint64_t count = 1;
  for (std::uint64_t x = 0; x < p; ++x) {
    const std::uint64_t x3 = x * x % p * x % p;
    // y^2 + y = x^3  <=>  (2y + 1)^2 = 4x^3 + 1.
    const std::uint64_t v = curve.id == CurveId::k32a ? (x3 + p - x) % p : (4 * x3 + 1) % p;
    count += roots[v];
  }
  return count;
}

double cos_theta(std::uint64_t p, std::int64_t a_p, int weight) {
  if (weight < 2 || weight % 2 != 0) throw DomainError("weight must be even and >= 2");
  const long double bound = 2.0L * std::pow(static_cast<long double>(p), (weight - 1) / 2.0L);
  if (weight == 2) {
    const auto a = static_cast<__int128>(a_p);
    if (a * a > static_cast<__int128>(4) * p) {
      throw IntegrityError("Hasse bound violated at p = " + std::to_string(p));
    }
  } else if (std::fabs(static_cast<long double>(a_p)) > bound) {
    throw IntegrityError("Hasse bound violated at p = " + std::to_string(p));
  }
  return static_cast<double>(static_cast<long double>(a_p) / bound);
}

std::vector<TraceRecord> trace_table(const CMCurve& curve, std::uint64_t limit,
                                     bool split_only) {
  std::vector<TraceRecord> out;
  for_each_prime(2, limit, [&](std::uint64_t p) {
    if (curve.is_bad_prime(p)) {
      if (!split_only) out.push_back({p, 0, 0.0});
      return;
    }
    if (split_only && kronecker(curve.cm_field_disc, p) != 1) return;
    const std::int64_t a = trace(curve, p);
    out.push_back({p, a, cos_theta(p, a, curve.weight)});
  });
  return out;
}

std::optional<std::uint64_t> first_oracle_mismatch(const CMCurve& curve, std::uint64_t limit) {
  std::optional<std::uint64_t> bad;
  for_each_prime(2, limit - 1, [&](std::uint64_t p) {
    if (bad || curve.is_bad_prime(p)) return;
    const auto expected =
        static_cast<std::int64_t>(p + 1) - static_cast<std::int64_t>(brute_force_point_count(curve, p));
    if (trace(curve, p) != expected) bad = p;
  });
  return bad;
}

void write_trace_csv_header(std::ostream& out) { out << "p,a_p,cos_theta\n"; }

void write_trace_csv(std::ostream& out, const TraceRecord& rec) {
  out << rec.p << ',' << rec.a_p << ',' << shortest_double(rec.cos_theta) << '\n';
}

}  // namespace benlog
