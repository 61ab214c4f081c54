#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "benlog/sequences.hpp"

namespace benlog {

/// A weight-2 newform with CM, realized by an elliptic curve over Q.
struct CMCurve {
  CurveId id;
  std::string label;     // "32a" / "27a"
  std::int64_t cm_field_disc;  // -4 for Q(i), -3 for Q(sqrt(-3))
  std::uint64_t level;
  int weight;
  std::string equation;

  static const CMCurve& get(CurveId id);
  static const CMCurve& parse(std::string_view label);

  bool is_bad_prime(std::uint64_t p) const { return level % p == 0; }
};

struct TraceRecord {
  std::uint64_t p;
  std::int64_t a_p;
  double cos_theta;
};

/// Square root of a modulo an odd prime p (Tonelli-Shanks; the non-residue
/// is the smallest candidate z >= 2). nullopt if a is a non-residue.
std::optional<std::uint64_t> sqrt_mod(std::uint64_t a, std::uint64_t p);

/// Solves a^2 + d*b^2 = p with a, b > 0, or nullopt if no solution exists.
/// For d = 1 the odd coordinate is returned first.
std::optional<std::pair<std::uint64_t, std::uint64_t>> cornacchia(std::uint64_t d,
                                                                  std::uint64_t p);

/// Frobenius trace a_p at a good prime p, from the CM closed form:
///   32a: 0 if p = 3 mod 4; else p = a^2 + b^2, a odd, a + b = 1 mod 4, a_p = 2a.
///   27a: 0 if p = 2 mod 3; else 4p = L^2 + 27M^2, L = 1 mod 3, a_p = -L.
/// Throws DomainError at primes dividing the level.
std::int64_t trace(const CMCurve& curve, std::uint64_t p);

/// #E(F_p) including the point at infinity, by enumerating x in F_p against
/// a table of squares. Refuses p > 10^6.
std::uint64_t brute_force_point_count(const CMCurve& curve, std::uint64_t p);

inline constexpr std::uint64_t kPointCountCeiling = 1'000'000;

/// a_p / (2 p^((k-1)/2)). Throws IntegrityError if the Hasse bound fails.
double cos_theta(std::uint64_t p, std::int64_t a_p, int weight);

/// One row per prime p <= limit, sorted by p. Primes dividing the level get
/// a_p = 0 (additive reduction). With split_only, only primes split in the
/// CM field are kept. Every row is Hasse-checked.
std::vector<TraceRecord> trace_table(const CMCurve& curve, std::uint64_t limit,
                                     bool split_only);

/// Compares trace() with p + 1 - #E(F_p) for every good prime p < limit.
/// Returns the first mismatching prime, if any.
std::optional<std::uint64_t> first_oracle_mismatch(const CMCurve& curve, std::uint64_t limit);

void write_trace_csv_header(std::ostream& out);
void write_trace_csv(std::ostream& out, const TraceRecord& rec);

}  // namespace benlog
