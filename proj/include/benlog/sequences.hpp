#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "benlog/digits.hpp"
#include "benlog/measures.hpp"

namespace benlog {

// ---------------------------------------------------------------------------
// Primes

/// Calls f(p) for every prime p in [lo, hi], increasing. Segmented: memory
/// is O(sqrt(hi) + segment).
void for_each_prime(std::uint64_t lo, std::uint64_t hi,
                    const std::function<void(std::uint64_t)>& f);

/// All primes <= limit (empty for limit < 2).
std::vector<std::uint64_t> sieve_primes(std::uint64_t limit);

/// Kronecker symbol (disc / p) for an odd prime p or p = 2.
int kronecker(std::int64_t disc, std::uint64_t p);

/// Primes p <= limit split in Q(sqrt(disc)), disc in {-4, -3}.
std::vector<std::uint64_t> split_primes(std::int64_t disc, std::uint64_t limit);

bool is_prime(std::uint64_t n);

// ---------------------------------------------------------------------------
// Index sets

enum class IndexKind { kNaturals, kPrimes, kSplitPrimes, kExplicit };
enum class GrowthModel { kLog, kLogLog };

/// An infinite index set I together with the shape g of its harmonic sum:
/// sum_{i in I, i <= x} 1/i ~ C2 * g(x).
class IndexSet {
 public:
  static IndexSet naturals();
  static IndexSet primes();
  static IndexSet split_primes(std::int64_t disc);
  static IndexSet explicit_list(std::vector<std::uint64_t> elements, GrowthModel g, double c2);

  IndexKind kind() const { return kind_; }
  std::int64_t disc() const { return disc_; }
  GrowthModel growth() const { return growth_; }
  /// Expected constant C2 (1 for naturals and primes, 1/2 for split primes).
  double expected_c2() const { return c2_; }
  std::string name() const;

  double g(double x) const;

  /// Elements <= limit in increasing order.
  std::vector<std::uint64_t> elements(std::uint64_t limit) const;

 private:
  IndexSet(IndexKind kind, std::int64_t disc, GrowthModel growth, double c2)
      : kind_(kind), disc_(disc), growth_(growth), c2_(c2) {}

  IndexKind kind_;
  std::int64_t disc_ = 0;
  GrowthModel growth_;
  double c2_;
  std::vector<std::uint64_t> explicit_;
};

// ---------------------------------------------------------------------------
// Sequences a_i = C1 * i^m * c_i

enum class CurveId { k32a, k27a };

struct MeasureSampled {
  Measure measure;
};
struct CmTrace {
  CurveId curve;
};
/// a_i = i exactly (C1 = 1, m = 1, c_i = 1): the natural numbers themselves.
struct Identity {};

using CSource = std::variant<MeasureSampled, CmTrace, Identity>;

struct SequenceSpec {
  IndexSet index;
  double c1;
  double m;
  CSource source;

  /// Throws DomainError when C1 or m is not positive, or when a trace
  /// source does not carry the Hasse normalization C1 = 2, m = 1/2.
  void validate() const;
  std::string name() const;
};

SequenceSpec synthetic_spec(const IndexSet& index, const Measure& mu, double c1, double m);
SequenceSpec trace_spec(CurveId curve);
SequenceSpec identity_spec();

struct Term {
  std::uint64_t i;
  double c;
  RealTermValue a;
};

/// Base-2 radical inverse of n (bit reversal into (0, 1)).
inline double van_der_corput(std::uint64_t n) {
  std::uint64_t r = n;
  r = ((r >> 1) & 0x5555555555555555ULL) | ((r & 0x5555555555555555ULL) << 1);
  r = ((r >> 2) & 0x3333333333333333ULL) | ((r & 0x3333333333333333ULL) << 2);
  r = ((r >> 4) & 0x0F0F0F0F0F0F0F0FULL) | ((r & 0x0F0F0F0F0F0F0F0FULL) << 4);
  r = __builtin_bswap64(r);
  // Top 53 bits are exact in a double; n < 2^53 loses nothing.
  return static_cast<double>(r >> 11) * 0x1.0p-53;
}

/// Arcsine samples split on the low 16 bits of n: with n = 2^16 h + j,
/// van_der_corput(n) = vdc16(j) + van_der_corput(h) / 2^16 exactly, so
/// sin(pi (u - 1/2)) is a table entry for j rotated by a per-h angle.
inline constexpr int kArcsineTableBits = 16;

struct ArcsineRotation {
  double cos_d = 1.0;
  double sin_d = 0.0;
};

ArcsineRotation arcsine_rotation(std::uint64_t h);

/// (sin, cos) of pi (vdc16(j) - 1/2) for j < 2^16.
const std::vector<std::pair<double, double>>& arcsine_table();

inline double arcsine_sample(const ArcsineRotation& rot, std::uint64_t j) {
  const auto& [s, c] = arcsine_table()[j];
  return s * rot.cos_d + c * rot.sin_d;
}

/// c value and magnitude scale C1 * i^m for the n-th element of a
/// measure-sampled sequence. Arcsine values go through the rotation
/// table; other measures call inverse_cdf directly.
struct SyntheticSampler {
  Measure measure;
  double c1;
  double m;

  double c_at(std::uint64_t n) const {
    if (measure.kind() != MeasureKind::kArcsine) return measure.inverse_cdf(van_der_corput(n));
    constexpr std::uint64_t mask = (1ULL << kArcsineTableBits) - 1;
    return arcsine_sample(arcsine_rotation(n >> kArcsineTableBits), n & mask);
  }
  double scale(std::uint64_t i) const {
    return m == 1.0 ? c1 * static_cast<double>(i) : c1 * std::pow(static_cast<double>(i), m);
  }
};

/// Emits Term(i, c_i, a_i) for every i <= limit in the index set, where the
/// n-th element gets c = inverse_cdf(mu, van_der_corput(n)). Terms with
/// c == 0 are not emitted; the number skipped is returned.
std::uint64_t synthetic_terms(const SequenceSpec& spec, std::uint64_t limit,
                              const std::function<void(const Term&)>& emit);

/// CSV `i,c_i,a_i_repr` (header included).
void write_terms_csv_header(std::ostream& out);
void write_term_csv(std::ostream& out, const Term& term);

std::string shortest_double(double x);

// ---------------------------------------------------------------------------
// Compensated summation

/// Neumaier-compensated sum. merge() is associative up to the compensated
/// rounding, so fixed-order block merges give reproducible totals.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void merge(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct HarmonicSum {
  double sum;
  double c2_estimate;  // sum / g(x)
};

/// sum_{i in I, i <= x} 1/i and its ratio to g(x).
HarmonicSum harmonic_sum(const IndexSet& index, std::uint64_t x);

}  // namespace benlog
