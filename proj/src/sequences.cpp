#include "benlog/sequences.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>

#include "benlog/errors.hpp"
#include "benlog/modarith.hpp"

namespace benlog {
namespace {

constexpr std::uint64_t kSegment = 1U << 18;

std::vector<std::uint32_t> small_primes(std::uint64_t limit) {
  std::vector<bool> composite(limit + 1, false);
  std::vector<std::uint32_t> out;
  for (std::uint64_t p = 2; p <= limit; ++p) {
    if (composite[p]) continue;
    out.push_back(static_cast<std::uint32_t>(p));
    for (std::uint64_t q = p * p; q <= limit; q += p) composite[q] = true;
  }
  return out;
}

}  // namespace

void for_each_prime(std::uint64_t lo, std::uint64_t hi,
                    const std::function<void(std::uint64_t)>& f) {
  if (hi < 2 || lo > hi) return;
  lo = std::max<std::uint64_t>(lo, 2);
  const auto base = small_primes(isqrt(hi));
  std::vector<unsigned char> seg(kSegment);
  for (std::uint64_t start = lo; start <= hi; start += kSegment) {
    const std::uint64_t stop = std::min(hi, start + kSegment - 1);
    const std::size_t len = stop - start + 1;
    std::fill(seg.begin(), seg.begin() + static_cast<std::ptrdiff_t>(len), 1);
    for (std::uint32_t p : base) {
      const std::uint64_t pp = static_cast<std::uint64_t>(p) * p;
      if (pp > stop) break;
      std::uint64_t first = std::max(pp, (start + p - 1) / p * p);
      for (std::uint64_t q = first; q <= stop; q += p) seg[q - start] = 0;
    }
    for (std::size_t k = 0; k < len; ++k) {
      if (seg[k]) f(start + k);
    }
  }
}

std::vector<std::uint64_t> sieve_primes(std::uint64_t limit) {
  std::vector<std::uint64_t> out;
  if (limit < 2) return out;
  out.reserve(static_cast<std::size_t>(1.3 * static_cast<double>(limit) /
                                       std::log(static_cast<double>(limit) + 1.0)) + 8);
  for_each_prime(2, limit, [&](std::uint64_t p) { out.push_back(p); });
  return out;
}

int kronecker(std::int64_t disc, std::uint64_t p) {
  if (p == 2) {
    if (disc % 2 == 0) return 0;
    const std::int64_t r = ((disc % 8) + 8) % 8;
    return (r == 1 || r == 7) ? 1 : -1;
  }
  const auto m = static_cast<std::int64_t>(p);
  const auto a = static_cast<std::uint64_t>(((disc % m) + m) % m);
  if (a == 0) return 0;
  return powmod(a, (p - 1) / 2, p) == 1 ? 1 : -1;
}

std::vector<std::uint64_t> split_primes(std::int64_t disc, std::uint64_t limit) {
  if (disc != -4 && disc != -3) {
    throw DomainError("split primes are supported for disc -4 and -3 only");
  }
  std::vector<std::uint64_t> out;
  for_each_prime(2, limit, [&](std::uint64_t p) {
    if (kronecker(disc, p) == 1) out.push_back(p);
  });
  return out;
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1U) == 0) {
    d >>= 1U;
    ++s;
  }
  // Deterministic for all 64-bit n.
  for (std::uint64_t a : {2ULL, 325ULL, 9375ULL, 28178ULL, 450775ULL, 9780504ULL, 1795265022ULL}) {
    std::uint64_t x = powmod(a % n, d, n);
    if (a % n == 0 || x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

IndexSet IndexSet::naturals() { return {IndexKind::kNaturals, 0, GrowthModel::kLog, 1.0}; }

IndexSet IndexSet::primes() { return {IndexKind::kPrimes, 0, GrowthModel::kLogLog, 1.0}; }

IndexSet IndexSet::split_primes(std::int64_t disc) {
  if (disc != -4 && disc != -3) {
    throw DomainError("split primes are supported for disc -4 and -3 only");
  }
  return {IndexKind::kSplitPrimes, disc, GrowthModel::kLogLog, 0.5};
}

IndexSet IndexSet::explicit_list(std::vector<std::uint64_t> elements, GrowthModel g, double c2) {
  if (!(c2 > 0.0)) throw DomainError("C2 must be positive");
  std::sort(elements.begin(), elements.end());
  elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
  if (!elements.empty() && elements.front() == 0) throw DomainError("index 0 is not in N");
  IndexSet out(IndexKind::kExplicit, 0, g, c2);
  out.explicit_ = std::move(elements);
  return out;
}

std::string IndexSet::name() const {
  switch (kind_) {
    case IndexKind::kNaturals:
      return "naturals";
    case IndexKind::kPrimes:
      return "primes";
    case IndexKind::kSplitPrimes:
      return "split-primes(" + std::to_string(disc_) + ")";
    case IndexKind::kExplicit:
      return "explicit";
  }
  return "?";
}

double IndexSet::g(double x) const {
  return growth_ == GrowthModel::kLog ? std::log(x) : std::log(std::log(x));
}

std::vector<std::uint64_t> IndexSet::elements(std::uint64_t limit) const {
  switch (kind_) {
    case IndexKind::kNaturals: {
      std::vector<std::uint64_t> out(limit);
      for (std::uint64_t i = 0; i < limit; ++i) out[i] = i + 1;
      return out;
    }
    case IndexKind::kPrimes:
      return sieve_primes(limit);
    case IndexKind::kSplitPrimes:
      return benlog::split_primes(disc_, limit);
    case IndexKind::kExplicit: {
      const auto end = std::upper_bound(explicit_.begin(), explicit_.end(), limit);
      return {explicit_.begin(), end};
    }
  }
  return {};
}

void SequenceSpec::validate() const {
  if (!(c1 > 0.0) || !(m > 0.0)) throw DomainError("C1 and m must be positive");
  if (std::holds_alternative<CmTrace>(source)) {
    if (c1 != 2.0 || m != 0.5) {
      throw DomainError("weight-2 trace sequences use C1 = 2, m = 1/2");
    }
    if (index.kind() != IndexKind::kSplitPrimes) {
      throw DomainError("trace sequences are indexed by split primes");
    }
  }
  if (std::holds_alternative<Identity>(source) && (c1 != 1.0 || m != 1.0)) {
    throw DomainError("the identity sequence uses C1 = 1, m = 1");
  }
}

std::string SequenceSpec::name() const {
  return std::visit(
      [&](const auto& src) -> std::string {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, MeasureSampled>) {
          return "synthetic-" + src.measure.name() + "/" + index.name();
        } else if constexpr (std::is_same_v<T, CmTrace>) {
          return std::string("traces-") + (src.curve == CurveId::k32a ? "32a" : "27a") + "/" +
                 index.name();
        } else {
          return "identity/" + index.name();
        }
      },
      source);
}

SequenceSpec synthetic_spec(const IndexSet& index, const Measure& mu, double c1, double m) {
  SequenceSpec spec{index, c1, m, MeasureSampled{mu}};
  spec.validate();
  return spec;
}

SequenceSpec trace_spec(CurveId curve) {
  return {IndexSet::split_primes(curve == CurveId::k32a ? -4 : -3), 2.0, 0.5, CmTrace{curve}};
}

SequenceSpec identity_spec() { return {IndexSet::naturals(), 1.0, 1.0, Identity{}}; }

ArcsineRotation arcsine_rotation(std::uint64_t h) {
  if (h == 0) return {};
  const double angle = std::numbers::pi * van_der_corput(h) * 0x1.0p-16;
  return {std::cos(angle), std::sin(angle)};
}

const std::vector<std::pair<double, double>>& arcsine_table() {
  static const auto table = [] {
    std::vector<std::pair<double, double>> t(std::size_t{1} << kArcsineTableBits);
    for (std::uint64_t j = 0; j < t.size(); ++j) {
      const double angle = std::numbers::pi * (van_der_corput(j) - 0.5);
      t[j] = {std::sin(angle), std::cos(angle)};
    }
    return t;
  }();
  return table;
}

std::uint64_t synthetic_terms(const SequenceSpec& spec, std::uint64_t limit,
                              const std::function<void(const Term&)>& emit) {
  spec.validate();
  const auto* sampled = std::get_if<MeasureSampled>(&spec.source);
  if (sampled == nullptr) throw DomainError("synthetic_terms needs a measure-sampled source");
  const SyntheticSampler sampler{sampled->measure, spec.c1, spec.m};
  std::uint64_t skipped = 0;
  auto visit = [&](std::uint64_t n, std::uint64_t i) {
    const double c = sampler.c_at(n);
    if (c == 0.0) {
      ++skipped;
      return;
    }
    emit(Term{i, c, RealTermValue::scaled(sampler.scale(i) * c)});
  };
  if (spec.index.kind() == IndexKind::kNaturals) {
    for (std::uint64_t i = 1; i <= limit; ++i) visit(i, i);
  } else {
    std::uint64_t n = 0;
    for (std::uint64_t i : spec.index.elements(limit)) visit(++n, i);
  }
  return skipped;
}

std::string shortest_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_terms_csv_header(std::ostream& out) { out << "i,c_i,a_i_repr\n"; }

void write_term_csv(std::ostream& out, const Term& term) {
  out << term.i << ',' << shortest_double(term.c) << ',' << term.a.repr() << '\n';
}

HarmonicSum harmonic_sum(const IndexSet& index, std::uint64_t x) {
  if (index.growth() == GrowthModel::kLogLog && x < 3) {
    throw DomainError("harmonic_sum: log log model needs x >= 3");
  }
  if (x < 2) throw DomainError("harmonic_sum: log model needs x >= 2");
  CompensatedSum sum;
  if (index.kind() == IndexKind::kNaturals) {
    for (std::uint64_t i = 1; i <= x; ++i) sum.add(1.0 / static_cast<double>(i));
  } else {
    for (std::uint64_t i : index.elements(x)) sum.add(1.0 / static_cast<double>(i));
  }
  const double s = sum.value();
  return {s, s / index.g(static_cast<double>(x))};
}

}  // namespace benlog
