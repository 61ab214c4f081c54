#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "benlog/density.hpp"
#include "benlog/errors.hpp"
#include "oracles.hpp"

using namespace benlog;

namespace {

Term exact_term(std::uint64_t i, std::int64_t a) { return Term{i, 1.0, RealTermValue::exact(a)}; }

// Exact window membership: C1 * i^(t/2) against (num/den) * B, compared
// after squaring so half-integer powers stay in integers.
struct Bound {
  oracle::u128 num, den;
  bool strict;
};

int cmp_scaled(std::uint64_t c1, int twice_m, std::uint64_t i, const Bound& q, oracle::u128 scale) {
  oracle::u128 lhs = static_cast<oracle::u128>(c1) * c1 * q.den * q.den;
  for (int k = 0; k < twice_m; ++k) lhs *= i;
  const oracle::u128 rhs = q.num * q.num * scale * scale;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

bool in_window(WindowKind kind, int base, int n, std::uint64_t c1, int twice_m, std::uint64_t i) {
  Bound lo{}, hi{};
  oracle::u128 scale = 1;
  const bool binary = kind == WindowKind::kBinaryLower || kind == WindowKind::kBinaryUpper;
  for (int k = 0; k < n; ++k) scale *= binary ? 4 : static_cast<oracle::u128>(base);
  switch (kind) {
    case WindowKind::kLower:
      lo = {40, 23, false};
      hi = {2, 1, true};
      break;
    case WindowKind::kUpper:
      lo = {5, 2, true};
      hi = {8, 3, false};
      break;
    case WindowKind::kBinaryLower:
      lo = {30, 11, false};
      hi = {3, 1, true};
      break;
    case WindowKind::kBinaryUpper:
      lo = {9, 2, false};
      hi = {5, 1, true};
      break;
  }
  const int a = cmp_scaled(c1, twice_m, i, lo, scale);
  const int b = cmp_scaled(c1, twice_m, i, hi, scale);
  return (lo.strict ? a > 0 : a >= 0) && (hi.strict ? b < 0 : b <= 0);
}

}  // namespace

TEST_CASE("accumulate examples") {
  const DigitString one2 = DigitString::parse("1", 2);
  for (DensityMode mode : {DensityMode::kArithmetic, DensityMode::kLogarithmic}) {
    const DensityAccumulator acc = accumulate(DensityAccumulator(mode), exact_term(2, 2), one2);
    CHECK(acc.hits() == acc.totals());
    CHECK(acc.ratio() == 1.0);
  }
  const DigitString one = DigitString::parse("1", 10);
  DensityAccumulator acc;
  acc = accumulate(acc, exact_term(3, 9), one);
  CHECK(acc.total_count() == 1);
  CHECK(acc.hit_count() == 0);
  acc = accumulate(acc, exact_term(4, 12), one);
  CHECK(acc.with_mode(DensityMode::kLogarithmic).ratio() ==
        doctest::Approx((1.0 / 4) / (1.0 / 3 + 1.0 / 4)));
}

TEST_CASE("ratio examples") {
  DensityAccumulator acc;
  acc.add(1, true, false);
  for (std::uint64_t i = 2; i <= 4; ++i) acc.add(i, false, false);
  CHECK(acc.ratio() == 0.25);
  CHECK_THROWS_AS(DensityAccumulator().ratio(), DomainError);

  DensityAccumulator flagged;
  flagged.add(5, true, true);
  flagged.add(6, true, false);
  CHECK(flagged.ratio() == 0.5);
  CHECK(flagged.flagged_fraction() == 0.5);
}

TEST_CASE("naturals: arithmetic ratio of leading 1 at 1e6") {
  const TermSource identity(identity_spec(), 0);
  const DigitString one = DigitString::parse("1", 10);
  const auto acc = accumulate_range(identity, {one}, 1, 1000000, 1).front();
  std::uint64_t want = 0;
  for (std::uint64_t i = 1; i <= 1000000; ++i) want += oracle::render(i, 10).front() == 1 ? 1 : 0;
  CHECK(want == 111112);
  CHECK(acc.hit_count() == want);
  CHECK(acc.ratio() == doctest::Approx(0.111112).epsilon(1e-12));
  CHECK(acc.flagged() == 0);
}

TEST_CASE("naturals: logarithmic ratio of leading 1 at 1e7") {
  const TermSource identity(identity_spec(), 0);
  const auto acc = accumulate_range(identity, {DigitString::parse("1", 10)}, 1, 10000000, 1).front();
  CHECK(std::fabs(acc.with_mode(DensityMode::kLogarithmic).ratio() - std::log10(2.0)) <= 0.01);
}

TEST_CASE("hits never exceed totals") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    DensityAccumulator acc(trial % 2 ? DensityMode::kLogarithmic : DensityMode::kArithmetic);
    std::uint64_t i = 1;
    for (int k = 0; k < 500; ++k) {
      i += 1 + rng() % 50;
      acc.add(i, rng() % 3 != 0, rng() % 97 == 0);
      REQUIRE(acc.hits() <= acc.totals() * (1 + 1e-15));
    }
  }
}

TEST_CASE("merge equals single-pass accumulation") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const int len = 1 + static_cast<int>(rng() % 5000);
    std::vector<std::pair<std::uint64_t, bool>> stream;
    std::uint64_t i = 1 + rng() % 10;
    for (int k = 0; k < len; ++k) {
      stream.emplace_back(i, rng() % 2 == 0);
      i += 1 + rng() % 1000;
    }
    const auto cut1 = static_cast<std::size_t>(rng() % stream.size());
    const auto cut2 = cut1 + static_cast<std::size_t>(rng() % (stream.size() - cut1 + 1));
    DensityAccumulator whole(DensityMode::kLogarithmic);
    DensityAccumulator parts[3] = {DensityAccumulator(DensityMode::kLogarithmic),
                                   DensityAccumulator(DensityMode::kLogarithmic),
                                   DensityAccumulator(DensityMode::kLogarithmic)};
    for (std::size_t k = 0; k < stream.size(); ++k) {
      whole.add(stream[k].first, stream[k].second, false);
      parts[k < cut1 ? 0 : (k < cut2 ? 1 : 2)].add(stream[k].first, stream[k].second, false);
    }
    DensityAccumulator left = parts[0];
    left.merge(parts[1]);
    left.merge(parts[2]);
    DensityAccumulator right = parts[1];
    right.merge(parts[2]);
    DensityAccumulator assoc = parts[0];
    assoc.merge(right);
    if (whole.hit_count() == 0) continue;
    REQUIRE(std::fabs(left.ratio() - whole.ratio()) <= 1e-12);
    REQUIRE(std::fabs(assoc.ratio() - whole.ratio()) <= 1e-12);
    REQUIRE(left.total_count() == whole.total_count());
    REQUIRE(left.with_mode(DensityMode::kArithmetic).ratio() ==
            whole.with_mode(DensityMode::kArithmetic).ratio());
  }
}

namespace {

// Arithmetic and logarithmic ratio of "i = r mod q" over 1..x.
std::pair<double, double> residue_ratios(std::uint64_t q, std::uint64_t r, std::uint64_t x) {
  DensityAccumulator acc;
  for (std::uint64_t i = 1; i <= x; ++i) acc.add(i, i % q == r, false);
  return {acc.ratio(), acc.with_mode(DensityMode::kLogarithmic).ratio()};
}

}  // namespace

TEST_CASE("arithmetic and logarithmic ratios converge together on residue classes") {
  // The weighted ratio of a residue class carries a bias of order 1/log x,
  // so the gap times log x stays bounded while the gap itself shrinks.
  for (auto [q, r] : {std::pair<std::uint64_t, std::uint64_t>{2, 0}, {2, 1}, {3, 0}, {3, 1}, {5, 3}}) {
    const auto [a4, l4] = residue_ratios(q, r, 10000);
    const auto [a6, l6] = residue_ratios(q, r, 1000000);
    CHECK(std::fabs(a6 - 1.0 / static_cast<double>(q)) <= 1e-6);
    CHECK(std::fabs(a6 - l6) < std::fabs(a4 - l4));
    CHECK(std::fabs(a6 - l6) * std::log(1e6) <= 0.7);
  }
}

// Parity sits 0.024 away at 1e6: ln 2 / (2 H(1e6)).
TEST_CASE("residue-class ratios agree within 1e-2 at 1e6" * doctest::test_suite("stated-tolerance")) {
  for (auto [q, r] : {std::pair<std::uint64_t, std::uint64_t>{2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}}) {
    const auto [a, l] = residue_ratios(q, r, 1000000);
    CHECK(std::fabs(a - l) <= 0.01);
  }
}

TEST_CASE("window bounds examples") {
  const IndexRange lower = window_bounds({WindowKind::kLower, 10, 1, 2.0, 1.0});
  CHECK(lower.lo == 9);
  CHECK(lower.hi == 9);
  const IndexRange upper = window_bounds({WindowKind::kUpper, 10, 1, 2.0, 1.0});
  CHECK(upper.lo == 13);
  CHECK(upper.hi == 13);
  CHECK(window_bounds({WindowKind::kLower, 10, 0, 2.0, 1.0}).empty());
  CHECK_THROWS_AS(window_bounds({WindowKind::kLower, 10, -1, 2.0, 1.0}), DomainError);
  CHECK_THROWS_AS(window_bounds({WindowKind::kBinaryLower, 10, 1, 2.0, 1.0}), DomainError);
  CHECK_THROWS_AS(window_bounds({WindowKind::kLower, 10, 1, 0.0, 1.0}), DomainError);
  for (int n = 3; n <= 12; ++n) CHECK_FALSE(window_bounds({WindowKind::kLower, 10, n, 2.0, 1.0}).empty());
}

TEST_CASE("window bounds respect strict and non-strict ties") {
  // 2i < 20 excludes i = 10; 1 * i <= 8/3 * 3 includes i = 8.
  CHECK(window_bounds({WindowKind::kLower, 10, 1, 2.0, 1.0}).hi == 9);
  CHECK(window_bounds({WindowKind::kUpper, 3, 1, 1.0, 1.0}).hi == 8);
  // 25 < i excludes 25.
  CHECK(window_bounds({WindowKind::kUpper, 10, 1, 1.0, 1.0}).lo == 26);
  // 9 * 2 = 9/2 * 4 is included; 5 * 4 = 5 * 4 is excluded.
  CHECK(window_bounds({WindowKind::kBinaryUpper, 2, 1, 9.0, 1.0}).lo == 2);
  CHECK(window_bounds({WindowKind::kBinaryUpper, 2, 1, 5.0, 1.0}).hi == 3);
  // 2 sqrt(i) < 20 excludes i = 100.
  CHECK(window_bounds({WindowKind::kLower, 10, 1, 2.0, 0.5}).hi == 99);
}

TEST_CASE("window bounds agree with exact membership") {
  const WindowKind kinds[] = {WindowKind::kLower, WindowKind::kUpper, WindowKind::kBinaryLower,
                              WindowKind::kBinaryUpper};
  for (WindowKind kind : kinds) {
    const bool binary = kind == WindowKind::kBinaryLower || kind == WindowKind::kBinaryUpper;
    for (int base : binary ? std::vector<int>{2} : std::vector<int>{2, 3, 10}) {
      for (int n = 0; n <= 5; ++n) {
        for (std::uint64_t c1 : {1ULL, 2ULL, 3ULL, 5ULL, 9ULL}) {
          for (int twice_m : {1, 2, 3, 4}) {
            const IndexRange r = window_bounds(
                {kind, base, n, static_cast<double>(c1), twice_m / 2.0});
            auto member = [&](std::uint64_t i) { return in_window(kind, base, n, c1, twice_m, i); };
            if (r.empty()) {
              for (std::uint64_t i = 1; i <= 2000; ++i) REQUIRE_FALSE(member(i));
              continue;
            }
            REQUIRE(member(r.lo));
            REQUIRE(member(r.hi));
            if (r.lo > 1) REQUIRE_FALSE(member(r.lo - 1));
            REQUIRE_FALSE(member(r.hi + 1));
            const std::uint64_t step = std::max<std::uint64_t>(1, r.size() / 1000);
            for (std::uint64_t i = r.lo; i <= r.hi; i += step) REQUIRE(member(i));
          }
        }
      }
    }
  }
}

TEST_CASE("window density on an all-hit event") {
  // Every nonzero number begins with 1 in base 2.
  const TermSource source(synthetic_spec(IndexSet::naturals(), kArcsine, 2.0, 1.0), 0);
  const DigitString one = DigitString::parse("1", 2);
  const WindowResult w = window_density(source, {WindowKind::kBinaryLower, 2, 6, 2.0, 1.0}, one, 1);
  CHECK(w.density == 1.0);
  CHECK(w.members == w.range.size());
  CHECK_THROWS_AS(window_density(source, {WindowKind::kLower, 10, 0, 2.0, 1.0},
                                 DigitString::parse("1", 10), 1),
                  DomainError);
}

TEST_CASE("windows over a Benford-by-construction stream") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int base : {3, 10, 16}) {
    for (const char* s : {"1", "2"}) {
      const DigitString event = DigitString::parse(s, base);
      const EventTest test(event);
      for (WindowKind kind : {WindowKind::kLower, WindowKind::kUpper}) {
        const IndexRange r = window_bounds({kind, base, 12 - base / 2, 2.0, 1.0});
        std::uint64_t members = 0;
        std::uint64_t hits = 0;
        for (std::uint64_t i = r.lo; i <= r.hi && members < 200000; ++i) {
          const double a = std::pow(static_cast<double>(base), unif(rng) + 3.0);
          const PrefixVerdict v = test(TermView{i, 1.0, false, 0, a});
          if (v.boundary) continue;
          ++members;
          hits += v.begins ? 1 : 0;
        }
        const double p = benford_probability(event);
        const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(members));
        CHECK(std::fabs(static_cast<double>(hits) / static_cast<double>(members) - p) <= 3 * sigma);
      }
    }
  }
}

TEST_CASE("accumulation does not depend on the thread count") {
  const TermSource source(synthetic_spec(IndexSet::naturals(), kArcsine, 2.0, 1.0), 0);
  const std::vector<DigitString> events = {DigitString::parse("1", 10), DigitString::parse("7", 10)};
  const auto one = accumulate_range(source, events, 1, 3000000, 1);
  for (int threads : {2, 3, 8}) {
    const auto many = accumulate_range(source, events, 1, 3000000, threads);
    for (std::size_t k = 0; k < events.size(); ++k) {
      CHECK(many[k].hit_count() == one[k].hit_count());
      CHECK(many[k].total_count() == one[k].total_count());
      CHECK(many[k].hit_weight() == one[k].hit_weight());
      CHECK(many[k].total_weight() == one[k].total_weight());
    }
    const WindowSpec w{WindowKind::kUpper, 10, 6, 2.0, 1.0};
    CHECK(window_density(source, w, events[0], threads).hits ==
          window_density(source, w, events[0], 1).hits);
  }
}

TEST_CASE("ladder snapshots match direct accumulation") {
  const TermSource source(identity_spec(), 0);
  const std::vector<DigitString> events = {DigitString::parse("1", 10)};
  const auto ladder = geometric_ladder(250000);
  CHECK(ladder == std::vector<std::uint64_t>{1000, 10000, 100000, 250000});
  CHECK(geometric_ladder(1000000) == std::vector<std::uint64_t>{1000, 10000, 100000, 1000000});
  CHECK(geometric_ladder(500) == std::vector<std::uint64_t>{500});
  const auto points = accumulate_ladder(source, events, ladder, 2);
  REQUIRE(points.size() == ladder.size());
  for (const Checkpoint& c : points) {
    const auto direct = accumulate_range(source, events, 1, c.x, 1).front();
    CHECK(c.per_event.front().hit_count() == direct.hit_count());
    CHECK(c.per_event.front().hit_weight() == doctest::Approx(direct.hit_weight()).epsilon(1e-14));
  }
}

TEST_CASE("checkpoint CSV") {
  const TermSource source(identity_spec(), 0);
  const DigitString one = DigitString::parse("1", 10);
  const auto acc = accumulate_range(source, {one}, 1, 1000, 1).front();
  std::ostringstream out;
  write_checkpoint_csv_header(out);
  write_checkpoint_csv_row(out, 1000, one, acc);
  CHECK(out.str() == "x,mode,base,string,hits,totals,ratio,flagged\n1000,arithmetic,10,1,112,1000,0.112,0\n");
  std::ostringstream log_out;
  write_checkpoint_csv_row(log_out, 1000, one, acc.with_mode(DensityMode::kLogarithmic));
  CHECK(log_out.str().rfind("1000,logarithmic,10,1,", 0) == 0);
}
