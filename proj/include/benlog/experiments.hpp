#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "benlog/density.hpp"
#include "benlog/digits.hpp"
#include "benlog/measures.hpp"
#include "benlog/term_source.hpp"

namespace benlog {

// ---------------------------------------------------------------------------
// Theorem 1: two-sided window trap for arithmetic density

struct SeriesBounds {
  double lower;  // L: 2 * sum_j mu(lower trap interval at scale_j)
  double upper;  // U: 2 * sum_j mu(upper trap interval at scale_j)
  int terms;     // j values summed
};

/// Sums both series over scales b^-j (b >= 3) or 4^-j (b = 2) until the
/// next increment of each falls below 1e-12.
SeriesBounds thm1_series_bounds(const Measure& mu, int base);

/// Default event for the window argument: "1" for b >= 3, "10" for b = 2.
DigitString thm1_event(int base);

inline constexpr double kWindowBand = 0.05;

struct WindowPair {
  int n;
  std::optional<WindowResult> lower;
  std::optional<WindowResult> upper;
  std::string note;  // why a side is missing
};

enum class Thm1Verdict { kContradiction, kInconclusive };

struct Thm1Report {
  int base;
  DigitString event;
  SeriesBounds bounds;
  double benford;
  bool bounds_differ_from_benford;
  std::vector<WindowPair> windows;
  std::vector<int> decisive_n;  // the two largest n with both windows present
  double min_lower = 0.0;       // over decisive_n
  double max_upper = 0.0;
  Thm1Verdict verdict = Thm1Verdict::kInconclusive;
  std::string diagnostic;
};

/// Evaluates both windows for every n in [n_first, n_last]. The verdict is
/// kContradiction when L > U, and over the two largest n with nonempty
/// windows the smallest lower-window density exceeds the largest
/// upper-window density while each stays within kWindowBand of its bound.
Thm1Report run_thm1(const TermSource& source, const Measure& mu, int base, int n_first,
                    int n_last, int threads);

// ---------------------------------------------------------------------------
// Lemma: three-line sandwich on the |c_i| > 1/r part of the log sum

struct LemmaCheck {
  std::uint64_t r;
  std::uint64_t x;
  double harmonic;  // C2 * g(x), taken as sum of 1/i over indices <= x carrying a term
  double lower;
  double middle;
  double upper;
  double k_term;       // 2 * fitted_K * g_K(r)
  double lower_ratio;  // middle / lower: the finite-x stand-in for the (1 + o(1)) factor
  bool holds;
};

/// g evaluated for the K * g(r) term, floored at 1 so that log log r stays
/// positive for small r.
double lemma_g_for_k(const IndexSet& index, std::uint64_t r);

/// Largest i whose terms could begin with S at a negative power of b while
/// |c_i| > 1/r: ((S + 1) r / (C1 b))^(1/m).
double lemma_small_index_cutoff(const SequenceSpec& spec, const DigitString& s, std::uint64_t r);

/// max over r of (sum of 1/i over index-set elements up to the cutoff) / g_K(r).
double fit_lemma_k(const TermSource& source, const DigitString& s,
                   std::span<const std::uint64_t> r_list);

/// Checks lower <= middle <= upper for every (r, x) pair in one pass per x
/// ladder. The upper bound carries 2 * fitted_k * g_K(r).
std::vector<LemmaCheck> lemma_grid(const TermSource& source, const DigitString& s,
                                   std::span<const std::uint64_t> r_list,
                                   std::span<const std::uint64_t> x_list, double fitted_k,
                                   int threads);

/// Single (r, x) check with K fitted from this r alone.
LemmaCheck lemma_bound_check(const TermSource& source, const DigitString& s, std::uint64_t r,
                             std::uint64_t x, int threads);

// ---------------------------------------------------------------------------
// Theorem 2: logarithmic density ladders

/// 0.01 for log-growth index sets, 0.08 for log-log.
double thm2_tolerance(GrowthModel g);

struct Thm2Series {
  DigitString event;
  double target;
  std::vector<double> ratios;  // per checkpoint
  std::vector<std::uint64_t> flagged;
  double final_deviation;
  bool within_tolerance;
  bool trend_ok;  // see run_thm2
};

struct Thm2Report {
  int base;
  std::vector<std::uint64_t> ladder;
  std::vector<Thm2Series> series;
  double tolerance;
  std::uint64_t skipped;
  std::uint64_t total_terms;
  std::uint64_t lemma_r;
  double fitted_k;
  bool pass;
  std::vector<Checkpoint> checkpoints;  // raw accumulators behind `series`
};

/// Logarithmic partial ratios of every event along the ladder. trend_ok:
/// for log growth, deviations over the last three checkpoints at x >= 1e5
/// are non-increasing up to 1e-3 slack; for log-log growth, the final
/// deviation is below the deviation at the first checkpoint >= 1e5.
Thm2Report run_thm2(const TermSource& source, const std::vector<DigitString>& events,
                    const std::vector<std::uint64_t>& ladder, int threads);

// ---------------------------------------------------------------------------
// Equidistribution

inline constexpr int kKsBins = 10000;

struct KsResult {
  double distance;          // sup over bin edges of |F_emp - F_mu|
  double resolution_bound;  // 1 / kKsBins
  std::uint64_t samples;
};

/// Binned empirical cdf (F_emp(t) = #{v < t} / N at the kKsBins + 1 edges of a
/// uniform grid on [-1, 1]) against the measure's cdf.
KsResult equidistribution_ks(std::span<const double> values, const Measure& mu);

/// #split primes <= x / #primes <= x.
double chebotarev_ratio(std::int64_t disc, std::uint64_t x);

// ---------------------------------------------------------------------------
// Reports

inline constexpr int kReportSchemaVersion = 1;

std::string to_string(Thm1Verdict v);

nlohmann::json to_json(const SeriesBounds& b);
nlohmann::json to_json(const WindowResult& w);
nlohmann::json to_json(const Thm1Report& r);
nlohmann::json to_json(const LemmaCheck& c);
nlohmann::json to_json(const Thm2Report& r);
nlohmann::json to_json(const KsResult& k);

}  // namespace benlog
