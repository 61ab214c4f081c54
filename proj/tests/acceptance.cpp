// Acceptance runner: one PASS/FAIL line per criterion. Pass criterion
// numbers as arguments to run a subset. Exit status is 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "benlog/cm_traces.hpp"
#include "benlog/digits.hpp"
#include "benlog/experiments.hpp"
#include "benlog/measures.hpp"
#include "cli.hpp"
#include "oracles.hpp"

using namespace benlog;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const int kThreads = resolve_threads(0);

BigInt to_big(oracle::u128 v) {
  BigInt out = static_cast<std::uint64_t>(v >> 64);
  out <<= 64;
  out += static_cast<std::uint64_t>(v);
  return out;
}

Outcome digit_oracle() {
  std::mt19937_64 rng(1);
  std::uint64_t checked = 0;
  std::uint64_t mismatches = 0;
  for (int base : {2, 3, 10, 16}) {
    for (int k = 0; k < 10000; ++k) {
      const oracle::u128 v = oracle::random_magnitude(rng, 30);
      const int len = std::uniform_int_distribution<int>(1, 3)(rng);
      std::vector<int> event{std::uniform_int_distribution<int>(1, base - 1)(rng)};
      for (int d = 1; d < len; ++d) event.push_back(std::uniform_int_distribution<int>(0, base - 1)(rng));
      const bool got = begins_with(to_big(v), DigitString(event, base));
      mismatches += got != oracle::begins_with(v, event, base) ? 1 : 0;
      ++checked;
    }
  }
  return {mismatches == 0, fmt("%llu values, %llu mismatches", static_cast<unsigned long long>(checked),
                               static_cast<unsigned long long>(mismatches))};
}

Outcome benford_oracle() {
  double worst = 0.0;
  for (int b = kMinBase; b <= kMaxBase; ++b) {
    double total = 0.0;
    for (int d = 1; d < b; ++d) total += benford_probability(DigitString({d}, b));
    worst = std::max(worst, std::fabs(total - 1.0));
  }
  const double one = benford_probability(DigitString::parse("1", 10));
  const double nine = benford_probability(DigitString::parse("9", 10));
  // "about 30%" and "about 4.5%".
  const bool ok = worst <= 1e-12 && std::fabs(one - 0.30) <= 0.005 && std::fabs(nine - 0.045) <= 0.001;
  return {ok, fmt("max |sum - 1| = %.2e; P(1) = %.5f, P(9) = %.5f", worst, one, nine)};
}

Outcome measure_layer() {
  double asym = 0.0;
  for (int k = 0; k <= 10000; ++k) {
    const double t = -1.0 + 2.0 * k / 10000;
    asym = std::max(asym, std::fabs(kArcsine.cdf(t) + kArcsine.cdf(-t) - 1.0));
  }
  const bool convex = convexity_check(kArcsine, 10000);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int general = 0;
  int binary = 0;
  int sampled = 0;
  while (sampled < 1000) {
    const double x = unif(rng);
    if (x == 0.0) continue;
    ++sampled;
    general += thm1_interval_inequality(kArcsine, x, BaseVariant::kGeneral) ? 1 : 0;
    binary += thm1_interval_inequality(kArcsine, x, BaseVariant::kBinary) ? 1 : 0;
  }
  const bool ok = asym <= 1e-12 && convex && general == 1000 && binary == 1000;
  return {ok, fmt("symmetry %.1e, convex %s, inequality %d/1000, b=2 variant %d/1000", asym,
                  convex ? "yes" : "no", general, binary)};
}

// Independent L and U: quadrature of the arcsine density on each interval.
std::pair<double, double> quadrature_bounds(int base) {
  double lower = 0.0;
  double upper = 0.0;
  const double step = base == 2 ? 4.0 : static_cast<double>(base);
  for (double s = 1.0; s > 1e-14; s /= step) {
    if (base == 2) {
      lower += oracle::arcsine_mass(11.0 / 15 * s, s);
      upper += oracle::arcsine_mass(2.0 / 5 * s, 2.0 / 3 * s);
    } else {
      lower += oracle::arcsine_mass(23.0 / 40 * s, s);
      upper += oracle::arcsine_mass(3.0 / 8 * s, 4.0 / 5 * s);
    }
  }
  return {2 * lower, 2 * upper};
}

Outcome series_bounds() {
  bool ok = true;
  double min_margin = 1.0;
  double max_quad = 0.0;
  for (int b = 2; b <= 16; ++b) {
    const SeriesBounds s = thm1_series_bounds(kArcsine, b);
    min_margin = std::min(min_margin, s.lower - s.upper);
    const auto [ql, qu] = quadrature_bounds(b);
    max_quad = std::max({max_quad, std::fabs(ql - s.lower), std::fabs(qu - s.upper)});
  }
  const SeriesBounds b10 = thm1_series_bounds(kArcsine, 10);
  ok = min_margin >= 0.05 && max_quad <= 1e-6 && std::fabs(b10.lower - 0.640) <= 0.001 &&
       std::fabs(b10.upper - 0.376) <= 0.001;
  return {ok, fmt("b=10 L = %.6f U = %.6f; min L-U over b=2..16 = %.4f; max |quadrature - series| = %.1e",
                  b10.lower, b10.upper, min_margin, max_quad)};
}

Outcome synthetic_windows() {
  const TermSource source(synthetic_spec(IndexSet::naturals(), kArcsine, 2.0, 1.0), 0);
  const Thm1Report rep = run_thm1(source, kArcsine, 10, 8, 10, kThreads);
  bool ok = true;
  double min_lower = 1.0;
  double max_upper = 0.0;
  std::string per_n;
  for (const WindowPair& p : rep.windows) {
    if (!p.lower || !p.upper) {
      ok = false;
      continue;
    }
    min_lower = std::min(min_lower, p.lower->density);
    max_upper = std::max(max_upper, p.upper->density);
    per_n += fmt(" n=%d %.4f/%.4f;", p.n, p.lower->density, p.upper->density);
  }
  ok = ok && min_lower >= rep.bounds.lower - 0.05 && max_upper <= rep.bounds.upper + 0.05 &&
       rep.bounds.upper + 0.05 < rep.bounds.lower - 0.05 && max_upper < min_lower;
  return {ok, "lower/upper" + per_n + fmt(" bands [%.3f, 1] and [0, %.3f]", rep.bounds.lower - 0.05,
                                           rep.bounds.upper + 0.05)};
}

Outcome trace_windows() {
  const TermSource source(trace_spec(CurveId::k32a), 10000000);
  const Thm1Report rep = run_thm1(source, kArcsine, 10, 1, 5, kThreads);
  std::vector<const WindowPair*> feasible;
  for (const WindowPair& p : rep.windows) {
    if (p.lower && p.upper) feasible.push_back(&p);
  }
  if (feasible.size() < 2) return {false, "fewer than two feasible n"};
  bool ok = true;
  std::string per_n;
  for (std::size_t k = feasible.size() - 2; k < feasible.size(); ++k) {
    const WindowPair& p = *feasible[k];
    const double gap = p.lower->density - p.upper->density;
    ok = ok && gap >= 0.1;
    per_n += fmt(" n=%d lower %.4f upper %.4f gap %.4f;", p.n, p.lower->density, p.upper->density, gap);
  }
  return {ok, per_n.substr(1, per_n.size() - 2)};
}

Outcome thm2_synthetic() {
  const TermSource source(synthetic_spec(IndexSet::naturals(), kArcsine, 2.0, 1.0), 0);
  bool ok = true;
  std::string worst;
  for (int base : {2, 10}) {
    std::vector<DigitString> events;
    for (int d = 1; d < base; ++d) events.emplace_back(std::vector<int>{d}, base);
    const Thm2Report rep = run_thm2(source, events, {10000000}, kThreads);
    for (const Thm2Series& s : rep.series) {
      if (!s.within_tolerance) {
        ok = false;
        worst += fmt(" b=%d S=%s dev %.4f;", base, s.event.str().c_str(), s.final_deviation);
      }
    }
    double max_dev = 0.0;
    for (const Thm2Series& s : rep.series) max_dev = std::max(max_dev, s.final_deviation);
    worst += fmt(" b=%d max dev %.4f;", base, max_dev);
  }
  worst.pop_back();
  return {ok, "tol 0.01;" + worst};
}

Outcome thm2_traces() {
  const TermSource source(trace_spec(CurveId::k32a), 10000000);
  const DigitString one = DigitString::parse("1", 10);
  const Thm2Report rep = run_thm2(source, {one}, geometric_ladder(10000000), kThreads);
  const Thm2Series& s = rep.series.front();
  const double at_1e5 = std::fabs(s.ratios[2] - s.target);
  const double at_1e7 = s.final_deviation;
  const bool ok = rep.ladder[2] == 100000 && at_1e7 <= 0.08 && at_1e7 < at_1e5;
  return {ok, fmt("ratio %.5f, deviation %.4f at 1e7 vs %.4f at 1e5", s.ratios.back(), at_1e7, at_1e5)};
}

Outcome lemma_sandwich() {
  const std::uint64_t rs[] = {2, 5, 10, 40};
  const std::uint64_t xs[] = {10000, 100000, 1000000};
  const DigitString one = DigitString::parse("1", 10);
  bool ok = true;
  std::string detail;
  const std::pair<const char*, SequenceSpec> models[] = {
      {"log (synthetic over N)", synthetic_spec(IndexSet::naturals(), kArcsine, 2.0, 1.0)},
      {"log log (32a traces)", trace_spec(CurveId::k32a)}};
  for (const auto& [name, spec] : models) {
    const TermSource source(spec, 1000000);
    const double k = fit_lemma_k(source, one, rs);
    const auto grid = lemma_grid(source, one, rs, xs, k, kThreads);
    int holds = 0;
    std::string failed;
    for (const LemmaCheck& c : grid) {
      if (c.holds) {
        ++holds;
      } else {
        failed += fmt(" (r=%llu,x=%.0e: %s)", static_cast<unsigned long long>(c.r),
                      static_cast<double>(c.x), c.middle < c.lower ? "below lower" : "above upper");
      }
    }
    ok = ok && holds == static_cast<int>(grid.size());
    detail += fmt("%s fitted K = %.6f, %d/%zu hold", name, k, holds, grid.size()) + failed + "; ";
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome trace_integrity() {
  std::string detail;
  bool ok = true;
  for (CurveId id : {CurveId::k32a, CurveId::k27a}) {
    const CMCurve& c = CMCurve::get(id);
    // Exhaustive point counts below 2000.
    std::uint64_t oracle_bad = 0;
    for (std::uint64_t p : oracle::primes_upto(1999)) {
      if (c.is_bad_prime(p)) continue;
      const auto want = static_cast<std::int64_t>(p + 1) -
                        static_cast<std::int64_t>(oracle::count_points(id == CurveId::k32a, p));
      oracle_bad += trace(c, p) != want ? 1 : 0;
    }
    std::uint64_t hasse_bad = 0;
    std::uint64_t zero_bad = 0;
    std::uint64_t rows = 0;
    for (const TraceRecord& r : trace_table(c, 10000000, false)) {
      ++rows;
      if (c.is_bad_prime(r.p)) continue;
      const auto a = static_cast<__int128>(r.a_p);
      hasse_bad += a * a > 4 * static_cast<__int128>(r.p) ? 1 : 0;
      zero_bad += (r.a_p == 0) != (kronecker(c.cm_field_disc, r.p) == -1) ? 1 : 0;
    }
    ok = ok && oracle_bad == 0 && hasse_bad == 0 && zero_bad == 0;
    detail += fmt("%s: oracle mismatches %llu, Hasse violations %llu, zero/inert mismatches %llu over %llu primes; ",
                  c.label.c_str(), static_cast<unsigned long long>(oracle_bad),
                  static_cast<unsigned long long>(hasse_bad), static_cast<unsigned long long>(zero_bad),
                  static_cast<unsigned long long>(rows));
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome equidistribution() {
  std::vector<double> cos;
  for (const TraceRecord& r : trace_table(CMCurve::get(CurveId::k32a), 1000000, true)) cos.push_back(r.cos_theta);
  const KsResult ks = equidistribution_ks(cos, kArcsine);
  const double r4 = chebotarev_ratio(-4, 1000000);
  const double r3 = chebotarev_ratio(-3, 1000000);
  const bool ok = ks.distance <= 0.01 && std::fabs(r4 - 0.5) <= 0.01 && std::fabs(r3 - 0.5) <= 0.01;
  return {ok, fmt("sup distance %.5f over %llu split primes; split ratio %.5f (-4), %.5f (-3)", ks.distance,
                  static_cast<unsigned long long>(ks.samples), r4, r3)};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "benlog_acceptance_threads";
  fs::remove_all(root);
  const std::vector<std::vector<std::string>> runs = {
      {"traces", "--curve", "27a", "--limit", "1e5"},
      {"thm1", "--seq", "synthetic-cm", "--n", "5..7"},
      {"thm2", "--seq", "traces-32a", "--x", "1e6"},
      {"lemma", "--seq", "synthetic-cm", "--r", "2,5,10,40", "--xs", "1e4,1e5"},
      {"equidist", "--seq", "synthetic-cm", "--x", "1e5"},
      {"density", "--seq", "synthetic-cm", "--string", "all", "--x", "1e6"},
  };
  std::streambuf* saved = std::cout.rdbuf();
  std::ostringstream sink;
  std::cout.rdbuf(sink.rdbuf());
  int identical = 0;
  std::string differing;
  for (const auto& args : runs) {
    std::vector<std::string> reports;
    for (const char* threads : {"1", "2", "7"}) {
      std::vector<std::string> a = args;
      a.insert(a.end(), {"--threads", threads, "--out", root.string(), "--label", std::string("t") + threads});
      cli::run(a);
      reports.push_back(slurp(root / args.front() / (std::string("t") + threads) / "report.json"));
    }
    if (!reports[0].empty() && reports[0] == reports[1] && reports[0] == reports[2]) {
      ++identical;
    } else {
      differing += " " + args.front();
    }
  }
  std::cout.rdbuf(saved);
  fs::remove_all(root);
  const bool ok = identical == static_cast<int>(runs.size());
  return {ok, fmt("%d/%zu commands byte-identical across --threads 1, 2, 7", identical, runs.size()) +
                  (differing.empty() ? "" : "; differing:" + differing)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0: no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const Criterion criteria[] = {
      {1, "digit oracle", 5, digit_oracle},
      {2, "Benford probabilities", 0, benford_oracle},
      {3, "measure layer", 0, measure_layer},
      {4, "window series bounds", 1, series_bounds},
      {5, "synthetic windows b=10 n=8..10", 60, synthetic_windows},
      {6, "32a trace windows p <= 1e7", 180, trace_windows},
      {7, "log density, synthetic, x=1e7", 120, thm2_synthetic},
      {8, "log density, 32a traces, x=1e7", 0, thm2_traces},
      {9, "lemma sandwich grid", 0, lemma_sandwich},
      {10, "trace integrity", 0, trace_integrity},
      {11, "equidistribution and split ratio", 0, equidistribution},
      {12, "thread-count determinism", 0, determinism},
  };
  std::set<int> wanted;
  for (int k = 1; k < argc; ++k) wanted.insert(std::stoi(argv[k]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", c.budget_s);
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << fmt(" %2d %-34s %7.2fs  ", c.id, c.name, secs) << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
