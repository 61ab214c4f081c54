#include "benlog/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "benlog/errors.hpp"

namespace benlog {
namespace {

constexpr double kSeriesTail = 1e-12;
constexpr std::uint64_t kLemmaBlock = 1U << 16;

}  // namespace

SeriesBounds thm1_series_bounds(const Measure& mu, int base) {
  if (base < 2) throw DomainError("base must be >= 2");
  const BaseVariant variant = base == 2 ? BaseVariant::kBinary : BaseVariant::kGeneral;
  const double ratio = base == 2 ? 4.0 : static_cast<double>(base);
  SeriesBounds out{0.0, 0.0, 0};
  CompensatedSum lower;
  CompensatedSum upper;
  double scale = 1.0;
  for (int j = 0; j < 400; ++j) {
    const IntervalPair iv = trap_intervals(variant, scale);
    const double dl = 2.0 * mu.interval_mass(iv.lower_lo, iv.lower_hi);
    const double du = 2.0 * mu.interval_mass(iv.upper_lo, iv.upper_hi);
    lower.add(dl);
    upper.add(du);
    out.terms = j + 1;
    if (dl < kSeriesTail && du < kSeriesTail) break;
    scale /= ratio;
  }
  out.lower = lower.value();
  out.upper = upper.value();
  return out;
}

DigitString thm1_event(int base) {
  return base == 2 ? DigitString({1, 0}, 2) : DigitString({1}, base);
}

Thm1Report run_thm1(const TermSource& source, const Measure& mu, int base, int n_first,
                    int n_last, int threads) {
  if (n_first < 0 || n_last < n_first) throw DomainError("invalid window range");
  const SequenceSpec& spec = source.spec();
  Thm1Report rep{base, thm1_event(base), thm1_series_bounds(mu, base), 0.0, false, {}, {}, 0.0, 0.0, Thm1Verdict::kInconclusive, {}};
  rep.benford = benford_probability(rep.event);
  rep.bounds_differ_from_benford = std::fabs(rep.bounds.lower - rep.benford) > 1e-6 &&
                                   std::fabs(rep.bounds.upper - rep.benford) > 1e-6;

  const WindowKind lower_kind = base == 2 ? WindowKind::kBinaryLower : WindowKind::kLower;
  const WindowKind upper_kind = base == 2 ? WindowKind::kBinaryUpper : WindowKind::kUpper;

  auto evaluate = [&](WindowKind kind, int n, std::string& note) -> std::optional<WindowResult> {
    const WindowSpec w{kind, base, n, spec.c1, spec.m};
    const IndexRange range = window_bounds(w);
    if (range.empty()) {
      note += to_string(kind) + " window empty; ";
      return std::nullopt;
    }
    if (range.hi > source.limit()) {
      note += to_string(kind) + " window beyond sequence limit; ";
      return std::nullopt;
    }
    if (source.count_in(range.lo, range.hi) == 0) {
      note += to_string(kind) + " window holds no terms; ";
      return std::nullopt;
    }
    return window_density(source, w, rep.event, threads);
  };

  for (int n = n_first; n <= n_last; ++n) {
    WindowPair pair{n, std::nullopt, std::nullopt, {}};
    pair.lower = evaluate(lower_kind, n, pair.note);
    pair.upper = evaluate(upper_kind, n, pair.note);
    rep.windows.push_back(std::move(pair));
  }

  std::vector<const WindowPair*> complete;
  for (const auto& p : rep.windows) {
    if (p.lower && p.upper) complete.push_back(&p);
  }
  if (complete.size() < 2) {
    rep.diagnostic = "fewer than two n with both windows available";
    return rep;
  }
  const auto decisive = std::span(complete).last(2);
  rep.min_lower = 1.0;
  rep.max_upper = 0.0;
  bool in_band = true;
  for (const WindowPair* p : decisive) {
    rep.decisive_n.push_back(p->n);
    rep.min_lower = std::min(rep.min_lower, p->lower->density);
    rep.max_upper = std::max(rep.max_upper, p->upper->density);
    in_band = in_band && p->lower->density >= rep.bounds.lower - kWindowBand &&
              p->upper->density <= rep.bounds.upper + kWindowBand;
  }
  const bool separated_bounds = rep.bounds.lower - rep.bounds.upper > kSeriesTail;
  const bool separated_windows = rep.min_lower > rep.max_upper;
  if (separated_bounds && separated_windows && in_band) {
    rep.verdict = Thm1Verdict::kContradiction;
  } else {
    if (!separated_bounds) rep.diagnostic += "series bounds not separated (L <= U); ";
    if (!separated_windows) rep.diagnostic += "window densities overlap; ";
    if (!in_band) rep.diagnostic += "window densities outside +-0.05 of L/U; ";
    rep.diagnostic.resize(rep.diagnostic.size() - 2);
  }
  return rep;
}

double lemma_g_for_k(const IndexSet& index, std::uint64_t r) {
  return std::max(1.0, index.g(static_cast<double>(r)));
}

double lemma_small_index_cutoff(const SequenceSpec& spec, const DigitString& s, std::uint64_t r) {
  const double num = (static_cast<double>(s.value()) + 1.0) * static_cast<double>(r);
  return std::pow(num / (spec.c1 * s.base()), 1.0 / spec.m);
}

double fit_lemma_k(const TermSource& source, const DigitString& s,
                   std::span<const std::uint64_t> r_list) {
  const SequenceSpec& spec = source.spec();
  double k = 0.0;
  for (std::uint64_t r : r_list) {
    const auto cutoff = static_cast<std::uint64_t>(lemma_small_index_cutoff(spec, s, r));
    CompensatedSum prefix;
    for (std::uint64_t i : spec.index.elements(cutoff)) prefix.add(1.0 / static_cast<double>(i));
    k = std::max(k, prefix.value() / lemma_g_for_k(spec.index, r));
  }
  return k;
}

std::vector<LemmaCheck> lemma_grid(const TermSource& source, const DigitString& s,
                                   std::span<const std::uint64_t> r_list,
                                   std::span<const std::uint64_t> x_list, double fitted_k,
                                   int threads) {
  for (std::uint64_t r : r_list) {
    if (r < 2) throw DomainError("lemma: r must be >= 2");
  }
  std::vector<std::uint64_t> xs(x_list.begin(), x_list.end());
  std::sort(xs.begin(), xs.end());
  if (xs.empty()) return {};
  if (xs.front() < 3) throw DomainError("lemma: x must be >= 3");
  if (xs.back() > source.limit()) throw DomainError("lemma: x beyond sequence limit");

  const std::size_t nr = r_list.size();
  std::vector<double> inv_r(nr);
  for (std::size_t k = 0; k < nr; ++k) inv_r[k] = 1.0 / static_cast<double>(r_list[k]);
  const EventTest test(s);
  const double w_s = benford_probability(s);
  const SequenceSpec& spec = source.spec();

  // Slot nr holds the harmonic sum over indices that carry a term.
  std::vector<CompensatedSum> running(nr + 1);
  std::vector<LemmaCheck> out;
  std::uint64_t done = 0;
  for (std::uint64_t x : xs) {
    if (x > done) {
      const std::uint64_t lo = done + 1;
      const std::size_t blocks =
          static_cast<std::size_t>((x - lo + kLemmaBlock) / kLemmaBlock);
      std::vector<std::vector<CompensatedSum>> partial(blocks);
      parallel_for_blocks(blocks, threads, [&](std::size_t b) {
        std::vector<CompensatedSum> acc(nr + 1);
        const std::uint64_t b_lo = lo + b * kLemmaBlock;
        const std::uint64_t b_hi = std::min(x, b_lo + kLemmaBlock - 1);
        source.scan(b_lo, b_hi, [&](const TermView& t) {
          const double w = 1.0 / static_cast<double>(t.i);
          acc[nr].add(w);
          const PrefixVerdict v = test(t);
          if (!v.begins || v.boundary) return;
          const double ac = std::fabs(t.c);
          for (std::size_t k = 0; k < nr; ++k) {
            if (ac > inv_r[k]) acc[k].add(w);
          }
        });
        partial[b] = std::move(acc);
      });
      for (const auto& block : partial) {
        for (std::size_t k = 0; k <= nr; ++k) running[k].merge(block[k]);
      }
      done = x;
    }
    const double harmonic = running[nr].value();
    for (std::size_t k = 0; k < nr; ++k) {
      const std::uint64_t r = r_list[k];
      const double w_r = std::log1p(inv_r[k]) / std::log(static_cast<double>(s.base()));
      LemmaCheck c{};
      c.r = r;
      c.x = x;
      c.harmonic = harmonic;
      c.k_term = 2.0 * fitted_k * lemma_g_for_k(spec.index, r);
      c.lower = (w_s - w_r) * harmonic;
      c.middle = running[k].value();
      c.upper = (w_s + w_r) * harmonic + c.k_term;
      c.lower_ratio = c.lower > 0.0 ? c.middle / c.lower : 0.0;
      c.holds = c.lower <= c.middle && c.middle <= c.upper;
      out.push_back(c);
    }
  }
  return out;
}

LemmaCheck lemma_bound_check(const TermSource& source, const DigitString& s, std::uint64_t r,
                             std::uint64_t x, int threads) {
  const std::uint64_t rs[] = {r};
  const std::uint64_t xs[] = {x};
  const double k = fit_lemma_k(source, s, rs);
  return lemma_grid(source, s, rs, xs, k, threads).front();
}

double thm2_tolerance(GrowthModel g) { return g == GrowthModel::kLog ? 0.01 : 0.08; }

Thm2Report run_thm2(const TermSource& source, const std::vector<DigitString>& events,
                    const std::vector<std::uint64_t>& ladder, int threads) {
  if (events.empty()) throw DomainError("run_thm2 needs at least one event");
  if (ladder.empty()) throw DomainError("run_thm2 needs at least one checkpoint");
  const int base = events.front().base();
  for (const auto& e : events) {
    if (e.base() != base) throw DomainError("all events must share one base");
  }
  const GrowthModel growth = source.spec().index.growth();
  auto checkpoints = accumulate_ladder(source, events, ladder, threads);

  Thm2Report rep{};
  rep.base = base;
  rep.ladder = ladder;
  rep.tolerance = thm2_tolerance(growth);
  rep.pass = true;
  const auto& last = checkpoints.back().per_event.front();
  rep.skipped = last.skipped();
  rep.total_terms = last.total_count();

  for (std::size_t k = 0; k < events.size(); ++k) {
    Thm2Series s{events[k], benford_probability(events[k]), {}, {}, 0.0, false, true};
    std::vector<double> dev;
    for (const Checkpoint& cp : checkpoints) {
      const DensityAccumulator acc = cp.per_event[k].with_mode(DensityMode::kLogarithmic);
      s.ratios.push_back(acc.ratio());
      s.flagged.push_back(acc.flagged());
      dev.push_back(std::fabs(acc.ratio() - s.target));
    }
    s.final_deviation = dev.back();
    s.within_tolerance = s.final_deviation <= rep.tolerance;

    std::vector<double> late;
    for (std::size_t c = 0; c < ladder.size(); ++c) {
      if (ladder[c] >= 100000) late.push_back(dev[c]);
    }
    if (growth == GrowthModel::kLog) {
      const std::size_t from = late.size() > 3 ? late.size() - 3 : 0;
      for (std::size_t c = from + 1; c < late.size(); ++c) {
        if (late[c] > late[c - 1] + 1e-3) s.trend_ok = false;
      }
    } else if (late.size() >= 2) {
      s.trend_ok = late.back() < late.front();
    }
    rep.pass = rep.pass && s.within_tolerance;
    rep.series.push_back(std::move(s));
  }

  rep.lemma_r = 10;
  const std::uint64_t rs[] = {rep.lemma_r};
  rep.fitted_k = fit_lemma_k(source, events.front(), rs);
  rep.checkpoints = std::move(checkpoints);
  return rep;
}

KsResult equidistribution_ks(std::span<const double> values, const Measure& mu) {
  if (values.empty()) throw DomainError("equidistribution_ks: empty stream");
  std::vector<std::uint64_t> counts(kKsBins, 0);
  for (double v : values) {
    if (!(v >= -1.0 && v <= 1.0)) throw DomainError("equidistribution_ks: value outside [-1, 1]");
    auto k = static_cast<std::size_t>((v + 1.0) * 0.5 * kKsBins);
    counts[std::min<std::size_t>(k, kKsBins - 1)]++;
  }
  const double n = static_cast<double>(values.size());
  double sup = 0.0;
  std::uint64_t below = 0;
  for (int k = 0; k <= kKsBins; ++k) {
    const double edge = -1.0 + 2.0 * k / kKsBins;
    sup = std::max(sup, std::fabs(static_cast<double>(below) / n - mu.cdf(std::clamp(edge, -1.0, 1.0))));
    if (k < kKsBins) below += counts[static_cast<std::size_t>(k)];
  }
  return {sup, 1.0 / kKsBins, values.size()};
}

double chebotarev_ratio(std::int64_t disc, std::uint64_t x) {
  if (x < 10) throw DomainError("chebotarev_ratio needs x >= 10");
  if (disc != -4 && disc != -3) throw DomainError("unsupported discriminant");
  std::uint64_t all = 0;
  std::uint64_t split = 0;
  for_each_prime(2, x, [&](std::uint64_t p) {
    ++all;
    if (kronecker(disc, p) == 1) ++split;
  });
  return static_cast<double>(split) / static_cast<double>(all);
}

std::string to_string(Thm1Verdict v) {
  return v == Thm1Verdict::kContradiction ? "contradiction-demonstrated" : "inconclusive";
}

nlohmann::json to_json(const SeriesBounds& b) {
  return {{"L", b.lower}, {"U", b.upper}, {"terms", b.terms}};
}

nlohmann::json to_json(const WindowResult& w) {
  return {{"kind", to_string(w.window.kind)},
          {"n", w.window.n},
          {"i_lo", w.range.lo},
          {"i_hi", w.range.hi},
          {"members", w.members},
          {"hits", w.hits},
          {"flagged", w.flagged},
          {"density", w.density}};
}

nlohmann::json to_json(const Thm1Report& r) {
  nlohmann::json windows = nlohmann::json::array();
  for (const auto& p : r.windows) {
    windows.push_back({{"n", p.n},
                       {"lower", p.lower ? to_json(*p.lower) : nlohmann::json(nullptr)},
                       {"upper", p.upper ? to_json(*p.upper) : nlohmann::json(nullptr)},
                       {"note", p.note}});
  }
  return {{"base", r.base},
          {"string", r.event.str()},
          {"L", r.bounds.lower},
          {"U", r.bounds.upper},
          {"series_terms", r.bounds.terms},
          {"benford", r.benford},
          {"bounds_differ_from_benford", r.bounds_differ_from_benford},
          {"windows", windows},
          {"decisive_n", r.decisive_n},
          {"min_lower_density", r.min_lower},
          {"max_upper_density", r.max_upper},
          {"verdict", to_string(r.verdict)},
          {"diagnostic", r.diagnostic}};
}

nlohmann::json to_json(const LemmaCheck& c) {
  return {{"r", c.r},           {"x", c.x},         {"harmonic", c.harmonic},
          {"lower", c.lower},   {"middle", c.middle}, {"upper", c.upper},
          {"k_term", c.k_term}, {"lower_ratio", c.lower_ratio}, {"holds", c.holds}};
}

nlohmann::json to_json(const Thm2Report& r) {
  nlohmann::json series = nlohmann::json::array();
  for (const auto& s : r.series) {
    series.push_back({{"string", s.event.str()},
                      {"target", s.target},
                      {"ratios", s.ratios},
                      {"flagged", s.flagged},
                      {"final_deviation", s.final_deviation},
                      {"within_tolerance", s.within_tolerance},
                      {"trend_ok", s.trend_ok}});
  }
  return {{"base", r.base},
          {"checkpoints", r.ladder},
          {"series", series},
          {"tolerance", r.tolerance},
          {"skipped", r.skipped},
          {"total_terms", r.total_terms},
          {"lemma_r", r.lemma_r},
          {"fitted_K", r.fitted_k},
          {"pass", r.pass}};
}

nlohmann::json to_json(const KsResult& k) {
  return {{"distance", k.distance},
          {"resolution_bound", k.resolution_bound},
          {"samples", k.samples}};
}

}  // namespace benlog
