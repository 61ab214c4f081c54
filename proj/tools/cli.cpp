#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "benlog/cm_traces.hpp"
#include "benlog/density.hpp"
#include "benlog/errors.hpp"
#include "benlog/experiments.hpp"
#include "benlog/measures.hpp"
#include "benlog/sequences.hpp"
#include "benlog/term_source.hpp"

namespace benlog::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kMaxX = 1e8;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string command;
  std::string seq = "synthetic-cm";
  std::string index = "naturals";
  double c1 = 2.0;
  double m = 1.0;
  int base = 10;
  std::string strings;  // empty: command default
  std::string x;        // empty: command default
  std::string xs = "1e4,1e5,1e6";
  std::string n_range = "6..10";
  std::string r_list = "2,5,10,40";
  std::string curve = "32a";
  std::string limit = "100";
  bool split_only = false;
  double tol = 0.01;
  int threads = 0;
  std::string out = "out";
  std::string label;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, sep)) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

// Non-negative integer written in decimal or scientific notation ("1e7").
std::uint64_t parse_count(const std::string& text, const char* what) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v) || v < 0.0 || v != std::floor(v)) {
    throw ConfigError(std::string(what) + ": expected a non-negative integer, got '" + text + "'");
  }
  if (v > kMaxX) throw ConfigError(std::string(what) + " exceeds the 1e8 guardrail");
  return static_cast<std::uint64_t>(v);
}

std::vector<std::uint64_t> parse_counts(const std::string& text, const char* what) {
  std::vector<std::uint64_t> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_count(part, what));
  if (out.empty()) throw ConfigError(std::string(what) + ": empty list");
  return out;
}

std::pair<int, int> parse_n_range(const std::string& text) {
  const auto dots = text.find("..");
  int a = 0;
  int b = 0;
  auto parse_int = [&](std::string_view s, int& v) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size();
  };
  const std::string_view sv(text);
  bool ok;
  if (dots == std::string::npos) {
    ok = parse_int(sv, a);
    b = a;
  } else {
    ok = parse_int(sv.substr(0, dots), a) && parse_int(sv.substr(dots + 2), b);
  }
  if (!ok || a < 0 || b < a) throw ConfigError("--n: expected a..b with 0 <= a <= b, got '" + text + "'");
  return {a, b};
}

std::vector<DigitString> parse_events(const std::string& text, int base) {
  std::vector<DigitString> events;
  if (text == "all") {
    for (int d = 1; d < base; ++d) events.emplace_back(std::vector<int>{d}, base);
    return events;
  }
  for (const auto& part : split(text, ',')) events.push_back(DigitString::parse(part, base));
  if (events.empty()) throw ConfigError("--string: no event given");
  return events;
}

IndexSet parse_index(const std::string& name) {
  if (name == "naturals") return IndexSet::naturals();
  if (name == "primes") return IndexSet::primes();
  if (name == "split-primes-4") return IndexSet::split_primes(-4);
  if (name == "split-primes-3") return IndexSet::split_primes(-3);
  throw ConfigError("--index: unknown index set '" + name + "'");
}

SequenceSpec parse_seq(const Config& cfg) {
  const std::string& s = cfg.seq;
  if (s == "naturals-identity") return identity_spec();
  if (s == "traces-32a") return trace_spec(CurveId::k32a);
  if (s == "traces-27a") return trace_spec(CurveId::k27a);
  if (s.rfind("synthetic-", 0) == 0) {
    return synthetic_spec(parse_index(cfg.index), Measure::parse(s.substr(10)), cfg.c1, cfg.m);
  }
  throw ConfigError("--seq: unknown sequence '" + s + "'");
}

// Measure the sequence's c values are equidistributed under.
Measure seq_measure(const SequenceSpec& spec) {
  if (const auto* sampled = std::get_if<MeasureSampled>(&spec.source)) return sampled->measure;
  if (std::holds_alternative<CmTrace>(spec.source)) return kArcsine;
  throw ConfigError("this command needs a sequence with an equidistribution measure");
}

std::string default_label() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  localtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
  return buf;
}

// Parameters that define the experiment. Execution settings (threads,
// output location) stay out so reports compare byte for byte.
json params_json(const Config& cfg) {
  json p = {{"seq", cfg.seq}, {"base", cfg.base}};
  if (cfg.seq.rfind("synthetic-", 0) == 0) {
    p["index"] = cfg.index;
    p["c1"] = cfg.c1;
    p["m"] = cfg.m;
  }
  return p;
}

class Output {
 public:
  explicit Output(const Config& cfg) : dir_(fs::path(cfg.out) / cfg.command / cfg.label) {}
  std::ofstream open(const std::string& name) const {
    fs::create_directories(dir_);
    std::ofstream f(dir_ / name);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    return f;
  }
  void write_report(json report) const {
    open("report.json") << report.dump(2) << "\n";
  }
  void write_runtime(double seconds) const {
    open("runtime.json") << json{{"runtime_seconds", seconds}}.dump(2) << "\n";
  }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
};

json header(const Config& cfg, json params) {
  return {{"schema_version", kReportSchemaVersion},
          {"experiment", cfg.command},
          {"params", std::move(params)}};
}

void merge_into(json& target, const json& extra) {
  for (auto it = extra.begin(); it != extra.end(); ++it) target[it.key()] = it.value();
}

int cmd_traces(const Config& cfg, const Output& out) {
  const CMCurve& curve = CMCurve::parse(cfg.curve);
  const std::uint64_t limit = parse_count(cfg.limit, "--limit");
  const std::uint64_t oracle_limit = std::min<std::uint64_t>(limit, 2000);
  if (const auto bad = first_oracle_mismatch(curve, oracle_limit)) {
    throw IntegrityError("trace disagrees with point count at p = " + std::to_string(*bad));
  }
  const auto rows = trace_table(curve, limit, cfg.split_only);
  {
    auto csv = out.open("traces.csv");
    write_trace_csv_header(csv);
    for (const auto& rec : rows) write_trace_csv(csv, rec);
  }
  std::uint64_t zero_rows = 0;
  for (const auto& rec : rows) zero_rows += rec.a_p == 0 ? 1 : 0;
  json report = header(cfg, {{"curve", curve.label},
                             {"limit", limit},
                             {"split_only", cfg.split_only}});
  report["equation"] = curve.equation;
  report["cm_field_disc"] = curve.cm_field_disc;
  report["rows"] = rows.size();
  report["zero_rows"] = zero_rows;
  report["oracle_checked_below"] = oracle_limit;
  out.write_report(report);
  std::cout << "traces " << curve.label << ": " << rows.size() << " rows (p <= " << limit
            << ", " << zero_rows << " with a_p = 0) -> " << (out.dir() / "traces.csv").string()
            << "\n";
  return kOk;
}

int cmd_thm1(const Config& cfg, const Output& out) {
  const SequenceSpec spec = parse_seq(cfg);
  const Measure mu = seq_measure(spec);
  const auto [n_first, n_last] = parse_n_range(cfg.n_range);
  const std::uint64_t x = parse_count(cfg.x.empty() ? "1e7" : cfg.x, "--x");
  const TermSource source(spec, x);
  const Thm1Report rep = run_thm1(source, mu, cfg.base, n_first, n_last, resolve_threads(cfg.threads));

  json params = params_json(cfg);
  params["n_first"] = n_first;
  params["n_last"] = n_last;
  params["measure"] = mu.name();
  if (!source.unbounded()) params["x"] = x;
  json report = header(cfg, params);
  merge_into(report, to_json(rep));
  out.write_report(report);
  {
    auto csv = out.open("windows.csv");
    csv << "n,kind,i_lo,i_hi,members,hits,flagged,density\n";
    for (const auto& pair : rep.windows) {
      for (const auto* w : {&pair.lower, &pair.upper}) {
        if (!*w) continue;
        const WindowResult& r = **w;
        csv << pair.n << ',' << to_string(r.window.kind) << ',' << r.range.lo << ','
            << r.range.hi << ',' << r.members << ',' << r.hits << ',' << r.flagged << ','
            << shortest_double(r.density) << "\n";
      }
    }
  }
  std::cout << std::setprecision(6) << "thm1 " << spec.name() << " b=" << cfg.base
            << ": L=" << rep.bounds.lower << " U=" << rep.bounds.upper
            << " verdict=" << to_string(rep.verdict);
  if (!rep.diagnostic.empty()) std::cout << " (" << rep.diagnostic << ")";
  std::cout << "\n";
  return rep.verdict == Thm1Verdict::kContradiction ? kOk : kInconclusive;
}

void write_checkpoints(const Output& out, const std::vector<Checkpoint>& checkpoints,
                       const std::vector<DigitString>& events) {
  auto csv = out.open("checkpoints.csv");
  write_checkpoint_csv_header(csv);
  for (const auto& cp : checkpoints) {
    for (std::size_t k = 0; k < events.size(); ++k) {
      for (DensityMode mode : {DensityMode::kArithmetic, DensityMode::kLogarithmic}) {
        write_checkpoint_csv_row(csv, cp.x, events[k], cp.per_event[k].with_mode(mode));
      }
    }
  }
}

int cmd_thm2(const Config& cfg, const Output& out) {
  const SequenceSpec spec = parse_seq(cfg);
  const auto events = parse_events(cfg.strings.empty() ? "1" : cfg.strings, cfg.base);
  const std::uint64_t x = parse_count(cfg.x.empty() ? "1e7" : cfg.x, "--x");
  if (x < 1000) throw ConfigError("--x: thm2 needs x >= 1000");
  const TermSource source(spec, x);
  const Thm2Report rep = run_thm2(source, events, geometric_ladder(x), resolve_threads(cfg.threads));

  json params = params_json(cfg);
  params["x"] = x;
  params["strings"] = cfg.strings.empty() ? "1" : cfg.strings;
  json report = header(cfg, params);
  merge_into(report, to_json(rep));
  out.write_report(report);
  write_checkpoints(out, rep.checkpoints, events);

  std::cout << std::setprecision(6) << "thm2 " << spec.name() << " b=" << cfg.base << " x=" << x
            << ":";
  for (const auto& s : rep.series) {
    std::cout << " " << s.event.str() << "=" << s.ratios.back() << (s.within_tolerance ? "" : "!");
  }
  std::cout << " tol=" << rep.tolerance << " " << (rep.pass ? "pass" : "fail") << "\n";
  return rep.pass ? kOk : kInconclusive;
}

int cmd_lemma(const Config& cfg, const Output& out) {
  const SequenceSpec spec = parse_seq(cfg);
  const DigitString s = DigitString::parse(cfg.strings.empty() ? "1" : cfg.strings, cfg.base);
  const auto rs = parse_counts(cfg.r_list, "--r");
  const auto xs = parse_counts(cfg.x.empty() ? cfg.xs : cfg.x, "--xs");
  const std::uint64_t x_max = *std::max_element(xs.begin(), xs.end());
  const TermSource source(spec, x_max);
  const double k = fit_lemma_k(source, s, rs);
  const auto checks = lemma_grid(source, s, rs, xs, k, resolve_threads(cfg.threads));

  json params = params_json(cfg);
  params["string"] = s.str();
  params["r"] = rs;
  params["xs"] = xs;
  json report = header(cfg, params);
  report["g_model"] = spec.index.growth() == GrowthModel::kLog ? "log" : "loglog";
  report["fitted_K"] = k;
  report["k_safety_factor"] = 2.0;
  json rows = json::array();
  bool all = true;
  for (const auto& c : checks) {
    rows.push_back(to_json(c));
    all = all && c.holds;
  }
  report["checks"] = rows;
  report["all_hold"] = all;
  out.write_report(report);
  {
    auto csv = out.open("lemma.csv");
    csv << "r,x,harmonic,lower,middle,upper,k_term,holds\n";
    for (const auto& c : checks) {
      csv << c.r << ',' << c.x << ',' << shortest_double(c.harmonic) << ','
          << shortest_double(c.lower) << ',' << shortest_double(c.middle) << ','
          << shortest_double(c.upper) << ',' << shortest_double(c.k_term) << ','
          << (c.holds ? 1 : 0) << "\n";
    }
  }
  std::size_t held = 0;
  for (const auto& c : checks) held += c.holds ? 1 : 0;
  std::cout << std::setprecision(6) << "lemma " << spec.name() << " S=" << s.str()
            << ": fitted_K=" << k << ", " << held << "/" << checks.size() << " sandwiches hold\n";
  return all ? kOk : kInconclusive;
}

int cmd_equidist(const Config& cfg, const Output& out) {
  const SequenceSpec spec = parse_seq(cfg);
  const Measure mu = seq_measure(spec);
  const std::uint64_t x = parse_count(cfg.x.empty() ? "1e6" : cfg.x, "--x");
  if (x < 10) throw ConfigError("--x: equidist needs x >= 10");

  std::vector<double> values;
  std::optional<double> chebotarev;
  if (const auto* tr = std::get_if<CmTrace>(&spec.source)) {
    const CMCurve& curve = CMCurve::get(tr->curve);
    for (const auto& rec : trace_table(curve, x, /*split_only=*/true)) values.push_back(rec.cos_theta);
    chebotarev = chebotarev_ratio(curve.cm_field_disc, x);
  } else {
    const TermSource source(spec, x);
    const SyntheticSampler sampler{mu, spec.c1, spec.m};
    const auto count = source.count_in(1, x);
    values.reserve(count);
    for (std::uint64_t n = 1; n <= count; ++n) values.push_back(sampler.c_at(n));
  }
  const KsResult ks = equidistribution_ks(values, mu);
  bool pass = ks.distance <= cfg.tol;
  if (chebotarev) pass = pass && std::fabs(*chebotarev - 0.5) <= 0.01;

  json params = params_json(cfg);
  params["x"] = x;
  params["tol"] = cfg.tol;
  params["measure"] = mu.name();
  json report = header(cfg, params);
  report["ks"] = to_json(ks);
  if (chebotarev) report["chebotarev_ratio"] = *chebotarev;
  report["pass"] = pass;
  out.write_report(report);

  std::cout << std::setprecision(6) << "equidist " << spec.name() << " x=" << x
            << ": ks=" << ks.distance;
  if (chebotarev) std::cout << " chebotarev=" << *chebotarev;
  std::cout << " " << (pass ? "pass" : "fail") << "\n";
  return pass ? kOk : kInconclusive;
}

int cmd_density(const Config& cfg, const Output& out) {
  const SequenceSpec spec = parse_seq(cfg);
  const auto events = parse_events(cfg.strings.empty() ? "1" : cfg.strings, cfg.base);
  const std::uint64_t x = parse_count(cfg.x.empty() ? "1e6" : cfg.x, "--x");
  if (x < 1) throw ConfigError("--x must be >= 1");
  const TermSource source(spec, x);
  const auto ladder = geometric_ladder(x, std::min<std::uint64_t>(x, 1000));
  const auto checkpoints = accumulate_ladder(source, events, ladder, resolve_threads(cfg.threads));
  write_checkpoints(out, checkpoints, events);

  json params = params_json(cfg);
  params["x"] = x;
  params["strings"] = cfg.strings.empty() ? "1" : cfg.strings;
  json report = header(cfg, params);
  report["checkpoints"] = ladder;
  json finals = json::array();
  const auto& last = checkpoints.back().per_event;
  std::cout << std::setprecision(6) << "density " << spec.name() << " b=" << cfg.base << " x=" << x
            << ":";
  for (std::size_t k = 0; k < events.size(); ++k) {
    const auto arith = last[k].with_mode(DensityMode::kArithmetic);
    const auto log = last[k].with_mode(DensityMode::kLogarithmic);
    finals.push_back({{"string", events[k].str()},
                      {"benford", benford_probability(events[k])},
                      {"arithmetic", arith.total_count() ? json(arith.ratio()) : json(nullptr)},
                      {"logarithmic", log.total_count() ? json(log.ratio()) : json(nullptr)},
                      {"flagged", arith.flagged()},
                      {"skipped", arith.skipped()}});
    if (arith.total_count()) {
      std::cout << " " << events[k].str() << "=" << arith.ratio() << "/" << log.ratio();
    }
  }
  std::cout << " (arithmetic/logarithmic)\n";
  report["final"] = finals;
  out.write_report(report);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  Config cfg;
  CLI::App app{"Leading-digit densities of equidistributed sequences and CM Frobenius traces",
               "benlog"};
  app.set_config("--config", "", "key=value file; command-line flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--seq", cfg.seq,
                 "naturals-identity | synthetic-<arcsine|cm|semicircle|uniform> | traces-32a | "
                 "traces-27a");
  app.add_option("--index", cfg.index,
                 "index set for synthetic sequences: naturals | primes | split-primes-4 | "
                 "split-primes-3");
  app.add_option("--c1", cfg.c1, "C1 for synthetic sequences");
  app.add_option("--m", cfg.m, "m for synthetic sequences");
  app.add_option("--base", cfg.base, "base b (2..64)");
  app.add_option("--string", cfg.strings, "event string(s), comma separated, or 'all' digits");
  app.add_option("--x", cfg.x, "x limit, scientific notation allowed (<= 1e8)");
  app.add_option("--xs", cfg.xs, "lemma: comma-separated x grid");
  app.add_option("--n", cfg.n_range, "thm1: window range a..b");
  app.add_option("--r", cfg.r_list, "lemma: comma-separated r values");
  app.add_option("--curve", cfg.curve, "traces: 32a | 27a");
  app.add_option("--limit", cfg.limit, "traces: largest p");
  app.add_flag("--split-only", cfg.split_only, "traces: list split primes only");
  app.add_option("--tol", cfg.tol, "equidist: sup-distance tolerance");
  app.add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
  app.add_option("--out", cfg.out, "output root directory");
  app.add_option("--label", cfg.label, "run label (default: timestamp)");

  const std::pair<const char*, const char*> commands[] = {
      {"traces", "Frobenius trace table of a CM curve (CSV)"},
      {"thm1", "series bounds and window densities (arithmetic density)"},
      {"thm2", "logarithmic density ladder against the Benford value"},
      {"lemma", "three-line sandwich on the |c_i| > 1/r part of the log sum"},
      {"equidist", "sup-distance of the c values to their measure; split-prime ratio"},
      {"density", "arithmetic and logarithmic partial ratios along a checkpoint ladder"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  if (cfg.label.empty()) cfg.label = default_label();

  try {
    if (cfg.base < kMinBase || cfg.base > kMaxBase) throw ConfigError("--base must be in 2..64");
    const auto started = std::chrono::steady_clock::now();
    const Output out(cfg);
    int code = kOk;
    if (cfg.command == "traces") code = cmd_traces(cfg, out);
    if (cfg.command == "thm1") code = cmd_thm1(cfg, out);
    if (cfg.command == "thm2") code = cmd_thm2(cfg, out);
    if (cfg.command == "lemma") code = cmd_lemma(cfg, out);
    if (cfg.command == "equidist") code = cmd_equidist(cfg, out);
    if (cfg.command == "density") code = cmd_density(cfg, out);
    out.write_runtime(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
    return code;
  } catch (const IntegrityError& e) {
    std::cerr << "integrity failure: " << e.what() << "\n";
    return kIntegrityFailure;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace benlog::cli
