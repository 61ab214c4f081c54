#include "benlog/density.hpp"

#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

#include "benlog/errors.hpp"

namespace benlog {
namespace {

constexpr std::uint64_t kAccumulateBlock = 1U << 16;
constexpr std::uint64_t kWindowBlock = 1U << 20;

struct Threshold {
  std::int64_t num;
  std::int64_t den;
  bool strict;
};

struct WindowShape {
  Threshold lower;  // C1 i^m  >= (or >)  num/den * P^n
  Threshold upper;  // C1 i^m  <  (or <=) num/den * P^n
  int power_base;
};

WindowShape shape_of(const WindowSpec& w) {
  switch (w.kind) {
    case WindowKind::kLower:
      return {{40, 23, false}, {2, 1, true}, w.base};
    case WindowKind::kUpper:
      return {{5, 2, true}, {8, 3, false}, w.base};
    case WindowKind::kBinaryLower:
      return {{30, 11, false}, {3, 1, true}, 4};
    case WindowKind::kBinaryUpper:
      return {{9, 2, false}, {5, 1, true}, 4};
  }
  return {{1, 1, false}, {1, 1, false}, 1};
}

// Sign of C1 * i^m - (num/den) * P^n.
class ScaleComparator {
 public:
  ScaleComparator(const WindowSpec& w, int power_base) : w_(w), power_base_(power_base) {
    const double twice_m = 2.0 * w.m;
    exact_ = w.c1 == std::floor(w.c1) && w.c1 < 2147483648.0 && twice_m == std::floor(twice_m) &&
             twice_m <= 64.0;
    if (exact_) {
      c1_sq_ = BigInt(static_cast<std::int64_t>(w.c1));
      c1_sq_ *= c1_sq_;
      twice_m_ = static_cast<unsigned>(twice_m);
      p_pow_sq_ = 1;
      for (int k = 0; k < 2 * w.n; ++k) p_pow_sq_ *= power_base;
    }
  }

  int compare(std::uint64_t i, const Threshold& th) const {
    if (exact_) {
      BigInt lhs = c1_sq_ * BigInt(th.den) * BigInt(th.den);
      lhs *= boost::multiprecision::pow(BigInt(i), twice_m_);
      const BigInt rhs = BigInt(th.num) * BigInt(th.num) * p_pow_sq_;
      return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
    }
    const long double lhs = static_cast<long double>(w_.c1) * std::pow(static_cast<long double>(i), static_cast<long double>(w_.m));
    const long double rhs = static_cast<long double>(th.num) / th.den *
                            std::pow(static_cast<long double>(power_base_), w_.n);
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
  }

  // Real solution of C1 i^m = (num/den) P^n.
  long double root(const Threshold& th) const {
    const long double rhs = static_cast<long double>(th.num) / th.den *
                            std::pow(static_cast<long double>(power_base_), w_.n);
    return std::pow(rhs / static_cast<long double>(w_.c1), 1.0L / static_cast<long double>(w_.m));
  }

 private:
  WindowSpec w_;
  int power_base_;
  bool exact_ = false;
  BigInt c1_sq_;
  unsigned twice_m_ = 0;
  BigInt p_pow_sq_;
};

}  // namespace

std::string to_string(DensityMode mode) {
  return mode == DensityMode::kArithmetic ? "arithmetic" : "logarithmic";
}

std::string to_string(WindowKind kind) {
  switch (kind) {
    case WindowKind::kLower:
      return "lower";
    case WindowKind::kUpper:
      return "upper";
    case WindowKind::kBinaryLower:
      return "b2-lower";
    case WindowKind::kBinaryUpper:
      return "b2-upper";
  }
  return "?";
}

void DensityAccumulator::merge(const DensityAccumulator& other) {
  hit_count_ += other.hit_count_;
  total_count_ += other.total_count_;
  hit_weight_.merge(other.hit_weight_);
  total_weight_.merge(other.total_weight_);
  flagged_ += other.flagged_;
  skipped_ += other.skipped_;
}

DensityAccumulator DensityAccumulator::with_mode(DensityMode mode) const {
  DensityAccumulator out = *this;
  out.mode_ = mode;
  return out;
}

double DensityAccumulator::hits() const {
  return mode_ == DensityMode::kArithmetic ? static_cast<double>(hit_count_) : hit_weight();
}

double DensityAccumulator::totals() const {
  return mode_ == DensityMode::kArithmetic ? static_cast<double>(total_count_) : total_weight();
}

double DensityAccumulator::ratio() const {
  if (total_count_ == 0) throw DomainError("ratio of an empty accumulator is undefined");
  return hits() / totals();
}

double DensityAccumulator::flagged_fraction() const {
  return total_count_ == 0 ? 0.0
                           : static_cast<double>(flagged_) / static_cast<double>(total_count_);
}

DensityAccumulator accumulate(DensityAccumulator acc, const Term& term, const DigitString& event) {
  const PrefixVerdict v = begins_with(term.a, event);
  acc.add(term.i, v.begins, v.boundary);
  return acc;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for_blocks(std::size_t count, int threads,
                         const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)), count);
  if (workers <= 1) {
    for (std::size_t b = 0; b < count; ++b) fn(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t b = next++; b < count; b = next++) fn(b);
    });
  }
}

std::vector<DensityAccumulator> accumulate_range(const TermSource& source,
                                                 const std::vector<DigitString>& events,
                                                 std::uint64_t lo, std::uint64_t hi,
                                                 int threads) {
  std::vector<DensityAccumulator> total(events.size());
  if (lo > hi) return total;
  const std::uint64_t span = hi - lo + 1;
  const std::size_t blocks = static_cast<std::size_t>((span + kAccumulateBlock - 1) / kAccumulateBlock);
  std::vector<std::vector<DensityAccumulator>> partial(blocks);
  std::vector<EventTest> tests;
  tests.reserve(events.size());
  for (const auto& e : events) tests.emplace_back(e);

  parallel_for_blocks(blocks, threads, [&](std::size_t b) {
    std::vector<DensityAccumulator> acc(events.size());
    const std::uint64_t b_lo = lo + b * kAccumulateBlock;
    const std::uint64_t b_hi = std::min(hi, b_lo + kAccumulateBlock - 1);
    const std::uint64_t skipped = source.scan(b_lo, b_hi, [&](const TermView& t) {
      for (std::size_t k = 0; k < tests.size(); ++k) {
        const PrefixVerdict v = tests[k](t);
        acc[k].add(t.i, v.begins, v.boundary);
      }
    });
    for (auto& a : acc) a.add_skipped(skipped);
    partial[b] = std::move(acc);
  });

  for (const auto& block : partial) {
    for (std::size_t k = 0; k < events.size(); ++k) total[k].merge(block[k]);
  }
  return total;
}

std::vector<Checkpoint> accumulate_ladder(const TermSource& source,
                                          const std::vector<DigitString>& events,
                                          const std::vector<std::uint64_t>& ladder, int threads) {
  std::vector<Checkpoint> out;
  std::vector<DensityAccumulator> running(events.size());
  std::uint64_t done = 0;
  for (std::uint64_t x : ladder) {
    if (x <= done) throw DomainError("checkpoint ladder must be strictly increasing");
    if (x > source.limit()) throw DomainError("checkpoint beyond the precomputed sequence limit");
    const auto seg = accumulate_range(source, events, done + 1, x, threads);
    for (std::size_t k = 0; k < events.size(); ++k) running[k].merge(seg[k]);
    out.push_back({x, running});
    done = x;
  }
  return out;
}

std::vector<std::uint64_t> geometric_ladder(std::uint64_t x, std::uint64_t first) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t v = first; v <= x; v *= 10) {
    out.push_back(v);
    if (v > x / 10) break;
  }
  if (out.empty() || out.back() != x) out.push_back(x);
  return out;
}

void write_checkpoint_csv_header(std::ostream& out) {
  out << "x,mode,base,string,hits,totals,ratio,flagged\n";
}

void write_checkpoint_csv_row(std::ostream& out, std::uint64_t x, const DigitString& event,
                              const DensityAccumulator& acc) {
  out << x << ',' << to_string(acc.mode()) << ',' << event.base() << ',' << event.str() << ',';
  if (acc.mode() == DensityMode::kArithmetic) {
    out << acc.hit_count() << ',' << acc.total_count() << ',';
  } else {
    out << shortest_double(acc.hit_weight()) << ',' << shortest_double(acc.total_weight()) << ',';
  }
  out << shortest_double(acc.ratio()) << ',' << acc.flagged() << '\n';
}

IndexRange window_bounds(const WindowSpec& w) {
  if (w.n < 0) throw DomainError("window index n must be >= 0");
  if (w.base < 2) throw DomainError("window base must be >= 2");
  const bool binary = w.kind == WindowKind::kBinaryLower || w.kind == WindowKind::kBinaryUpper;
  if (binary && w.base != 2) throw DomainError("binary windows are for base 2 only");
  if (!(w.c1 > 0.0) || !(w.m > 0.0)) throw DomainError("C1 and m must be positive");

  const WindowShape shape = shape_of(w);
  const ScaleComparator cmp(w, shape.power_base);
  auto lower_ok = [&](std::uint64_t i) {
    const int s = cmp.compare(i, shape.lower);
    return shape.lower.strict ? s > 0 : s >= 0;
  };
  auto upper_ok = [&](std::uint64_t i) {
    const int s = cmp.compare(i, shape.upper);
    return shape.upper.strict ? s < 0 : s <= 0;
  };

  constexpr long double kCap = 4.0e18L;
  const long double r_lo = cmp.root(shape.lower);
  const long double r_hi = cmp.root(shape.upper);
  if (r_hi > kCap) throw DomainError("window indices exceed 64-bit range");

  IndexRange out;
  std::uint64_t lo = r_lo < 3.0L ? 1 : static_cast<std::uint64_t>(r_lo) - 2;
  while (!lower_ok(lo)) ++lo;
  while (lo > 1 && lower_ok(lo - 1)) --lo;
  std::uint64_t hi = static_cast<std::uint64_t>(r_hi) + 2;
  while (hi > 0 && !upper_ok(hi)) --hi;
  while (upper_ok(hi + 1)) ++hi;
  out.lo = lo;
  out.hi = hi;
  return out;
}

WindowResult window_density(const TermSource& source, const WindowSpec& w,
                            const DigitString& event, int threads) {
  WindowResult res;
  res.window = w;
  res.range = window_bounds(w);
  if (res.range.empty()) throw DomainError("window " + to_string(w.kind) + " n=" +
                                           std::to_string(w.n) + " is empty");
  if (res.range.hi > source.limit()) {
    throw DomainError("window extends past the precomputed sequence limit");
  }
  const std::uint64_t span = res.range.size();
  const std::size_t blocks = static_cast<std::size_t>((span + kWindowBlock - 1) / kWindowBlock);
  struct Counts {
    std::uint64_t members = 0, hits = 0, flagged = 0;
  };
  std::vector<Counts> partial(blocks);
  const EventTest test(event);
  parallel_for_blocks(blocks, threads, [&](std::size_t b) {
    Counts c;
    const std::uint64_t b_lo = res.range.lo + b * kWindowBlock;
    const std::uint64_t b_hi = std::min(res.range.hi, b_lo + kWindowBlock - 1);
    source.scan(b_lo, b_hi, [&](const TermView& t) {
      const PrefixVerdict v = test(t);
      ++c.members;
      if (v.boundary) {
        ++c.flagged;
      } else if (v.begins) {
        ++c.hits;
      }
    });
    partial[b] = c;
  });
  for (const Counts& c : partial) {
    res.members += c.members;
    res.hits += c.hits;
    res.flagged += c.flagged;
  }
  if (res.members == 0) throw DomainError("window holds no sequence terms");
  res.density = static_cast<double>(res.hits) / static_cast<double>(res.members);
  return res;
}

}  // namespace benlog
