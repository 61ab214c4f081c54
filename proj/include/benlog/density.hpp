#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "benlog/digits.hpp"
#include "benlog/sequences.hpp"
#include "benlog/term_source.hpp"

namespace benlog {

enum class DensityMode { kArithmetic, kLogarithmic };

std::string to_string(DensityMode mode);

/// Partial numerator and denominator of the arithmetic (count) and
/// logarithmic (1/i-weighted) densities of one event. Both are tracked;
/// `mode` picks which one ratio() reports. Accumulators form a monoid
/// under merge().
class DensityAccumulator {
 public:
  explicit DensityAccumulator(DensityMode mode = DensityMode::kArithmetic) : mode_(mode) {}

  void add(std::uint64_t i, bool hit, bool flagged) {
    const double w = 1.0 / static_cast<double>(i);
    ++total_count_;
    total_weight_.add(w);
    if (flagged) {
      ++flagged_;
    } else if (hit) {
      ++hit_count_;
      hit_weight_.add(w);
    }
  }
  void add_skipped(std::uint64_t n = 1) { skipped_ += n; }
  void merge(const DensityAccumulator& other);

  DensityMode mode() const { return mode_; }
  DensityAccumulator with_mode(DensityMode mode) const;

  double hits() const;
  double totals() const;
  std::uint64_t hit_count() const { return hit_count_; }
  std::uint64_t total_count() const { return total_count_; }
  double hit_weight() const { return hit_weight_.value(); }
  double total_weight() const { return total_weight_.value(); }
  std::uint64_t flagged() const { return flagged_; }
  std::uint64_t skipped() const { return skipped_; }

  /// hits / totals in the current mode. Throws DomainError when empty.
  double ratio() const;
  double flagged_fraction() const;

 private:
  DensityMode mode_;
  std::uint64_t hit_count_ = 0;
  std::uint64_t total_count_ = 0;
  CompensatedSum hit_weight_;
  CompensatedSum total_weight_;
  std::uint64_t flagged_ = 0;
  std::uint64_t skipped_ = 0;
};

/// Folds one term into the accumulator for `event`.
DensityAccumulator accumulate(DensityAccumulator acc, const Term& term, const DigitString& event);

/// Event test on a scanned term: exact integers exactly, floats through
/// the table matcher.
class EventTest {
 public:
  explicit EventTest(const DigitString& event) : event_(event), matcher_(event) {}
  PrefixVerdict operator()(const TermView& t) const {
    if (t.exact) return {begins_with(t.a_exact, event_), false};
    return matcher_(t.a_real);
  }
  const DigitString& event() const { return event_; }

 private:
  DigitString event_;
  PrefixMatcher matcher_;
};

/// Deterministic parallel accumulation: [lo, hi] is cut into fixed blocks
/// independent of `threads`, each block is accumulated separately, and the
/// block results are merged left to right. Returns one accumulator per
/// event.
std::vector<DensityAccumulator> accumulate_range(const TermSource& source,
                                                 const std::vector<DigitString>& events,
                                                 std::uint64_t lo, std::uint64_t hi,
                                                 int threads);

struct Checkpoint {
  std::uint64_t x;
  std::vector<DensityAccumulator> per_event;
};

/// Accumulates 1..ladder.back() once and snapshots at each ladder point.
std::vector<Checkpoint> accumulate_ladder(const TermSource& source,
                                          const std::vector<DigitString>& events,
                                          const std::vector<std::uint64_t>& ladder, int threads);

/// 10^3, 10^4, ... up to x, with x itself appended when not a power of 10.
std::vector<std::uint64_t> geometric_ladder(std::uint64_t x, std::uint64_t first = 1000);

void write_checkpoint_csv_header(std::ostream& out);
void write_checkpoint_csv_row(std::ostream& out, std::uint64_t x, const DigitString& event,
                              const DensityAccumulator& acc);

// ---------------------------------------------------------------------------
// Trapping windows

enum class WindowKind {
  kLower,        // 40/23 b^n <= C1 i^m < 2 b^n
  kUpper,        // 5/2 b^n < C1 i^m <= 8/3 b^n
  kBinaryLower,  // 30/11 4^n <= C1 i^m < 3 4^n
  kBinaryUpper,  // 9/2 4^n <= C1 i^m < 5 4^n
};

std::string to_string(WindowKind kind);

struct WindowSpec {
  WindowKind kind;
  int base;
  int n;
  double c1;
  double m;
};

struct IndexRange {
  std::uint64_t lo = 1;
  std::uint64_t hi = 0;
  bool empty() const { return lo > hi; }
  std::uint64_t size() const { return empty() ? 0 : hi - lo + 1; }
};

/// Integer i-range solving the window's inequalities, honoring strict and
/// non-strict endpoints exactly when C1 is an integer and 2m is an integer.
IndexRange window_bounds(const WindowSpec& w);

struct WindowResult {
  WindowSpec window;
  IndexRange range;
  std::uint64_t members = 0;  // terms of the sequence with index in range
  std::uint64_t hits = 0;
  std::uint64_t flagged = 0;
  double density = 0.0;
};

/// Fraction of sequence terms with index in the window that begin with
/// `event`. Throws DomainError if the window holds no terms.
WindowResult window_density(const TermSource& source, const WindowSpec& w,
                            const DigitString& event, int threads);

/// Worker count: `requested` if positive, else hardware concurrency.
int resolve_threads(int requested);

/// Runs fn(block) for blocks 0..count-1 across `threads` workers.
void parallel_for_blocks(std::size_t count, int threads,
                         const std::function<void(std::size_t)>& fn);

}  // namespace benlog
