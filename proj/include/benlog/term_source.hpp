#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "benlog/sequences.hpp"

namespace benlog {

/// Lightweight per-term record for scanning loops. Exact terms carry the
/// integer in a_exact; scaled terms carry a_real.
struct TermView {
  std::uint64_t i;
  double c;
  bool exact;
  std::int64_t a_exact;
  double a_real;
};

/// A SequenceSpec made concrete: index elements and, for trace sequences,
/// the Frobenius traces, precomputed up to `limit`. Naturals-indexed
/// sequences need no table and can be scanned at any index.
class TermSource {
 public:
  TermSource(SequenceSpec spec, std::uint64_t limit);

  const SequenceSpec& spec() const { return spec_; }
  /// Largest index this source can evaluate.
  std::uint64_t limit() const { return limit_; }
  bool unbounded() const { return spec_.index.kind() == IndexKind::kNaturals; }

  /// Calls f(TermView) for every i in [lo, hi] in the index set, in
  /// increasing order; returns how many indices were skipped because c = 0.
  template <class F>
  std::uint64_t scan(std::uint64_t lo, std::uint64_t hi, F&& f) const;

  /// Number of index-set elements in [lo, hi] (skipped ones included).
  std::uint64_t count_in(std::uint64_t lo, std::uint64_t hi) const;

 private:
  enum class Kind { kSynthetic, kTrace, kIdentity };

  SequenceSpec spec_;
  std::uint64_t limit_;
  Kind kind_;
  SyntheticSampler sampler_;
  std::vector<std::uint64_t> elements_;
  std::vector<std::int64_t> traces_;
  std::vector<double> cos_;
};

template <class F>
std::uint64_t TermSource::scan(std::uint64_t lo, std::uint64_t hi, F&& f) const {
  std::uint64_t skipped = 0;
  lo = std::max<std::uint64_t>(lo, 1);
  if (lo > hi) return 0;
  if (spec_.index.kind() == IndexKind::kNaturals) {
    if (kind_ == Kind::kIdentity) {
      for (std::uint64_t i = lo; i <= hi; ++i) {
        f(TermView{i, 1.0, true, static_cast<std::int64_t>(i), static_cast<double>(i)});
      }
      return 0;
    }
    if (sampler_.measure.kind() == MeasureKind::kArcsine) {
      // Same values as c_at, with the rotation hoisted out of each 2^16 run.
      constexpr std::uint64_t mask = (1ULL << kArcsineTableBits) - 1;
      std::uint64_t i = lo;
      while (i <= hi) {
        const ArcsineRotation rot = arcsine_rotation(i >> kArcsineTableBits);
        const std::uint64_t run_end = std::min(hi, i | mask);
        for (; i <= run_end; ++i) {
          const double c = arcsine_sample(rot, i & mask);
          if (c == 0.0) {
            ++skipped;
            continue;
          }
          f(TermView{i, c, false, 0, sampler_.scale(i) * c});
        }
        if (run_end == hi) break;
      }
      return skipped;
    }
    for (std::uint64_t i = lo; i <= hi; ++i) {
      const double c = sampler_.c_at(i);
      if (c == 0.0) {
        ++skipped;
        continue;
      }
      f(TermView{i, c, false, 0, sampler_.scale(i) * c});
    }
    return skipped;
  }
  auto it = std::lower_bound(elements_.begin(), elements_.end(), lo);
  for (; it != elements_.end() && *it <= hi; ++it) {
    const auto pos = static_cast<std::size_t>(it - elements_.begin());
    const std::uint64_t i = *it;
    if (kind_ == Kind::kTrace) {
      f(TermView{i, cos_[pos], true, traces_[pos], static_cast<double>(traces_[pos])});
      continue;
    }
    const double c = sampler_.c_at(pos + 1);
    if (c == 0.0) {
      ++skipped;
      continue;
    }
    f(TermView{i, c, false, 0, sampler_.scale(i) * c});
  }
  return skipped;
}

}  // namespace benlog
