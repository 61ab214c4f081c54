#include "benlog/term_source.hpp"

#include <limits>

#include "benlog/cm_traces.hpp"
#include "benlog/errors.hpp"

namespace benlog {

TermSource::TermSource(SequenceSpec spec, std::uint64_t limit)
    : spec_(std::move(spec)), limit_(limit), kind_(Kind::kSynthetic), sampler_{kArcsine, 1.0, 1.0} {
  spec_.validate();
  if (const auto* sampled = std::get_if<MeasureSampled>(&spec_.source)) {
    sampler_ = SyntheticSampler{sampled->measure, spec_.c1, spec_.m};
  } else if (std::holds_alternative<Identity>(spec_.source)) {
    kind_ = Kind::kIdentity;
  } else {
    kind_ = Kind::kTrace;
  }

  if (spec_.index.kind() == IndexKind::kNaturals) {
    if (kind_ == Kind::kTrace) throw DomainError("trace sequences are indexed by split primes");
    limit_ = std::numeric_limits<std::uint64_t>::max() / 4;
    return;
  }
  if (kind_ == Kind::kIdentity) throw DomainError("the identity sequence is indexed by N");

  if (kind_ == Kind::kTrace) {
    const auto& curve = CMCurve::get(std::get<CmTrace>(spec_.source).curve);
    for (const TraceRecord& rec : trace_table(curve, limit, /*split_only=*/true)) {
      elements_.push_back(rec.p);
      traces_.push_back(rec.a_p);
      cos_.push_back(rec.cos_theta);
    }
  } else {
    elements_ = spec_.index.elements(limit);
  }
}

std::uint64_t TermSource::count_in(std::uint64_t lo, std::uint64_t hi) const {
  if (lo > hi) return 0;
  if (spec_.index.kind() == IndexKind::kNaturals) return hi - std::max<std::uint64_t>(lo, 1) + 1;
  const auto first = std::lower_bound(elements_.begin(), elements_.end(), lo);
  const auto last = std::upper_bound(elements_.begin(), elements_.end(), hi);
  return static_cast<std::uint64_t>(last - first);
}

}  // namespace benlog
