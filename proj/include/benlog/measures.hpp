#pragma once

#include <string>
#include <string_view>

namespace benlog {

enum class MeasureKind {
  kArcsine,     // CM Sato-Tate law, density 1/(pi*sqrt(1-t^2))
  kSemicircle,  // density (2/pi)*sqrt(1-t^2)
  kUniform,     // density 1/2
};

/// Continuous symmetric probability measure on [-1, 1], given by a closed
/// form cdf. Interval masses are cdf differences, so no quadrature enters
/// any reported number.
class Measure {
 public:
  explicit constexpr Measure(MeasureKind kind) : kind_(kind) {}

  static Measure parse(std::string_view name);

  MeasureKind kind() const { return kind_; }
  std::string name() const;
  std::string density_description() const;

  double cdf(double t) const;
  /// mu([a, b]); computed from the odd part of the cdf so that small
  /// intervals near 0 keep full relative precision.
  double interval_mass(double a, double b) const;
  double inverse_cdf(double u) const;

  friend bool operator==(const Measure&, const Measure&) = default;

 private:
  MeasureKind kind_;
};

inline constexpr Measure kArcsine{MeasureKind::kArcsine};
inline constexpr Measure kSemicircle{MeasureKind::kSemicircle};
inline constexpr Measure kUniform{MeasureKind::kUniform};

/// Second differences of t -> mu([0, t]) on `gridpoints` interior points of
/// (0, 1) must all exceed 1e-15 times the local function scale.
bool convexity_check(const Measure& mu, int gridpoints);

enum class BaseVariant { kGeneral, kBinary };  // b >= 3 and b == 2

struct IntervalPair {
  double lower_lo, lower_hi;  // interval whose mass bounds the density from below
  double upper_lo, upper_hi;  // from above
};

/// Scale factors of the two trapping intervals at x = 1:
/// general: [23/40, 1] vs [3/8, 4/5]; binary: [11/15, 1] vs [2/5, 2/3].
IntervalPair trap_intervals(BaseVariant variant, double x);

/// Strict mu(lower interval at x) > mu(upper interval at x), strictness
/// measured relative to the masses.
bool thm1_interval_inequality(const Measure& mu, double x, BaseVariant variant);

}  // namespace benlog
