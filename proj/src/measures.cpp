#include "benlog/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "benlog/errors.hpp"

namespace benlog {
namespace {

constexpr double kPi = std::numbers::pi;

// Odd part of the cdf: cdf(t) = 1/2 + odd(t).
double odd_part(MeasureKind kind, double t) {
  switch (kind) {
    case MeasureKind::kArcsine:
      return std::asin(t) / kPi;
    case MeasureKind::kSemicircle:
      return (t * std::sqrt(std::max(0.0, 1.0 - t * t)) + std::asin(t)) / kPi;
    case MeasureKind::kUniform:
      return t / 2.0;
  }
  return 0.0;
}

void check_unit(double t, const char* what) {
  if (!(t >= -1.0 && t <= 1.0)) {
    throw DomainError(std::string(what) + " must lie in [-1, 1]");
  }
}

}  // namespace

Measure Measure::parse(std::string_view name) {
  if (name == "arcsine" || name == "arcsine-cm" || name == "cm") return kArcsine;
  if (name == "semicircle") return kSemicircle;
  if (name == "uniform") return kUniform;
  throw ParseError("unknown measure '" + std::string(name) + "'");
}

std::string Measure::name() const {
  switch (kind_) {
    case MeasureKind::kArcsine:
      return "arcsine-cm";
    case MeasureKind::kSemicircle:
      return "semicircle";
    case MeasureKind::kUniform:
      return "uniform";
  }
  return "?";
}

std::string Measure::density_description() const {
  switch (kind_) {
    case MeasureKind::kArcsine:
      return "(1/pi) dt / sqrt(1 - t^2)";
    case MeasureKind::kSemicircle:
      return "(2/pi) sqrt(1 - t^2) dt";
    case MeasureKind::kUniform:
      return "dt / 2";
  }
  return "?";
}

double Measure::cdf(double t) const {
  check_unit(t, "cdf argument");
  if (t == -1.0) return 0.0;
  if (t == 1.0) return 1.0;
  return 0.5 + odd_part(kind_, t);
}

double Measure::interval_mass(double a, double b) const {
  check_unit(a, "interval start");
  check_unit(b, "interval end");
  if (a > b) throw DomainError("interval_mass: start exceeds end");
  return odd_part(kind_, b) - odd_part(kind_, a);
}

double Measure::inverse_cdf(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("inverse_cdf argument must lie in [0, 1]");
  switch (kind_) {
    case MeasureKind::kArcsine:
      return std::sin(kPi * (u - 0.5));
    case MeasureKind::kUniform:
      return 2.0 * u - 1.0;
    case MeasureKind::kSemicircle: {
      if (u == 0.0) return -1.0;
      if (u == 1.0) return 1.0;
      // Solve on the odd part so the target keeps precision near u = 1/2.
      const double target = u - 0.5;
      double lo = -1.0;
      double hi = 1.0;
      while (hi - lo > 1e-14) {
        const double mid = 0.5 * (lo + hi);
        if (odd_part(kind_, mid) < target) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
  }
  return 0.0;
}

bool convexity_check(const Measure& mu, int gridpoints) {
  if (gridpoints < 3) throw DomainError("convexity_check needs at least 3 grid points");
  const int n = gridpoints;
  const double h = 1.0 / (n + 1);
  auto f = [&](int k) { return mu.interval_mass(0.0, k * h); };
  double prev = f(1);
  double cur = f(2);
  for (int k = 2; k < n; ++k) {
    const double next = f(k + 1);
    const double scale = std::max({std::fabs(prev), std::fabs(cur), std::fabs(next)});
    if (prev - 2.0 * cur + next <= 1e-15 * scale) return false;
    prev = cur;
    cur = next;
  }
  return true;
}

IntervalPair trap_intervals(BaseVariant variant, double x) {
  if (variant == BaseVariant::kGeneral) {
    return {23.0 / 40.0 * x, x, 3.0 / 8.0 * x, 4.0 / 5.0 * x};
  }
  return {11.0 / 15.0 * x, x, 2.0 / 5.0 * x, 2.0 / 3.0 * x};
}

bool thm1_interval_inequality(const Measure& mu, double x, BaseVariant variant) {
  if (!(x > 0.0 && x <= 1.0)) throw DomainError("x must lie in (0, 1]");
  const IntervalPair iv = trap_intervals(variant, x);
  const double lower = mu.interval_mass(iv.lower_lo, iv.lower_hi);
  const double upper = mu.interval_mass(iv.upper_lo, iv.upper_hi);
  return lower - upper > 1e-15 * std::max(lower, upper);
}

}  // namespace benlog
