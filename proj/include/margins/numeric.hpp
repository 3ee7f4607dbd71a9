#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "margins/errors.hpp"

namespace margins {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934381868;
inline constexpr double kSqrt1_2 = 0.707106781186547524400844362104849039;

// Standard normal kernels. The CDF goes through erfc so both tails keep full
// relative precision; this is the precision floor for everything downstream.
inline double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * kSqrt1_2); }
inline double normal_sf(double z) { return 0.5 * std::erfc(z * kSqrt1_2); }

// Logistic kernel standardized to unit variance (classic scale sqrt(3)/pi),
// so that +-12 "scales" carry all but ~3.5e-10 of the mass, matching the
// normalization budget shared with the normal kernel. The sech/tanh forms
// avoid overflow for large |z|.
inline constexpr double kLogisticS = 0.551328895421792049533463325050616660;

inline double logistic_pdf(double z) {
  const double c = std::cosh(0.5 * z / kLogisticS);
  return 1.0 / (4.0 * kLogisticS * c * c);
}
inline double logistic_cdf(double z) { return 0.5 * (1.0 + std::tanh(0.5 * z / kLogisticS)); }
inline double logistic_sf(double z) { return 0.5 * (1.0 - std::tanh(0.5 * z / kLogisticS)); }

namespace detail {

inline double simpson_panel(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adapt_step(F&& f, double a, double fa, double b, double fb, double m, double fm,
                  double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson_panel(a, fa, m, fm, flm);
  const double right = simpson_panel(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0) throw QuadratureFailure("adaptive Simpson: depth budget exhausted");
  return adapt_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adapt_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson with an absolute tolerance. The interval is cut into a few
// seed panels before adapting so a bump hiding between coincidental zeros of
// the first Simpson stencil cannot be skipped. Throws QuadratureFailure when
// the recursion depth budget runs out before the tolerance is met.
template <typename F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-12, int max_depth = 40) {
  if (!(a < b)) return 0.0;
  constexpr int kSeedPanels = 8;
  const double step = (b - a) / kSeedPanels;
  const double panel_tol = abs_tol / kSeedPanels;
  double total = 0.0;
  for (int i = 0; i < kSeedPanels; ++i) {
    const double lo = a + i * step;
    const double hi = i + 1 == kSeedPanels ? b : a + (i + 1) * step;
    const double flo = f(lo);
    const double fhi = f(hi);
    const double m = 0.5 * (lo + hi);
    const double fm = f(m);
    const double whole = detail::simpson_panel(lo, flo, hi, fhi, fm);
    total += detail::adapt_step(f, lo, flo, hi, fhi, m, fm, whole, panel_tol, max_depth);
  }
  return total;
}

// Two-phase integration for quantities that may be many orders of magnitude
// below 1 (tail masses): a first pass at the base tolerance estimates the
// value, a second pass tightens the tolerance toward relative accuracy, with
// an absolute floor so the recursion stays within the depth budget.
template <typename F>
double integrate_refined(F&& f, double a, double b, double base_tol = 1e-12,
                         double rel_tol = 1e-9, double tol_floor = 1e-18) {
  const double rough = integrate(f, a, b, base_tol);
  const double want = std::max(tol_floor, rel_tol * std::abs(rough));
  if (want >= base_tol) return rough;
  return integrate(f, a, b, want);
}

// Integrates a density piecewise along a sorted grid, returning the running
// integral at every grid point. Each panel is integrated to near-relative
// accuracy, so the accumulated values keep relative precision even where the
// total is far below 1 (needed when probing log F deep in a left tail).
template <typename F>
std::vector<double> cumulative_integral(F&& f, const std::vector<double>& grid) {
  std::vector<double> out(grid.size(), 0.0);
  double running = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    running += integrate_refined(f, grid[i - 1], grid[i], 1e-12, 1e-10, 1e-300);
    out[i] = running;
  }
  return out;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> out(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

// Shortest round-trip decimal form; the byte-stability contract for CSV
// output rests on this.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent, reproducible stream for (seed, index); parallel schedules see
// the same numbers because nothing is shared between streams.
inline std::mt19937_64 seeded_stream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(~index)));
}

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) by rejection; bit-reproducible everywhere, unlike
// std::uniform_int_distribution.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

}  // namespace margins
