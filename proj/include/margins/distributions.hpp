#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "margins/errors.hpp"
#include "margins/numeric.hpp"

namespace margins {

struct MarginDistribution;

// Symmetric kernels available as skew-family ingredients. Restricting to a
// catalog keeps the symmetry preconditions true by construction.
enum class BaseKernel { Normal, Logistic };

inline double base_pdf(BaseKernel k, double z) {
  return k == BaseKernel::Normal ? normal_pdf(z) : logistic_pdf(z);
}
inline double base_cdf(BaseKernel k, double z) {
  return k == BaseKernel::Normal ? normal_cdf(z) : logistic_cdf(z);
}
inline double base_sf(BaseKernel k, double z) {
  return k == BaseKernel::Normal ? normal_sf(z) : logistic_sf(z);
}
inline std::string base_kernel_name(BaseKernel k) {
  return k == BaseKernel::Normal ? "normal" : "logistic";
}

struct Gaussian {
  double mu;
  double sigma;

  Gaussian(double mu_, double sigma_) : mu(mu_), sigma(sigma_) {
    if (!std::isfinite(mu) || !std::isfinite(sigma) || sigma <= 0.0)
      throw InvalidParameter("gaussian: requires finite mu and sigma > 0");
  }
};

struct TwoGaussianMixture {
  double weight;  // mass of the first component
  double mu1, sigma1;
  double mu2, sigma2;

  TwoGaussianMixture(double w, double m1, double s1, double m2, double s2)
      : weight(w), mu1(m1), sigma1(s1), mu2(m2), sigma2(s2) {
    if (!(w > 0.0 && w < 1.0)) throw InvalidParameter("mix2: weight must lie in (0,1)");
    if (!std::isfinite(m1) || !std::isfinite(m2) || !(s1 > 0.0) || !(s2 > 0.0))
      throw InvalidParameter("mix2: requires finite means and positive sigmas");
  }

  // The symmetric special case (equal weights, opposite means, equal scale)
  // centered at `center` with component offset `offset`.
  static TwoGaussianMixture symmetric(double center, double offset, double sigma) {
    return TwoGaussianMixture(0.5, center - offset, sigma, center + offset, sigma);
  }
};

// Density (2/scale) * h((x-mu)/scale) * G(alpha*(x-mu)/scale) with symmetric
// h and G from the kernel catalog. alpha = 0 recovers the symmetric base, for
// which the CDF short-circuits to the closed form; otherwise the CDF comes
// from adaptive quadrature over [mu - 16*scale, mu + 16*scale], integrating
// whichever tail is nearer so both tails keep relative accuracy.
struct SkewSymmetric {
  BaseKernel base_h;
  BaseKernel base_G;
  double alpha;
  double mu;
  double scale;

  SkewSymmetric(BaseKernel h, BaseKernel G, double alpha_, double mu_, double scale_)
      : base_h(h), base_G(G), alpha(alpha_), mu(mu_), scale(scale_) {
    if (!std::isfinite(alpha) || !std::isfinite(mu) || !(scale > 0.0))
      throw InvalidParameter("skew: requires finite alpha, mu and scale > 0");
  }
};

struct EmpiricalDistribution {
  std::vector<double> margins;  // sorted ascending
  std::vector<double> weights;  // same length, each >= 0, summing to 1

  explicit EmpiricalDistribution(std::vector<double> points,
                                 std::vector<double> point_weights = {}) {
    if (points.empty()) throw InvalidParameter("empirical: needs at least one margin");
    if (point_weights.empty()) {
      point_weights.assign(points.size(), 1.0 / static_cast<double>(points.size()));
    } else if (point_weights.size() != points.size()) {
      throw InvalidParameter("empirical: weights must match margins in length");
    }
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
    margins.reserve(points.size());
    weights.reserve(points.size());
    double total = 0.0;
    for (std::size_t i : order) {
      if (!std::isfinite(points[i])) throw InvalidParameter("empirical: margins must be finite");
      if (!(point_weights[i] >= 0.0))
        throw InvalidParameter("empirical: weights must be nonnegative");
      margins.push_back(points[i]);
      weights.push_back(point_weights[i]);
      total += point_weights[i];
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw InvalidParameter("empirical: weights must sum to 1");
  }
};

// Odd, strictly increasing maps. A closed catalog keeps the odd/monotone
// precondition machine-checkable instead of trusting arbitrary callables.
struct Transform {
  enum class Kind { Cube, Sinh, ScaledAtan };
  Kind kind;
  double c = 1.0;  // only ScaledAtan uses it

  static Transform cube() { return {Kind::Cube, 1.0}; }
  static Transform sinh_map() { return {Kind::Sinh, 1.0}; }
  static Transform scaled_atan(double c_) {
    if (!(c_ > 0.0) || !std::isfinite(c_))
      throw InvalidParameter("atan transform: requires c > 0");
    return {Kind::ScaledAtan, c_};
  }

  double forward(double x) const {
    switch (kind) {
      case Kind::Cube: return x * x * x;
      case Kind::Sinh: return std::sinh(x);
      default: return c * std::atan(x);
    }
  }
  double inverse(double y) const {
    switch (kind) {
      case Kind::Cube: return std::cbrt(y);
      case Kind::Sinh: return std::asinh(y);
      default: return std::tan(y / c);
    }
  }
  // d/dy of the inverse map; may be +inf where the forward map has a
  // stationary point (cube at 0), making the transformed density unbounded.
  double inverse_slope(double y) const {
    switch (kind) {
      case Kind::Cube: {
        const double r = std::cbrt(y);
        return y == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / (3.0 * r * r);
      }
      case Kind::Sinh: return 1.0 / std::sqrt(1.0 + y * y);
      default: {
        const double t = std::tan(y / c);
        return (1.0 + t * t) / c;
      }
    }
  }
  // Open support of the image; only ScaledAtan has a finite one.
  double sup_lo() const { return kind == Kind::ScaledAtan ? -c * kPi / 2 : -std::numeric_limits<double>::infinity(); }
  double sup_hi() const { return kind == Kind::ScaledAtan ? c * kPi / 2 : std::numeric_limits<double>::infinity(); }

  std::string name() const {
    switch (kind) {
      case Kind::Cube: return "cube";
      case Kind::Sinh: return "sinh";
      default: return "atan(" + format_double(c) + ")";
    }
  }
};

inline Transform parse_transform(std::string_view name) {
  if (name == "cube") return Transform::cube();
  if (name == "sinh") return Transform::sinh_map();
  if (name == "atan") return Transform::scaled_atan(1.0);
  if (name.size() > 6 && name.substr(0, 5) == "atan(" && name.back() == ')') {
    const std::string num(name.substr(5, name.size() - 6));
    char* end = nullptr;
    const double c = std::strtod(num.c_str(), &end);
    if (end == num.c_str() + num.size()) return Transform::scaled_atan(c);
  }
  throw UnknownTransform("unknown transform: " + std::string(name));
}

struct OddMonotoneTransformed {
  std::shared_ptr<const MarginDistribution> inner;
  Transform map;
};

// Internal node produced by translating a transformed distribution (the shift
// of an odd map is no longer odd, so it cannot stay in the catalog).
struct ShiftedDistribution {
  std::shared_ptr<const MarginDistribution> inner;
  double offset;
};

struct MarginDistribution {
  using Node = std::variant<Gaussian, TwoGaussianMixture, SkewSymmetric, EmpiricalDistribution,
                            OddMonotoneTransformed, ShiftedDistribution>;
  Node node;

  MarginDistribution(Gaussian g) : node(std::move(g)) {}
  MarginDistribution(TwoGaussianMixture m) : node(std::move(m)) {}
  MarginDistribution(SkewSymmetric s) : node(std::move(s)) {}
  MarginDistribution(EmpiricalDistribution e) : node(std::move(e)) {}
  MarginDistribution(OddMonotoneTransformed t) : node(std::move(t)) {}
  MarginDistribution(ShiftedDistribution s) : node(std::move(s)) {}

  template <typename T>
  const T* get_if() const {
    return std::get_if<T>(&node);
  }
};

double pdf(const MarginDistribution& dist, double x);
double cdf(const MarginDistribution& dist, double x);
double survival(const MarginDistribution& dist, double x);

namespace detail {

inline double skew_pdf(const SkewSymmetric& d, double x) {
  const double z = (x - d.mu) / d.scale;
  return 2.0 / d.scale * base_pdf(d.base_h, z) * base_cdf(d.base_G, d.alpha * z);
}

inline constexpr double kSkewRange = 16.0;  // integration half-width in scales

inline double skew_cdf(const SkewSymmetric& d, double x) {
  const double z = (x - d.mu) / d.scale;
  if (d.alpha == 0.0) return base_cdf(d.base_h, z);
  if (z <= -kSkewRange) return 0.0;
  if (z >= kSkewRange) return 1.0;
  auto f = [&](double t) { return skew_pdf(d, t); };
  const double lo = d.mu - kSkewRange * d.scale;
  const double hi = d.mu + kSkewRange * d.scale;
  if (x <= d.mu) return std::min(1.0, integrate_refined(f, lo, x));
  return std::max(0.0, 1.0 - integrate_refined(f, x, hi));
}

inline double skew_sf(const SkewSymmetric& d, double x) {
  const double z = (x - d.mu) / d.scale;
  if (d.alpha == 0.0) return base_sf(d.base_h, z);
  if (z <= -kSkewRange) return 1.0;
  if (z >= kSkewRange) return 0.0;
  auto f = [&](double t) { return skew_pdf(d, t); };
  const double lo = d.mu - kSkewRange * d.scale;
  const double hi = d.mu + kSkewRange * d.scale;
  if (x > d.mu) return std::min(1.0, integrate_refined(f, x, hi));
  return std::max(0.0, 1.0 - integrate_refined(f, lo, x));
}

// Mass at or above / at or below x; the inclusive counting that a "predict
// when confidence >= threshold" rule induces on a discrete margin sample.
inline double empirical_upper_mass(const EmpiricalDistribution& d, double x) {
  auto it = std::lower_bound(d.margins.begin(), d.margins.end(), x);
  double m = 0.0;
  for (auto i = static_cast<std::size_t>(it - d.margins.begin()); i < d.margins.size(); ++i)
    m += d.weights[i];
  return m;
}

inline double empirical_lower_mass(const EmpiricalDistribution& d, double x, bool inclusive) {
  double m = 0.0;
  for (std::size_t i = 0; i < d.margins.size(); ++i) {
    if (d.margins[i] < x || (inclusive && d.margins[i] == x))
      m += d.weights[i];
    else
      break;
  }
  return m;
}

}  // namespace detail

inline double pdf(const MarginDistribution& dist, double x) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return normal_pdf((x - d.mu) / d.sigma) / d.sigma;
        } else if constexpr (std::is_same_v<T, TwoGaussianMixture>) {
          return d.weight * normal_pdf((x - d.mu1) / d.sigma1) / d.sigma1 +
                 (1.0 - d.weight) * normal_pdf((x - d.mu2) / d.sigma2) / d.sigma2;
        } else if constexpr (std::is_same_v<T, SkewSymmetric>) {
          return detail::skew_pdf(d, x);
        } else if constexpr (std::is_same_v<T, EmpiricalDistribution>) {
          throw DensityUnavailable("empirical distributions have no density");
        } else if constexpr (std::is_same_v<T, OddMonotoneTransformed>) {
          if (x <= d.map.sup_lo() || x >= d.map.sup_hi()) return 0.0;
          const double slope = d.map.inverse_slope(x);
          const double inner = pdf(*d.inner, d.map.inverse(x));
          if (std::isinf(slope))
            return inner > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
          return inner * slope;
        } else {
          return pdf(*d.inner, x - d.offset);
        }
      },
      dist.node);
}

inline double cdf(const MarginDistribution& dist, double x) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return normal_cdf((x - d.mu) / d.sigma);
        } else if constexpr (std::is_same_v<T, TwoGaussianMixture>) {
          return d.weight * normal_cdf((x - d.mu1) / d.sigma1) +
                 (1.0 - d.weight) * normal_cdf((x - d.mu2) / d.sigma2);
        } else if constexpr (std::is_same_v<T, SkewSymmetric>) {
          return detail::skew_cdf(d, x);
        } else if constexpr (std::is_same_v<T, EmpiricalDistribution>) {
          return detail::empirical_lower_mass(d, x, /*inclusive=*/true);
        } else if constexpr (std::is_same_v<T, OddMonotoneTransformed>) {
          if (x <= d.map.sup_lo()) return 0.0;
          if (x >= d.map.sup_hi()) return 1.0;
          return cdf(*d.inner, d.map.inverse(x));
        } else {
          return cdf(*d.inner, x - d.offset);
        }
      },
      dist.node);
}

// 1 - cdf computed through the upper tail directly, so small survival masses
// keep relative precision instead of cancelling against 1.
inline double survival(const MarginDistribution& dist, double x) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return normal_sf((x - d.mu) / d.sigma);
        } else if constexpr (std::is_same_v<T, TwoGaussianMixture>) {
          return d.weight * normal_sf((x - d.mu1) / d.sigma1) +
                 (1.0 - d.weight) * normal_sf((x - d.mu2) / d.sigma2);
        } else if constexpr (std::is_same_v<T, SkewSymmetric>) {
          return detail::skew_sf(d, x);
        } else if constexpr (std::is_same_v<T, EmpiricalDistribution>) {
          return detail::empirical_upper_mass(d, std::nextafter(x, std::numeric_limits<double>::infinity()));
        } else if constexpr (std::is_same_v<T, OddMonotoneTransformed>) {
          if (x <= d.map.sup_lo()) return 1.0;
          if (x >= d.map.sup_hi()) return 0.0;
          return survival(*d.inner, d.map.inverse(x));
        } else {
          return survival(*d.inner, x - d.offset);
        }
      },
      dist.node);
}

// P[X >= x]; identical to survival except at empirical atoms.
inline double upper_mass(const MarginDistribution& dist, double x) {
  if (const auto* e = dist.get_if<EmpiricalDistribution>())
    return detail::empirical_upper_mass(*e, x);
  return survival(dist, x);
}

// P[X < x]; identical to cdf except at empirical atoms.
inline double strict_lower_mass(const MarginDistribution& dist, double x) {
  if (const auto* e = dist.get_if<EmpiricalDistribution>())
    return detail::empirical_lower_mass(*e, x, /*inclusive=*/false);
  return cdf(dist, x);
}

inline bool has_density(const MarginDistribution& dist) {
  return std::visit(
      [&](const auto& d) -> bool {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, EmpiricalDistribution>) return false;
        else if constexpr (std::is_same_v<T, OddMonotoneTransformed>) return has_density(*d.inner);
        else if constexpr (std::is_same_v<T, ShiftedDistribution>) return has_density(*d.inner);
        else return true;
      },
      dist.node);
}

// Location anchor used to place evaluation grids.
inline double center(const MarginDistribution& dist) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Gaussian>) return d.mu;
        else if constexpr (std::is_same_v<T, TwoGaussianMixture>)
          return d.weight * d.mu1 + (1.0 - d.weight) * d.mu2;
        else if constexpr (std::is_same_v<T, SkewSymmetric>) return d.mu;
        else if constexpr (std::is_same_v<T, EmpiricalDistribution>) {
          double m = 0.0;
          for (std::size_t i = 0; i < d.margins.size(); ++i) m += d.weights[i] * d.margins[i];
          return m;
        } else if constexpr (std::is_same_v<T, OddMonotoneTransformed>)
          return d.map.forward(center(*d.inner));
        else
          return center(*d.inner) + d.offset;
      },
      dist.node);
}

// Spread anchor paired with center(); sized so that center +- 12 scales holds
// all but ~1e-9 of the mass for every catalog family.
inline double scale_hint(const MarginDistribution& dist) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Gaussian>) return d.sigma;
        else if constexpr (std::is_same_v<T, TwoGaussianMixture>) {
          const double c = d.weight * d.mu1 + (1.0 - d.weight) * d.mu2;
          return std::max(std::abs(d.mu1 - c) + d.sigma1, std::abs(d.mu2 - c) + d.sigma2);
        } else if constexpr (std::is_same_v<T, SkewSymmetric>) {
          return d.scale;
        } else if constexpr (std::is_same_v<T, EmpiricalDistribution>) {
          const double c = center(MarginDistribution(d));
          double v = 0.0;
          for (std::size_t i = 0; i < d.margins.size(); ++i)
            v += d.weights[i] * (d.margins[i] - c) * (d.margins[i] - c);
          return std::max(std::sqrt(v), 1e-12);
        } else if constexpr (std::is_same_v<T, OddMonotoneTransformed>) {
          const double c = center(*d.inner);
          const double s = scale_hint(*d.inner);
          return (d.map.forward(c + 8.0 * s) - d.map.forward(c - 8.0 * s)) / 16.0;
        } else {
          return scale_hint(*d.inner);
        }
      },
      dist.node);
}

// E[g(X)], by exact summation for empirical data and adaptive quadrature
// otherwise. Transformed nodes integrate in the inner variable (the image
// density may be unbounded, the pulled-back integrand never is).
template <typename G>
double expectation(const MarginDistribution& dist, G&& g) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, EmpiricalDistribution>) {
          double m = 0.0;
          for (std::size_t i = 0; i < d.margins.size(); ++i) m += d.weights[i] * g(d.margins[i]);
          return m;
        } else if constexpr (std::is_same_v<T, OddMonotoneTransformed>) {
          return expectation(*d.inner, [&](double x) { return g(d.map.forward(x)); });
        } else if constexpr (std::is_same_v<T, ShiftedDistribution>) {
          return expectation(*d.inner, [&](double x) { return g(x + d.offset); });
        } else {
          const double c = center(dist);
          const double s = scale_hint(dist);
          return integrate([&](double x) { return g(x) * pdf(dist, x); }, c - 24.0 * s,
                           c + 24.0 * s, 1e-10);
        }
      },
      dist.node);
}

inline double mean(const MarginDistribution& dist) {
  if (const auto* g = dist.get_if<Gaussian>()) return g->mu;
  if (const auto* m = dist.get_if<TwoGaussianMixture>())
    return m->weight * m->mu1 + (1.0 - m->weight) * m->mu2;
  return expectation(dist, [](double x) { return x; });
}

inline MarginDistribution translate(const MarginDistribution& dist, double d) {
  if (!std::isfinite(d)) throw InvalidParameter("translate: shift must be finite");
  return std::visit(
      [&](const auto& node) -> MarginDistribution {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return Gaussian(node.mu + d, node.sigma);
        } else if constexpr (std::is_same_v<T, TwoGaussianMixture>) {
          return TwoGaussianMixture(node.weight, node.mu1 + d, node.sigma1, node.mu2 + d,
                                    node.sigma2);
        } else if constexpr (std::is_same_v<T, SkewSymmetric>) {
          return SkewSymmetric(node.base_h, node.base_G, node.alpha, node.mu + d, node.scale);
        } else if constexpr (std::is_same_v<T, EmpiricalDistribution>) {
          std::vector<double> pts(node.margins);
          for (double& p : pts) p += d;
          return EmpiricalDistribution(std::move(pts), node.weights);
        } else if constexpr (std::is_same_v<T, OddMonotoneTransformed>) {
          return ShiftedDistribution{std::make_shared<MarginDistribution>(dist), d};
        } else {
          return ShiftedDistribution{node.inner, node.offset + d};
        }
      },
      dist.node);
}

inline MarginDistribution apply_odd_monotone(const MarginDistribution& dist,
                                             const Transform& map) {
  if (const auto* e = dist.get_if<EmpiricalDistribution>()) {
    std::vector<double> pts(e->margins);
    for (double& p : pts) p = map.forward(p);
    return EmpiricalDistribution(std::move(pts), e->weights);
  }
  return OddMonotoneTransformed{std::make_shared<MarginDistribution>(dist), map};
}

inline MarginDistribution apply_odd_monotone(const MarginDistribution& dist,
                                             std::string_view transform_name) {
  return apply_odd_monotone(dist, parse_transform(transform_name));
}

// Location of the negative-side local minimum of f'/f for the symmetric
// mixture 0.5 N(-mu, sigma^2) + 0.5 N(mu, sigma^2). Exists only when the
// components are separated enough that the density stops being log-concave,
// i.e. mu > sigma.
inline double mixture_log_gradient_critical_point(double mu, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma))
    throw InvalidParameter("critical point: requires finite mu and sigma > 0");
  const double m = mu / sigma;
  if (m <= 1.0)
    throw NotApplicable("critical point: undefined for mu <= sigma (log-concave density)");
  const double v = 2.0 * m * m - 1.0 + 2.0 * m * std::sqrt(m * m - 1.0);
  return -sigma * std::log(v) / (2.0 * m);
}

inline std::string describe(const MarginDistribution& dist) {
  return std::visit(
      [&](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return "gaussian(" + format_double(d.mu) + "," + format_double(d.sigma) + ")";
        } else if constexpr (std::is_same_v<T, TwoGaussianMixture>) {
          return "mix2(" + format_double(d.weight) + "," + format_double(d.mu1) + "," +
                 format_double(d.sigma1) + "," + format_double(d.mu2) + "," +
                 format_double(d.sigma2) + ")";
        } else if constexpr (std::is_same_v<T, SkewSymmetric>) {
          return "skew(" + format_double(d.alpha) + "," + format_double(d.mu) + "," +
                 format_double(d.scale) + "," + base_kernel_name(d.base_h) + "," +
                 base_kernel_name(d.base_G) + ")";
        } else if constexpr (std::is_same_v<T, EmpiricalDistribution>) {
          return "empirical(" + std::to_string(d.margins.size()) + " points)";
        } else if constexpr (std::is_same_v<T, OddMonotoneTransformed>) {
          return describe(*d.inner) + "|" + d.map.name();
        } else {
          return "translate(" + describe(*d.inner) + "," + format_double(d.offset) + ")";
        }
      },
      dist.node);
}

}  // namespace margins
