#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "gogrow/errors.hpp"
#include "gogrow/model.hpp"

namespace gogrow {

using complex_t = std::complex<double>;

enum class EquilibriumTag { at_zero, at_star, reduced };

inline const char* to_string(EquilibriumTag tag) {
  switch (tag) {
    case EquilibriumTag::at_zero: return "at_zero";
    case EquilibriumTag::at_star: return "at_star";
    case EquilibriumTag::reduced: return "reduced";
  }
  return "?";
}

/// Characteristic function of the linearization at x = 0:
///   lambda + rho - 2 rho e^{-lambda}.
inline complex_t char_zero(complex_t lambda, const ModelParams& p) {
  return lambda + p.rho - 2.0 * p.rho * std::exp(-lambda);
}

/// The reduced factor lambda + rho - rho e^{-lambda}; its nonzero roots are
/// the non-trivial eigenvalues at the positive equilibrium.
inline complex_t char_reduced(complex_t lambda, const ModelParams& p) {
  return lambda + p.rho - p.rho * std::exp(-lambda);
}

/// Quasi-polynomial chi(lambda) = P(lambda) + Q(lambda) e^{-lambda} at the
/// positive equilibrium. lambda = 0 is a removable artifact of clearing the
/// distributed-delay integral and is not an eigenvalue; at exactly 0 this
/// returns the integral-form value -rho.
inline complex_t char_star(complex_t lambda, const ModelParams& p) {
  const double rho = p.rho;
  if (lambda == complex_t(0.0, 0.0)) return complex_t(-rho, 0.0);
  const complex_t P =
      lambda * lambda + rho * (1.0 + 1.0 / (rho + 1.0)) * lambda +
      rho * rho / (rho + 1.0);
  const complex_t Q = complex_t(-rho * rho / (rho + 1.0), 0.0) - rho * lambda;
  return P + Q * std::exp(-lambda);
}

/// Threshold rho_j = (2 j pi - pi/3) / sqrt(3) at which the j-th conjugate
/// pair of the zero equilibrium crosses the imaginary axis.
inline double rho_crit(int j) {
  if (j < 1) throw invalid_input_error("rho_crit: j must be >= 1");
  const double pi = std::numbers::pi;
  return (2.0 * j * pi - pi / 3.0) / std::sqrt(3.0);
}

/// Point of the stability-boundary curve C_j^- at parameter nu:
///   (alpha, beta) = (nu cos nu / sin nu, -nu / sin nu),
/// nu in ((2j-1) pi, 2j pi). At these points z - alpha - beta e^{-z} has the
/// purely imaginary root z = i nu.
inline std::pair<double, double> c_curve(int j, double nu) {
  if (j < 1) throw invalid_input_error("c_curve: j must be >= 1");
  const double pi = std::numbers::pi;
  const double lo = (2.0 * j - 1.0) * pi, hi = 2.0 * j * pi;
  if (!(nu > lo && nu < hi))
    throw singularity_error("c_curve: nu must lie strictly inside ((2j-1)pi, 2j pi)");
  const double s = std::sin(nu);
  if (std::abs(s) < 1e-12)
    throw singularity_error("c_curve: sin(nu) vanishes");
  return {nu * std::cos(nu) / s, -nu / s};
}

/// Sampled branch of C_j^- plus its intersection with the half-line
/// (-rho, 2 rho).
struct StabilityChart {
  int j = 1;
  std::vector<double> nu_samples;
  std::vector<std::pair<double, double>> alpha_beta;
  double rho_crit_value = 0.0;
};

inline StabilityChart make_stability_chart(int j, int n_samples = 200) {
  if (n_samples < 2)
    throw invalid_input_error("make_stability_chart: need >= 2 samples");
  StabilityChart chart;
  chart.j = j;
  chart.rho_crit_value = rho_crit(j);
  const double pi = std::numbers::pi;
  const double lo = (2.0 * j - 1.0) * pi, hi = 2.0 * j * pi;
  chart.nu_samples.reserve(static_cast<std::size_t>(n_samples));
  chart.alpha_beta.reserve(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    const double nu = lo + (hi - lo) * (i + 0.5) / n_samples;
    chart.nu_samples.push_back(nu);
    chart.alpha_beta.push_back(c_curve(j, nu));
  }
  return chart;
}

/// A refined characteristic root with its defect |char(lambda)|.
struct CharRoot {
  complex_t lambda;
  double residual = 0.0;
  EquilibriumTag tag = EquilibriumTag::at_zero;
};

/// Axis-aligned search rectangle in the complex plane.
struct Rect {
  double re_min, re_max, im_min, im_max;

  double width() const { return re_max - re_min; }
  double height() const { return im_max - im_min; }
  double diameter() const { return std::hypot(width(), height()); }
  complex_t center() const {
    return {0.5 * (re_min + re_max), 0.5 * (im_min + im_max)};
  }
  bool contains(complex_t z, double margin = 0.0) const {
    return z.real() >= re_min - margin && z.real() <= re_max + margin &&
           z.imag() >= im_min - margin && z.imag() <= im_max + margin;
  }
  void validate() const {
    if (!(re_min < re_max && im_min < im_max))
      throw invalid_input_error("Rect: need re_min < re_max, im_min < im_max");
  }
};

namespace detail {

// (1 - e^{-z}) / z, continuously extended through z = 0.
inline complex_t expm1_ratio(complex_t z) {
  if (std::abs(z) < 0.5) {
    complex_t term(1.0, 0.0), sum(1.0, 0.0);
    for (int k = 1; k <= 18; ++k) {
      term *= -z / static_cast<double>(k + 1);
      sum += term;
    }
    return sum;
  }
  return (1.0 - std::exp(-z)) / z;
}

// d/dz of the above.
inline complex_t expm1_ratio_deriv(complex_t z) {
  if (std::abs(z) < 0.5) {
    // sum_{k>=1} (-1)^k k z^{k-1} / (k+1)!
    complex_t sum(0.0, 0.0), zp(1.0, 0.0);
    double fact = 2.0;  // (k+1)! running
    double sign = -1.0;
    for (int k = 1; k <= 18; ++k) {
      sum += sign * static_cast<double>(k) / fact * zp;
      zp *= z;
      fact *= static_cast<double>(k + 2);
      sign = -sign;
    }
    return sum;
  }
  const complex_t e = std::exp(-z);
  return (e * (1.0 + z) - 1.0) / (z * z);
}

/// Holomorphic target for root finding, per equilibrium. For the positive
/// equilibrium we search chi(lambda)/lambda (continuously extended), whose
/// zeros are exactly the eigenvalues: the spurious origin root of the
/// polynomial form is divided out.
struct CharTarget {
  EquilibriumTag tag;
  double rho;

  complex_t value(complex_t z) const {
    switch (tag) {
      case EquilibriumTag::at_zero:
        return z + rho - 2.0 * rho * std::exp(-z);
      case EquilibriumTag::reduced:
        return z + rho - rho * std::exp(-z);
      case EquilibriumTag::at_star: {
        const double c = rho * rho / (rho + 1.0);
        return z + rho * (rho + 2.0) / (rho + 1.0) + c * expm1_ratio(z) -
               rho * std::exp(-z);
      }
    }
    return {};
  }

  complex_t deriv(complex_t z) const {
    switch (tag) {
      case EquilibriumTag::at_zero:
        return 1.0 + 2.0 * rho * std::exp(-z);
      case EquilibriumTag::reduced:
        return 1.0 + rho * std::exp(-z);
      case EquilibriumTag::at_star: {
        const double c = rho * rho / (rho + 1.0);
        return 1.0 + c * expm1_ratio_deriv(z) + rho * std::exp(-z);
      }
    }
    return {};
  }

  double scale() const { return 1.0 + 2.0 * rho + rho * rho / (rho + 1.0); }

  double public_residual(complex_t z, const ModelParams& p) const {
    switch (tag) {
      case EquilibriumTag::at_zero: return std::abs(char_zero(z, p));
      case EquilibriumTag::reduced: return std::abs(char_reduced(z, p));
      case EquilibriumTag::at_star: return std::abs(char_star(z, p));
    }
    return 0.0;
  }
};

struct IllConditioned {};  // internal control flow for perturb-and-retry

/// Total phase change of f along the segment [a, b] / adaptive trapezoid
/// with recursive bisection until each step turns by less than pi/2.
inline double edge_phase(const CharTarget& f, complex_t a, complex_t fa,
                         complex_t b, complex_t fb, double ill_eps,
                         int depth) {
  if (std::abs(fa) < ill_eps || std::abs(fb) < ill_eps) throw IllConditioned{};
  const double d = std::arg(fb / fa);
  if (std::abs(d) <= 1.5707963267948966 || depth >= 48) {
    if (depth >= 48) throw IllConditioned{};
    return d;
  }
  const complex_t m = 0.5 * (a + b);
  const complex_t fm = f.value(m);
  return edge_phase(f, a, fa, m, fm, ill_eps, depth + 1) +
         edge_phase(f, m, fm, b, fb, ill_eps, depth + 1);
}

inline double polyline_phase(const CharTarget& f, complex_t a, complex_t b,
                             double ill_eps) {
  const double len = std::abs(b - a);
  const int n0 = std::max(16, static_cast<int>(std::ceil(4.0 * len)));
  double total = 0.0;
  complex_t prev = a, fprev = f.value(a);
  for (int i = 1; i <= n0; ++i) {
    const complex_t z = a + (b - a) * (static_cast<double>(i) / n0);
    const complex_t fz = f.value(z);
    total += edge_phase(f, prev, fprev, z, fz, ill_eps, 0);
    prev = z;
    fprev = fz;
  }
  return total;
}

/// Winding number of f around the rectangle boundary (counterclockwise).
inline int winding(const CharTarget& f, const Rect& r) {
  const double ill_eps = 1e-12 * f.scale();
  const complex_t c00(r.re_min, r.im_min), c10(r.re_max, r.im_min),
      c11(r.re_max, r.im_max), c01(r.re_min, r.im_max);
  const double total =
      polyline_phase(f, c00, c10, ill_eps) + polyline_phase(f, c10, c11, ill_eps) +
      polyline_phase(f, c11, c01, ill_eps) + polyline_phase(f, c01, c00, ill_eps);
  const double w = total / (2.0 * std::numbers::pi);
  const auto rounded = static_cast<long>(std::lround(w));
  if (std::abs(w - static_cast<double>(rounded)) > 0.05 || rounded < 0)
    throw IllConditioned{};
  return static_cast<int>(rounded);
}

inline complex_t newton(const CharTarget& f, complex_t z0) {
  complex_t z = z0;
  for (int it = 0; it < 50; ++it) {
    const complex_t fz = f.value(z);
    const complex_t dfz = f.deriv(z);
    if (std::abs(dfz) < 1e-300) break;
    const complex_t dz = fz / dfz;
    z -= dz;
    if (std::abs(dz) < 1e-13 * (1.0 + std::abs(z))) return z;
  }
  return {std::numeric_limits<double>::quiet_NaN(), 0.0};
}

inline constexpr double kMinCellDiameter = 1e-3;

inline void collect_roots(const CharTarget& f, const Rect& r, int expected,
                          std::vector<complex_t>& out, int depth) {
  if (expected == 0) return;
  if (depth > 80) throw IllConditioned{};
  const double diam = r.diameter();
  if (expected == 1 && diam <= 0.25) {
    const complex_t z = newton(f, r.center());
    if (std::isfinite(z.real()) && r.contains(z, 2.0 * diam)) {
      out.push_back(z);
      return;
    }
    if (diam <= kMinCellDiameter) throw IllConditioned{};
  } else if (diam <= kMinCellDiameter) {
    // clustered roots unresolved at the floor diameter
    throw IllConditioned{};
  }
  // quadrisection; nudge the split lines off any root
  static constexpr double kFracs[] = {0.5, 0.47, 0.55, 0.43, 0.59, 0.4};
  for (double fx : kFracs) {
    for (double fy : kFracs) {
      const double xm = r.re_min + fx * r.width();
      const double ym = r.im_min + fy * r.height();
      const Rect cells[4] = {{r.re_min, xm, r.im_min, ym},
                             {xm, r.re_max, r.im_min, ym},
                             {r.re_min, xm, ym, r.im_max},
                             {xm, r.re_max, ym, r.im_max}};
      int counts[4];
      int sum = 0;
      bool ok = true;
      for (int i = 0; i < 4 && ok; ++i) {
        try {
          counts[i] = winding(f, cells[i]);
          sum += counts[i];
        } catch (const IllConditioned&) {
          ok = false;
        }
      }
      if (!ok || sum != expected) continue;
      for (int i = 0; i < 4; ++i)
        collect_roots(f, cells[i], counts[i], out, depth + 1);
      return;
    }
  }
  throw IllConditioned{};
}

inline Rect perturbed(const Rect& r, int attempt) {
  if (attempt == 0) return r;
  const double fx = 1.0 + 3.1e-4 * attempt;
  const double dx = 2.3e-4 * attempt * r.width();
  const double dy = 1.7e-4 * attempt * r.height();
  const complex_t c = r.center();
  const double hw = 0.5 * r.width() * fx, hh = 0.5 * r.height() * fx;
  return {c.real() - hw + dx, c.real() + hw + dx, c.imag() - hh + dy,
          c.imag() + hh + dy};
}

}  // namespace detail

/// Number of characteristic roots strictly inside the rectangle, by the
/// argument principle. The boundary is auto-perturbed if it passes too close
/// to a root.
inline int count_roots(EquilibriumTag tag, const ModelParams& params,
                       Rect rect) {
  rect.validate();
  const detail::CharTarget f{tag, params.rho};
  for (int attempt = 0; attempt < 8; ++attempt) {
    try {
      return detail::winding(f, detail::perturbed(rect, attempt));
    } catch (const detail::IllConditioned&) {
    }
  }
  throw subdivision_error(
      "count_roots: rectangle boundary could not be moved off a root");
}

/// Find all characteristic roots in the rectangle: winding count, recursive
/// quadrisection until each cell isolates one root, then Newton refinement.
/// Complex roots are returned together with their conjugates (roots come in
/// conjugate pairs) even when the mirror image falls outside the rectangle.
/// Sorted by descending real part. Throws subdivision_error when refinement
/// cannot reproduce the winding count.
inline std::vector<CharRoot> find_roots(EquilibriumTag tag,
                                        const ModelParams& params, Rect rect,
                                        int max_roots = 64) {
  rect.validate();
  if (max_roots < 1) throw invalid_input_error("find_roots: max_roots >= 1");
  const detail::CharTarget f{tag, params.rho};

  std::vector<complex_t> raw;
  bool done = false;
  for (int attempt = 0; attempt < 8 && !done; ++attempt) {
    raw.clear();
    const Rect r = detail::perturbed(rect, attempt);
    try {
      const int w = detail::winding(f, r);
      if (w > 4096) throw subdivision_error("find_roots: rectangle too dense");
      detail::collect_roots(f, r, w, raw, 0);
      if (static_cast<int>(raw.size()) != w) continue;
      done = true;
    } catch (const detail::IllConditioned&) {
    }
  }
  if (!done)
    throw subdivision_error(
        "find_roots: winding count and refined roots disagree");

  // dedupe (distinct simple roots expected)
  std::vector<complex_t> uniq;
  for (complex_t z : raw) {
    bool dup = false;
    for (complex_t u : uniq)
      if (std::abs(z - u) <= 1e-8 * (1.0 + std::abs(z))) dup = true;
    if (!dup) uniq.push_back(z);
  }
  if (uniq.size() != raw.size())
    throw subdivision_error("find_roots: refined roots collided");

  // conjugate closure
  std::vector<complex_t> all = uniq;
  for (complex_t z : uniq) {
    if (std::abs(z.imag()) <= 1e-12) continue;
    const complex_t zc = std::conj(z);
    bool present = false;
    for (complex_t u : all)
      if (std::abs(zc - u) <= 1e-8 * (1.0 + std::abs(zc))) present = true;
    if (!present) all.push_back(zc);
  }

  std::vector<CharRoot> roots;
  roots.reserve(all.size());
  for (complex_t z : all) {
    const double res = f.public_residual(z, params);
    if (!(res < 1e-10))
      throw subdivision_error("find_roots: refined root residual too large");
    roots.push_back(CharRoot{z, res, tag});
  }
  std::sort(roots.begin(), roots.end(), [](const CharRoot& a, const CharRoot& b) {
    if (a.lambda.real() != b.lambda.real())
      return a.lambda.real() > b.lambda.real();
    const double ia = std::abs(a.lambda.imag()), ib = std::abs(b.lambda.imag());
    if (ia != ib) return ia < ib;
    return a.lambda.imag() > b.lambda.imag();
  });
  if (static_cast<int>(roots.size()) > max_roots)
    roots.resize(static_cast<std::size_t>(max_roots));
  return roots;
}

/// The unique real root of char_zero, located in (0, rho); bisection plus a
/// Newton polish.
inline double leading_real_root_at_zero(const ModelParams& params) {
  const double rho = params.rho;
  auto g = [&](double x) { return x + rho - 2.0 * rho * std::exp(-x); };
  double lo = 0.0, hi = rho;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 6; ++it)
    x -= g(x) / (1.0 + 2.0 * rho * std::exp(-x));
  return x;
}

/// Number of characteristic roots of char_zero with positive real part,
/// from the threshold formula: 1 + 2k with k the number of thresholds below
/// rho. Rejects rho within 1e-9 of a threshold, where the count jumps.
inline int unstable_count_at_zero(const ModelParams& params) {
  int k = 0;
  for (int j = 1;; ++j) {
    const double rj = rho_crit(j);
    if (std::abs(params.rho - rj) < 1e-9)
      throw degenerate_parameter_error(
          "unstable_count_at_zero: rho sits on threshold rho_" +
          std::to_string(j));
    if (rj < params.rho)
      k = j;
    else
      break;
  }
  return 1 + 2 * k;
}

/// Same count, measured: winding number of char_zero over a rectangle
/// enclosing every root with positive real part (all such roots satisfy
/// |lambda| <= 3 rho).
inline int unstable_count_by_winding(const ModelParams& params) {
  const double b = 3.0 * params.rho + 2.0;
  return count_roots(EquilibriumTag::at_zero, params, Rect{0.0, b, -b, b});
}

/// Leading conjugate pair at the positive equilibrium (the complex root pair
/// with largest real part); the member with positive imaginary part is
/// returned.
inline complex_t leading_star_pair(const ModelParams& params) {
  const double pi = std::numbers::pi;
  for (double re_lo : {-6.0, -20.0}) {
    const auto roots = find_roots(EquilibriumTag::at_star, params,
                                  Rect{re_lo, 2.0, 1.0, 2.0 * pi + 0.3}, 8);
    for (const CharRoot& r : roots)
      if (r.lambda.imag() > 0.0) return r.lambda;
  }
  throw subdivision_error("leading_star_pair: no pair found in search band");
}

/// Spectrum tables across an ascending rho sweep, with the distance of each
/// conjugate pair to its singular-limit location 2 j pi i.
struct SpectralScanRow {
  double rho = 0.0;
  std::vector<CharRoot> roots;
  std::map<int, double> pair_distance;  // j -> |lambda_j - 2 j pi i|
};

struct SpectralScan {
  std::vector<SpectralScanRow> rows;
  bool monotone = false;  // distances non-increasing along the sweep
};

inline SpectralScan spectral_limit_scan(const std::vector<double>& rho_list,
                                        Rect rect, int max_roots = 64) {
  if (rho_list.size() < 2)
    throw invalid_input_error("spectral_limit_scan: need >= 2 rho values");
  for (std::size_t i = 1; i < rho_list.size(); ++i)
    if (!(rho_list[i] > rho_list[i - 1]))
      throw invalid_input_error("spectral_limit_scan: rho_list must ascend");

  const double two_pi = 2.0 * std::numbers::pi;
  SpectralScan scan;
  for (double rho : rho_list) {
    SpectralScanRow row;
    row.rho = rho;
    row.roots = find_roots(EquilibriumTag::at_star, ModelParams(rho), rect,
                           max_roots);
    for (const CharRoot& r : row.roots) {
      if (r.lambda.imag() <= 0.0) continue;
      const int j = static_cast<int>(std::floor(r.lambda.imag() / two_pi)) + 1;
      const double dist = std::abs(r.lambda - complex_t(0.0, two_pi * j));
      auto it = row.pair_distance.find(j);
      if (it == row.pair_distance.end() || dist < it->second)
        row.pair_distance[j] = dist;
    }
    scan.rows.push_back(std::move(row));
  }

  scan.monotone = true;
  for (const auto& [j, d0] : scan.rows.front().pair_distance) {
    double prev = d0;
    for (std::size_t i = 1; i < scan.rows.size(); ++i) {
      const auto it = scan.rows[i].pair_distance.find(j);
      if (it == scan.rows[i].pair_distance.end()) {
        scan.monotone = false;
        break;
      }
      if (it->second > prev + 1e-6) scan.monotone = false;
      prev = it->second;
    }
  }
  return scan;
}

}  // namespace gogrow
