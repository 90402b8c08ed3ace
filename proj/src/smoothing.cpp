#include "pfu/smoothing.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace pfu {

namespace {

constexpr double kNorm = 35.0 / 32.0;
// (1 - v^2)^3 = 1 - 3v^2 + 3v^4 - v^6
constexpr std::array<double, 7> kPoly = { 1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0 };
// (1 - v^2)^6
constexpr std::array<double, 13> kSquarePoly = { 1.0,   0.0, -6.0, 0.0, 15.0,
                                                 0.0,   -20.0, 0.0, 15.0, 0.0,
                                                 -6.0,  0.0, 1.0 };

template<std::size_t N>
double
antiderivative(const std::array<double, N>& poly, int j, double v)
{
  // sum_i c_i v^{i+j+1} / (i+j+1), Horner in v
  double acc = 0.0;
  for (std::size_t i = N; i-- > 0;)
    acc = acc * v + poly[i] / static_cast<double>(i + j + 1);
  return acc * std::pow(v, j + 1);
}

double
clamp_unit(double v)
{
  return std::clamp(v, -1.0, 1.0);
}

// int_{u_lo}^{u_hi} (phi + slope u) k(u) g(t - h u) du, plus the analogous
// integral against g' when `derivative` is set (without jump/boundary terms).
struct PieceSums
{
  double against_g = 0.0;
  double against_dg = 0.0;
  bool extended = false;
};

PieceSums
integrate_pieces(const PiecewiseLinear& g,
                 double t,
                 double h,
                 double phi,
                 double slope,
                 double u_lo,
                 double u_hi)
{
  PieceSums out;
  if (!(u_hi > u_lo))
    return out;
  const double v_lo = t - h * u_hi;
  const double v_hi = t - h * u_lo;
  const double tol = 1e-12 * std::max(1.0, std::abs(g.x.back()));
  if (v_lo < g.x.front() - tol || v_hi > g.x.back() + tol)
    out.extended = true;

  const std::size_t m = g.pieces();
  // first piece whose right end exceeds v_lo
  std::size_t i = static_cast<std::size_t>(
    std::upper_bound(g.x.begin() + 1, g.x.end() - 1, v_lo) - (g.x.begin() + 1));
  for (; i < m; ++i) {
    const double a = (i == 0) ? v_lo : std::max(v_lo, g.x[i]);
    const double b = (i + 1 == m) ? v_hi : std::min(v_hi, g.x[i + 1]);
    if (b > a) {
      const double ua = (t - b) / h;
      const double ub = (t - a) / h;
      const double m0 = kernel_moment(0, ua, ub);
      const double m1 = kernel_moment(1, ua, ub);
      const double m2 = kernel_moment(2, ua, ub);
      const double A = g.value[i] + g.slope[i] * (t - g.x[i]);
      const double B = -g.slope[i] * h;
      out.against_g += phi * A * m0 + (phi * B + slope * A) * m1 + slope * B * m2;
      out.against_dg += g.slope[i] * (phi * m0 + slope * m1);
    }
    if (i + 1 < m && g.x[i + 1] >= v_hi)
      break;
  }
  return out;
}

} // namespace

double
triweight(double u)
{
  if (u <= -1.0 || u >= 1.0)
    return 0.0;
  const double w = 1.0 - u * u;
  return kNorm * w * w * w;
}

double
kernel_moment(int j, double lo, double hi)
{
  if (j < 0 || j > 3)
    throw InvalidArgument("kernel_moment: j must lie in [0, 3]");
  lo = clamp_unit(lo);
  hi = clamp_unit(hi);
  return kNorm * (antiderivative(kPoly, j, hi) - antiderivative(kPoly, j, lo));
}

double
kernel_square_moment(int j, double lo, double hi)
{
  if (j < 0 || j > 2)
    throw InvalidArgument("kernel_square_moment: j must lie in [0, 2]");
  lo = clamp_unit(lo);
  hi = clamp_unit(hi);
  return kNorm * kNorm *
         (antiderivative(kSquarePoly, j, hi) - antiderivative(kSquarePoly, j, lo));
}

PartialMoments
kernel_partial_moments(double s)
{
  if (!(s >= -1.0 && s <= 1.0))
    throw InvalidArgument("kernel_partial_moments: s must lie in [-1, 1]");
  return { kernel_moment(0, -1.0, s),
           kernel_moment(1, -1.0, s),
           kernel_moment(2, -1.0, s) };
}

BoundaryCoeffs
boundary_coeffs(double s)
{
  if (!(s > -1.0 && s <= 1.0))
    throw InvalidArgument("boundary_coeffs: s must lie in (-1, 1]");
  const auto mu = kernel_partial_moments(s);
  const double det = mu.m0 * mu.m2 - mu.m1 * mu.m1;
  if (!(det > 0.0))
    throw InvalidArgument("boundary_coeffs: singular moment system");
  return { mu.m2 / det, -mu.m1 / det };
}

BoundaryCoeffs
boundary_coeffs_derivative(double s)
{
  if (!(s > -1.0 && s <= 1.0))
    throw InvalidArgument("boundary_coeffs: s must lie in (-1, 1]");
  const auto mu = kernel_partial_moments(s);
  const double k = triweight(s);
  const double d0 = k, d1 = s * k, d2 = s * s * k;
  const double det = mu.m0 * mu.m2 - mu.m1 * mu.m1;
  const double ddet = d0 * mu.m2 + mu.m0 * d2 - 2.0 * mu.m1 * d1;
  const double det2 = det * det;
  return { (d2 * det - mu.m2 * ddet) / det2, -(d1 * det - mu.m1 * ddet) / det2 };
}

double
BoundaryKernel::operator()(double u) const
{
  return (phi + slope * u) * triweight(u);
}

BoundaryKernel
boundary_kernel(double t, double h, double tau_g)
{
  if (!(h > 0.0))
    throw InvalidArgument("bandwidth must be positive");
  BoundaryKernel bk{};
  bk.overlap = h > 0.5 * tau_g;
  bk.u_lo = std::max(-1.0, (t - tau_g) / h);
  bk.u_hi = std::min(1.0, t / h);
  if (t <= h) {
    bk.branch = KernelBranch::left;
    bk.s = t / h;
    const auto c = boundary_coeffs(bk.s);
    bk.phi = c.phi;
    bk.slope = c.psi;
  } else if (t >= tau_g - h) {
    bk.branch = KernelBranch::right;
    bk.s = (tau_g - t) / h;
    const auto c = boundary_coeffs(bk.s);
    bk.phi = c.phi;
    bk.slope = -c.psi;
  } else {
    bk.branch = KernelBranch::interior;
    bk.s = 1.0;
    bk.phi = 1.0;
    bk.slope = 0.0;
  }
  return bk;
}

double
PiecewiseLinear::operator()(double v) const
{
  std::size_t i = 0;
  if (v >= x.front()) {
    auto it = std::upper_bound(x.begin(), x.end() - 1, v);
    i = std::min(static_cast<std::size_t>(it - x.begin()) - 1, pieces() - 1);
  }
  return value[i] + slope[i] * (v - x[i]);
}

double
PiecewiseLinear::jump(std::size_t i) const
{
  return value[i] - (value[i - 1] + slope[i - 1] * (x[i] - x[i - 1]));
}

PiecewiseLinear
as_function(const ConcaveMajorant& m)
{
  PiecewiseLinear g;
  g.x = m.knots;
  for (std::size_t i = 0; i < m.segments(); ++i) {
    g.value.push_back(m.knot_values[i]);
    g.slope.push_back(m.slope(i));
  }
  return g;
}

PiecewiseLinear
as_density(const ConcaveMajorant& m)
{
  PiecewiseLinear g;
  g.x = m.knots;
  for (std::size_t i = 0; i < m.segments(); ++i) {
    g.value.push_back(m.slope(i));
    g.slope.push_back(0.0);
  }
  return g;
}

PiecewiseLinear
smoothing_base(const StepFunction& kme, const ConcaveMajorant& m)
{
  if (m.lower() <= 0.0)
    return as_function(m);
  PiecewiseLinear g;
  g.x.push_back(0.0);
  g.value.push_back(kme.value_at_zero);
  g.slope.push_back(0.0);
  for (std::size_t i = 0; i < kme.jump_points.size(); ++i) {
    const double t = kme.jump_points[i];
    if (t >= m.lower())
      break;
    if (t <= 0.0) {
      g.value.back() = kme.values[i];
      continue;
    }
    g.x.push_back(t);
    g.value.push_back(kme.values[i]);
    g.slope.push_back(0.0);
  }
  for (std::size_t i = 0; i < m.segments(); ++i) {
    g.x.push_back(m.knots[i]);
    g.value.push_back(m.knot_values[i]);
    g.slope.push_back(m.slope(i));
  }
  g.x.push_back(m.upper());
  return g;
}

Smoothed
smoothed_grenander_at_endpoint(const ConcaveMajorant& m,
                               double h,
                               double tau_g,
                               bool extend_left)
{
  if (!(h > 0.0))
    throw InvalidArgument("bandwidth must be positive");
  if (tau_g > m.upper() * (1.0 + 1e-12) || tau_g < m.lower())
    throw InvalidArgument("tau_G outside the majorant domain");
  const bool below = tau_g - h < m.lower();
  if (below && !extend_left)
    throw InvalidArgument(
      "smoothing window extends below the majorant domain");
  const auto c = boundary_coeffs(0.0);
  const auto sums =
    integrate_pieces(as_density(m), tau_g, h, c.phi, -c.psi, 0.0, 1.0);
  return { sums.against_g, below, h > 0.5 * tau_g };
}

Smoothed
smooth_cdf(const PiecewiseLinear& cdf, double h0, double t, double tau_g)
{
  if (!(t >= 0.0 && t <= tau_g))
    throw InvalidArgument("smooth_cdf: t must lie in [0, tau_G]");
  const auto bk = boundary_kernel(t, h0, tau_g);
  const auto sums =
    integrate_pieces(cdf, t, h0, bk.phi, bk.slope, bk.u_lo, bk.u_hi);
  return { sums.against_g, sums.extended, bk.overlap };
}

Smoothed
smooth_cdf_density(const PiecewiseLinear& cdf, double h0, double t, double tau_g)
{
  if (!(t >= 0.0 && t <= tau_g))
    throw InvalidArgument("smooth_cdf_density: t must lie in [0, tau_G]");
  const auto bk = boundary_kernel(t, h0, tau_g);

  // d/dt of int_{u_lo(t)}^{u_hi(t)} K_t(u) g(t - h0 u) du
  const auto base =
    integrate_pieces(cdf, t, h0, bk.phi, bk.slope, bk.u_lo, bk.u_hi);
  double d = base.against_dg;

  if (bk.branch != KernelBranch::interior) {
    const auto dc = boundary_coeffs_derivative(bk.s);
    // ds/dt = +1/h0 on the left, -1/h0 on the right; the u-coefficient
    // carries the branch sign as well.
    const double ds = (bk.branch == KernelBranch::left ? 1.0 : -1.0) / h0;
    const double dphi = dc.phi * ds;
    const double dslope =
      (bk.branch == KernelBranch::left ? dc.psi : -dc.psi) * ds;
    d += integrate_pieces(cdf, t, h0, dphi, dslope, bk.u_lo, bk.u_hi).against_g;
  }

  // jumps of g inside the window
  for (std::size_t i = 1; i < cdf.pieces(); ++i) {
    const double u = (t - cdf.x[i]) / h0;
    if (u > bk.u_lo && u < bk.u_hi) {
      const double j = cdf.jump(i);
      if (j != 0.0)
        d += j * bk(u) / h0;
    }
  }

  // moving integration limits
  if (t / h0 < 1.0)
    d += bk(bk.u_hi) * cdf(t - h0 * bk.u_hi) / h0;
  if ((t - tau_g) / h0 > -1.0)
    d -= bk(bk.u_lo) * cdf(t - h0 * bk.u_lo) / h0;

  return { d, base.extended, bk.overlap };
}

double
smooth_lcm_cdf(const ConcaveMajorant& m, double h0, double t, double tau_g)
{
  return smooth_cdf(as_function(m), h0, t, tau_g).value;
}

double
smooth_lcm_density(const ConcaveMajorant& m, double h0, double t, double tau_g)
{
  return smooth_cdf_density(as_function(m), h0, t, tau_g).value;
}

} // namespace pfu
