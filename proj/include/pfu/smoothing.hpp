#pragma once

#include "pfu/estimators.hpp"

#include <vector>

namespace pfu {

//! (35/32)(1-u^2)^3 on [-1, 1].
double triweight(double u);

struct PartialMoments
{
  double m0;
  double m1;
  double m2;
};

//! mu_j(s) = int_{-1}^{s} v^j k(v) dv for j = 0, 1, 2 (closed form).
PartialMoments kernel_partial_moments(double s);

//! int_{lo}^{hi} v^j k(v) dv for j in [0, 3]; lo, hi clamped to [-1, 1].
double kernel_moment(int j, double lo, double hi);

//! int_{lo}^{hi} v^j k(v)^2 dv for j in [0, 2]; lo, hi clamped to [-1, 1].
double kernel_square_moment(int j, double lo, double hi);

struct BoundaryCoeffs
{
  double phi;
  double psi;
};

//! Solution of the 2x2 moment system defining the boundary kernel.
BoundaryCoeffs boundary_coeffs(double s);
//! d/ds of boundary_coeffs(s).
BoundaryCoeffs boundary_coeffs_derivative(double s);

enum class KernelBranch
{
  left,
  interior,
  right
};

//! The kernel k_{B,t} at one location, written as (phi + slope*u) k(u) on
//! the clipped integration range [u_lo, u_hi] (u = (t - v)/h).
struct BoundaryKernel
{
  KernelBranch branch;
  double s;     // boundary distance in bandwidth units (unused for interior)
  double phi;
  double slope; // +psi on the left branch, -psi on the right
  double u_lo;
  double u_hi;
  bool overlap; // h > tau_G/2: both boundary regions contain t

  double operator()(double u) const;
};

//! Left branch wins when both boundary regions contain t.
BoundaryKernel boundary_kernel(double t, double h, double tau_g);

//! Piecewise-linear function, possibly discontinuous at its breakpoints.
//! On [x[i], x[i+1]) it equals value[i] + slope[i] (v - x[i]); outside
//! [x.front(), x.back()] the first/last piece is extended linearly.
struct PiecewiseLinear
{
  std::vector<double> x;
  std::vector<double> value;
  std::vector<double> slope;

  std::size_t pieces() const { return slope.size(); }
  double operator()(double v) const;
  //! value jump at interior breakpoint x[i], i in [1, pieces())
  double jump(std::size_t i) const;
};

//! The majorant itself (used as the CDF to smooth).
PiecewiseLinear as_function(const ConcaveMajorant& m);
//! The Grenander estimator as a piecewise-constant function.
PiecewiseLinear as_density(const ConcaveMajorant& m);
//! KME on [0, m.lower()) followed by the majorant on [m.lower(), m.upper()].
PiecewiseLinear smoothing_base(const StepFunction& kme, const ConcaveMajorant& m);

struct Smoothed
{
  double value;
  bool extended; // integration window left the function's domain
  bool overlap;  // boundary regions overlapped (h > tau_G / 2)
};

//! int_{tau_G-h}^{tau_G} (1/h) k_{B,tau_G}((tau_G-v)/h) fG(v) dv, evaluated
//! exactly. When the window reaches below the majorant's domain the
//! leftmost slope is held constant if `extend_left`, otherwise throws.
Smoothed smoothed_grenander_at_endpoint(const ConcaveMajorant& m,
                                        double h,
                                        double tau_g,
                                        bool extend_left = false);

//! Boundary-kernel smooth of a CDF over the clipped window
//! [(t-h0) v 0, (t+h0) ^ tau_G].
Smoothed smooth_cdf(const PiecewiseLinear& cdf, double h0, double t, double tau_g);
//! Exact t-derivative of smooth_cdf.
Smoothed smooth_cdf_density(const PiecewiseLinear& cdf,
                            double h0,
                            double t,
                            double tau_g);

double smooth_lcm_cdf(const ConcaveMajorant& m, double h0, double t, double tau_g);
double smooth_lcm_density(const ConcaveMajorant& m,
                          double h0,
                          double t,
                          double tau_g);

} // namespace pfu
