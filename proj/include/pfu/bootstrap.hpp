#pragma once

#include "pfu/data_model.hpp"
#include "pfu/estimators.hpp"
#include "pfu/smoothing.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace pfu {

//! Generalized inverse of a smoothed CDF tabulated on a dense grid over
//! [0, tau_G]. The tabulated values are monotonized (running maximum,
//! floored at 0) before inversion.
class SmoothedCdfSampler
{
public:
  SmoothedCdfSampler(const std::function<double(double)>& cdf,
                     double tau_g,
                     std::size_t grid_points = 2049);

  double supremum() const { return sup_; }
  //! Largest change made by monotonization.
  double adjustment() const { return adjustment_; }
  //! inf{t : F(t) >= u}, linear between grid points; +inf when u > sup F.
  double operator()(double u) const;

private:
  std::vector<double> t_;
  std::vector<double> f_;
  double sup_ = 0.0;
  double adjustment_ = 0.0;
};

double sample_event_time(const SmoothedCdfSampler& cdf, double u);

//! Generalized inverse of a step CDF. The residual mass of a defective CDF
//! is placed at `max_time`. Throws DegenerateError when the CDF never jumps.
double sample_censoring_time(const StepFunction& g, double u, double max_time);

//! ceil(alpha * B)-th order statistic.
double lower_quantile(std::vector<double> values, double alpha);

//! Boundary-corrected smoothed Grenander estimate at tau_G: KME, majorant on
//! [tail_start, tau_G], kernel smooth with bandwidth h.
Smoothed sg_estimate(const SurvivalSample& sample,
                     double tau_g,
                     double h,
                     double tail_start);

//! The oversmoothed CDF estimate the bootstrap samples from, and its
//! derivative at tau_G.
struct SmoothedTarget
{
  PiecewiseLinear base;
  double tau_g;
  double h0;

  double cdf(double t) const;
  double density_at_endpoint() const;
};

SmoothedTarget smoothed_target(const SurvivalSample& sample,
                               const ResolvedConfig& cfg);

struct BootstrapOutput
{
  double critical_quantile = 0.0;
  std::vector<double> diffs;
  double center = 0.0;
  std::size_t reps = 0;
  double alpha = 0.0;
  double h = 0.0;
  double h0 = 0.0;
  std::uint64_t seed = 0;
  std::size_t retries = 0;
  double cdf_supremum = 0.0;
  double monotone_adjustment = 0.0;
};

//! Iteration b draws from stream (seed, b, attempt); failed iterations are
//! redrawn, with at most 10 B attempts in total.
BootstrapOutput smoothed_bootstrap(const SurvivalSample& sample,
                                   const ResolvedConfig& cfg);

} // namespace pfu
