#pragma once

#include "pfu/data_model.hpp"

#include <span>
#include <vector>

namespace pfu {

//! Right-continuous piecewise-constant function on [0, inf).
//! values[i] holds on [jump_points[i], jump_points[i+1]).
struct StepFunction
{
  std::vector<double> jump_points;
  std::vector<double> values;
  double value_at_zero = 0.0;

  double operator()(double t) const;
  //! limit from the left, F(t-)
  double left_limit(double t) const;
  double final_value() const
  {
    return values.empty() ? value_at_zero : values.back();
  }
};

struct Point
{
  double x;
  double y;
};

//! Piecewise-linear concave function given by its knots.
struct ConcaveMajorant
{
  std::vector<double> knots;
  std::vector<double> knot_values;

  double lower() const { return knots.front(); }
  double upper() const { return knots.back(); }
  std::size_t segments() const { return knots.size() - 1; }
  double slope(std::size_t segment) const
  {
    return (knot_values[segment + 1] - knot_values[segment]) /
           (knots[segment + 1] - knots[segment]);
  }
  double operator()(double t) const;
};

//! Product-limit estimator of the (possibly defective) event-time CDF.
//! Events at a tied time are processed before censorings.
StepFunction kaplan_meier(const SurvivalSample& sample);

//! Product-limit estimator of the censoring CDF. Event-status observations at
//! a tied time leave the risk set before the censorings there.
StepFunction reversed_km(const SurvivalSample& sample);

//! Upper concave hull of points sorted by strictly increasing x. Collinear
//! interior points are dropped.
ConcaveMajorant upper_hull(std::span<const Point> points);

//! Least concave majorant of `step` restricted to [lower, upper].
ConcaveMajorant lcm(const StepFunction& step, double lower, double upper);

//! Left derivative of the majorant at t (right derivative at the first knot).
double grenander_density(const ConcaveMajorant& lcm, double t);

struct OffsetEstimate
{
  double value;
  double point; // tau_G - c n^{-a}
  ConcaveMajorant lcm;
};

//! Grenander estimator at tau_G - c n^{-a}, majorant taken on
//! [tail_start, tau_G].
OffsetEstimate grenander_at_offset(const SurvivalSample& sample,
                                   const ResolvedConfig& cfg);
OffsetEstimate grenander_at_offset(const SurvivalSample& sample,
                                   const StepFunction& kme,
                                   const ResolvedConfig& cfg);

} // namespace pfu
