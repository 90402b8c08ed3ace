#include "pfu/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace pfu {

double
StepFunction::operator()(double t) const
{
  auto it = std::upper_bound(jump_points.begin(), jump_points.end(), t);
  if (it == jump_points.begin())
    return value_at_zero;
  return values[static_cast<std::size_t>(it - jump_points.begin()) - 1];
}

double
StepFunction::left_limit(double t) const
{
  auto it = std::lower_bound(jump_points.begin(), jump_points.end(), t);
  if (it == jump_points.begin())
    return value_at_zero;
  return values[static_cast<std::size_t>(it - jump_points.begin()) - 1];
}

double
ConcaveMajorant::operator()(double t) const
{
  if (t < knots.front() || t > knots.back())
    throw InvalidArgument("majorant evaluated outside its domain");
  auto it = std::upper_bound(knots.begin(), knots.end(), t);
  if (it == knots.end())
    return knot_values.back();
  auto i = static_cast<std::size_t>(it - knots.begin()) - 1;
  return knot_values[i] + slope(i) * (t - knots[i]);
}

namespace {

// Walk the distinct times once; `numerator(d, c)` picks which count is the
// "event" and `risk(at_risk, d)` applies the tie convention.
template<class Num, class Risk>
StepFunction
product_limit(const SurvivalSample& sample, Num numerator, Risk risk)
{
  if (sample.empty())
    throw InvalidArgument("product-limit estimator needs a nonempty sample");
  StepFunction out;
  auto obs = sample.observations();
  std::size_t at_risk = obs.size();
  double surv = 1.0;
  std::size_t i = 0;
  while (i < obs.size()) {
    const double t = obs[i].time;
    std::size_t d = 0, c = 0;
    while (i < obs.size() && obs[i].time == t) {
      (obs[i].status == 1 ? d : c) += 1;
      ++i;
    }
    const std::size_t k = numerator(d, c);
    const std::size_t r = risk(at_risk, d);
    if (k > 0 && r > 0) {
      surv *= 1.0 - static_cast<double>(k) / static_cast<double>(r);
      out.jump_points.push_back(t);
      out.values.push_back(1.0 - surv);
    }
    at_risk -= d + c;
  }
  return out;
}

} // namespace

StepFunction
kaplan_meier(const SurvivalSample& sample)
{
  return product_limit(
    sample,
    [](std::size_t d, std::size_t) { return d; },
    [](std::size_t r, std::size_t) { return r; });
}

StepFunction
reversed_km(const SurvivalSample& sample)
{
  return product_limit(
    sample,
    [](std::size_t, std::size_t c) { return c; },
    [](std::size_t r, std::size_t d) { return r - d; });
}

ConcaveMajorant
upper_hull(std::span<const Point> points)
{
  if (points.size() < 2)
    throw InvalidArgument("upper hull needs at least two points");
  std::vector<Point> hull;
  hull.reserve(points.size());
  for (const auto& p : points) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      // b lies on or below segment a-p
      const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
      if (cross >= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(p);
  }
  ConcaveMajorant m;
  m.knots.reserve(hull.size());
  m.knot_values.reserve(hull.size());
  for (const auto& p : hull) {
    m.knots.push_back(p.x);
    m.knot_values.push_back(p.y);
  }
  return m;
}

ConcaveMajorant
lcm(const StepFunction& step, double lower, double upper)
{
  if (!(lower < upper))
    throw InvalidArgument("lcm: lower must be below upper");
  if (lower < 0.0)
    throw InvalidArgument("lcm: step function is defined on [0, inf) only");
  std::vector<Point> pts;
  pts.reserve(step.jump_points.size() + 2);
  pts.push_back({ lower, step(lower) });
  auto first = std::upper_bound(
    step.jump_points.begin(), step.jump_points.end(), lower);
  for (auto it = first; it != step.jump_points.end() && *it <= upper; ++it) {
    auto i = static_cast<std::size_t>(it - step.jump_points.begin());
    pts.push_back({ *it, step.values[i] });
  }
  if (pts.back().x < upper)
    pts.push_back({ upper, step(upper) });
  return upper_hull(pts);
}

double
grenander_density(const ConcaveMajorant& m, double t)
{
  if (!(t >= m.lower() && t <= m.upper()))
    throw InvalidArgument("grenander_density: t outside the majorant domain");
  if (t == m.lower())
    return m.slope(0);
  auto it = std::lower_bound(m.knots.begin(), m.knots.end(), t);
  return m.slope(static_cast<std::size_t>(it - m.knots.begin()) - 1);
}

OffsetEstimate
grenander_at_offset(const SurvivalSample& sample,
                    const StepFunction& kme,
                    const ResolvedConfig& cfg)
{
  const double n = static_cast<double>(sample.size());
  const double point = cfg.tau_g - cfg.c * std::pow(n, -cfg.a);
  if (!(point > cfg.tail_start))
    throw InvalidArgument(
      "offset point tau_G - c n^{-a} falls below tail_start; the sample is "
      "too small for the configured c and a");
  auto m = lcm(kme, cfg.tail_start, cfg.tau_g);
  return { grenander_density(m, point), point, std::move(m) };
}

OffsetEstimate
grenander_at_offset(const SurvivalSample& sample, const ResolvedConfig& cfg)
{
  return grenander_at_offset(sample, kaplan_meier(sample), cfg);
}

} // namespace pfu
