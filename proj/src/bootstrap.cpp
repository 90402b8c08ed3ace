#include "pfu/bootstrap.hpp"

#include "pfu/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pfu {

SmoothedCdfSampler::SmoothedCdfSampler(const std::function<double(double)>& cdf,
                                       double tau_g,
                                       std::size_t grid_points)
{
  if (!(tau_g > 0.0))
    throw InvalidArgument("tau_G must be positive");
  if (grid_points < 2)
    throw InvalidArgument("sampler grid needs at least two points");
  t_.resize(grid_points);
  f_.resize(grid_points);
  double running = 0.0;
  for (std::size_t k = 0; k < grid_points; ++k) {
    t_[k] = tau_g * static_cast<double>(k) / static_cast<double>(grid_points - 1);
    const double raw = cdf(t_[k]);
    running = std::max(running, raw);
    adjustment_ = std::max(adjustment_, running - raw);
    f_[k] = running;
  }
  t_.back() = tau_g;
  sup_ = f_.back();
}

double
SmoothedCdfSampler::operator()(double u) const
{
  if (u > sup_)
    return std::numeric_limits<double>::infinity();
  auto it = std::lower_bound(f_.begin(), f_.end(), u);
  const auto j = static_cast<std::size_t>(it - f_.begin());
  if (j == 0)
    return t_[0];
  const double w = (u - f_[j - 1]) / (f_[j] - f_[j - 1]);
  return t_[j - 1] + w * (t_[j] - t_[j - 1]);
}

double
sample_event_time(const SmoothedCdfSampler& cdf, double u)
{
  return cdf(u);
}

double
sample_censoring_time(const StepFunction& g, double u, double max_time)
{
  if (g.jump_points.empty() && g.value_at_zero <= 0.0)
    throw DegenerateError(
      "censoring distribution estimate is identically 0 (no censored "
      "observations); the smoothed bootstrap is undefined for fully "
      "uncensored data");
  if (u <= g.value_at_zero)
    return 0.0;
  auto it = std::lower_bound(g.values.begin(), g.values.end(), u);
  if (it == g.values.end())
    return max_time;
  return g.jump_points[static_cast<std::size_t>(it - g.values.begin())];
}

double
lower_quantile(std::vector<double> values, double alpha)
{
  if (values.empty())
    throw InvalidArgument("lower_quantile: no values");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw InvalidArgument("lower_quantile: alpha must lie in (0, 1)");
  const double b = static_cast<double>(values.size());
  auto k = static_cast<std::size_t>(std::ceil(alpha * b - 1e-9));
  k = std::clamp<std::size_t>(k, 1, values.size());
  std::nth_element(values.begin(), values.begin() + static_cast<long>(k - 1), values.end());
  return values[k - 1];
}

Smoothed
sg_estimate(const SurvivalSample& sample, double tau_g, double h, double tail_start)
{
  const auto m = lcm(kaplan_meier(sample), tail_start, tau_g);
  return smoothed_grenander_at_endpoint(m, h, tau_g, true);
}

double
SmoothedTarget::cdf(double t) const
{
  return smooth_cdf(base, h0, t, tau_g).value;
}

double
SmoothedTarget::density_at_endpoint() const
{
  return smooth_cdf_density(base, h0, tau_g, tau_g).value;
}

SmoothedTarget
smoothed_target(const SurvivalSample& sample, const ResolvedConfig& cfg)
{
  const auto kme = kaplan_meier(sample);
  const auto m = lcm(kme, cfg.tail_start, cfg.tau_g);
  return { smoothing_base(kme, m), cfg.tau_g, cfg.h0 };
}

BootstrapOutput
smoothed_bootstrap(const SurvivalSample& sample, const ResolvedConfig& cfg)
{
  if (cfg.bootstrap_reps < 1)
    throw InvalidArgument("bootstrap_reps must be at least 1");
  if (sample.event_count() == 0)
    throw DegenerateError("smoothed bootstrap needs at least one event");
  if (sample.censored_count() == 0)
    throw DegenerateError(
      "no censored observations: the smoothed bootstrap is undefined for "
      "fully uncensored data");

  const auto target = smoothed_target(sample, cfg);
  const SmoothedCdfSampler events(
    [&](double t) { return target.cdf(t); }, cfg.tau_g);
  const auto g = reversed_km(sample);
  const double y_max = sample.max_time();

  BootstrapOutput out;
  out.reps = cfg.bootstrap_reps;
  out.alpha = cfg.alpha;
  out.h = cfg.h;
  out.h0 = cfg.h0;
  out.seed = cfg.seed;
  out.center = target.density_at_endpoint();
  out.cdf_supremum = events.supremum();
  out.monotone_adjustment = events.adjustment();

  const std::size_t B = cfg.bootstrap_reps;
  const std::size_t cap = 10 * B;
  const std::size_t n = sample.size();
  std::vector<double> est(B, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::size_t> attempts(B, 0);

  parallel_for(B, cfg.threads, [&](std::size_t b) {
    std::vector<Observation> obs(n);
    for (std::size_t attempt = 0; attempt < cap; ++attempt) {
      attempts[b] = attempt + 1;
      auto rng = make_stream(cfg.seed, b, attempt);
      for (auto& o : obs) {
        const double t = sample_event_time(events, open_uniform(rng));
        const double c = sample_censoring_time(g, open_uniform(rng), y_max);
        o = t <= c ? Observation{ t, 1 } : Observation{ c, 0 };
      }
      try {
        est[b] = sg_estimate(SurvivalSample::from_trusted(obs), cfg.tau_g,
                             cfg.h, cfg.tail_start)
                   .value;
        return;
      } catch (const InvalidArgument&) {
      } catch (const DegenerateError&) {
      }
    }
  });

  std::size_t total = 0;
  for (std::size_t b = 0; b < B; ++b) {
    total += attempts[b];
    if (std::isnan(est[b]))
      throw DegenerateError("bootstrap iteration " + std::to_string(b) +
                            " failed on every attempt");
  }
  if (total > cap)
    throw DegenerateError("bootstrap exceeded " + std::to_string(cap) +
                          " attempts");
  out.retries = total - B;
  out.diffs.resize(B);
  for (std::size_t b = 0; b < B; ++b)
    out.diffs[b] = est[b] - out.center;
  out.critical_quantile = lower_quantile(out.diffs, cfg.alpha);
  return out;
}

} // namespace pfu
