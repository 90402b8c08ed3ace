#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pfu {

//! Empirical quantiles of a simulated limit distribution. Besides the
//! requested levels the table always carries the grid 0, 0.001, ..., 1
//! (levels 0 and 1 hold the sample minimum and maximum), which is what
//! quantile() and cdf() interpolate on.
struct QuantileTable
{
  std::string distribution = "D_R[W(t)](1)";
  std::vector<double> levels;
  std::vector<double> values;
  std::size_t replications = 0;
  double grid_step = 0.0;
  double horizon = 0.0;
  std::uint64_t seed = 0;

  //! Linear interpolation in the level grid.
  double quantile(double level) const;
  //! Inverse of quantile(); 0 below the minimum, 1 above the maximum.
  double cdf(double x) const;
};

struct BrownianGrid
{
  double fine_step = 1e-3;   // on [0, min(5, horizon)]
  double coarse_step = 1e-2; // on [5, horizon]
  double horizon = 50.0;
};

//! Grid for a given fine step: the coarse step is ten times the fine one.
BrownianGrid brownian_grid(double grid_step, double horizon);

//! Raw draws of the right derivative at t = 1 of the least concave majorant
//! of a standard Brownian motion on [0, horizon]. Replication r uses stream
//! (seed, r), so the output does not depend on `threads`.
std::vector<double> simulate_dr_w_sample(std::size_t replications,
                                         double grid_step,
                                         double horizon,
                                         std::uint64_t seed,
                                         unsigned threads = 1);

QuantileTable simulate_dr_w_quantiles(std::span<const double> levels,
                                      std::size_t replications,
                                      double grid_step,
                                      double horizon,
                                      std::uint64_t seed,
                                      unsigned threads = 1);

//! Builds a table from raw draws (type-7 interpolated empirical quantiles).
QuantileTable quantile_table_from_sample(std::vector<double> draws,
                                         std::span<const double> levels);

std::string to_cache_text(const QuantileTable& table);
QuantileTable parse_cache_text(const std::string& text);
void write_cache(const QuantileTable& table, const std::string& path);
QuantileTable read_cache(const std::string& path);

//! The table shipped with the library (10^5 replications, default grid).
const QuantileTable& default_dr_w_table();

//! sqrt(c * censoring_mass / f).
double plug_in_A1(double f_at_tau_g, double censoring_mass, double c);

struct AsymptoticMoments
{
  double mu;
  double sigma2;
};

//! Limit mean and variance of n^{2/5}(fSG(tau_G) - f(tau_G)), using the
//! boundary kernel k_{B,tau_G} (boundary distance s = 0).
AsymptoticMoments sg_asymptotic_moments(double f_at_tau_g,
                                        double f2_at_tau_g,
                                        double censoring_mass,
                                        double c_limit);

} // namespace pfu
