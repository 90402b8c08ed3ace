#include "pfu/asymptotics.hpp"

#include "pfu/data_model.hpp"
#include "pfu/parallel.hpp"
#include "pfu/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace pfu {

namespace detail {
// Defined in the generated default_table.cpp; empty when no table was
// available at build time.
extern const char* const kDefaultTableText;
} // namespace detail

namespace {

constexpr std::size_t kDenseGrid = 1000;

std::vector<double>
merged_levels(std::span<const double> requested)
{
  std::vector<double> lv;
  lv.reserve(kDenseGrid + 1 + requested.size());
  for (std::size_t k = 0; k <= kDenseGrid; ++k)
    lv.push_back(static_cast<double>(k) / static_cast<double>(kDenseGrid));
  for (double p : requested) {
    if (!(p >= 0.0 && p <= 1.0))
      throw InvalidArgument("quantile levels must lie in [0, 1]");
    lv.push_back(p);
  }
  std::sort(lv.begin(), lv.end());
  lv.erase(std::unique(lv.begin(),
                       lv.end(),
                       [](double a, double b) { return std::abs(a - b) < 1e-12; }),
           lv.end());
  return lv;
}

std::string
format_double(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

double
QuantileTable::quantile(double level) const
{
  if (levels.empty())
    throw InvalidArgument("empty quantile table");
  if (level <= levels.front())
    return values.front();
  if (level >= levels.back())
    return values.back();
  auto it = std::upper_bound(levels.begin(), levels.end(), level);
  const auto j = static_cast<std::size_t>(it - levels.begin());
  const double w = (level - levels[j - 1]) / (levels[j] - levels[j - 1]);
  return values[j - 1] + w * (values[j] - values[j - 1]);
}

double
QuantileTable::cdf(double x) const
{
  if (values.empty())
    throw InvalidArgument("empty quantile table");
  if (x < values.front())
    return 0.0;
  auto it = std::upper_bound(values.begin(), values.end(), x);
  if (it == values.end())
    return 1.0;
  const auto j = static_cast<std::size_t>(it - values.begin());
  const double w = (x - values[j - 1]) / (values[j] - values[j - 1]);
  return levels[j - 1] + w * (levels[j] - levels[j - 1]);
}

BrownianGrid
brownian_grid(double grid_step, double horizon)
{
  if (!(horizon > 1.0))
    throw InvalidArgument("horizon must exceed 1");
  if (!(grid_step > 0.0))
    throw InvalidArgument("grid step must be positive");
  if (1.0 / grid_step < 1e3 * (1.0 - 1e-9))
    throw InvalidArgument("grid step must be at most 1e-3");
  return { grid_step, 10.0 * grid_step, horizon };
}

std::vector<double>
simulate_dr_w_sample(std::size_t replications,
                     double grid_step,
                     double horizon,
                     std::uint64_t seed,
                     unsigned threads)
{
  if (replications < 1)
    throw InvalidArgument("replications must be positive");
  const auto grid = brownian_grid(grid_step, horizon);

  std::vector<double> x{ 0.0 };
  const double fine_end = std::min(5.0, grid.horizon);
  const auto n_fine =
    static_cast<std::size_t>(std::llround(fine_end / grid.fine_step));
  for (std::size_t k = 1; k <= n_fine; ++k)
    x.push_back(static_cast<double>(k) * grid.fine_step);
  x.back() = fine_end;
  if (grid.horizon > fine_end) {
    const auto n_coarse = static_cast<std::size_t>(
      std::ceil((grid.horizon - fine_end) / grid.coarse_step - 1e-9));
    for (std::size_t k = 1; k <= n_coarse; ++k)
      x.push_back(fine_end + static_cast<double>(k) * grid.coarse_step);
    x.back() = grid.horizon;
  }
  std::vector<double> sd(x.size(), 0.0);
  for (std::size_t k = 1; k < x.size(); ++k)
    sd[k] = std::sqrt(x[k] - x[k - 1]);
  const auto i_one = static_cast<std::size_t>(std::llround(1.0 / grid.fine_step));

  std::vector<double> out(replications);
  const unsigned workers = std::max(1u, threads);
  const std::size_t chunk = (replications + workers - 1) / workers;
  parallel_for(workers, workers, [&](std::size_t w) {
    std::vector<double> y(x.size());
    std::vector<std::size_t> hull;
    hull.reserve(x.size());
    const std::size_t end = std::min(replications, (w + 1) * chunk);
    for (std::size_t r = w * chunk; r < end; ++r) {
      auto rng = make_stream(seed, r);
      std::normal_distribution<double> z;
      y[0] = 0.0;
      for (std::size_t k = 1; k < x.size(); ++k)
        y[k] = y[k - 1] + sd[k] * z(rng);
      hull.clear();
      for (std::size_t k = 0; k < x.size(); ++k) {
        while (hull.size() >= 2) {
          const auto a = hull[hull.size() - 2];
          const auto b = hull.back();
          const double cross =
            (x[b] - x[a]) * (y[k] - y[a]) - (y[b] - y[a]) * (x[k] - x[a]);
          if (cross >= 0.0)
            hull.pop_back();
          else
            break;
        }
        hull.push_back(k);
      }
      auto it = std::upper_bound(hull.begin(), hull.end(), i_one);
      const auto a = *(it - 1);
      const auto b = *it;
      out[r] = (y[b] - y[a]) / (x[b] - x[a]);
    }
  });
  return out;
}

QuantileTable
quantile_table_from_sample(std::vector<double> draws,
                           std::span<const double> levels)
{
  if (draws.empty())
    throw InvalidArgument("no draws");
  std::sort(draws.begin(), draws.end());
  QuantileTable t;
  t.levels = merged_levels(levels);
  t.replications = draws.size();
  const double last = static_cast<double>(draws.size() - 1);
  for (double p : t.levels) {
    const double hpos = last * p;
    const auto lo = static_cast<std::size_t>(std::floor(hpos));
    const auto hi = std::min(lo + 1, draws.size() - 1);
    t.values.push_back(draws[lo] + (hpos - static_cast<double>(lo)) *
                                     (draws[hi] - draws[lo]));
  }
  return t;
}

QuantileTable
simulate_dr_w_quantiles(std::span<const double> levels,
                        std::size_t replications,
                        double grid_step,
                        double horizon,
                        std::uint64_t seed,
                        unsigned threads)
{
  auto t = quantile_table_from_sample(
    simulate_dr_w_sample(replications, grid_step, horizon, seed, threads),
    levels);
  t.grid_step = grid_step;
  t.horizon = horizon;
  t.seed = seed;
  return t;
}

std::string
to_cache_text(const QuantileTable& t)
{
  std::ostringstream os;
  os << "# pfu quantile table v1\n"
     << "# distribution: " << t.distribution << "\n"
     << "# replications: " << t.replications << "\n"
     << "# grid_step: " << format_double(t.grid_step) << "\n"
     << "# horizon: " << format_double(t.horizon) << "\n"
     << "# seed: " << t.seed << "\n"
     << "level,value\n";
  for (std::size_t i = 0; i < t.levels.size(); ++i)
    os << format_double(t.levels[i]) << "," << format_double(t.values[i])
       << "\n";
  return os.str();
}

QuantileTable
parse_cache_text(const std::string& text)
{
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# pfu quantile table v1", 0) != 0)
    throw InvalidArgument("not a pfu quantile table (missing version line)");
  std::map<std::string, std::string> meta;
  QuantileTable t;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    if (line[0] == '#') {
      auto colon = line.find(':');
      if (colon != std::string::npos)
        meta[line.substr(2, colon - 2)] = line.substr(colon + 2);
      continue;
    }
    if (!header_seen) {
      if (line != "level,value")
        throw InvalidArgument("quantile table: expected 'level,value' header");
      header_seen = true;
      continue;
    }
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw InvalidArgument("quantile table: malformed row '" + line + "'");
    t.levels.push_back(std::stod(line.substr(0, comma)));
    t.values.push_back(std::stod(line.substr(comma + 1)));
  }
  if (t.levels.size() < 2)
    throw InvalidArgument("quantile table has fewer than two rows");
  for (std::size_t i = 1; i < t.levels.size(); ++i)
    if (!(t.levels[i] > t.levels[i - 1]) || t.values[i] < t.values[i - 1])
      throw InvalidArgument("quantile table is not monotone");
  auto get = [&](const char* k) -> std::string {
    auto it = meta.find(k);
    return it == meta.end() ? std::string("0") : it->second;
  };
  if (meta.count("distribution"))
    t.distribution = meta["distribution"];
  t.replications = std::stoull(get("replications"));
  t.grid_step = std::stod(get("grid_step"));
  t.horizon = std::stod(get("horizon"));
  t.seed = std::stoull(get("seed"));
  return t;
}

void
write_cache(const QuantileTable& table, const std::string& path)
{
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw IoError("cannot write '" + path + "'");
  f << to_cache_text(table);
  if (!f)
    throw IoError("failed writing '" + path + "'");
}

QuantileTable
read_cache(const std::string& path)
{
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_cache_text(ss.str());
}

const QuantileTable&
default_dr_w_table()
{
  static const QuantileTable table = [] {
    const std::string text = detail::kDefaultTableText;
    if (text.empty())
      throw DegenerateError(
        "library was built without a default quantile table; generate one "
        "with `pfu quantiles` and pass it explicitly");
    return parse_cache_text(text);
  }();
  return table;
}

double
plug_in_A1(double f_at_tau_g, double censoring_mass, double c)
{
  if (!(f_at_tau_g > 0.0))
    throw DegenerateError("density plug-in must be positive");
  if (!(censoring_mass >= 0.0 && censoring_mass <= 1.0))
    throw InvalidArgument("censoring mass must lie in [0, 1]");
  if (!(c > 0.0))
    throw InvalidArgument("c must be positive");
  return std::sqrt(c * censoring_mass / f_at_tau_g);
}

AsymptoticMoments
sg_asymptotic_moments(double f_at_tau_g,
                      double f2_at_tau_g,
                      double censoring_mass,
                      double c_limit)
{
  if (!(censoring_mass > 0.0 && censoring_mass <= 1.0))
    throw InvalidArgument("censoring mass must lie in (0, 1]");
  if (!(c_limit > 0.0))
    throw InvalidArgument("c must be positive");
  // k_{B,tau_G}(v) = phi(0) k(v) - psi(0) v k(v) on [0, 1]
  const auto bc = boundary_coeffs(0.0);
  const double second = bc.phi * kernel_moment(2, 0.0, 1.0) -
                        bc.psi * kernel_moment(3, 0.0, 1.0);
  const double square = bc.phi * bc.phi * kernel_square_moment(0, 0.0, 1.0) -
                        2.0 * bc.phi * bc.psi * kernel_square_moment(1, 0.0, 1.0) +
                        bc.psi * bc.psi * kernel_square_moment(2, 0.0, 1.0);
  return { 0.5 * c_limit * c_limit * f2_at_tau_g * second,
           f_at_tau_g / (c_limit * censoring_mass) * square };
}

} // namespace pfu
