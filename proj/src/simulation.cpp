#include "pfu/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace pfu {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double
normal_cdf(double z)
{
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

void
check_level(double level)
{
  if (!(level > 0.0 && level < 1.0))
    throw InvalidArgument("quantile level must lie in (0, 1)");
}

int
label_index(const std::string& label)
{
  if (label.size() < 2 || label[0] != 'q')
    return 0;
  for (std::size_t i = 1; i < label.size(); ++i)
    if (label[i] < '0' || label[i] > '9')
      return 0;
  return std::stoi(label.substr(1));
}

bool
has_extra_grid(const SettingSpec& spec)
{
  return spec.id == 4 || spec.id == 5;
}

std::string
fmt(double v)
{
  return format_number(v);
}

} // namespace

double
UncuredSpec::cdf(double t) const
{
  if (t <= 0.0)
    return 0.0;
  switch (kind) {
    case Kind::exponential:
      return -std::expm1(-rate * t);
    case Kind::weibull:
      return -std::expm1(-std::pow(t / scale, shape));
    case Kind::truncated_exponential:
      if (t >= endpoint)
        return 1.0;
      return std::expm1(-rate * t) / std::expm1(-rate * endpoint);
    case Kind::lognormal_mixture: {
      double F = 0.0;
      for (std::size_t i = 0; i < weights.size(); ++i)
        F += weights[i] * normal_cdf((std::log(t) - mu[i]) / sigma[i]);
      return F;
    }
  }
  return 0.0;
}

double
UncuredSpec::quantile(double level) const
{
  check_level(level);
  switch (kind) {
    case Kind::exponential:
      return -std::log1p(-level) / rate;
    case Kind::weibull:
      return scale * std::pow(-std::log1p(-level), 1.0 / shape);
    case Kind::truncated_exponential:
      return -std::log1p(level * std::expm1(-rate * endpoint)) / rate;
    case Kind::lognormal_mixture: {
      double lo = 0.0;
      double hi = 1.0;
      while (cdf(hi) < level)
        hi *= 2.0;
      while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < level ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  return 0.0;
}

double
UncuredSpec::right_endpoint() const
{
  return kind == Kind::truncated_exponential ? endpoint : kInf;
}

double
UncuredSpec::sample(Rng& rng) const
{
  switch (kind) {
    case Kind::exponential:
    case Kind::weibull:
    case Kind::truncated_exponential:
      return quantile(open_uniform(rng));
    case Kind::lognormal_mixture: {
      const double u = open_uniform(rng);
      std::size_t i = 0;
      double acc = weights[0];
      while (u > acc && i + 1 < weights.size())
        acc += weights[++i];
      std::normal_distribution<double> normal(mu[i], sigma[i]);
      return std::exp(normal(rng));
    }
  }
  return kInf;
}

double
uniform_censoring_zeta(double tau_g, double mass)
{
  if (!(tau_g > 0.0))
    throw InvalidArgument("tau_G must be positive");
  if (!(mass >= 0.0 && mass < 1.0))
    throw InvalidArgument("censoring mass must lie in [0, 1)");
  return mass > 0.0 ? tau_g / (1.0 - mass) : tau_g;
}

SettingSpec
make_setting(const SettingParams& params)
{
  if (params.setting < 1 || params.setting > 7)
    throw InvalidArgument("setting must be between 1 and 7");
  if (!(params.p > 0.0 && params.p < 1.0))
    throw InvalidArgument("p must lie in (0, 1)");
  if (params.n < 1)
    throw InvalidArgument("n must be positive");
  if (!(params.mass >= 0.0 && params.mass < 1.0))
    throw InvalidArgument("mass must lie in [0, 1)");
  if (!(params.lambda > 0.0) || !(params.lambda_c > 0.0))
    throw InvalidArgument("rates must be positive");
  if (!(params.delta > 0.0))
    throw InvalidArgument("delta must be positive");

  SettingSpec s;
  s.id = params.setting;
  s.p = params.p;
  s.n = params.n;
  s.delta = params.delta;
  using U = UncuredSpec::Kind;
  using C = CensoringSpec::Kind;
  switch (s.id) {
    case 1:
      s.uncured.kind = U::exponential;
      s.uncured.rate = 1.0;
      s.censoring = { C::uniform_with_mass, params.mass };
      break;
    case 2:
      s.uncured.kind = U::exponential;
      s.uncured.rate = params.lambda;
      s.censoring = { C::exponential_capped, 0.0, 0.5 };
      break;
    case 3:
      s.uncured.kind = U::weibull;
      s.uncured.shape = 0.5;
      s.uncured.scale = 1.5;
      s.censoring = { C::uniform_with_mass, params.mass };
      break;
    case 4:
      s.uncured.kind = U::truncated_exponential;
      s.uncured.rate = 1.0;
      s.uncured.endpoint = -std::log(0.01);
      s.censoring = { C::uniform_with_mass, params.mass };
      break;
    case 5:
      s.uncured.kind = U::truncated_exponential;
      s.uncured.rate = 5.0;
      s.uncured.endpoint = -std::log(0.01) / 5.0;
      s.censoring = { C::exponential_capped, 0.0, params.lambda_c };
      break;
    case 6:
      s.uncured.kind = U::exponential;
      s.uncured.rate = 1.0;
      s.censoring = { C::exponential_uncapped, 0.0, 0.5 };
      s.tau_g = kInf;
      break;
    case 7:
      s.uncured.kind = U::lognormal_mixture;
      s.uncured.weights = { 0.7, 0.3 };
      s.uncured.mu = { 0.0, std::log(8.0) };
      s.uncured.sigma = { 1.0, 0.3 };
      s.censoring = { C::uniform_with_mass, params.mass };
      s.tau_g = 6.5;
      break;
  }
  if (s.id <= 5)
    s.tau_g = setting_quantile(s, "q1");
  return s;
}

std::vector<std::string>
default_grid(const SettingSpec& spec)
{
  if (spec.id == 6)
    return { "y(n)" };
  if (spec.id == 7)
    return { "tau_g" };
  std::vector<std::string> g;
  for (int i = 1; i <= 12; ++i)
    g.push_back("q" + std::to_string(i));
  return g;
}

std::vector<std::string>
parse_grid(const SettingSpec& spec, const std::string& text)
{
  if (text.empty() || text == "default")
    return default_grid(spec);
  std::vector<std::string> out;
  if (text == "all") {
    out = default_grid(spec);
    if (has_extra_grid(spec))
      for (int i = 13; i <= 19; ++i)
        out.push_back("q" + std::to_string(i));
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto dots = item.find("..");
    if (dots != std::string::npos) {
      const int a = label_index(item.substr(0, dots));
      const int b = label_index(item.substr(dots + 2));
      if (a == 0 || b == 0 || b < a)
        throw InvalidArgument("malformed grid range '" + item + "'");
      for (int i = a; i <= b; ++i)
        out.push_back("q" + std::to_string(i));
    } else {
      out.push_back(item);
    }
  }
  for (const auto& l : out)
    setting_quantile(spec, l); // validates
  return out;
}

double
setting_quantile(const SettingSpec& spec, const std::string& label)
{
  if (spec.id == 6) {
    if (label != "y(n)")
      throw InvalidArgument("setting 6 has the single grid point y(n)");
    return kInf;
  }
  if (spec.id == 7) {
    if (label != "tau_g")
      throw InvalidArgument("setting 7 has the single grid point tau_g");
    return 6.5;
  }
  const int k = label_index(label);
  const int max_label = has_extra_grid(spec) ? 19 : 12;
  if (k < 1 || k > max_label)
    throw InvalidArgument("grid label '" + label + "' is not valid for setting " +
                          std::to_string(spec.id));
  const auto& F = spec.uncured;
  const double q4 = F.quantile(0.975);
  const double q6 = F.quantile(0.99);
  const double q12 = F.quantile(0.999);
  switch (k) {
    case 1:
      return F.quantile(0.9);
    case 2:
      return F.quantile(0.925);
    case 3:
      return F.quantile(0.95);
    case 4:
      return q4;
    case 5:
      return 0.5 * (q4 + q6);
    case 6:
      return q6;
    case 12:
      return q12;
    default:
      break;
  }
  if (k <= 11)
    return q6 + (k - 6) * (q12 - q6) / 6.0;
  const double end = F.right_endpoint();
  return end + (k - 13) * (0.5 * end) / 6.0;
}

SettingSpec
at_grid_point(SettingSpec spec, const std::string& label)
{
  spec.tau_g = setting_quantile(spec, label);
  return spec;
}

double
default_tau(const SettingSpec& spec)
{
  if (spec.id == 6)
    throw InvalidArgument("setting 6 sets tau per sample as y_(n) + delta");
  const double tau = spec.uncured.quantile(0.9995);
  if (tau > spec.tau_g)
    return tau;
  return spec.tau_g + (tau - setting_quantile(spec, "q12"));
}

SurvivalSample
generate(const SettingSpec& spec, Rng& rng)
{
  if (spec.id != 6 && !(spec.tau_g > 0.0 && std::isfinite(spec.tau_g)))
    throw InvalidArgument("setting needs a finite positive tau_G");
  const auto& cs = spec.censoring;
  const double zeta = cs.kind == CensoringSpec::Kind::uniform_with_mass
                        ? uniform_censoring_zeta(spec.tau_g, cs.mass)
                        : 0.0;
  std::exponential_distribution<double> expo(cs.rate);
  std::vector<Observation> obs;
  obs.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const bool uncured = open_uniform(rng) < spec.p;
    const double t = uncured ? spec.uncured.sample(rng) : kInf;
    double c = 0.0;
    switch (cs.kind) {
      case CensoringSpec::Kind::uniform_with_mass:
        c = std::min(zeta * open_uniform(rng), spec.tau_g);
        break;
      case CensoringSpec::Kind::exponential_capped:
        c = std::min(expo(rng), spec.tau_g);
        break;
      case CensoringSpec::Kind::exponential_uncapped:
        c = expo(rng);
        break;
    }
    obs.push_back(t <= c ? Observation{ t, 1 } : Observation{ c, 0 });
  }
  return SurvivalSample::from_trusted(std::move(obs));
}

SurvivalSample
generate(const SettingSpec& spec, std::uint64_t seed)
{
  auto rng = make_stream(seed, 0);
  return generate(spec, rng);
}

TestConfig
replicate_config(const SettingSpec& spec,
                 const TestConfig& base,
                 const SurvivalSample& sample,
                 std::uint64_t bootstrap_seed)
{
  TestConfig cfg = base;
  cfg.seed = bootstrap_seed;
  cfg.threads = 1;
  if (spec.id == 6) {
    cfg.tau_g = TauG::max_observed();
    cfg.tau = sample.max_time() + spec.delta;
  } else {
    cfg.tau_g = TauG::known(spec.tau_g);
    if (!cfg.tau)
      cfg.tau = default_tau(spec);
  }
  return cfg;
}

std::vector<RejectionCell>
rejection_rate(const SettingSpec& spec,
               const std::vector<std::string>& grid,
               const std::vector<Method>& methods,
               std::size_t reps,
               const TestConfig& base,
               std::uint64_t seed,
               unsigned threads,
               const QuantileTable* table)
{
  if (reps < 1)
    throw InvalidArgument("reps must be at least 1");
  if (methods.empty() || grid.empty())
    throw InvalidArgument("need at least one method and one grid point");
  const QuantileTable* qt = table;
  if (!qt && std::find(methods.begin(), methods.end(), Method::grenander) !=
               methods.end())
    qt = &default_dr_w_table();

  std::vector<RejectionCell> cells;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto point = at_grid_point(spec, grid[g]);
    const std::size_t M = methods.size();
    // per replicate and method: -1 failure, 0/1 decision, 2 no decision
    std::vector<int> outcome(reps * M, -1);
    std::vector<double> stat(reps * M, std::numeric_limits<double>::quiet_NaN());
    parallel_for(reps, threads, [&](std::size_t r) {
      auto rng = make_stream(seed, g, r);
      const auto sample = generate(point, rng);
      const auto boot_seed = make_stream(seed, g, r + (std::uint64_t{ 1 } << 40))();
      for (std::size_t k = 0; k < M; ++k) {
        try {
          const auto cfg = replicate_config(point, base, sample, boot_seed);
          const auto res = run_method(methods[k], sample, cfg, qt);
          stat[r * M + k] = res.statistic;
          outcome[r * M + k] = res.reject ? (*res.reject ? 1 : 0) : 2;
        } catch (const std::exception&) {
          outcome[r * M + k] = -1;
        }
      }
    });
    for (std::size_t k = 0; k < M; ++k) {
      RejectionCell c;
      c.label = grid[g];
      c.tau_g = point.tau_g;
      c.method = methods[k];
      c.reps = reps;
      double sum = 0.0;
      std::size_t finite = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        const int o = outcome[r * M + k];
        if (o < 0) {
          ++c.failures;
          continue;
        }
        if (o <= 1) {
          ++c.decisions;
          c.rejections += static_cast<std::size_t>(o);
        }
        if (std::isfinite(stat[r * M + k])) {
          sum += stat[r * M + k];
          ++finite;
        }
      }
      if (c.decisions > 0) {
        const double rate =
          static_cast<double>(c.rejections) / static_cast<double>(c.decisions);
        c.rate = rate;
        c.se = std::sqrt(rate * (1.0 - rate) / static_cast<double>(c.decisions));
      }
      c.mean_statistic =
        finite ? sum / static_cast<double>(finite)
               : std::numeric_limits<double>::quiet_NaN();
      cells.push_back(c);
    }
  }
  return cells;
}

std::vector<CensoringRateRow>
censoring_rate(const SettingSpec& spec,
               const std::vector<std::string>& grid,
               std::size_t subjects,
               std::uint64_t seed,
               unsigned threads)
{
  if (subjects < 1)
    throw InvalidArgument("subjects must be positive");
  std::vector<CensoringRateRow> rows;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    auto point = at_grid_point(spec, grid[g]);
    const std::size_t blocks = (subjects + spec.n - 1) / spec.n;
    std::vector<std::size_t> censored(blocks, 0);
    parallel_for(blocks, threads, [&](std::size_t b) {
      auto local = point;
      local.n = std::min(spec.n, subjects - b * spec.n);
      auto rng = make_stream(seed, g, b);
      censored[b] = generate(local, rng).censored_count();
    });
    std::size_t total = 0;
    for (auto c : censored)
      total += c;
    rows.push_back({ grid[g], point.tau_g, subjects, total,
                     static_cast<double>(total) / static_cast<double>(subjects) });
  }
  return rows;
}

double
calibrate_qn_critical(const SettingSpec& spec,
                      std::size_t reps,
                      double alpha,
                      std::uint64_t seed,
                      unsigned threads)
{
  if (reps < 1)
    throw InvalidArgument("reps must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw InvalidArgument("alpha must lie in (0, 1)");
  std::vector<double> stats(reps, 0.0);
  parallel_for(reps, threads, [&](std::size_t r) {
    auto rng = make_stream(seed, r);
    const auto s = generate(spec, rng);
    stats[r] = s.event_count() ? qn_statistic(s) : 0.0;
  });
  std::sort(stats.begin(), stats.end());
  auto k = static_cast<std::size_t>(
    std::ceil((1.0 - alpha) * static_cast<double>(reps) - 1e-9));
  k = std::clamp<std::size_t>(k, 1, reps);
  return stats[k - 1];
}

std::string
describe(const SettingSpec& spec)
{
  std::ostringstream os;
  os << "setting " << spec.id << ", p=" << fmt(spec.p) << ", n=" << spec.n;
  switch (spec.censoring.kind) {
    case CensoringSpec::Kind::uniform_with_mass:
      os << ", uniform censoring with mass " << fmt(spec.censoring.mass);
      break;
    case CensoringSpec::Kind::exponential_capped:
      os << ", exponential censoring (rate " << fmt(spec.censoring.rate)
         << ") capped at tau_G";
      break;
    case CensoringSpec::Kind::exponential_uncapped:
      os << ", exponential censoring (rate " << fmt(spec.censoring.rate) << ")";
      break;
  }
  if (spec.id == 2)
    os << ", uncured rate " << fmt(spec.uncured.rate);
  if (spec.id == 6)
    os << ", tau = y(n) + " << fmt(spec.delta);
  return os.str();
}

ResultTable
rejection_result_table(const SettingSpec& spec,
                       const std::vector<RejectionCell>& cells)
{
  ResultTable t;
  t.columns = { "setting",    "label",    "tau_g",    "method", "reps",
                "decisions",  "rejections", "failures", "rate",   "se",
                "mean_statistic" };
  t.set_meta("description", describe(spec));
  for (const auto& c : cells)
    t.add_row({ static_cast<std::int64_t>(spec.id), c.label, c.tau_g,
                std::string(method_name(c.method)),
                static_cast<std::int64_t>(c.reps),
                static_cast<std::int64_t>(c.decisions),
                static_cast<std::int64_t>(c.rejections),
                static_cast<std::int64_t>(c.failures),
                c.rate ? Cell{ *c.rate } : Cell{}, c.se ? Cell{ *c.se } : Cell{},
                c.mean_statistic });
  return t;
}

ResultTable
censoring_result_table(const SettingSpec& spec,
                       const std::vector<CensoringRateRow>& rows)
{
  ResultTable t;
  t.columns = { "setting", "label", "tau_g", "subjects", "censored", "rate" };
  t.set_meta("description", describe(spec));
  double lo = 1.0;
  double hi = 0.0;
  for (const auto& r : rows) {
    t.add_row({ static_cast<std::int64_t>(spec.id), r.label, r.tau_g,
                static_cast<std::int64_t>(r.subjects),
                static_cast<std::int64_t>(r.censored), r.rate });
    lo = std::min(lo, r.rate);
    hi = std::max(hi, r.rate);
  }
  if (!rows.empty()) {
    t.set_meta("censoring_rate_min", fmt(lo));
    t.set_meta("censoring_rate_max", fmt(hi));
  }
  return t;
}

} // namespace pfu
