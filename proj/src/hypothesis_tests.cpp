#include "pfu/hypothesis_tests.hpp"

#include "pfu/estimators.hpp"
#include "pfu/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pfu {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void
require_events(const SurvivalSample& sample)
{
  if (sample.event_count() == 0)
    throw DegenerateError("the sample has no events");
}

std::size_t
count_events_in(const SurvivalSample& sample, double lo, double hi)
{
  std::size_t k = 0;
  for (const auto& o : sample.observations())
    if (o.status == 1 && o.time > lo && o.time <= hi)
      ++k;
  return k;
}

TestResult
count_test(Method m,
           double q,
           std::size_t n,
           double alpha,
           std::vector<std::pair<std::string, double>> diag)
{
  TestResult r;
  r.method = m;
  const double log_alpha =
    q >= 1.0 ? -std::numeric_limits<double>::infinity()
             : static_cast<double>(n) * std::log1p(-q);
  r.statistic = std::exp(log_alpha);
  r.threshold = alpha;
  r.p_value = r.statistic;
  r.reject = r.statistic < alpha;
  r.diagnostics = std::move(diag);
  r.diagnostics.emplace_back("log_statistic", log_alpha);
  return r;
}

} // namespace

std::string_view
method_name(Method m)
{
  switch (m) {
    case Method::sg:
      return "sg";
    case Method::grenander:
      return "grenander";
    case Method::alpha_n:
      return "alpha-n";
    case Method::tilde_alpha_n:
      return "tilde-alpha-n";
    case Method::qn:
      return "qn";
  }
  return "?";
}

Method
parse_method(std::string_view name)
{
  for (Method m : { Method::sg, Method::grenander, Method::alpha_n,
                    Method::tilde_alpha_n, Method::qn })
    if (method_name(m) == name)
      return m;
  throw InvalidArgument("unknown method '" + std::string(name) +
                        "' (expected sg, grenander, alpha-n, tilde-alpha-n, "
                        "qn or all)");
}

std::vector<Method>
parse_methods(std::string_view list)
{
  std::vector<Method> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    auto comma = list.find(',', pos);
    if (comma == std::string_view::npos)
      comma = list.size();
    auto item = list.substr(pos, comma - pos);
    while (!item.empty() && item.front() == ' ')
      item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ')
      item.remove_suffix(1);
    if (item == "all") {
      for (Method m : { Method::sg, Method::grenander, Method::alpha_n,
                        Method::tilde_alpha_n, Method::qn })
        if (std::find(out.begin(), out.end(), m) == out.end())
          out.push_back(m);
    } else if (!item.empty()) {
      const Method m = parse_method(item);
      if (std::find(out.begin(), out.end(), m) == out.end())
        out.push_back(m);
    }
    pos = comma + 1;
  }
  if (out.empty())
    throw InvalidArgument("no methods given");
  return out;
}

bool
needs_tau(Method m)
{
  return m == Method::sg || m == Method::grenander;
}

std::optional<double>
TestResult::diagnostic(std::string_view key) const
{
  for (const auto& [k, v] : diagnostics)
    if (k == key)
      return v;
  return std::nullopt;
}

BoundComponents
bound_components(const StepFunction& kme, const ResolvedConfig& cfg)
{
  if (!cfg.tau)
    throw InvalidArgument("tau is required for the bound");
  const double F = kme(cfg.tau_g);
  return { F, cfg.epsilon * F / (*cfg.tau - cfg.tau_g), cfg.tau_g, cfg.epsilon,
           *cfg.tau };
}

TestResult
grenander_test(const SurvivalSample& sample,
               const TestConfig& cfg,
               const QuantileTable& table)
{
  require_events(sample);
  const auto r = resolve(cfg, sample, true);
  const auto kme = kaplan_meier(sample);
  const auto bc = bound_components(kme, r);
  const auto est = grenander_at_offset(sample, kme, r);
  const double mass = 1.0 - reversed_km(sample).left_limit(r.tau_g);
  const double q = table.quantile(1.0 - r.alpha);
  const double n = static_cast<double>(r.n);

  TestResult out;
  out.method = Method::grenander;
  out.threshold = q;
  out.diagnostics = { { "f_grenander", est.value },
                      { "offset_point", est.point },
                      { "bound", bc.bound },
                      { "F_hat_tau_g", bc.F_hat_at_tau_g },
                      { "censoring_mass", mass },
                      { "tau_g", r.tau_g },
                      { "tau", bc.tau },
                      { "c", r.c },
                      { "a", r.a } };
  if (!(est.value > 0.0)) {
    // Threshold form: A1^{-1} = sqrt(f / (c mass)) vanishes with f, so the
    // rule reduces to f <= bound.
    out.diagnostics.emplace_back("degenerate_statistic", 1.0);
    if (mass > 0.0 && bc.bound > 0.0) {
      out.statistic = std::numeric_limits<double>::infinity();
      out.reject = true;
      out.p_value = 0.0;
      out.notes.push_back(
        "Grenander plug-in is 0 at the offset point; A1^{-1} = 0 and the "
        "rule reduces to f <= bound");
    } else {
      out.statistic = kNaN;
      out.reject = false;
      out.notes.push_back(
        "Grenander plug-in and censoring mass (or bound) are 0; statistic "
        "undefined, reported as non-rejection");
    }
    return out;
  }
  if (mass <= 0.0)
    out.notes.push_back("estimated censoring mass at tau_G is 0; A1 plug-in is 0");
  const double A1 = plug_in_A1(est.value, mass, r.c);
  out.statistic =
    A1 * std::pow(n, 0.5 * (1.0 - r.a)) * (bc.bound - est.value);
  out.reject = out.statistic >= q;
  out.p_value = 1.0 - table.cdf(out.statistic);
  out.diagnostics.emplace_back("A1_hat", A1);
  return out;
}

TestResult
sg_test(const SurvivalSample& sample,
        const TestConfig& cfg,
        BootstrapOutput* bootstrap)
{
  require_events(sample);
  const auto r = resolve(cfg, sample, true);
  const auto kme = kaplan_meier(sample);
  const auto bc = bound_components(kme, r);
  const auto m = lcm(kme, r.tail_start, r.tau_g);
  const auto sg = smoothed_grenander_at_endpoint(m, r.h, r.tau_g, true);
  auto boot = smoothed_bootstrap(sample, r);

  TestResult out;
  out.method = Method::sg;
  out.statistic = sg.value - bc.bound;
  out.threshold = boot.critical_quantile;
  out.reject = out.statistic <= boot.critical_quantile;
  const auto below = std::count_if(boot.diffs.begin(), boot.diffs.end(),
                                   [&](double d) { return d < out.statistic; });
  out.p_value =
    static_cast<double>(below) / static_cast<double>(boot.diffs.size());
  out.diagnostics = { { "f_sg", sg.value },
                      { "bound", bc.bound },
                      { "F_hat_tau_g", bc.F_hat_at_tau_g },
                      { "tau_g", r.tau_g },
                      { "tau", bc.tau },
                      { "h", r.h },
                      { "h0", r.h0 },
                      { "bootstrap_center", boot.center },
                      { "bootstrap_reps", static_cast<double>(boot.reps) },
                      { "bootstrap_retries", static_cast<double>(boot.retries) },
                      { "monotone_adjustment", boot.monotone_adjustment } };
  if (sg.extended)
    out.notes.push_back("smoothing window extended below tail_start");
  if (sg.overlap)
    out.notes.push_back("bandwidth exceeds tau_G/2; boundary regions overlap");
  if (boot.monotone_adjustment > 1e-12)
    out.notes.push_back("smoothed CDF was monotonized before sampling");
  if (bootstrap)
    *bootstrap = std::move(boot);
  return out;
}

double
q_hat_n(const SurvivalSample& sample)
{
  require_events(sample);
  const double yt = *sample.max_event_time();
  const double y = sample.max_time();
  return static_cast<double>(count_events_in(sample, 2.0 * yt - y, yt)) /
         static_cast<double>(sample.size());
}

double
q_tilde_n(const SurvivalSample& sample)
{
  require_events(sample);
  const double yt = *sample.max_event_time();
  const double y = sample.max_time();
  if (!(yt > 0.0))
    throw DegenerateError("largest event time must be positive");
  return static_cast<double>(count_events_in(sample, yt * yt / y, yt)) /
         static_cast<double>(sample.size());
}

TestResult
alpha_n_test(const SurvivalSample& sample, const TestConfig& cfg)
{
  const auto r = resolve(cfg, sample, false);
  const double q = q_hat_n(sample);
  return count_test(Method::alpha_n, q, sample.size(), r.alpha,
                    { { "q_hat", q } });
}

TestResult
tilde_alpha_n_test(const SurvivalSample& sample, const TestConfig& cfg)
{
  const auto r = resolve(cfg, sample, false);
  const double q = q_tilde_n(sample);
  auto out = count_test(Method::tilde_alpha_n, q, sample.size(), r.alpha,
                        { { "q_tilde", q } });
  out.notes.push_back("ratio window (y~^2/y, y~] used");
  return out;
}

double
qn_statistic(const SurvivalSample& sample)
{
  return static_cast<double>(sample.size()) * q_hat_n(sample);
}

TestResult
qn_test(const SurvivalSample& sample, const TestConfig& cfg)
{
  resolve(cfg, sample, false);
  TestResult out;
  out.method = Method::qn;
  out.statistic = qn_statistic(sample);
  out.diagnostics = { { "gamma", cfg.gamma } };
  if (cfg.qn_critical) {
    out.threshold = *cfg.qn_critical;
    out.reject = out.statistic > *cfg.qn_critical;
  } else {
    out.notes.push_back("no critical value configured; statistic only");
  }
  return out;
}

TestResult
run_method(Method m,
           const SurvivalSample& sample,
           const TestConfig& cfg,
           const QuantileTable* table)
{
  switch (m) {
    case Method::sg:
      return sg_test(sample, cfg);
    case Method::grenander:
      return grenander_test(sample, cfg, table ? *table : default_dr_w_table());
    case Method::alpha_n:
      return alpha_n_test(sample, cfg);
    case Method::tilde_alpha_n:
      return tilde_alpha_n_test(sample, cfg);
    case Method::qn:
      return qn_test(sample, cfg);
  }
  throw InvalidArgument("unknown method");
}

std::vector<WhatIfCell>
what_if_table(const SurvivalSample& sample,
              const std::vector<double>& cutoffs,
              const TestConfig& cfg,
              const std::vector<Method>& methods,
              const QuantileTable* table)
{
  if (methods.empty())
    throw InvalidArgument("no methods given");
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    if (!(cutoffs[i] > 0.0) || !std::isfinite(cutoffs[i]))
      throw InvalidArgument("cutoffs must be positive");
    if (i > 0 && !(cutoffs[i] > cutoffs[i - 1]))
      throw InvalidArgument("cutoffs must be strictly ascending");
  }
  std::vector<std::optional<double>> cuts;
  if (cutoffs.empty())
    cuts.push_back(std::nullopt);
  else
    cuts.assign(cutoffs.begin(), cutoffs.end());

  std::vector<WhatIfCell> cells;
  for (const auto& c : cuts)
    for (Method m : methods) {
      auto& cell = cells.emplace_back();
      cell.cutoff = c;
      cell.method = m;
    }

  const unsigned outer = cells.size() > 1 ? std::max(1u, cfg.threads) : 1u;
  parallel_for(cells.size(), outer, [&](std::size_t i) {
    auto& cell = cells[i];
    try {
      const SurvivalSample s =
        cell.cutoff ? apply_cutoff(sample, *cell.cutoff) : sample;
      TestConfig local = cfg;
      if (cells.size() > 1)
        local.threads = 1;
      if (cell.cutoff && cfg.tau_g.mode == TauG::Mode::known)
        local.tau_g = TauG::known(std::min(cfg.tau_g.value, *cell.cutoff));
      cell.n = s.size();
      cell.events = s.event_count();
      cell.tau_g = local.tau_g.mode == TauG::Mode::known ? local.tau_g.value
                                                         : s.max_time();
      cell.result = run_method(cell.method, s, local, table);
    } catch (const InvalidArgument& e) {
      cell.error = ErrorKind::invalid;
      cell.message = e.what();
    } catch (const std::exception& e) {
      cell.error = ErrorKind::degenerate;
      cell.message = e.what();
    }
  });
  return cells;
}

ResultTable
what_if_result_table(const std::vector<WhatIfCell>& cells)
{
  ResultTable t;
  t.columns = { "cutoff",    "method",  "n",      "events", "tau_g",  "statistic",
                "threshold", "p_value", "reject", "status", "message" };
  for (const auto& c : cells) {
    std::vector<Cell> row;
    row.push_back(c.cutoff ? Cell{ *c.cutoff } : Cell{});
    row.push_back(std::string(method_name(c.method)));
    row.push_back(static_cast<std::int64_t>(c.n));
    row.push_back(static_cast<std::int64_t>(c.events));
    row.push_back(c.tau_g);
    if (c.result) {
      const auto& r = *c.result;
      row.push_back(r.statistic);
      row.push_back(r.threshold ? Cell{ *r.threshold } : Cell{});
      row.push_back(r.p_value ? Cell{ *r.p_value } : Cell{});
      row.push_back(r.reject ? Cell{ *r.reject } : Cell{});
      row.push_back(std::string("ok"));
      std::string msg;
      for (const auto& note : r.notes)
        msg += (msg.empty() ? "" : "; ") + note;
      row.push_back(msg);
    } else {
      row.insert(row.end(), 4, Cell{});
      row.push_back(std::string(c.error == ErrorKind::invalid ? "invalid"
                                                              : "degenerate"));
      row.push_back(c.message);
    }
    t.add_row(std::move(row));
  }
  return t;
}

} // namespace pfu
