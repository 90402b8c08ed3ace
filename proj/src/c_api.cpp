#include "pfu/pfu.h"

#include "pfu/asymptotics.hpp"
#include "pfu/bootstrap.hpp"
#include "pfu/data_model.hpp"
#include "pfu/estimators.hpp"
#include "pfu/hypothesis_tests.hpp"
#include "pfu/simulation.hpp"
#include "pfu/table.hpp"

#include <json.hpp>

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

struct pfu_sample
{
  pfu::SurvivalSample value;
};

struct pfu_config
{
  pfu::TestConfig value;
};

struct pfu_qtable
{
  pfu::QuantileTable value;
};

struct pfu_table
{
  pfu::ResultTable value;
};

struct pfu_setting
{
  pfu::SettingParams value;
};

namespace {

thread_local std::string g_last_error;

template<class F>
pfu_status
guard(F&& f)
{
  try {
    f();
    g_last_error.clear();
    return PFU_OK;
  } catch (const pfu::InvalidArgument& e) {
    g_last_error = e.what();
    return PFU_ERR_INVALID;
  } catch (const pfu::DegenerateError& e) {
    g_last_error = e.what();
    return PFU_ERR_DEGENERATE;
  } catch (const pfu::IoError& e) {
    g_last_error = e.what();
    return PFU_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PFU_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return PFU_ERR_INTERNAL;
  }
}

void
require(const void* p, const char* what)
{
  if (!p)
    throw pfu::InvalidArgument(std::string(what) + " must not be NULL");
}

char*
dup_string(const std::string& s)
{
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out)
    throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

double
parse_number(const std::string& key, const std::string& v)
{
  errno = 0;
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE ||
      !std::isfinite(d))
    throw pfu::InvalidArgument("invalid value '" + v + "' for " + key);
  return d;
}

std::uint64_t
parse_unsigned(const std::string& key, const std::string& v)
{
  errno = 0;
  char* end = nullptr;
  if (v.empty() || v[0] == '-')
    throw pfu::InvalidArgument("invalid value '" + v + "' for " + key);
  const auto u = std::strtoull(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size() || errno == ERANGE)
    throw pfu::InvalidArgument("invalid value '" + v + "' for " + key);
  return u;
}

nlohmann::ordered_json
step_json(const pfu::StepFunction& f)
{
  return { { "value_at_zero", f.value_at_zero },
           { "jump_points", f.jump_points },
           { "values", f.values } };
}

} // namespace

extern "C" {

const char*
pfu_version(void)
{
  return PFU_VERSION;
}

const char*
pfu_last_error(void)
{
  return g_last_error.c_str();
}

void
pfu_string_free(char* s)
{
  std::free(s);
}

pfu_status
pfu_sample_create(const double* times, const int* status, size_t n, pfu_sample** out)
{
  return guard([&] {
    require(out, "out");
    require(times, "times");
    require(status, "status");
    std::vector<pfu::Observation> obs(n);
    for (size_t i = 0; i < n; ++i)
      obs[i] = { times[i], status[i] };
    *out = new pfu_sample{ pfu::SurvivalSample(std::move(obs)) };
  });
}

pfu_status
pfu_sample_load_csv(const char* path,
                    const char* time_column,
                    const char* status_column,
                    pfu_sample** out)
{
  return guard([&] {
    require(out, "out");
    require(path, "path");
    require(time_column, "time_column");
    require(status_column, "status_column");
    *out = new pfu_sample{ pfu::load_csv(path, time_column, status_column) };
  });
}

pfu_status
pfu_sample_parse_csv(const char* text,
                     const char* time_column,
                     const char* status_column,
                     pfu_sample** out)
{
  return guard([&] {
    require(out, "out");
    require(text, "text");
    require(time_column, "time_column");
    require(status_column, "status_column");
    *out = new pfu_sample{ pfu::parse_csv(text, time_column, status_column) };
  });
}

pfu_status
pfu_sample_apply_cutoff(const pfu_sample* sample, double cutoff, pfu_sample** out)
{
  return guard([&] {
    require(sample, "sample");
    require(out, "out");
    *out = new pfu_sample{ pfu::apply_cutoff(sample->value, cutoff) };
  });
}

pfu_status
pfu_sample_size(const pfu_sample* sample, size_t* n)
{
  return guard([&] {
    require(sample, "sample");
    require(n, "n");
    *n = sample->value.size();
  });
}

pfu_status
pfu_sample_events(const pfu_sample* sample, size_t* events)
{
  return guard([&] {
    require(sample, "sample");
    require(events, "events");
    *events = sample->value.event_count();
  });
}

pfu_status
pfu_sample_max_time(const pfu_sample* sample, double* out)
{
  return guard([&] {
    require(sample, "sample");
    require(out, "out");
    *out = sample->value.max_time();
  });
}

void
pfu_sample_free(pfu_sample* sample)
{
  delete sample;
}

pfu_status
pfu_config_create(pfu_config** out)
{
  return guard([&] {
    require(out, "out");
    *out = new pfu_config{};
  });
}

pfu_status
pfu_config_set(pfu_config* cfg, const char* key_c, const char* value_c)
{
  return guard([&] {
    require(cfg, "cfg");
    require(key_c, "key");
    require(value_c, "value");
    const std::string key = key_c;
    const std::string v = value_c;
    auto& c = cfg->value;
    auto opt = [&](std::optional<double>& slot) {
      if (v.empty())
        slot.reset();
      else
        slot = parse_number(key, v);
    };
    if (key == "epsilon")
      c.epsilon = parse_number(key, v);
    else if (key == "tau")
      opt(c.tau);
    else if (key == "alpha")
      c.alpha = parse_number(key, v);
    else if (key == "a")
      c.a = parse_number(key, v);
    else if (key == "c")
      opt(c.c);
    else if (key == "tau_g") {
      if (v.empty() || v == "max-obs")
        c.tau_g = pfu::TauG::max_observed();
      else
        c.tau_g = pfu::TauG::known(parse_number(key, v));
    } else if (key == "h")
      opt(c.h);
    else if (key == "h0")
      opt(c.h0);
    else if (key == "bootstrap_reps")
      c.bootstrap_reps = parse_unsigned(key, v);
    else if (key == "tail_start")
      c.tail_start = parse_number(key, v);
    else if (key == "seed")
      c.seed = parse_unsigned(key, v);
    else if (key == "gamma")
      c.gamma = parse_number(key, v);
    else if (key == "qn_critical")
      opt(c.qn_critical);
    else if (key == "threads")
      c.threads = static_cast<unsigned>(parse_unsigned(key, v));
    else
      throw pfu::InvalidArgument("unknown configuration key '" + key + "'");
  });
}

pfu_status
pfu_config_clone(const pfu_config* cfg, pfu_config** out)
{
  return guard([&] {
    require(cfg, "cfg");
    require(out, "out");
    *out = new pfu_config{ cfg->value };
  });
}

void
pfu_config_free(pfu_config* cfg)
{
  delete cfg;
}

pfu_status
pfu_qtable_default(pfu_qtable** out)
{
  return guard([&] {
    require(out, "out");
    *out = new pfu_qtable{ pfu::default_dr_w_table() };
  });
}

pfu_status
pfu_qtable_read(const char* path, pfu_qtable** out)
{
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new pfu_qtable{ pfu::read_cache(path) };
  });
}

pfu_status
pfu_qtable_simulate(const double* levels,
                    size_t n_levels,
                    size_t replications,
                    double grid_step,
                    double horizon,
                    uint64_t seed,
                    unsigned threads,
                    pfu_qtable** out)
{
  return guard([&] {
    require(out, "out");
    if (n_levels > 0)
      require(levels, "levels");
    *out = new pfu_qtable{ pfu::simulate_dr_w_quantiles(
      std::span<const double>(levels, n_levels), replications, grid_step,
      horizon, seed, threads) };
  });
}

pfu_status
pfu_qtable_write(const pfu_qtable* table, const char* path)
{
  return guard([&] {
    require(table, "table");
    require(path, "path");
    pfu::write_cache(table->value, path);
  });
}

pfu_status
pfu_qtable_to_text(const pfu_qtable* table, char** out)
{
  return guard([&] {
    require(table, "table");
    require(out, "out");
    *out = dup_string(pfu::to_cache_text(table->value));
  });
}

pfu_status
pfu_qtable_quantile(const pfu_qtable* table, double level, double* out)
{
  return guard([&] {
    require(table, "table");
    require(out, "out");
    if (!(level >= 0.0 && level <= 1.0))
      throw pfu::InvalidArgument("level must lie in [0, 1]");
    *out = table->value.quantile(level);
  });
}

pfu_status
pfu_qtable_cdf(const pfu_qtable* table, double x, double* out)
{
  return guard([&] {
    require(table, "table");
    require(out, "out");
    *out = table->value.cdf(x);
  });
}

void
pfu_qtable_free(pfu_qtable* table)
{
  delete table;
}

pfu_status
pfu_table_to_csv(const pfu_table* table, char** out)
{
  return guard([&] {
    require(table, "table");
    require(out, "out");
    *out = dup_string(pfu::to_csv(table->value));
  });
}

pfu_status
pfu_table_to_json(const pfu_table* table, char** out)
{
  return guard([&] {
    require(table, "table");
    require(out, "out");
    *out = dup_string(pfu::to_json(table->value));
  });
}

pfu_status
pfu_table_rows(const pfu_table* table, size_t* rows)
{
  return guard([&] {
    require(table, "table");
    require(rows, "rows");
    *rows = table->value.rows.size();
  });
}

pfu_status
pfu_table_set_meta(pfu_table* table, const char* key, const char* value)
{
  return guard([&] {
    require(table, "table");
    require(key, "key");
    require(value, "value");
    table->value.set_meta(key, value);
  });
}

pfu_status
pfu_table_error_counts(const pfu_table* table, size_t* invalid, size_t* degenerate)
{
  return guard([&] {
    require(table, "table");
    require(invalid, "invalid");
    require(degenerate, "degenerate");
    *invalid = 0;
    *degenerate = 0;
    const auto& t = table->value;
    std::size_t col = t.columns.size();
    for (std::size_t i = 0; i < t.columns.size(); ++i)
      if (t.columns[i] == "status")
        col = i;
    if (col == t.columns.size())
      return;
    for (const auto& row : t.rows) {
      const auto s = pfu::format_cell(row[col]);
      *invalid += s == "invalid";
      *degenerate += s == "degenerate";
    }
  });
}

void
pfu_table_free(pfu_table* table)
{
  delete table;
}

pfu_status
pfu_what_if(const pfu_sample* sample,
            const pfu_config* cfg,
            const char* methods,
            const double* cutoffs,
            size_t n_cutoffs,
            const pfu_qtable* qtable,
            pfu_table** out)
{
  return guard([&] {
    require(sample, "sample");
    require(cfg, "cfg");
    require(methods, "methods");
    require(out, "out");
    if (n_cutoffs > 0)
      require(cutoffs, "cutoffs");
    const auto ms = pfu::parse_methods(methods);
    const std::vector<double> cuts(cutoffs, cutoffs + n_cutoffs);
    const auto cells = pfu::what_if_table(sample->value, cuts, cfg->value, ms,
                                          qtable ? &qtable->value : nullptr);
    *out = new pfu_table{ pfu::what_if_result_table(cells) };
  });
}

pfu_status
pfu_dump_estimators(const pfu_sample* sample, const pfu_config* cfg, char** json)
{
  return guard([&] {
    require(sample, "sample");
    require(cfg, "cfg");
    require(json, "json");
    const auto r = pfu::resolve(cfg->value, sample->value, false);
    const auto kme = pfu::kaplan_meier(sample->value);
    const auto m = pfu::lcm(kme, r.tail_start, r.tau_g);
    nlohmann::ordered_json j;
    j["n"] = r.n;
    j["events"] = sample->value.event_count();
    j["tau_g"] = r.tau_g;
    j["tail_start"] = r.tail_start;
    j["h"] = r.h;
    j["h0"] = r.h0;
    j["kaplan_meier"] = step_json(kme);
    j["censoring_kaplan_meier"] = step_json(pfu::reversed_km(sample->value));
    j["majorant"] = { { "knots", m.knots }, { "knot_values", m.knot_values } };
    try {
      const auto off = pfu::grenander_at_offset(sample->value, kme, r);
      j["grenander_offset"] = { { "point", off.point }, { "value", off.value } };
    } catch (const pfu::InvalidArgument& e) {
      j["grenander_offset"] = { { "error", e.what() } };
    }
    const auto sg = pfu::smoothed_grenander_at_endpoint(m, r.h, r.tau_g, true);
    j["smoothed_grenander"] = { { "value", sg.value },
                                { "window_extended", sg.extended },
                                { "kernel_overlap", sg.overlap } };
    *json = dup_string(j.dump(2) + "\n");
  });
}

pfu_status
pfu_dump_bootstrap(const pfu_sample* sample, const pfu_config* cfg, char** json)
{
  return guard([&] {
    require(sample, "sample");
    require(cfg, "cfg");
    require(json, "json");
    const auto r = pfu::resolve(cfg->value, sample->value, false);
    const auto b = pfu::smoothed_bootstrap(sample->value, r);
    nlohmann::ordered_json j;
    j["reps"] = b.reps;
    j["alpha"] = b.alpha;
    j["h"] = b.h;
    j["h0"] = b.h0;
    j["seed"] = b.seed;
    j["center"] = b.center;
    j["critical_quantile"] = b.critical_quantile;
    j["retries"] = b.retries;
    j["cdf_supremum"] = b.cdf_supremum;
    j["monotone_adjustment"] = b.monotone_adjustment;
    j["diffs"] = b.diffs;
    *json = dup_string(j.dump(2) + "\n");
  });
}

pfu_status
pfu_setting_create(int setting, pfu_setting** out)
{
  return guard([&] {
    require(out, "out");
    pfu::SettingParams p;
    p.setting = setting;
    pfu::make_setting(p);
    *out = new pfu_setting{ p };
  });
}

pfu_status
pfu_setting_set(pfu_setting* s, const char* key_c, double value)
{
  return guard([&] {
    require(s, "setting");
    require(key_c, "key");
    const std::string key = key_c;
    auto p = s->value;
    if (key == "p")
      p.p = value;
    else if (key == "n") {
      if (!(value >= 1.0) || value != std::floor(value))
        throw pfu::InvalidArgument("n must be a positive integer");
      p.n = static_cast<std::size_t>(value);
    } else if (key == "mass")
      p.mass = value;
    else if (key == "lambda")
      p.lambda = value;
    else if (key == "lambda_c")
      p.lambda_c = value;
    else if (key == "delta")
      p.delta = value;
    else
      throw pfu::InvalidArgument("unknown setting key '" + key + "'");
    pfu::make_setting(p);
    s->value = p;
  });
}

pfu_status
pfu_setting_quantile(const pfu_setting* s, const char* label, double* out)
{
  return guard([&] {
    require(s, "setting");
    require(label, "label");
    require(out, "out");
    *out = pfu::setting_quantile(pfu::make_setting(s->value), label);
  });
}

void
pfu_setting_free(pfu_setting* s)
{
  delete s;
}

pfu_status
pfu_simulate_rejection(const pfu_setting* s,
                       const char* grid,
                       const char* methods,
                       size_t reps,
                       const pfu_config* cfg,
                       const pfu_qtable* qtable,
                       uint64_t seed,
                       unsigned threads,
                       pfu_table** out)
{
  return guard([&] {
    require(s, "setting");
    require(methods, "methods");
    require(cfg, "cfg");
    require(out, "out");
    const auto spec = pfu::make_setting(s->value);
    const auto labels = pfu::parse_grid(spec, grid ? grid : "");
    const auto cells =
      pfu::rejection_rate(spec, labels, pfu::parse_methods(methods), reps,
                          cfg->value, seed, threads,
                          qtable ? &qtable->value : nullptr);
    *out = new pfu_table{ pfu::rejection_result_table(spec, cells) };
  });
}

pfu_status
pfu_simulate_censoring(const pfu_setting* s,
                       const char* grid,
                       size_t subjects,
                       uint64_t seed,
                       unsigned threads,
                       pfu_table** out)
{
  return guard([&] {
    require(s, "setting");
    require(out, "out");
    const auto spec = pfu::make_setting(s->value);
    const auto labels = pfu::parse_grid(spec, grid ? grid : "");
    const auto rows = pfu::censoring_rate(spec, labels, subjects, seed, threads);
    *out = new pfu_table{ pfu::censoring_result_table(spec, rows) };
  });
}

pfu_status
pfu_calibrate_qn(const pfu_setting* s,
                 const char* label,
                 size_t reps,
                 double alpha,
                 uint64_t seed,
                 unsigned threads,
                 double* critical)
{
  return guard([&] {
    require(s, "setting");
    require(label, "label");
    require(critical, "critical");
    const auto spec = pfu::at_grid_point(pfu::make_setting(s->value), label);
    *critical = pfu::calibrate_qn_critical(spec, reps, alpha, seed, threads);
  });
}

} // extern "C"
