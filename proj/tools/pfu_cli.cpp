// pfu: command-line front end over the C interface.

#include "pfu/pfu.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Failure
{
  int code;
  std::string message;
};

void
check(pfu_status s, const std::string& context)
{
  if (s == PFU_OK)
    return;
  const int code = s == PFU_ERR_DEGENERATE ? 3 : s == PFU_ERR_INTERNAL ? 1 : 2;
  throw Failure{ code, context + ": " + pfu_last_error() };
}

template<class T, void (*Free)(T*)>
struct Deleter
{
  void operator()(T* p) const { Free(p); }
};
using Sample = std::unique_ptr<pfu_sample, Deleter<pfu_sample, pfu_sample_free>>;
using Config = std::unique_ptr<pfu_config, Deleter<pfu_config, pfu_config_free>>;
using QTable = std::unique_ptr<pfu_qtable, Deleter<pfu_qtable, pfu_qtable_free>>;
using Table = std::unique_ptr<pfu_table, Deleter<pfu_table, pfu_table_free>>;
using Setting = std::unique_ptr<pfu_setting, Deleter<pfu_setting, pfu_setting_free>>;

std::string
take_string(char* s)
{
  std::string out = s ? s : "";
  pfu_string_free(s);
  return out;
}

void
write_text(const std::string& path, const std::string& text)
{
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw Failure{ 2, "cannot write '" + path + "'" };
  f << text;
  if (!f)
    throw Failure{ 2, "failed writing '" + path + "'" };
}

std::string
fmt(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t
fnv1a(const std::string& s)
{
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

// Canonical "name=value" listing of every option that was given, excluding
// options that do not affect the result (worker count, output locations).
std::string
canonical_flags(const CLI::App& app)
{
  static const std::vector<std::string> skip = {
    "--threads", "--output", "--dump-estimators", "--dump-bootstrap", "--config", "--help"
  };
  std::string out;
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->count() == 0)
      continue;
    const std::string name = opt->get_name(false, true);
    bool skipped = false;
    for (const auto& s : skip)
      if (name == s)
        skipped = true;
    if (skipped)
      continue;
    std::string value;
    for (const auto& r : opt->results())
      value += (value.empty() ? "" : ",") + r;
    out += (out.empty() ? "" : " ") + name + "=" + value;
  }
  return out;
}

void
add_provenance(pfu_table* t, const std::string& command, const CLI::App& sub)
{
  const auto flags = canonical_flags(sub);
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a(command + " " + flags)));
  check(pfu_table_set_meta(t, "tool", "pfu"), "metadata");
  check(pfu_table_set_meta(t, "version", pfu_version()), "metadata");
  check(pfu_table_set_meta(t, "command", command.c_str()), "metadata");
  check(pfu_table_set_meta(t, "flags", flags.c_str()), "metadata");
  check(pfu_table_set_meta(t, "config_hash", hash), "metadata");
}

std::string
render(const pfu_table* t, const std::string& format)
{
  char* s = nullptr;
  if (format == "json")
    check(pfu_table_to_json(t, &s), "json output");
  else
    check(pfu_table_to_csv(t, &s), "csv output");
  return take_string(s);
}

struct TestOptions
{
  std::string input;
  std::string time_col = "time";
  std::string status_col = "status";
  double epsilon = 0.01;
  std::optional<double> tau;
  double alpha = 0.05;
  std::string method = "all";
  std::string tau_g = "max-obs";
  std::vector<double> cutoffs;
  std::size_t bootstrap_reps = 1000;
  std::uint64_t seed = 20240601;
  double tail_start = 0.0;
  double a = 0.34;
  std::optional<double> c;
  std::optional<double> h;
  std::optional<double> h0;
  std::optional<double> qn_critical;
  std::string quantile_table;
  std::string out = "csv";
  std::string output;
  std::string dump_estimators;
  std::string dump_bootstrap;
  unsigned threads = 1;
};

void
set(pfu_config* cfg, const char* key, const std::string& value)
{
  check(pfu_config_set(cfg, key, value.c_str()), std::string("--") + key);
}

void
set(pfu_config* cfg, const char* key, const std::optional<double>& value)
{
  if (value)
    set(cfg, key, fmt(*value));
}

Config
make_config(const TestOptions& o)
{
  pfu_config* raw = nullptr;
  check(pfu_config_create(&raw), "config");
  Config cfg(raw);
  set(cfg.get(), "epsilon", fmt(o.epsilon));
  set(cfg.get(), "tau", o.tau);
  set(cfg.get(), "alpha", fmt(o.alpha));
  set(cfg.get(), "a", fmt(o.a));
  set(cfg.get(), "c", o.c);
  set(cfg.get(), "h", o.h);
  set(cfg.get(), "h0", o.h0);
  set(cfg.get(), "qn_critical", o.qn_critical);
  set(cfg.get(), "tau_g", o.tau_g);
  set(cfg.get(), "bootstrap_reps", std::to_string(o.bootstrap_reps));
  set(cfg.get(), "seed", std::to_string(o.seed));
  set(cfg.get(), "tail_start", fmt(o.tail_start));
  set(cfg.get(), "threads", std::to_string(o.threads));
  return cfg;
}

bool
method_needs_tau(const std::string& list)
{
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (item == "sg" || item == "grenander" || item == "all")
      return true;
  return false;
}

QTable
load_qtable(const std::string& path)
{
  if (path.empty())
    return nullptr;
  pfu_qtable* raw = nullptr;
  check(pfu_qtable_read(path.c_str(), &raw), "--quantile-table");
  return QTable(raw);
}

int
run_test(const TestOptions& o, const CLI::App& sub)
{
  if (!o.tau && method_needs_tau(o.method))
    throw Failure{ 2, "--tau is required for methods sg and grenander" };
  if (o.out != "csv" && o.out != "json")
    throw Failure{ 2, "--out must be csv or json" };

  pfu_sample* raw = nullptr;
  check(pfu_sample_load_csv(o.input.c_str(), o.time_col.c_str(),
                            o.status_col.c_str(), &raw),
        "--input");
  Sample sample(raw);
  auto cfg = make_config(o);
  auto qt = load_qtable(o.quantile_table);

  pfu_table* traw = nullptr;
  check(pfu_what_if(sample.get(), cfg.get(), o.method.c_str(), o.cutoffs.data(),
                    o.cutoffs.size(), qt.get(), &traw),
        "test");
  Table table(traw);
  add_provenance(table.get(), "test", sub);

  if (!o.dump_estimators.empty()) {
    char* s = nullptr;
    check(pfu_dump_estimators(sample.get(), cfg.get(), &s), "--dump-estimators");
    write_text(o.dump_estimators, take_string(s));
  }
  if (!o.dump_bootstrap.empty()) {
    char* s = nullptr;
    check(pfu_dump_bootstrap(sample.get(), cfg.get(), &s), "--dump-bootstrap");
    write_text(o.dump_bootstrap, take_string(s));
  }
  write_text(o.output, render(table.get(), o.out));

  std::size_t rows = 0;
  std::size_t invalid = 0;
  std::size_t degenerate = 0;
  check(pfu_table_rows(table.get(), &rows), "table");
  check(pfu_table_error_counts(table.get(), &invalid, &degenerate), "table");
  if (rows > 0 && invalid == rows)
    return 2;
  if (rows > 0 && degenerate + invalid == rows)
    return 3;
  return 0;
}

struct SimulateOptions
{
  int setting = 1;
  std::string mode = "rejection";
  double p = 0.6;
  std::size_t n = 500;
  double mass = 0.02;
  double lambda = 5.0;
  double lambda_c = 0.5;
  double delta = 1.0;
  std::size_t reps = 200;
  std::size_t subjects = 10000;
  std::uint64_t seed = 20240601;
  std::string methods = "sg,grenander,alpha-n,tilde-alpha-n,qn";
  std::string grid;
  double epsilon = 0.01;
  double alpha = 0.05;
  double a = 0.34;
  std::optional<double> tau;
  std::size_t bootstrap_reps = 500;
  std::optional<double> qn_critical;
  std::size_t calibrate_qn = 0;
  std::string calibrate_qn_label;
  std::string quantile_table;
  std::string out = "csv";
  std::string output;
  unsigned threads = 1;
};

int
run_simulate(const SimulateOptions& o, const CLI::App& sub)
{
  if (o.out != "csv" && o.out != "json")
    throw Failure{ 2, "--out must be csv or json" };
  if (o.mode != "rejection" && o.mode != "censoring")
    throw Failure{ 2, "--mode must be rejection or censoring" };
  pfu_setting* sraw = nullptr;
  check(pfu_setting_create(o.setting, &sraw), "--setting");
  Setting setting(sraw);
  check(pfu_setting_set(setting.get(), "p", o.p), "--p");
  check(pfu_setting_set(setting.get(), "n", static_cast<double>(o.n)), "--n");
  check(pfu_setting_set(setting.get(), "mass", o.mass), "--mass");
  check(pfu_setting_set(setting.get(), "lambda", o.lambda), "--lambda");
  check(pfu_setting_set(setting.get(), "lambda_c", o.lambda_c), "--lambda-c");
  check(pfu_setting_set(setting.get(), "delta", o.delta), "--delta");

  pfu_table* traw = nullptr;
  std::string calibrated;
  if (o.mode == "censoring") {
    check(pfu_simulate_censoring(setting.get(), o.grid.c_str(), o.subjects,
                                 o.seed, o.threads, &traw),
          "simulate");
  } else {
    TestOptions t;
    t.epsilon = o.epsilon;
    t.alpha = o.alpha;
    t.a = o.a;
    t.tau = o.tau;
    t.bootstrap_reps = o.bootstrap_reps;
    t.qn_critical = o.qn_critical;
    t.threads = 1;
    auto cfg = make_config(t);
    if (o.calibrate_qn > 0) {
      if (o.qn_critical)
        throw Failure{ 2, "--qn-critical and --calibrate-qn are exclusive" };
      std::string label = o.calibrate_qn_label;
      if (label.empty())
        label = o.setting == 6 ? "y(n)" : o.setting == 7 ? "tau_g" : "q6";
      double crit = 0.0;
      check(pfu_calibrate_qn(setting.get(), label.c_str(), o.calibrate_qn,
                             o.alpha, o.seed ^ 0x51ed270b27a8f0d5ull, o.threads,
                             &crit),
            "--calibrate-qn");
      set(cfg.get(), "qn_critical", fmt(crit));
      calibrated = fmt(crit);
    }
    auto qt = load_qtable(o.quantile_table);
    check(pfu_simulate_rejection(setting.get(), o.grid.c_str(), o.methods.c_str(),
                                 o.reps, cfg.get(), qt.get(), o.seed, o.threads,
                                 &traw),
          "simulate");
  }
  Table table(traw);
  add_provenance(table.get(), "simulate", sub);
  if (!calibrated.empty())
    check(pfu_table_set_meta(table.get(), "qn_critical", calibrated.c_str()), "metadata");
  write_text(o.output, render(table.get(), o.out));
  return 0;
}

struct QuantileOptions
{
  std::vector<double> levels = { 0.9, 0.95, 0.975, 0.99 };
  std::size_t reps = 100000;
  double grid_step = 1e-3;
  double horizon = 50.0;
  std::uint64_t seed = 20240601;
  std::string out;
  unsigned threads = 1;
};

int
run_quantiles(const QuantileOptions& o)
{
  pfu_qtable* raw = nullptr;
  check(pfu_qtable_simulate(o.levels.data(), o.levels.size(), o.reps,
                            o.grid_step, o.horizon, o.seed, o.threads, &raw),
        "quantiles");
  QTable table(raw);
  if (!o.out.empty())
    check(pfu_qtable_write(table.get(), o.out.c_str()), "--out");
  std::cout << "level,value\n";
  for (double p : o.levels) {
    double v = 0.0;
    check(pfu_qtable_quantile(table.get(), p, &v), "quantile");
    std::cout << fmt(p) << "," << fmt(v) << "\n";
  }
  return 0;
}

} // namespace

int
main(int argc, char** argv)
{
  CLI::App app{ "Nonparametric test for practically sufficient follow-up in "
                "survival data with a cure fraction" };
  app.set_version_flag("--version", std::string(pfu_version()));
  app.set_config("--config", "", "TOML/INI file whose keys mirror the flags");
  app.require_subcommand(1);

  TestOptions t;
  auto* test = app.add_subcommand("test", "Run the tests on a CSV data set");
  test->add_option("--input", t.input, "CSV file with a header row")->required();
  test->add_option("--time-col", t.time_col, "Time column")->capture_default_str();
  test->add_option("--status-col", t.status_col, "Status column (1 event, 0 censored)")
    ->capture_default_str();
  test->add_option("--epsilon", t.epsilon)->capture_default_str();
  test->add_option("--tau", t.tau, "Upper bound of the uncured support; required for sg and grenander");
  test->add_option("--alpha", t.alpha)->capture_default_str();
  test->add_option("--method", t.method, "sg, grenander, alpha-n, tilde-alpha-n, qn, all or a comma list")
    ->capture_default_str();
  test->add_option("--tau-g", t.tau_g, "max-obs or a known value")->capture_default_str();
  test->add_option("--cutoff", t.cutoffs, "What-if cutoff (repeatable)");
  test->add_option("--bootstrap-reps", t.bootstrap_reps)->capture_default_str();
  test->add_option("--seed", t.seed)->capture_default_str();
  test->add_option("--tail-start", t.tail_start)->capture_default_str();
  test->add_option("--a", t.a, "Offset exponent of the Grenander test")->capture_default_str();
  test->add_option("--c", t.c, "Offset scale (default tau_G)");
  test->add_option("--bandwidth", t.h, "Bandwidth (default tau_G min(n^-1/5, 1/2))");
  test->add_option("--oversmoothing-bandwidth", t.h0, "Oversmoothing bandwidth (default tau_G min(0.7 n^-1/9, 1/2))");
  test->add_option("--qn-critical", t.qn_critical, "Critical value enabling Q_n decisions");
  test->add_option("--quantile-table", t.quantile_table, "Quantile cache from `pfu quantiles`");
  test->add_option("--out", t.out, "csv or json")->capture_default_str();
  test->add_option("--output", t.output, "Output file (default stdout)");
  test->add_option("--dump-estimators", t.dump_estimators, "Write estimator JSON to this file");
  test->add_option("--dump-bootstrap", t.dump_bootstrap, "Write bootstrap JSON to this file");
  test->add_option("--threads", t.threads)->capture_default_str();

  SimulateOptions s;
  auto* sim = app.add_subcommand("simulate", "Simulation study settings 1-7");
  sim->add_option("--setting", s.setting)->required();
  sim->add_option("--mode", s.mode, "rejection or censoring")->capture_default_str();
  sim->add_option("--p", s.p, "Uncured fraction")->capture_default_str();
  sim->add_option("--n", s.n)->capture_default_str();
  sim->add_option("--mass", s.mass, "Censoring mass at tau_G (settings 1, 3, 4, 7)")
    ->capture_default_str();
  sim->add_option("--lambda", s.lambda, "Uncured rate (setting 2)")->capture_default_str();
  sim->add_option("--lambda-c", s.lambda_c, "Censoring rate (setting 5)")->capture_default_str();
  sim->add_option("--delta", s.delta, "tau = y(n) + delta (setting 6)")->capture_default_str();
  sim->add_option("--reps", s.reps)->capture_default_str();
  sim->add_option("--subjects", s.subjects, "Subjects per grid point (censoring mode)")
    ->capture_default_str();
  sim->add_option("--seed", s.seed)->capture_default_str();
  sim->add_option("--methods", s.methods)->capture_default_str();
  sim->add_option("--grid", s.grid, "q1..q12, q13..q19, q1,q6,... or all");
  sim->add_option("--epsilon", s.epsilon)->capture_default_str();
  sim->add_option("--alpha", s.alpha)->capture_default_str();
  sim->add_option("--a", s.a)->capture_default_str();
  sim->add_option("--tau", s.tau, "Override tau (default 99.95% quantile of F_u)");
  sim->add_option("--bootstrap-reps", s.bootstrap_reps)->capture_default_str();
  sim->add_option("--qn-critical", s.qn_critical);
  sim->add_option("--calibrate-qn", s.calibrate_qn,
                  "Monte Carlo replications for a Q_n critical value");
  sim->add_option("--calibrate-qn-label", s.calibrate_qn_label,
                  "Grid point defining the calibration null (default q6)");
  sim->add_option("--quantile-table", s.quantile_table);
  sim->add_option("--out", s.out, "csv or json")->capture_default_str();
  sim->add_option("--output", s.output, "Output file (default stdout)");
  sim->add_option("--threads", s.threads)->capture_default_str();

  QuantileOptions q;
  auto* qua = app.add_subcommand("quantiles", "Simulate quantiles of D_R[W(t)](1)");
  qua->add_option("--levels", q.levels)->delimiter(',')->capture_default_str();
  qua->add_option("--reps", q.reps)->capture_default_str();
  qua->add_option("--grid-step", q.grid_step)->capture_default_str();
  qua->add_option("--horizon", q.horizon)->capture_default_str();
  qua->add_option("--seed", q.seed)->capture_default_str();
  qua->add_option("--out", q.out, "Cache file to write");
  qua->add_option("--threads", q.threads)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*test)
      return run_test(t, *test);
    if (*sim)
      return run_simulate(s, *sim);
    if (*qua)
      return run_quantiles(q);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
