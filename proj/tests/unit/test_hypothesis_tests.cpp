#include <doctest.h>

#include "pfu/hypothesis_tests.hpp"
#include "pfu/simulation.hpp"

#include <cmath>
#include <random>

using namespace pfu;

namespace {

// n = 286, largest event 80, largest observation 171, 107 events.
SurvivalSample
breast_cancer_like()
{
  std::vector<Observation> obs;
  for (int i = 0; i < 107; ++i)
    obs.push_back({ 2.0 + 78.0 * i / 106.0, 1 });
  for (int i = 0; i < 179; ++i)
    obs.push_back({ 1.0 + 170.0 * i / 178.0, 0 });
  return SurvivalSample(obs);
}

SurvivalSample
random_sample(std::mt19937_64& rng, std::size_t n)
{
  SettingParams p;
  p.setting = 1 + static_cast<int>(rng() % 3);
  p.n = n;
  p.mass = 0.1;
  const auto spec = at_grid_point(make_setting(p), "q" + std::to_string(1 + rng() % 12));
  return generate(spec, rng);
}

} // namespace

TEST_CASE("method names")
{
  CHECK(method_name(Method::tilde_alpha_n) == "tilde-alpha-n");
  CHECK(parse_method("alpha-n") == Method::alpha_n);
  CHECK_THROWS_AS(parse_method("tn"), InvalidArgument);
  CHECK(parse_methods("all").size() == 5);
  CHECK(parse_methods("sg,qn") == std::vector<Method>{ Method::sg, Method::qn });
  CHECK(needs_tau(Method::grenander));
  CHECK_FALSE(needs_tau(Method::qn));
}

TEST_CASE("q_hat window")
{
  // all events at 1, one censoring at 3: window (-1, 1]
  const SurvivalSample a({ { 1, 1 }, { 1, 1 }, { 1, 1 }, { 3, 0 } });
  CHECK(q_hat_n(a) == doctest::Approx(0.75));
  // largest observation is an event: empty window
  const SurvivalSample b({ { 1, 1 }, { 2, 0 }, { 3, 1 } });
  CHECK(q_hat_n(b) == 0.0);
  CHECK_THROWS_AS(q_hat_n(SurvivalSample({ { 1, 0 } })), DegenerateError);
}

TEST_CASE("alpha_n")
{
  TestConfig cfg;
  const SurvivalSample empty_window({ { 1, 1 }, { 3, 1 } });
  const auto r0 = alpha_n_test(empty_window, cfg);
  CHECK(r0.statistic == 1.0);
  CHECK_FALSE(*r0.reject);

  // n = 4, one event in (2, 3]
  const SurvivalSample four({ { 0.5, 0 }, { 1, 1 }, { 3, 1 }, { 4, 0 } });
  const auto r1 = alpha_n_test(four, cfg);
  CHECK(r1.statistic == doctest::Approx(std::pow(0.75, 4)));
  CHECK(r1.statistic == doctest::Approx(0.31640625));
  CHECK_FALSE(*r1.reject);
  CHECK(*r1.p_value == r1.statistic);
}

TEST_CASE("breast cancer summary counts")
{
  const auto s = breast_cancer_like();
  CHECK(q_hat_n(s) == doctest::Approx(107.0 / 286.0));
  const auto r = alpha_n_test(s, TestConfig{});
  const double log_expected = 286.0 * std::log(179.0 / 286.0);
  CHECK(*r.diagnostic("log_statistic") == doctest::Approx(log_expected));
  CHECK(std::log10(r.statistic) == doctest::Approx(-58.2).epsilon(0.01));
  CHECK(*r.reject);
  CHECK(qn_statistic(s) == doctest::Approx(107.0));
}

TEST_CASE("tilde alpha_n window")
{
  // n = 5, largest event 4, largest observation 8: window (2, 4]
  const SurvivalSample s({ { 1, 1 }, { 2.5, 1 }, { 3, 0 }, { 4, 1 }, { 8, 0 } });
  CHECK(q_tilde_n(s) == doctest::Approx(0.4));
  const auto r = tilde_alpha_n_test(s, TestConfig{});
  CHECK(r.statistic == doctest::Approx(std::pow(0.6, 5)));
  const SurvivalSample last_event({ { 1, 1 }, { 2, 1 } });
  CHECK(tilde_alpha_n_test(last_event, TestConfig{}).statistic == 1.0);
}

TEST_CASE("Q_n is statistic-only without a critical value")
{
  const SurvivalSample s({ { 1, 1 }, { 1, 1 }, { 1, 1 }, { 3, 0 } });
  TestConfig cfg;
  const auto r = qn_test(s, cfg);
  CHECK(r.statistic == doctest::Approx(3.0));
  CHECK_FALSE(r.reject.has_value());
  cfg.qn_critical = 2.5;
  CHECK(*qn_test(s, cfg).reject);
  cfg.qn_critical = 3.0;
  CHECK_FALSE(*qn_test(s, cfg).reject);
  const SurvivalSample none({ { 1, 1 }, { 3, 1 } });
  CHECK(qn_statistic(none) == 0.0);
}

TEST_CASE("grenander decision equals the threshold form of the rule")
{
  std::mt19937_64 rng(51);
  const auto& table = default_dr_w_table();
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_sample(rng, 100 + rng() % 300);
    TestConfig cfg;
    cfg.tau = s.max_time() * (1.05 + 0.5 * (rng() % 100) / 100.0);
    cfg.epsilon = 0.01 + 0.1 * (rng() % 100) / 100.0;
    const auto r = grenander_test(s, cfg, table);
    if (!std::isfinite(r.statistic))
      continue;
    const double f = *r.diagnostic("f_grenander");
    const double bound = *r.diagnostic("bound");
    const double A1 = *r.diagnostic("A1_hat");
    const double n = static_cast<double>(s.size());
    const double q = table.quantile(0.95);
    const double rhs = bound - q / (A1 * std::pow(n, 0.5 * (1.0 - 0.34)));
    if (std::abs(f - rhs) < 1e-12)
      continue;
    CHECK(*r.reject == (f <= rhs));
    CHECK(*r.reject == (*r.p_value <= 0.05 + 1e-12));
    ++checked;
  }
  CHECK(checked > 40);
}

TEST_CASE("grenander with a zero plug-in")
{
  // flat KME over the offset point: majorant slope 0 near tau_G
  std::vector<Observation> obs;
  for (int i = 1; i <= 40; ++i)
    obs.push_back({ 0.01 * i, 1 });
  for (int i = 0; i < 60; ++i)
    obs.push_back({ 10.0, 0 });
  const SurvivalSample s(obs);
  TestConfig cfg;
  cfg.tau = 11.0;
  cfg.c = 1.0;
  const auto r = grenander_test(s, cfg, default_dr_w_table());
  CHECK(r.diagnostic("degenerate_statistic").has_value());
  CHECK(std::isinf(r.statistic));
  CHECK(*r.reject);
  CHECK(*r.p_value == 0.0);
}

TEST_CASE("sg p-value and decision agree")
{
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto s = random_sample(rng, 25 + rng() % 20);
    if (s.event_count() == 0 || s.censored_count() == 0)
      continue;
    TestConfig cfg;
    cfg.tau = 1.5 * s.max_time();
    cfg.bootstrap_reps = 40;
    cfg.seed = rng();
    const auto r = sg_test(s, cfg);
    CHECK(*r.reject == (*r.p_value < cfg.alpha));
  }
}

TEST_CASE("larger epsilon never turns a rejection into a non-rejection")
{
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 40; ++trial) {
    const auto s = random_sample(rng, 150);
    TestConfig cfg;
    cfg.tau = 1.3 * s.max_time();
    cfg.bootstrap_reps = 60;
    cfg.seed = 5;
    bool g_prev = false, sg_prev = false;
    for (double eps : { 0.005, 0.01, 0.05, 0.1, 0.3 }) {
      cfg.epsilon = eps;
      const bool g = *grenander_test(s, cfg, default_dr_w_table()).reject;
      const bool sg = *sg_test(s, cfg).reject;
      CHECK((g || !g_prev));
      CHECK((sg || !sg_prev));
      g_prev = g;
      sg_prev = sg;
    }
  }
}

TEST_CASE("sg diagnostics and bootstrap export")
{
  std::mt19937_64 rng(54);
  const auto s = random_sample(rng, 200);
  TestConfig cfg;
  cfg.tau = 2.0 * s.max_time();
  cfg.bootstrap_reps = 80;
  BootstrapOutput boot;
  const auto r = sg_test(s, cfg, &boot);
  CHECK(boot.diffs.size() == 80);
  CHECK(*r.threshold == boot.critical_quantile);
  CHECK(r.statistic == doctest::Approx(*r.diagnostic("f_sg") - *r.diagnostic("bound")));
  const auto kme = kaplan_meier(s);
  const auto bc = bound_components(kme, resolve(cfg, s, true));
  CHECK(bc.bound == doctest::Approx(0.01 * kme(s.max_time()) / (cfg.tau.value() - s.max_time())));
}

TEST_CASE("what-if table")
{
  std::mt19937_64 rng(55);
  const auto s = random_sample(rng, 250);
  TestConfig cfg;
  cfg.tau = 2.0 * s.max_time();
  cfg.bootstrap_reps = 50;
  const auto methods = parse_methods("all");
  const double y = s.max_time();

  const auto full = what_if_table(s, {}, cfg, methods, nullptr);
  const auto at_y = what_if_table(s, { y }, cfg, methods, nullptr);
  REQUIRE(full.size() == methods.size());
  for (std::size_t i = 0; i < full.size(); ++i) {
    CHECK_FALSE(full[i].cutoff.has_value());
    CHECK(*at_y[i].cutoff == y);
    REQUIRE(full[i].result.has_value());
    CHECK(full[i].result->statistic == at_y[i].result->statistic);
    CHECK(full[i].result->reject == at_y[i].result->reject);
  }

  const auto cuts = what_if_table(s, { 0.4 * y, 0.7 * y }, cfg, methods, nullptr);
  REQUIRE(cuts.size() == 2 * methods.size());
  CHECK(cuts.front().events < cuts.back().events);
  CHECK(cuts.front().tau_g == doctest::Approx(0.4 * y));

  // a cutoff below every observation leaves no events: recorded in-cell
  const auto none = what_if_table(s, { 1e-9 }, cfg, { Method::alpha_n, Method::sg }, nullptr);
  for (const auto& c : none) {
    CHECK(c.error == ErrorKind::degenerate);
    CHECK_FALSE(c.message.empty());
  }

  CHECK_THROWS_AS(what_if_table(s, { 2.0, 1.0 }, cfg, methods, nullptr), InvalidArgument);
  CHECK_THROWS_AS(what_if_table(s, { -1.0 }, cfg, methods, nullptr), InvalidArgument);
  CHECK_THROWS_AS(what_if_table(s, {}, cfg, {}, nullptr), InvalidArgument);

  const auto t = what_if_result_table(cuts);
  CHECK(t.rows.size() == cuts.size());
  CHECK(t.columns[t.column("status")] == "status");
}

TEST_CASE("missing tau is an invalid cell for the density tests only")
{
  std::mt19937_64 rng(56);
  const auto s = random_sample(rng, 120);
  TestConfig cfg;
  const auto cells =
    what_if_table(s, {}, cfg, { Method::grenander, Method::alpha_n }, nullptr);
  CHECK(cells[0].error == ErrorKind::invalid);
  CHECK(cells[1].error == ErrorKind::none);
}
