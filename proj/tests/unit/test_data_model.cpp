#include <doctest.h>

#include "pfu/data_model.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

using namespace pfu;

namespace {

std::string
error_of(const std::string& csv)
{
  try {
    parse_csv(csv, "time", "status", "data.csv");
  } catch (const InvalidArgument& e) {
    return e.what();
  }
  return {};
}

} // namespace

TEST_CASE("csv rows are sorted by time")
{
  const auto s = parse_csv("time,status\n2.0,1\n1.0,0\n3.0,1\n", "time", "status");
  REQUIRE(s.size() == 3);
  CHECK(s.observations()[0] == Observation{ 1.0, 0 });
  CHECK(s.observations()[1] == Observation{ 2.0, 1 });
  CHECK(s.observations()[2] == Observation{ 3.0, 1 });
  CHECK(s.event_count() == 2);
  CHECK(s.censored_count() == 1);
  CHECK(s.max_time() == 3.0);
  CHECK(*s.max_event_time() == 3.0);
}

TEST_CASE("events precede censorings at tied times")
{
  const SurvivalSample s({ { 1.0, 0 }, { 1.0, 1 }, { 0.5, 0 } });
  CHECK(s.observations()[1] == Observation{ 1.0, 1 });
  CHECK(s.observations()[2] == Observation{ 1.0, 0 });
}

TEST_CASE("csv errors name the offending row")
{
  CHECK(error_of("time,status\n1,1\n-1,1\n").find("row 3") != std::string::npos);
  CHECK(error_of("time,status\n1,1\n-1,1\n").find("positive") != std::string::npos);
  CHECK(error_of("time,status\n1,2\n").find("row 2") != std::string::npos);
  CHECK(error_of("time,status\n1,2\n").find("status") != std::string::npos);
  CHECK(error_of("t,status\n1,1\n").find("missing column 'time'") != std::string::npos);
  CHECK(error_of("time,status\n1,abc\n").find("cannot parse") != std::string::npos);
  CHECK(error_of("time,status\n").find("no data rows") != std::string::npos);
  CHECK(error_of("").find("empty") != std::string::npos);
}

TEST_CASE("csv with custom columns, quoting and extra cells")
{
  const auto s = parse_csv("id,\"months\",event\na,10,1\nb,4.5,0\n\n", "months", "event");
  REQUIRE(s.size() == 2);
  CHECK(s.observations()[0].time == 4.5);
  CHECK(s.max_event_time() == 10.0);
}

TEST_CASE("load_csv reports unreadable files as io errors")
{
  CHECK_THROWS_AS(load_csv("/nonexistent/dir/file.csv", "time", "status"), IoError);
  const auto path = std::filesystem::temp_directory_path() / "pfu_unit_load.csv";
  {
    std::ofstream(path) << "time,status\n3,1\n1,0\n";
  }
  const auto s = load_csv(path.string(), "time", "status");
  CHECK(s.size() == 2);
  CHECK(s.label() == path.string());
  std::filesystem::remove(path);
}

TEST_CASE("sample validation")
{
  CHECK_THROWS_AS(SurvivalSample(std::vector<Observation>{}), InvalidArgument);
  CHECK_THROWS_AS(SurvivalSample({ { 0.0, 1 } }), InvalidArgument);
  CHECK_THROWS_AS(SurvivalSample({ { NAN, 1 } }), InvalidArgument);
  CHECK_THROWS_AS(SurvivalSample({ { INFINITY, 0 } }), InvalidArgument);
  CHECK_THROWS_AS(SurvivalSample({ { 1.0, 3 } }), InvalidArgument);
  CHECK_NOTHROW(SurvivalSample::from_trusted({ { 0.0, 0 }, { 1.0, 1 } }));
  CHECK_FALSE(SurvivalSample({ { 1.0, 0 } }).max_event_time().has_value());
}

TEST_CASE("cutoff censors later observations at the cutoff")
{
  const SurvivalSample s({ { 100.0, 1 }, { 80.0, 1 }, { 95.0, 0 } });
  const auto c = apply_cutoff(s, 90.0);
  CHECK(c.observations()[0] == Observation{ 80.0, 1 });
  CHECK(c.observations()[1] == Observation{ 90.0, 0 });
  CHECK(c.observations()[2] == Observation{ 90.0, 0 });
  CHECK(c.event_count() == 1);

  const auto all = apply_cutoff(s, 50.0);
  CHECK(all.event_count() == 0);
  for (const auto& o : all.observations())
    CHECK(o == Observation{ 50.0, 0 });

  CHECK(apply_cutoff(s, 100.0) == s);
  CHECK_THROWS_AS(apply_cutoff(s, 0.0), InvalidArgument);
}

TEST_CASE("config resolution fills data-dependent defaults")
{
  std::vector<Observation> obs;
  for (int i = 1; i <= 32; ++i)
    obs.push_back({ 0.25 * i, i % 3 == 0 ? 0 : 1 });
  const SurvivalSample s(obs);
  TestConfig cfg;
  cfg.tau = 12.0;
  const auto r = resolve(cfg, s, true);
  CHECK(r.tau_g == 8.0);
  CHECK(r.c == 8.0);
  CHECK(r.h == doctest::Approx(8.0 * std::min(std::pow(32.0, -0.2), 0.5)));
  CHECK(r.h0 == doctest::Approx(8.0 * std::min(0.7 * std::pow(32.0, -1.0 / 9.0), 0.5)));
  CHECK(r.n == 32);

  cfg.tau_g = TauG::known(6.0);
  CHECK(resolve(cfg, s, true).tau_g == 6.0);

  auto bad = cfg;
  bad.tau = 5.0;
  CHECK_THROWS_AS(resolve(bad, s, true), InvalidArgument);
  bad = cfg;
  bad.tau.reset();
  CHECK_THROWS_AS(resolve(bad, s, true), InvalidArgument);
  CHECK_NOTHROW(resolve(bad, s, false));
  bad = cfg;
  bad.epsilon = 1.0;
  CHECK_THROWS_AS(resolve(bad, s, true), InvalidArgument);
  bad = cfg;
  bad.a = 0.3;
  CHECK_THROWS_AS(resolve(bad, s, true), InvalidArgument);
  bad = cfg;
  bad.bootstrap_reps = 0;
  CHECK_THROWS_AS(resolve(bad, s, true), InvalidArgument);
  bad = cfg;
  bad.tail_start = 6.0;
  CHECK_THROWS_AS(resolve(bad, s, true), InvalidArgument);
}

TEST_CASE("bandwidth defaults cap at half of tau_G")
{
  CHECK(default_bandwidth(10.0, 2) == 5.0);
  CHECK(default_bandwidth(10.0, 100000) == doctest::Approx(10.0 * std::pow(1e5, -0.2)));
  CHECK(default_oversmoothing_bandwidth(10.0, 10) == 5.0);
  CHECK(default_oversmoothing_bandwidth(2.0, 1000000) ==
        doctest::Approx(2.0 * 0.7 * std::pow(1e6, -1.0 / 9.0)));
}
