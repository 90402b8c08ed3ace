#pragma once

#include "pfu/asymptotics.hpp"
#include "pfu/data_model.hpp"
#include "pfu/hypothesis_tests.hpp"
#include "pfu/parallel.hpp"
#include "pfu/table.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pfu {

struct UncuredSpec
{
  enum class Kind
  {
    exponential,
    weibull,
    truncated_exponential,
    lognormal_mixture
  };
  Kind kind = Kind::exponential;
  double rate = 1.0;     // exponential, truncated exponential
  double shape = 1.0;    // weibull
  double scale = 1.0;    // weibull
  double endpoint = 0.0; // truncated exponential
  std::vector<double> weights;
  std::vector<double> mu;
  std::vector<double> sigma;

  double cdf(double t) const;
  double quantile(double level) const;
  //! tau_{F_u}; +inf for unbounded support.
  double right_endpoint() const;
  double sample(Rng& rng) const;
};

struct CensoringSpec
{
  enum class Kind
  {
    uniform_with_mass,    // C = min(U[0, zeta], tau_G)
    exponential_capped,   // C = min(Exp(rate), tau_G)
    exponential_uncapped, // C = Exp(rate)
  };
  Kind kind = Kind::uniform_with_mass;
  double mass = 0.0; // Delta G(tau_G)
  double rate = 0.5;
};

//! zeta such that P(U[0, zeta] >= tau_G) = mass; tau_G when mass = 0.
double uniform_censoring_zeta(double tau_g, double mass);

//! User-facing parameters; unused ones are ignored for a given setting.
struct SettingParams
{
  int setting = 1;
  double p = 0.6;
  std::size_t n = 500;
  double mass = 0.02;    // settings 1, 3, 4 (and 7)
  double lambda = 5.0;   // setting 2 uncured rate
  double lambda_c = 0.5; // setting 5 censoring rate
  double delta = 1.0;    // setting 6: tau = y_(n) + delta
};

struct SettingSpec
{
  int id = 1;
  UncuredSpec uncured;
  CensoringSpec censoring;
  double p = 0.6;
  std::size_t n = 500;
  //! Current censoring endpoint; +inf for setting 6.
  double tau_g = 0.0;
  double delta = 1.0;
};

SettingSpec make_setting(const SettingParams& params);

//! Grid labels available for a setting: q1..q12 for settings 1-5 (q13..q19
//! additionally for 4-5), "y(n)" for setting 6, "tau_g" for setting 7.
std::vector<std::string> default_grid(const SettingSpec& spec);
//! Parses "q1..q12", "q13..q19", "q1,q5,q12", "all"; validates per setting.
std::vector<std::string> parse_grid(const SettingSpec& spec, const std::string& text);

//! tau_G for a grid label.
double setting_quantile(const SettingSpec& spec, const std::string& label);
SettingSpec at_grid_point(SettingSpec spec, const std::string& label);

//! 99.95% quantile of F_u; when that is not above tau_G (the extra grid
//! points beyond tau_{F_u}) the gap between it and q12 is added to tau_G.
double default_tau(const SettingSpec& spec);

SurvivalSample generate(const SettingSpec& spec, Rng& rng);
SurvivalSample generate(const SettingSpec& spec, std::uint64_t seed);

//! Test configuration used for one replicate of a setting.
TestConfig replicate_config(const SettingSpec& spec,
                            const TestConfig& base,
                            const SurvivalSample& sample,
                            std::uint64_t bootstrap_seed);

struct RejectionCell
{
  std::string label;
  double tau_g = 0.0;
  Method method = Method::sg;
  std::size_t reps = 0;
  std::size_t decisions = 0;
  std::size_t rejections = 0;
  std::size_t failures = 0;
  std::optional<double> rate;
  std::optional<double> se;
  double mean_statistic = 0.0;
};

//! Replicate r at grid index g draws data from stream (seed, g, r); every
//! method runs on the same data. Rates are over replicates that produced a
//! decision; failures are counted separately.
std::vector<RejectionCell> rejection_rate(const SettingSpec& spec,
                                          const std::vector<std::string>& grid,
                                          const std::vector<Method>& methods,
                                          std::size_t reps,
                                          const TestConfig& base,
                                          std::uint64_t seed,
                                          unsigned threads,
                                          const QuantileTable* table);

struct CensoringRateRow
{
  std::string label;
  double tau_g;
  std::size_t subjects;
  std::size_t censored;
  double rate;
};

//! `subjects` draws per grid point (in blocks of n), stream (seed, g, block).
std::vector<CensoringRateRow> censoring_rate(const SettingSpec& spec,
                                             const std::vector<std::string>& grid,
                                             std::size_t subjects,
                                             std::uint64_t seed,
                                             unsigned threads);

//! Upper (1 - alpha) empirical quantile of n q_hat over `reps` samples of
//! `spec`, for use as Q_n critical value.
double calibrate_qn_critical(const SettingSpec& spec,
                             std::size_t reps,
                             double alpha,
                             std::uint64_t seed,
                             unsigned threads);

std::string describe(const SettingSpec& spec);

ResultTable rejection_result_table(const SettingSpec& spec,
                                   const std::vector<RejectionCell>& cells);
ResultTable censoring_result_table(const SettingSpec& spec,
                                   const std::vector<CensoringRateRow>& rows);

} // namespace pfu
