#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfu {

//! Raised when an input violates a documented precondition.
class InvalidArgument : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

//! Raised when a computation hits a degenerate configuration of the data
//! (no events, zero density plug-in, undefined bootstrap, ...).
class DegenerateError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! Raised when a file cannot be read or written.
class IoError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct Observation
{
  double time;
  int status; // 1 = event, 0 = censored

  friend bool operator==(const Observation&, const Observation&) = default;
};

//! Right-censored sample, stored sorted by time (events before censorings at
//! tied times).
class SurvivalSample
{
public:
  SurvivalSample() = default;

  //! Validates and sorts. Throws InvalidArgument on empty input, nonpositive
  //! or non-finite times and statuses outside {0, 1}.
  explicit SurvivalSample(std::vector<Observation> obs, std::string label = {});

  //! Builds a sample without the positivity check on times. Used for
  //! internally generated samples (bootstrap draws) which may contain 0.
  static SurvivalSample from_trusted(std::vector<Observation> obs,
                                     std::string label = {});

  std::span<const Observation> observations() const { return obs_; }
  const std::string& label() const { return label_; }
  std::size_t size() const { return obs_.size(); }
  bool empty() const { return obs_.empty(); }

  std::size_t event_count() const { return events_; }
  std::size_t censored_count() const { return obs_.size() - events_; }

  //! y_(n)
  double max_time() const;
  //! largest event time; nullopt when the sample has no events
  std::optional<double> max_event_time() const;

  friend bool operator==(const SurvivalSample& a, const SurvivalSample& b)
  {
    return a.obs_ == b.obs_;
  }

private:
  std::vector<Observation> obs_;
  std::string label_;
  std::size_t events_ = 0;
};

SurvivalSample load_csv(const std::string& path,
                        const std::string& time_column,
                        const std::string& status_column);

//! Parses CSV text. `source` only feeds error messages.
SurvivalSample parse_csv(const std::string& text,
                         const std::string& time_column,
                         const std::string& status_column,
                         const std::string& source = "<memory>");

//! Observations with time > cutoff become (cutoff, 0).
SurvivalSample apply_cutoff(const SurvivalSample& sample, double cutoff);

//! How the right endpoint of the censoring support is obtained.
struct TauG
{
  enum class Mode
  {
    known,
    max_observed
  };
  Mode mode = Mode::max_observed;
  double value = 0.0;

  static TauG known(double v) { return { Mode::known, v }; }
  static TauG max_observed() { return { Mode::max_observed, 0.0 }; }
};

//! All tuning constants of the tests. Unset optionals take data-dependent
//! defaults when resolved against a sample.
struct TestConfig
{
  double epsilon = 0.01;
  std::optional<double> tau;
  double alpha = 0.05;
  double a = 0.34;
  std::optional<double> c; // default: tau_G
  TauG tau_g = TauG::max_observed();
  std::optional<double> h;  // default: tau_G * min(n^{-1/5}, 0.5)
  std::optional<double> h0; // default: tau_G * min(0.7 n^{-1/9}, 0.5)
  std::size_t bootstrap_reps = 1000;
  double tail_start = 0.0;
  std::uint64_t seed = 20240601;
  double gamma = 1.0;
  std::optional<double> qn_critical;
  unsigned threads = 1;
};

//! TestConfig with every default filled in for one sample.
struct ResolvedConfig
{
  double epsilon;
  std::optional<double> tau;
  double alpha;
  double a;
  double c;
  double tau_g;
  double h;
  double h0;
  std::size_t bootstrap_reps;
  double tail_start;
  std::uint64_t seed;
  std::size_t n;
  unsigned threads;
};

double default_bandwidth(double tau_g, std::size_t n);
double default_oversmoothing_bandwidth(double tau_g, std::size_t n);

//! Validates cfg and resolves defaults. `require_tau` is false for the
//! count-based comparators.
ResolvedConfig resolve(const TestConfig& cfg,
                       const SurvivalSample& sample,
                       bool require_tau);

} // namespace pfu
