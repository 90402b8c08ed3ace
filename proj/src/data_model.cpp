#include "pfu/data_model.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace pfu {

namespace {

void
sort_observations(std::vector<Observation>& obs)
{
  std::stable_sort(
    obs.begin(), obs.end(), [](const Observation& l, const Observation& r) {
      if (l.time != r.time)
        return l.time < r.time;
      return l.status > r.status;
    });
}

std::string
trim(std::string_view s)
{
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  auto e = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(b, e - b + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"')
    out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string>
split_row(const std::string& line)
{
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
      cur.push_back(ch);
    } else if (ch == ',' && !quoted) {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

bool
parse_double(const std::string& s, double& out)
{
  if (s.empty())
    return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return errno == 0 && end == s.c_str() + s.size() && std::isfinite(out);
}

} // namespace

SurvivalSample::SurvivalSample(std::vector<Observation> obs, std::string label)
  : obs_(std::move(obs))
  , label_(std::move(label))
{
  if (obs_.empty())
    throw InvalidArgument("survival sample must not be empty");
  for (std::size_t i = 0; i < obs_.size(); ++i) {
    const auto& o = obs_[i];
    if (!std::isfinite(o.time) || o.time <= 0.0)
      throw InvalidArgument("observation " + std::to_string(i + 1) +
                            ": time must be a positive finite number");
    if (o.status != 0 && o.status != 1)
      throw InvalidArgument("observation " + std::to_string(i + 1) +
                            ": status must be 0 or 1");
  }
  sort_observations(obs_);
  events_ = static_cast<std::size_t>(std::count_if(
    obs_.begin(), obs_.end(), [](const Observation& o) { return o.status == 1; }));
}

SurvivalSample
SurvivalSample::from_trusted(std::vector<Observation> obs, std::string label)
{
  if (obs.empty())
    throw InvalidArgument("survival sample must not be empty");
  SurvivalSample s;
  s.obs_ = std::move(obs);
  s.label_ = std::move(label);
  sort_observations(s.obs_);
  s.events_ = static_cast<std::size_t>(
    std::count_if(s.obs_.begin(), s.obs_.end(), [](const Observation& o) {
      return o.status == 1;
    }));
  return s;
}

double
SurvivalSample::max_time() const
{
  if (obs_.empty())
    throw InvalidArgument("empty sample has no maximum time");
  return obs_.back().time;
}

std::optional<double>
SurvivalSample::max_event_time() const
{
  for (auto it = obs_.rbegin(); it != obs_.rend(); ++it)
    if (it->status == 1)
      return it->time;
  return std::nullopt;
}

SurvivalSample
parse_csv(const std::string& text,
          const std::string& time_column,
          const std::string& status_column,
          const std::string& source)
{
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 &&
        line.compare(0, 3, "\xEF\xBB\xBF") == 0)
      line.erase(0, 3);
    if (!trim(line).empty()) {
      header = split_row(line);
      break;
    }
  }
  if (header.empty())
    throw InvalidArgument(source + ": empty file");

  auto column_index = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw InvalidArgument(source + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto ti = column_index(time_column);
  const auto si = column_index(status_column);

  std::vector<Observation> obs;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty())
      continue;
    auto cells = split_row(line);
    const std::string where = source + ": row " + std::to_string(line_no);
    if (cells.size() <= std::max(ti, si))
      throw InvalidArgument(where + ": too few cells");
    double t = 0.0, s = 0.0;
    if (!parse_double(cells[ti], t))
      throw InvalidArgument(where + ": cannot parse time '" + cells[ti] + "'");
    if (!parse_double(cells[si], s))
      throw InvalidArgument(where + ": cannot parse status '" + cells[si] +
                            "'");
    if (t <= 0.0)
      throw InvalidArgument(where + ": time must be positive, got " +
                            cells[ti]);
    if (s != 0.0 && s != 1.0)
      throw InvalidArgument(where + ": status must be 0 or 1, got " +
                            cells[si]);
    obs.push_back({ t, static_cast<int>(s) });
  }
  if (obs.empty())
    throw InvalidArgument(source + ": no data rows");
  return SurvivalSample(std::move(obs), source);
}

SurvivalSample
load_csv(const std::string& path,
         const std::string& time_column,
         const std::string& status_column)
{
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str(), time_column, status_column, path);
}

SurvivalSample
apply_cutoff(const SurvivalSample& sample, double cutoff)
{
  if (!(cutoff > 0.0) || !std::isfinite(cutoff))
    throw InvalidArgument("cutoff must be positive");
  std::vector<Observation> obs(sample.observations().begin(),
                               sample.observations().end());
  for (auto& o : obs)
    if (o.time > cutoff)
      o = { cutoff, 0 };
  return SurvivalSample::from_trusted(std::move(obs), sample.label());
}

double
default_bandwidth(double tau_g, std::size_t n)
{
  return tau_g * std::min(std::pow(static_cast<double>(n), -0.2), 0.5);
}

double
default_oversmoothing_bandwidth(double tau_g, std::size_t n)
{
  return tau_g *
         std::min(0.7 * std::pow(static_cast<double>(n), -1.0 / 9.0), 0.5);
}

ResolvedConfig
resolve(const TestConfig& cfg, const SurvivalSample& sample, bool require_tau)
{
  if (sample.empty())
    throw InvalidArgument("empty sample");
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0))
    throw InvalidArgument("epsilon must lie in (0, 1)");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw InvalidArgument("alpha must lie in (0, 1)");
  if (!(cfg.a > 1.0 / 3.0 && cfg.a < 1.0))
    throw InvalidArgument("a must lie in (1/3, 1)");
  if (cfg.bootstrap_reps < 1)
    throw InvalidArgument("bootstrap_reps must be at least 1");

  ResolvedConfig r{};
  r.n = sample.size();
  if (cfg.tau_g.mode == TauG::Mode::known) {
    if (!(cfg.tau_g.value > 0.0) || !std::isfinite(cfg.tau_g.value))
      throw InvalidArgument("known tau_G must be positive");
    r.tau_g = cfg.tau_g.value;
  } else {
    r.tau_g = sample.max_time();
  }
  if (cfg.c && !(*cfg.c > 0.0))
    throw InvalidArgument("c must be positive");
  if (cfg.h && !(*cfg.h > 0.0))
    throw InvalidArgument("h must be positive");
  if (cfg.h0 && !(*cfg.h0 > 0.0))
    throw InvalidArgument("h0 must be positive");
  if (!(cfg.tail_start >= 0.0 && cfg.tail_start < r.tau_g))
    throw InvalidArgument("tail_start must lie in [0, tau_G)");
  if (require_tau && !cfg.tau)
    throw InvalidArgument("tau is required for this method");
  if (cfg.tau && !(*cfg.tau > r.tau_g))
    throw InvalidArgument("tau must exceed tau_G (" +
                          std::to_string(r.tau_g) + ")");

  r.epsilon = cfg.epsilon;
  r.tau = cfg.tau;
  r.alpha = cfg.alpha;
  r.a = cfg.a;
  r.c = cfg.c.value_or(r.tau_g);
  r.h = cfg.h.value_or(default_bandwidth(r.tau_g, r.n));
  r.h0 = cfg.h0.value_or(default_oversmoothing_bandwidth(r.tau_g, r.n));
  r.bootstrap_reps = cfg.bootstrap_reps;
  r.tail_start = cfg.tail_start;
  r.seed = cfg.seed;
  r.threads = std::max(1u, cfg.threads);
  return r;
}

} // namespace pfu
