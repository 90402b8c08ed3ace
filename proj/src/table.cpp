#include "pfu/table.hpp"

#include "pfu/data_model.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace pfu {

namespace {

std::string
csv_escape(const std::string& s)
{
  if (s.find_first_of(",\"\n\r") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"')
      out += '"';
    out += ch;
  }
  return out + "\"";
}

nlohmann::ordered_json
cell_json(const Cell& c)
{
  return std::visit(
    [](const auto& v) -> nlohmann::ordered_json {
      using T = std::decay_t<decltype(v)>;
      if constexpr (std::is_same_v<T, std::monostate>)
        return nullptr;
      else if constexpr (std::is_same_v<T, double>) {
        if (std::isfinite(v))
          return v;
        return format_number(v);
      } else
        return v;
    },
    c);
}

} // namespace

void
ResultTable::add_row(std::vector<Cell> row)
{
  if (row.size() != columns.size())
    throw InvalidArgument("row width does not match the column count");
  rows.push_back(std::move(row));
}

void
ResultTable::set_meta(const std::string& key, std::string value)
{
  for (auto& [k, v] : metadata)
    if (k == key) {
      v = std::move(value);
      return;
    }
  metadata.emplace_back(key, std::move(value));
}

std::size_t
ResultTable::column(const std::string& name) const
{
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name)
      return i;
  throw InvalidArgument("no column named '" + name + "'");
}

std::string
format_number(double v)
{
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string
format_cell(const Cell& c)
{
  return std::visit(
    [](const auto& v) -> std::string {
      using T = std::decay_t<decltype(v)>;
      if constexpr (std::is_same_v<T, std::monostate>)
        return "";
      else if constexpr (std::is_same_v<T, std::string>)
        return v;
      else if constexpr (std::is_same_v<T, double>)
        return format_number(v);
      else if constexpr (std::is_same_v<T, bool>)
        return v ? "true" : "false";
      else
        return std::to_string(v);
    },
    c);
}

std::string
to_csv(const ResultTable& t)
{
  std::ostringstream os;
  for (const auto& [k, v] : t.metadata)
    os << "# " << k << ": " << v << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    os << (i ? "," : "") << csv_escape(t.columns[i]);
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << csv_escape(format_cell(row[i]));
    os << "\n";
  }
  return os.str();
}

std::string
to_json(const ResultTable& t)
{
  nlohmann::ordered_json j;
  j["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : t.metadata)
    j["metadata"][k] = v;
  j["columns"] = t.columns;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i)
      r[t.columns[i]] = cell_json(row[i]);
    j["rows"].push_back(std::move(r));
  }
  return j.dump(2) + "\n";
}

} // namespace pfu
