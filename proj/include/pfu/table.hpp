#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace pfu {

//! Empty cells are std::monostate.
using Cell = std::variant<std::monostate, std::string, double, std::int64_t, bool>;

//! Column-ordered result table with key/value metadata.
struct ResultTable
{
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;

  void add_row(std::vector<Cell> row);
  //! Replaces an existing key in place, otherwise appends.
  void set_meta(const std::string& key, std::string value);
  std::size_t column(const std::string& name) const;
};

//! %.12g; nan, inf and -inf spelled out.
std::string format_number(double v);
std::string format_cell(const Cell& c);

//! Metadata as leading "# key: value" lines, then a header row.
std::string to_csv(const ResultTable& t);
//! {"metadata": {...}, "columns": [...], "rows": [{...}, ...]}
std::string to_json(const ResultTable& t);

} // namespace pfu
