#include "hypwave/csv.hpp"

#include "hypwave/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>

namespace hypwave {

int CsvTable::column(const std::string &name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name)
      return static_cast<int>(i);
  return -1;
}

std::vector<double> CsvTable::column_values(int col) const {
  if (col < 0 || col >= static_cast<int>(header.size()))
    throw std::out_of_range("CSV column index out of range");
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto &r : rows)
    v.push_back(r[col]);
  return v;
}

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

void write_csv(std::ostream &out, const CsvTable &t) {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    out << (i ? "," : "") << t.header[i];
  out << '\n';
  for (const auto &r : t.rows) {
    if (r.size() != t.header.size())
      throw std::invalid_argument("CSV row width differs from the header");
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i)
        line += ',';
      line += format_real(r[i]);
    }
    out << line << '\n';
  }
}

void write_csv(const std::filesystem::path &path, const CsvTable &t) {
  std::ofstream out(path);
  if (!out)
    throw ValidationError("cannot write " + path.string());
  write_csv(out, t);
  if (!out)
    throw ValidationError("error while writing " + path.string());
}

namespace {

std::vector<std::string> split_cells(const std::string &line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ','))
    cells.push_back(cell);
  if (!line.empty() && line.back() == ',')
    cells.emplace_back();
  return cells;
}

} // namespace

CsvTable read_csv(std::istream &in) {
  CsvTable t;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    auto cells = split_cells(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size())
      throw ValidationError(fmt::format("line {}: expected {} columns, got {}",
                                        line_no, t.header.size(), cells.size()));
    std::vector<double> row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string &c = cells[i];
      const char *first = c.data();
      const char *last = c.data() + c.size();
      auto [ptr, ec] = std::from_chars(first, last, row[i]);
      if (ec != std::errc() || ptr != last || c.empty())
        throw ValidationError(
            fmt::format("line {}: '{}' is not a number", line_no, c));
    }
    t.rows.push_back(std::move(row));
  }
  if (!have_header)
    throw ValidationError("empty CSV file");
  return t;
}

CsvTable read_csv(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open " + path.string());
  try {
    return read_csv(in);
  } catch (const ValidationError &e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

} // namespace hypwave
