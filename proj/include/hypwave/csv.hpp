#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace hypwave {

/// A header row plus numeric rows. Reals are written with 17 significant
/// digits and '.' as the decimal separator, independent of the locale.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a header column, -1 if absent.
  int column(const std::string &name) const;
  std::vector<double> column_values(int col) const;
};

std::string format_real(double v);

void write_csv(std::ostream &out, const CsvTable &t);
void write_csv(const std::filesystem::path &path, const CsvTable &t);

/// ValidationError (with line numbers) on ragged rows or non-numeric cells.
CsvTable read_csv(std::istream &in);
CsvTable read_csv(const std::filesystem::path &path);

} // namespace hypwave
