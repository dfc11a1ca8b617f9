#ifndef LQGCAP_CLI_CSV_HPP
#define LQGCAP_CLI_CSV_HPP

#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace lqgcap::cli {

using CsvCell = std::variant<double, long long, std::string>;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<CsvCell>> rows;
};

/// Doubles use 12 significant digits; strings are quoted when needed.
std::string format_cell(const CsvCell& cell);

void write_csv(const CsvTable& table, std::ostream& out);

/// An empty path or "-" writes to stdout.
void write_csv(const CsvTable& table, const std::string& path);

/// Splits a CSV document into fields (quotes honoured).
std::vector<std::vector<std::string>> read_csv(const std::string& text);

}  // namespace lqgcap::cli

#endif  // LQGCAP_CLI_CSV_HPP
