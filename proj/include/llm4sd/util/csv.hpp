//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

// RFC 4180 style CSV: quoted fields may contain commas, newlines and doubled
// quotes. CRLF and LF line ends are both accepted.

#ifndef LLM4SD_UTIL_CSV_HPP_
#define LLM4SD_UTIL_CSV_HPP_

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace llm4sd::util {

class CsvError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based source line where each row starts.
  std::vector<std::size_t> lines;

  /// Index of a header column, or -1.
  int column(std::string_view name) const;
};

/// First record is the header. Rows with a different field count than the
/// header raise CsvError naming the line. Blank lines are skipped.
CsvTable parse_csv(std::string_view text);

std::string csv_escape(std::string_view field);
std::string csv_line(const std::vector<std::string> &fields);

std::string read_text_file(const std::string &path);
void write_text_file(const std::string &path, std::string_view text);

}  // namespace llm4sd::util

#endif  // LLM4SD_UTIL_CSV_HPP_
