//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/util/csv.hpp"

#include <fstream>
#include <sstream>

namespace llm4sd::util {

int CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name)
      return static_cast<int>(i);
  return -1;
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t record_line = 1;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    const bool blank = record.size() == 1 && record[0].empty() && !field_started;
    if (!blank) {
      if (table.header.empty() && table.rows.empty()) {
        table.header = std::move(record);
      } else {
        if (record.size() != table.header.size())
          throw CsvError("csv line " + std::to_string(record_line) + ": expected "
                         + std::to_string(table.header.size()) + " fields, found "
                         + std::to_string(record.size()));
        table.rows.push_back(std::move(record));
        table.lines.push_back(record_line);
      }
    }
    record.clear();
    field_started = false;
  };
  if (text.starts_with("\xEF\xBB\xBF"))
    text.remove_prefix(3);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n')
          ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
    case '"':
      quoted = true;
      field_started = true;
      break;
    case ',':
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
      break;
    case '\r':
      break;
    case '\n':
      end_record();
      ++line;
      record_line = line;
      break;
    default:
      field += c;
      field_started = true;
    }
  }
  if (quoted)
    throw CsvError("csv line " + std::to_string(record_line) + ": unterminated quote");
  if (!field.empty() || !record.empty() || field_started)
    end_record();
  if (table.header.empty())
    throw CsvError("csv: no header");
  return table;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos)
    return std::string(field);
  std::string out = "\"";
  for (char c: field) {
    if (c == '"')
      out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_line(const std::vector<std::string> &fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0)
      out += ',';
    out += csv_escape(fields[i]);
  }
  return out + "\n";
}

std::string read_text_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string &path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out)
    throw std::runtime_error("write failed: " + path);
}

}  // namespace llm4sd::util
