#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace triclass {

/// Reading and writing delimiter-separated records with RFC-4180 quoting:
/// a field that starts with a double quote runs to the matching quote,
/// `""` inside it is a literal quote, and it may span delimiters and lines.
/// Unquoted fields run to the next delimiter or line break.
using Record = std::vector<std::string>;

inline std::vector<Record> parse_delimited(std::string_view data, char delim) {
  if (data.starts_with("\xEF\xBB\xBF")) data.remove_prefix(3);
  std::vector<Record> records;
  Record current;
  std::string field;
  std::size_t i = 0;
  const std::size_t n = data.size();
  bool record_open = false;

  auto end_field = [&] {
    current.push_back(std::move(field));
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(current));
    current.clear();
    record_open = false;
  };

  while (i < n) {
    record_open = true;
    if (field.empty() && data[i] == '"') {
      ++i;
      for (;;) {
        if (i >= n) throw std::runtime_error("unterminated quoted field");
        if (data[i] == '"') {
          if (i + 1 < n && data[i + 1] == '"') {
            field.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field.push_back(data[i++]);
      }
      // Anything between the closing quote and the next separator is kept
      // verbatim rather than rejected.
      while (i < n && data[i] != delim && data[i] != '\n' && data[i] != '\r') {
        field.push_back(data[i++]);
      }
    }
    if (i >= n) break;
    const char c = data[i];
    if (c == delim) {
      end_field();
      ++i;
    } else if (c == '\n' || c == '\r') {
      end_record();
      if (c == '\r' && i + 1 < n && data[i + 1] == '\n') ++i;
      ++i;
    } else {
      field.push_back(c);
      ++i;
    }
  }
  if (record_open) end_record();
  return records;
}

inline bool needs_quoting(std::string_view field, char delim) {
  if (field.empty()) return false;
  if (field.front() == '"') return true;
  return field.find_first_of(std::string{delim, '\n', '\r'}) != std::string_view::npos;
}

inline void write_field(std::ostream& out, std::string_view field, char delim) {
  if (!needs_quoting(field, delim)) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

inline void write_record(std::ostream& out, const Record& record, char delim) {
  for (std::size_t i = 0; i < record.size(); ++i) {
    if (i != 0) out << delim;
    write_field(out, record[i], delim);
  }
  out << '\n';
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

/// Tab for everything except `.csv` files.
inline char delimiter_for(std::string_view path) {
  return path.ends_with(".csv") || path.ends_with(".CSV") ? ',' : '\t';
}

}  // namespace triclass
