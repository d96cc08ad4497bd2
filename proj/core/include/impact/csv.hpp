#pragma once

// RFC-4180 CSV: comma separated, CRLF or LF records, fields optionally
// enclosed in double quotes with "" as the escaped quote. Quoted fields may
// span lines.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace impact::csv {

struct Record {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  /// Next record, or nullopt at end of input. Throws malformed_row on an
  /// unterminated quote or stray quote inside an unquoted field.
  std::optional<Record> next();

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

std::string quote(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace impact::csv
