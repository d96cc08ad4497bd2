#include "impact/csv.hpp"

#include "impact/error.hpp"

#include <istream>
#include <ostream>

namespace impact::csv {

std::optional<Record> Reader::next() {
  int c = in_.peek();
  if (c == std::char_traits<char>::eof()) return std::nullopt;

  Record rec;
  rec.line = line_;
  std::string field;
  bool quoted = false;
  bool in_quotes = false;
  bool field_started = false;

  auto fail = [&](const std::string& what) {
    throw Error(errc::kMalformedRow, "line " + std::to_string(rec.line) + ": " + what);
  };

  while (true) {
    c = in_.get();
    if (c == std::char_traits<char>::eof()) {
      if (in_quotes) fail("unterminated quoted field");
      rec.fields.push_back(std::move(field));
      return rec;
    }
    const char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case ',':
        rec.fields.push_back(std::move(field));
        field.clear();
        quoted = field_started = false;
        break;
      case '\r':
        if (in_.peek() == '\n') in_.get();
        [[fallthrough]];
      case '\n':
        ++line_;
        rec.fields.push_back(std::move(field));
        return rec;
      case '"':
        if (field_started) fail("quote inside an unquoted field");
        quoted = in_quotes = field_started = true;
        break;
      default:
        if (quoted) fail("characters after closing quote");
        field_started = true;
        field.push_back(ch);
    }
  }
}

std::string quote(std::string_view field) {
  bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << quote(fields[i]);
  }
  out << "\r\n";
}

}  // namespace impact::csv
