#include "impact/csv.hpp"
#include "impact/error.hpp"

#include <catch_amalgamated.hpp>

#include <sstream>

using namespace impact;

TEST_CASE("csv reader handles quoting, embedded newlines and CRLF") {
  std::istringstream in("a,b,c\r\n\"x, y\",\"say \"\"hi\"\"\",\"two\nlines\"\r\n,,\n");
  csv::Reader reader(in);
  auto r = reader.next();
  REQUIRE(r);
  CHECK(r->line == 1);
  CHECK(r->fields == std::vector<std::string>{"a", "b", "c"});
  r = reader.next();
  REQUIRE(r);
  CHECK(r->line == 2);
  CHECK(r->fields == std::vector<std::string>{"x, y", "say \"hi\"", "two\nlines"});
  r = reader.next();
  REQUIRE(r);
  CHECK(r->line == 4);
  CHECK(r->fields == std::vector<std::string>{"", "", ""});
  CHECK_FALSE(reader.next());
}

TEST_CASE("csv reader reports the line of an unterminated quote") {
  std::istringstream in("a,b\n\"open,b\n");
  csv::Reader reader(in);
  REQUIRE(reader.next());
  try {
    reader.next();
    FAIL("expected malformed_row");
  } catch (const Error& e) {
    CHECK(e.code() == errc::kMalformedRow);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("csv writer round trips through the reader") {
  const std::vector<std::string> row = {"plain", "comma, inside", "quote \" inside", "line\nbreak", ""};
  std::ostringstream out;
  csv::write_row(out, row);
  std::istringstream in(out.str());
  csv::Reader reader(in);
  auto r = reader.next();
  REQUIRE(r);
  CHECK(r->fields == row);
  CHECK(csv::quote("plain") == "plain");
  CHECK(csv::quote("a,b") == "\"a,b\"");
}
