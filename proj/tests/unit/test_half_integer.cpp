#include "impact/half_integer.hpp"

#include <catch_amalgamated.hpp>

using impact::HalfInteger;

TEST_CASE("half integers parse decimal and fraction forms") {
  CHECK(HalfInteger::parse("3") == HalfInteger(3));
  CHECK(HalfInteger::parse("2.5") == HalfInteger::from_halves(5));
  CHECK(HalfInteger::parse("5/2") == HalfInteger::from_halves(5));
  CHECK(HalfInteger::parse("4.0") == HalfInteger(4));
  CHECK_FALSE(HalfInteger::parse("2.25"));
  CHECK_FALSE(HalfInteger::parse("1/3"));
  CHECK_FALSE(HalfInteger::parse("abc"));
  CHECK_FALSE(HalfInteger::parse(""));
}

TEST_CASE("half integers convert from doubles only when exact") {
  CHECK(HalfInteger::from_double(7.5) == HalfInteger::from_halves(15));
  CHECK_FALSE(HalfInteger::from_double(7.25));
  CHECK_FALSE(HalfInteger::from_double(std::nan("")));
}

TEST_CASE("half integer arithmetic and printing") {
  const auto a = HalfInteger::from_halves(5);  // 2.5
  const auto b = HalfInteger(4);
  CHECK((a + a) == HalfInteger(5));
  CHECK((b - a).to_string() == "1.5");
  CHECK(b.to_string() == "4");
  CHECK((-a).to_string() == "-2.5");
  CHECK(a < b);
  CHECK(a.to_double() == 2.5);
  CHECK_FALSE(a.is_integer());
}
