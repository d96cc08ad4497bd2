#include "impact/half_integer.hpp"

#include <charconv>
#include <cmath>

namespace impact {
namespace {

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  if (s.empty()) return std::nullopt;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return v;
}

}  // namespace

std::optional<HalfInteger> HalfInteger::parse(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  if (text.empty()) return std::nullopt;

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto num = parse_int(text.substr(0, slash));
    auto den = parse_int(text.substr(slash + 1));
    if (!num || !den || *den == 0) return std::nullopt;
    if (*den == 1) return HalfInteger(*num);
    if (*den == 2) return from_halves(*num);
    if (*den == -2) return from_halves(-*num);
    if ((2 * *num) % *den != 0) return std::nullopt;
    return from_halves(2 * *num / *den);
  }

  auto dot = text.find('.');
  if (dot == std::string_view::npos) {
    auto v = parse_int(text);
    if (!v) return std::nullopt;
    return HalfInteger(*v);
  }
  auto int_part = text.substr(0, dot);
  auto frac = text.substr(dot + 1);
  bool negative = !int_part.empty() && int_part.front() == '-';
  std::int64_t whole = 0;
  if (!(int_part.empty() || int_part == "-" || int_part == "+")) {
    auto v = parse_int(int_part);
    if (!v) return std::nullopt;
    whole = *v;
  }
  // Fraction must be 0, 00, ..., or 5, 50, ...
  if (frac.empty()) return std::nullopt;
  for (char c : frac)
    if (c < '0' || c > '9') return std::nullopt;
  bool half = frac.front() == '5';
  if (!half && frac.front() != '0') return std::nullopt;
  for (std::size_t i = 1; i < frac.size(); ++i)
    if (frac[i] != '0') return std::nullopt;
  std::int64_t halves = 2 * whole;
  if (half) halves += negative ? -1 : 1;
  return from_halves(halves);
}

std::optional<HalfInteger> HalfInteger::from_double(double value) {
  if (!std::isfinite(value)) return std::nullopt;
  double twice = value * 2.0;
  if (std::abs(twice) > 9.0e15 || twice != std::trunc(twice)) return std::nullopt;
  return from_halves(static_cast<std::int64_t>(twice));
}

std::string HalfInteger::to_string() const {
  if (is_integer()) return std::to_string(halves_ / 2);
  std::int64_t mag = halves_ < 0 ? -halves_ : halves_;
  return (halves_ < 0 ? "-" : "") + std::to_string(mag / 2) + ".5";
}

}  // namespace impact
