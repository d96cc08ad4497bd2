#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace impact {

/// Exact value on the lattice k/2. Midranks, rank sums and Mann-Whitney U
/// statistics all live on this lattice, so arithmetic on them never drifts.
class HalfInteger {
 public:
  constexpr HalfInteger() = default;
  constexpr explicit HalfInteger(std::int64_t whole) : halves_(2 * whole) {}

  static constexpr HalfInteger from_halves(std::int64_t halves) {
    HalfInteger h;
    h.halves_ = halves;
    return h;
  }

  /// Accepts "3", "2.5", "-1.5", "5/2". Anything off the lattice is rejected.
  static std::optional<HalfInteger> parse(std::string_view text);
  /// Exact conversion; nullopt unless `value` is a multiple of 1/2.
  static std::optional<HalfInteger> from_double(double value);

  constexpr std::int64_t halves() const { return halves_; }
  constexpr bool is_integer() const { return halves_ % 2 == 0; }
  /// Integer part, only meaningful when is_integer().
  constexpr std::int64_t whole() const { return halves_ / 2; }
  constexpr double to_double() const { return static_cast<double>(halves_) / 2.0; }
  std::string to_string() const;

  constexpr HalfInteger operator+(HalfInteger o) const { return from_halves(halves_ + o.halves_); }
  constexpr HalfInteger operator-(HalfInteger o) const { return from_halves(halves_ - o.halves_); }
  constexpr HalfInteger operator-() const { return from_halves(-halves_); }
  constexpr HalfInteger& operator+=(HalfInteger o) {
    halves_ += o.halves_;
    return *this;
  }
  constexpr HalfInteger& operator-=(HalfInteger o) {
    halves_ -= o.halves_;
    return *this;
  }

  constexpr auto operator<=>(const HalfInteger&) const = default;

 private:
  std::int64_t halves_ = 0;
};

}  // namespace impact
