#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "pocketpilot/common/error.hpp"

namespace pocketpilot {

class DecimalError : public Error {
 public:
  using Error::Error;
};

// Fixed-point decimal with 12 fractional digits on a 128-bit integer.
// Addition, subtraction and multiplication by integers are exact; products of
// two decimals and quotients are exact whenever the result has at most 12
// fractional digits and are truncated toward zero otherwise.
class Decimal {
 public:
  using Rep = __int128;
  static constexpr int kFractionDigits = 12;
  static constexpr Rep kScale = 1'000'000'000'000;

  constexpr Decimal() = default;
  constexpr Decimal(std::int64_t whole) : units_(static_cast<Rep>(whole) * kScale) {}  // NOLINT

  // Accepts "[-]digits[.digits]"; more than 12 fractional digits is an error.
  static Decimal parse(std::string_view text);
  static constexpr Decimal from_units(Rep units) {
    Decimal d;
    d.units_ = units;
    return d;
  }

  constexpr Rep units() const { return units_; }

  // Shortest exact rendering: "17.5", "0", "-0.000001".
  std::string to_string() const;
  double to_double() const;

  friend constexpr Decimal operator+(Decimal a, Decimal b) { return from_units(a.units_ + b.units_); }
  friend constexpr Decimal operator-(Decimal a, Decimal b) { return from_units(a.units_ - b.units_); }
  friend constexpr Decimal operator*(Decimal a, std::int64_t k) { return from_units(a.units_ * k); }
  friend constexpr Decimal operator*(std::int64_t k, Decimal a) { return a * k; }
  friend Decimal operator*(Decimal a, Decimal b);
  friend Decimal operator/(Decimal a, Decimal b);
  friend Decimal operator/(Decimal a, std::int64_t k);

  Decimal& operator+=(Decimal o) {
    units_ += o.units_;
    return *this;
  }

  friend constexpr bool operator==(Decimal a, Decimal b) = default;
  friend constexpr std::strong_ordering operator<=>(Decimal a, Decimal b) {
    return a.units_ <=> b.units_;
  }

 private:
  Rep units_ = 0;
};

}  // namespace pocketpilot
