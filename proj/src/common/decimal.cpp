#include "pocketpilot/common/decimal.hpp"

#include <algorithm>
#include <cctype>

namespace pocketpilot {

namespace {

constexpr Decimal::Rep kRepMax = static_cast<Decimal::Rep>(~static_cast<unsigned __int128>(0) >> 1);

Decimal::Rep checked_mul(Decimal::Rep a, Decimal::Rep b) {
  Decimal::Rep out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw DecimalError("decimal overflow");
  }
  return out;
}

}  // namespace

Decimal Decimal::parse(std::string_view text) {
  if (text.empty()) {
    throw DecimalError("empty decimal");
  }
  bool negative = false;
  std::size_t i = 0;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    i = 1;
  }
  Rep whole = 0;
  Rep frac = 0;
  int frac_digits = 0;
  bool seen_digit = false;
  bool in_frac = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '.' && !in_frac) {
      in_frac = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw DecimalError("invalid decimal: '" + std::string(text) + "'");
    }
    seen_digit = true;
    if (in_frac) {
      if (++frac_digits > kFractionDigits) {
        throw DecimalError("too many fractional digits: '" + std::string(text) + "'");
      }
      frac = frac * 10 + (c - '0');
    } else {
      whole = checked_mul(whole, 10) + (c - '0');
      if (whole > kRepMax / kScale) {
        throw DecimalError("decimal overflow: '" + std::string(text) + "'");
      }
    }
  }
  if (!seen_digit || (in_frac && frac_digits == 0)) {
    throw DecimalError("invalid decimal: '" + std::string(text) + "'");
  }
  for (int d = frac_digits; d < kFractionDigits; ++d) {
    frac *= 10;
  }
  const Rep units = whole * kScale + frac;
  return from_units(negative ? -units : units);
}

std::string Decimal::to_string() const {
  const bool negative = units_ < 0;
  unsigned __int128 mag = negative ? static_cast<unsigned __int128>(-units_)
                                   : static_cast<unsigned __int128>(units_);
  const auto scale = static_cast<unsigned __int128>(kScale);
  unsigned __int128 whole = mag / scale;
  unsigned __int128 frac = mag % scale;

  std::string whole_digits;
  do {
    whole_digits.push_back(static_cast<char>('0' + static_cast<int>(whole % 10)));
    whole /= 10;
  } while (whole != 0);
  std::reverse(whole_digits.begin(), whole_digits.end());

  std::string out = negative ? "-" + whole_digits : whole_digits;
  if (frac != 0) {
    std::string frac_digits(kFractionDigits, '0');
    for (int d = kFractionDigits - 1; d >= 0; --d) {
      frac_digits[static_cast<std::size_t>(d)] = static_cast<char>('0' + static_cast<int>(frac % 10));
      frac /= 10;
    }
    while (!frac_digits.empty() && frac_digits.back() == '0') {
      frac_digits.pop_back();
    }
    out += "." + frac_digits;
  }
  return out;
}

double Decimal::to_double() const {
  const Rep whole = units_ / kScale;
  const Rep frac = units_ % kScale;
  return static_cast<double>(whole) + static_cast<double>(frac) / static_cast<double>(kScale);
}

Decimal operator*(Decimal a, Decimal b) {
  return Decimal::from_units(checked_mul(a.units_, b.units_) / Decimal::kScale);
}

Decimal operator/(Decimal a, Decimal b) {
  if (b.units_ == 0) {
    throw DecimalError("decimal division by zero");
  }
  return Decimal::from_units(checked_mul(a.units_, Decimal::kScale) / b.units_);
}

Decimal operator/(Decimal a, std::int64_t k) {
  if (k == 0) {
    throw DecimalError("decimal division by zero");
  }
  return Decimal::from_units(a.units_ / k);
}

}  // namespace pocketpilot
