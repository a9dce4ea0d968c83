#include <doctest.h>

#include <thread>

#include "pocketpilot/common/clock.hpp"
#include "pocketpilot/common/decimal.hpp"
#include "pocketpilot/common/hash.hpp"
#include "pocketpilot/common/utf8.hpp"

using pocketpilot::Decimal;
using pocketpilot::DecimalError;

TEST_CASE("decimal parse and render") {
  CHECK(Decimal::parse("17.5").to_string() == "17.5");
  CHECK(Decimal::parse("0.1").to_string() == "0.1");
  CHECK(Decimal::parse("-0.000001").to_string() == "-0.000001");
  CHECK(Decimal::parse("75").to_string() == "75");
  CHECK(Decimal::parse("0.000000000001").to_string() == "0.000000000001");
  CHECK(Decimal(0).to_string() == "0");
  CHECK(Decimal::parse("-0").to_string() == "0");
  CHECK(Decimal::parse("2.50").to_string() == "2.5");
  CHECK_THROWS_AS(Decimal::parse(""), DecimalError);
  CHECK_THROWS_AS(Decimal::parse("1.0000000000001"), DecimalError);
  CHECK_THROWS_AS(Decimal::parse("abc"), DecimalError);
  CHECK_THROWS_AS(Decimal::parse("1."), DecimalError);
  CHECK_THROWS_AS(Decimal::parse("1e3"), DecimalError);
}

TEST_CASE("decimal arithmetic is exact where doubles are not") {
  const Decimal tenth = Decimal::parse("0.1");
  CHECK(tenth * 7 == Decimal::parse("0.7"));
  CHECK(tenth * Decimal(175) == Decimal::parse("17.5"));
  CHECK(tenth + Decimal::parse("0.2") == Decimal::parse("0.3"));
  CHECK(Decimal(75) * 1'000'000 / Decimal(1'000'000) == Decimal(75));
  CHECK(Decimal::parse("17.5") / Decimal::parse("0.7") == Decimal(25));
  CHECK(Decimal(1) / 3 == Decimal::parse("0.333333333333"));
  CHECK(Decimal(-1) / 3 == Decimal::parse("-0.333333333333"));
  CHECK(Decimal::parse("1.5") * Decimal::parse("-2") == Decimal(-3));
  CHECK(Decimal::parse("0.000001") * Decimal::parse("0.000001") == Decimal::parse("0.000000000001"));
  CHECK(Decimal(3) > Decimal::parse("2.999999999999"));
  CHECK(Decimal::parse("2.5").to_double() == doctest::Approx(2.5));
}

TEST_CASE("utf8 helpers") {
  using namespace pocketpilot::utf8;
  CHECK(is_valid("caf\xc3\xa9"));
  CHECK_FALSE(is_valid("\xff"));
  CHECK_FALSE(is_valid("\xc3"));
  CHECK(codepoint_count("caf\xc3\xa9") == 4);
  CHECK(codepoint_count("\xe6\x97\xa5\xe6\x9c\xac") == 2);
  CHECK(prefix_codepoints("caf\xc3\xa9!", 4) == "caf\xc3\xa9");
  CHECK(prefix_codepoints("abc", 10) == "abc");
  CHECK(trim("  a b \n") == "a b");
  CHECK(trim_right("  a \t") == "  a");
}

TEST_CASE("sha256 known vectors") {
  CHECK(pocketpilot::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(pocketpilot::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  pocketpilot::Sha256 h;
  h.update("a");
  h.update("bc");
  CHECK(h.hex_digest() == pocketpilot::sha256_hex("abc"));
}

TEST_CASE("simulated clock advances only when told") {
  pocketpilot::SimulatedClock clock(1000);
  CHECK(clock.now_ms() == 1000);
  const double m0 = clock.monotonic_ms();
  clock.sleep_for_ms(50.5);
  CHECK(clock.monotonic_ms() - m0 == doctest::Approx(50.5));
  CHECK(clock.now_ms() == 1050);
  clock.sleep_until(5000);
  CHECK(clock.now_ms() == 5000);
  clock.sleep_until(10);  // never goes backwards
  CHECK(clock.now_ms() == 5000);
  clock.advance_ms(1000);
  CHECK(clock.now_ms() == 6000);
}

TEST_CASE("system clock sleeps for real") {
  auto& clock = pocketpilot::system_clock();
  const double m0 = clock.monotonic_ms();
  clock.sleep_for_ms(20);
  CHECK(clock.monotonic_ms() - m0 >= 20.0);
  CHECK(clock.now_ms() > 1'700'000'000'000);
}
