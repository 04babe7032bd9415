#include <doctest.h>

#include "ultraharm/padic.hpp"

using namespace ultraharm;

TEST_CASE("PadicInt digits, value, string round trip") {
  PadicInt x(3, 3, 11);  // 11 = 2 + 0*3 + 1*9
  CHECK(x.value() == 11);
  CHECK(x.digit(0) == 2);
  CHECK(x.digit(1) == 0);
  CHECK(x.digit(2) == 1);
  CHECK(x.to_string() == "201");
  CHECK(PadicInt::parse(3, "201") == x);
  CHECK(PadicInt::from_digits(3, {2, 0, 1}) == x);
}

TEST_CASE("PadicInt arithmetic is mod p^N and immutable-friendly") {
  PadicInt a(3, 2, 7), b(3, 2, 5);
  CHECK((a + b).value() == 3);   // 12 mod 9
  CHECK((a * b).value() == 8);   // 35 mod 9
  CHECK((a - b).value() == 2);
  CHECK((-a).value() == 2);      // 9 - 7
  CHECK(PadicInt(3, 2, -1).value() == 8);
}

TEST_CASE("PadicInt valuation and norm, zero caps at precision") {
  CHECK(PadicInt(3, 3, 9).valuation() == 2);
  CHECK(PadicInt(3, 3, 6).valuation() == 1);
  CHECK(PadicInt(3, 3, 5).valuation() == 0);
  CHECK(PadicInt(3, 3, 0).valuation() == 3);
  CHECK(PadicInt(3, 3, 0).norm() == 0.0);
  CHECK(PadicInt(3, 3, 9).norm() == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("PadicInt refuses mixed precision or prime") {
  PadicInt a(3, 2, 1), b(3, 3, 1), c(5, 2, 1);
  CHECK_THROWS_AS(a + b, std::invalid_argument);
  CHECK_THROWS_AS(a * c, std::invalid_argument);
  CHECK_THROWS_AS(PadicInt(4, 2, 1), std::invalid_argument);
}

TEST_CASE("DualScalar canonical form") {
  CHECK(DualScalar(3, 3, 2) == DualScalar(3, 1, 1));     // 3/9 = 1/3
  CHECK(DualScalar(3, 9, 2).is_zero());
  CHECK(DualScalar(3, 0, 5) == DualScalar::zero(3));
  CHECK(DualScalar(3, 12, 2) == DualScalar(3, 1, 1));    // 12/9 = 3/9 mod 1 = 1/3
  CHECK(DualScalar(3, 2, 2).num() == 2);
  CHECK(DualScalar(3, 2, 2).level() == 2);
}

TEST_CASE("DualScalar norm convention: zero class has norm 1") {
  CHECK(dual_norm(DualScalar::zero(3)) == 1.0);
  CHECK(dual_norm(DualScalar(3, 1, 2)) == 9.0);
  CHECK(DualScalar(3, 1, 2).valuation() == -2);
}

TEST_CASE("DualScalar arithmetic in Q_p/Z_p") {
  DualScalar a(3, 1, 1), b(3, 2, 1);
  CHECK((a + b).is_zero());
  CHECK((a + a) == b);
  DualScalar c(3, 1, 2);                 // 1/9
  CHECK((c + a) == DualScalar(3, 4, 2)); // 1/9 + 3/9
  CHECK((-c) == DualScalar(3, 8, 2));
  CHECK(c.scaled(3) == a);               // 3 * 1/9 = 1/3
  CHECK(c.scaled(9).is_zero());
}

TEST_CASE("DualScalar string format num/p^level") {
  CHECK(DualScalar(3, 2, 2).to_string() == "2/9");
  CHECK(DualScalar::zero(3).to_string() == "0/1");
  CHECK(DualScalar::parse(3, "2/9") == DualScalar(3, 2, 2));
  CHECK(DualScalar::parse(3, "3/9") == DualScalar(3, 1, 1));
  CHECK_THROWS_AS(DualScalar::parse(3, "1/6"), std::invalid_argument);
}

TEST_CASE("RootOfUnity exact value and product") {
  RootOfUnity w(3, 1, 1);
  CHECK(std::abs(w.value() - std::polar(1.0, 2.0 * std::numbers::pi / 3.0)) < 1e-15);
  CHECK((w * w * w).is_one());
  RootOfUnity u(3, 1, 2);
  CHECK(std::abs((w * u).value() - std::polar(1.0, 2.0 * std::numbers::pi * 4.0 / 9.0)) < 1e-15);
  CHECK(std::abs(u.conj().value() - std::conj(u.value())) < 1e-15);
}

TEST_CASE("pairing: exact exponent and precision guard") {
  std::vector<DualScalar> xi = {DualScalar(3, 1, 2)};
  std::vector<PadicInt> x = {PadicInt(3, 2, 4)};
  RootOfUnity w = pairing(xi, x);
  CHECK(w.order_level() == 2);
  CHECK(w.num() == 4);

  // {1/3 * x + 1/9 * y} with x=2, y=5 -> 2/3 + 5/9 = 11/9 -> 2/9
  std::vector<DualScalar> xi2 = {DualScalar(3, 1, 1), DualScalar(3, 1, 2)};
  std::vector<PadicInt> x2 = {PadicInt(3, 2, 2), PadicInt(3, 2, 5)};
  CHECK(pairing(xi2, x2).num() == 2);

  std::vector<PadicInt> shallow = {PadicInt(3, 1, 1)};
  CHECK_THROWS_AS(pairing(xi, shallow), std::invalid_argument);
}

TEST_CASE("phase lower bound holds exhaustively for small p^m") {
  for (int m = 1; m <= 4; ++m) {
    auto rep = phase_lower_bound_check(3, m);
    CHECK(rep.pass);
    CHECK(rep.worst_margin >= -1e-12);
  }
  CHECK(phase_lower_bound_check(5, 2).pass);
}
