#pragma once

// Exact arithmetic in Z_p at finite precision and in the Pruefer group
// Q_p/Z_p, plus the duality pairing between them. Everything here is plain
// int64 arithmetic: a truncated p-adic integer is its value mod p^N, a
// dual scalar is a canonical fraction num/p^level, and a phase is an exact
// root of unity num/p^m. Floating point only appears when a root of unity
// is turned into a complex number.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace ultraharm {

using complex_t = std::complex<double>;

inline int64_t ipow(int64_t base, int64_t exp) {
  if (exp < 0) throw std::invalid_argument("ipow: negative exponent");
  int64_t r = 1;
  for (int64_t i = 0; i < exp; ++i) {
    if (r > (int64_t{1} << 62) / (base > 0 ? base : 1))
      throw std::overflow_error("ipow: overflow");
    r *= base;
  }
  return r;
}

inline bool is_prime(int64_t n) {
  if (n < 2) return false;
  for (int64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline int64_t mod_floor(int64_t a, int64_t m) {
  int64_t r = a % m;
  return r < 0 ? r + m : r;
}

// Truncated p-adic integer: the residue value() in [0, p^precision), with
// digits a_0..a_{N-1} least significant first. Values are immutable; all
// operations return new objects. Mixing different p or precision is an error
// (the working precision is global to a computation by design).
class PadicInt {
 public:
  PadicInt(int64_t p, int precision, int64_t value)
      : p_(p), prec_(precision), val_(0) {
    if (!is_prime(p)) throw std::invalid_argument("PadicInt: p must be prime");
    if (precision < 0) throw std::invalid_argument("PadicInt: negative precision");
    val_ = mod_floor(value, ipow(p, precision));
  }

  static PadicInt from_digits(int64_t p, const std::vector<int>& digits) {
    int64_t v = 0, scale = 1;
    for (int d : digits) {
      if (d < 0 || d >= p) throw std::invalid_argument("PadicInt: digit out of range");
      v += d * scale;
      scale *= p;
    }
    return PadicInt(p, static_cast<int>(digits.size()), v);
  }

  int64_t p() const { return p_; }
  int precision() const { return prec_; }
  int64_t value() const { return val_; }

  int digit(int k) const {
    if (k < 0 || k >= prec_) throw std::out_of_range("PadicInt: digit index");
    return static_cast<int>((val_ / ipow(p_, k)) % p_);
  }

  // Valuation truncated at the precision: returns precision when the residue
  // is zero (the element is indistinguishable from 0 at this level).
  int valuation() const {
    if (val_ == 0) return prec_;
    int v = 0;
    int64_t x = val_;
    while (x % p_ == 0) { x /= p_; ++v; }
    return v;
  }

  double norm() const {
    if (val_ == 0) return 0.0;
    return std::pow(static_cast<double>(p_), -valuation());
  }

  PadicInt operator+(const PadicInt& o) const {
    check_compat(o);
    return PadicInt(p_, prec_, val_ + o.val_);
  }
  PadicInt operator-(const PadicInt& o) const {
    check_compat(o);
    return PadicInt(p_, prec_, val_ - o.val_);
  }
  PadicInt operator*(const PadicInt& o) const {
    check_compat(o);
    return PadicInt(p_, prec_, mulmod(val_, o.val_));
  }
  PadicInt operator-() const { return PadicInt(p_, prec_, -val_); }
  bool operator==(const PadicInt& o) const {
    return p_ == o.p_ && prec_ == o.prec_ && val_ == o.val_;
  }
  bool operator!=(const PadicInt& o) const { return !(*this == o); }

  // Base-p digit string, least significant digit first ("201" = 2 + 0*p + 1*p^2).
  std::string to_string() const {
    std::string s;
    s.reserve(prec_);
    for (int k = 0; k < prec_; ++k) s += static_cast<char>('0' + digit(k));
    return s;
  }

  static PadicInt parse(int64_t p, const std::string& s) {
    std::vector<int> digits;
    digits.reserve(s.size());
    for (char c : s) {
      if (c < '0' || c > '9') throw std::invalid_argument("PadicInt: bad digit string");
      digits.push_back(c - '0');
    }
    return from_digits(p, digits);
  }

 private:
  int64_t mulmod(int64_t a, int64_t b) const {
    // p^prec stays well below 2^31 in every supported configuration, so the
    // product of two residues fits in int64 without tricks.
    return mod_floor(a * b, ipow(p_, prec_));
  }
  void check_compat(const PadicInt& o) const {
    if (p_ != o.p_) throw std::invalid_argument("PadicInt: mixed primes");
    if (prec_ != o.prec_) throw std::invalid_argument("PadicInt: mixed precisions");
  }

  int64_t p_;
  int prec_;
  int64_t val_;
};

// A class of Q_p/Z_p in canonical form num/p^level: either num == 0 and
// level == 0 (the zero class), or 1 <= num < p^level with p not dividing num.
// The norm of a class is p^level; by convention the zero class has norm 1,
// so that the norm of an irreducible representation built from dual scalars
// is always >= 1 and the trivial one sits at norm exactly 1.
class DualScalar {
 public:
  DualScalar(int64_t p, int64_t num, int level) : p_(p), num_(0), level_(0) {
    if (!is_prime(p)) throw std::invalid_argument("DualScalar: p must be prime");
    if (level < 0) throw std::invalid_argument("DualScalar: negative level");
    int64_t m = ipow(p, level);
    num = mod_floor(num, m);
    while (level > 0 && num % p == 0) {
      num /= p;
      --level;
      if (num == 0) { level = 0; break; }
    }
    num_ = num;
    level_ = level;
  }

  static DualScalar zero(int64_t p) { return DualScalar(p, 0, 0); }

  int64_t p() const { return p_; }
  int64_t num() const { return num_; }
  int level() const { return level_; }
  bool is_zero() const { return num_ == 0; }
  double norm() const { return static_cast<double>(ipow(p_, level_)); }
  int valuation() const { return -level_; }  // of any representative

  DualScalar operator+(const DualScalar& o) const {
    check_compat(o);
    int l = std::max(level_, o.level_);
    int64_t m = ipow(p_, l);
    return DualScalar(p_, num_ * (m / ipow(p_, level_)) + o.num_ * (m / ipow(p_, o.level_)), l);
  }
  DualScalar operator-() const { return DualScalar(p_, ipow(p_, level_) - num_, level_); }
  DualScalar operator-(const DualScalar& o) const { return *this + (-o); }

  // Multiplication by an ordinary integer (acting on Q_p/Z_p).
  DualScalar scaled(int64_t t) const {
    int64_t m = ipow(p_, level_);
    return DualScalar(p_, mod_floor(t, m) * num_, level_);
  }

  bool operator==(const DualScalar& o) const {
    return p_ == o.p_ && num_ == o.num_ && level_ == o.level_;
  }
  bool operator!=(const DualScalar& o) const { return !(*this == o); }
  bool operator<(const DualScalar& o) const {  // enumeration order: by level, then numerator
    if (level_ != o.level_) return level_ < o.level_;
    return num_ < o.num_;
  }

  // "num/p^level" with the denominator expanded, e.g. "2/9"; zero is "0/1".
  std::string to_string() const {
    return std::to_string(num_) + "/" + std::to_string(ipow(p_, level_));
  }

  static DualScalar parse(int64_t p, const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) throw std::invalid_argument("DualScalar: missing '/'");
    int64_t num = std::stoll(s.substr(0, slash));
    int64_t den = std::stoll(s.substr(slash + 1));
    int level = 0;
    int64_t d = den;
    while (d > 1) {
      if (d % p != 0) throw std::invalid_argument("DualScalar: denominator not a power of p");
      d /= p;
      ++level;
    }
    return DualScalar(p, num, level);
  }

 private:
  void check_compat(const DualScalar& o) const {
    if (p_ != o.p_) throw std::invalid_argument("DualScalar: mixed primes");
  }
  int64_t p_;
  int64_t num_;
  int level_;
};

inline DualScalar canonical_dual(int64_t num, int level, int64_t p) {
  return DualScalar(p, num, level);
}

inline double dual_norm(const DualScalar& x) { return x.norm(); }

// e^{2 pi i num / p^order_level}, kept exact until value() is called.
class RootOfUnity {
 public:
  RootOfUnity(int64_t p, int64_t num, int order_level)
      : p_(p), order_level_(order_level), num_(mod_floor(num, ipow(p, order_level))) {}

  int64_t p() const { return p_; }
  int64_t num() const { return num_; }
  int order_level() const { return order_level_; }
  bool is_one() const { return num_ == 0; }

  complex_t value() const {
    if (num_ == 0) return complex_t(1.0, 0.0);
    double theta = 2.0 * std::numbers::pi * static_cast<double>(num_) /
                   static_cast<double>(ipow(p_, order_level_));
    return complex_t(std::cos(theta), std::sin(theta));
  }

  RootOfUnity operator*(const RootOfUnity& o) const {
    if (p_ != o.p_) throw std::invalid_argument("RootOfUnity: mixed primes");
    int l = std::max(order_level_, o.order_level_);
    int64_t m = ipow(p_, l);
    return RootOfUnity(p_, num_ * (m / ipow(p_, order_level_)) + o.num_ * (m / ipow(p_, o.order_level_)), l);
  }
  RootOfUnity conj() const { return RootOfUnity(p_, -num_, order_level_); }

 private:
  int64_t p_;
  int order_level_;
  int64_t num_;
};

// Duality pairing e^{2 pi i {xi . x}_p} between (Q_p/Z_p)^n and Z_p^n.
// The order level is the maximum level among the xi_j; each PadicInt must
// carry at least that many digits, otherwise the phase is not determined
// by the available precision and we refuse to guess.
inline RootOfUnity pairing(const std::vector<DualScalar>& xi,
                           const std::vector<PadicInt>& x) {
  if (xi.size() != x.size()) throw std::invalid_argument("pairing: length mismatch");
  if (xi.empty()) throw std::invalid_argument("pairing: empty input");
  int64_t p = xi[0].p();
  int m = 0;
  for (const auto& c : xi) {
    if (c.p() != p) throw std::invalid_argument("pairing: mixed primes");
    m = std::max(m, c.level());
  }
  int64_t pm = ipow(p, m);
  int64_t acc = 0;
  for (size_t j = 0; j < xi.size(); ++j) {
    if (x[j].p() != p) throw std::invalid_argument("pairing: mixed primes");
    if (x[j].precision() < m)
      throw std::invalid_argument("pairing: PadicInt precision below dual level");
    int64_t pl = ipow(p, xi[j].level());
    int64_t xr = x[j].value() % pl;
    acc = mod_floor(acc + (pm / pl) * mod_floor(xi[j].num() * xr, pl), pm);
  }
  return RootOfUnity(p, acc, m);
}

struct PhaseBoundReport {
  bool pass = true;
  double worst_margin = 0.0;  // min over k of |e^{2pi i k/p^m}-1| - 4*min(k,p^m-k)/p^m
  int64_t worst_k = 0;
};

// Exhaustive check of the phase lower bound behind the ultrametric norm
// equivalences: for 1 <= k < p^m,
//   |e^{2 pi i k/p^m} - 1| = 2 sin(pi k/p^m) >= 4 min(k, p^m-k)/p^m >= 4/p^m.
// (Jordan's inequality; the extreme case is the antipodal point.)
inline PhaseBoundReport phase_lower_bound_check(int64_t p, int order_level) {
  PhaseBoundReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  int64_t pm = ipow(p, order_level);
  for (int64_t k = 1; k < pm; ++k) {
    double lhs = std::abs(RootOfUnity(p, k, order_level).value() - complex_t(1.0, 0.0));
    double rhs = 4.0 * static_cast<double>(std::min(k, pm - k)) / static_cast<double>(pm);
    double margin = lhs - rhs;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_k = k;
    }
    if (lhs + 1e-12 < rhs || lhs + 1e-12 < 4.0 / static_cast<double>(pm)) rep.pass = false;
  }
  return rep;
}

}  // namespace ultraharm
