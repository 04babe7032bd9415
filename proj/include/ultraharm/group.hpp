#pragma once

// The four compact p-adic Lie groups handled by this library, each realized
// as Z_p^dim with a polynomial (triangular) product law:
//
//   abelian     Z_p^d          componentwise addition
//   heisenberg  H_d = Z_p^{2d+1}   (x1,x2,x3)*(y1,y2,y3) = (x1+y1, x2+y2, x3+y3+x1.y2)
//                               with x1,x2 in Z_p^d, x3 in Z_p
//   engel4      B_4 = Z_p^4, p > 3:
//                 (x1+y1, x2+y2, x3+y3+x1 y2, x4+y4+x1 y3 + (1/2) x1^2 y2)
//   g52         G_{5,2} = Z_p^5, p > 2:
//                 (x1+y1, x2+y2, x3+y3, x4+y4+x1 y2, x5+y5+x1 y3)
//
// Because each coordinate of x*y is x_i + y_i + (polynomial in earlier
// coordinates), reduction mod p^N is a group homomorphism, so all level-N
// computations on the finite quotient G/G_N are exact. G_n denotes the
// congruence filtration {x : all coordinates divisible by p^n}; the Haar
// measure is the probability measure giving each level-N cell mass p^{-dim N}.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ultraharm/padic.hpp"

namespace ultraharm {

enum class GroupKind { abelian, heisenberg, engel4, g52 };

inline std::string to_string(GroupKind k) {
  switch (k) {
    case GroupKind::abelian: return "abelian";
    case GroupKind::heisenberg: return "heisenberg";
    case GroupKind::engel4: return "engel4";
    case GroupKind::g52: return "g52";
  }
  throw std::logic_error("unreachable");
}

inline GroupKind group_kind_from_string(const std::string& s) {
  if (s == "abelian") return GroupKind::abelian;
  if (s == "heisenberg") return GroupKind::heisenberg;
  if (s == "engel4") return GroupKind::engel4;
  if (s == "g52") return GroupKind::g52;
  throw std::invalid_argument("unknown group kind: " + s);
}

struct GroupDescriptor {
  GroupKind kind = GroupKind::abelian;
  int64_t p = 3;
  int d = 1;      // free rank parameter; ignored by engel4/g52
  int level = 1;  // working precision N: computations happen on G/G_N

  int dim() const {
    switch (kind) {
      case GroupKind::abelian: return d;
      case GroupKind::heisenberg: return 2 * d + 1;
      case GroupKind::engel4: return 4;
      case GroupKind::g52: return 5;
    }
    throw std::logic_error("unreachable");
  }

  // Number of generating directions of the polarized subgroup used by the
  // sub-Laplacian and the sub-norm (the first kappa coordinates).
  int kappa() const {
    switch (kind) {
      case GroupKind::abelian: return d;
      case GroupKind::heisenberg: return 2 * d;
      case GroupKind::engel4: return 2;
      case GroupKind::g52: return 3;
    }
    throw std::logic_error("unreachable");
  }

  void validate() const {
    if (!is_prime(p)) throw std::invalid_argument("group: p must be prime");
    if (level < 0) throw std::invalid_argument("group: negative level");
    if (kind == GroupKind::abelian || kind == GroupKind::heisenberg) {
      if (d < 1) throw std::invalid_argument("group: d must be >= 1");
    }
    // p must exceed the nilpotency class for exp/log coordinates to make sense.
    if (kind == GroupKind::heisenberg && p <= 2)
      throw std::invalid_argument("heisenberg: requires p > 2");
    if (kind == GroupKind::engel4 && p <= 3)
      throw std::invalid_argument("engel4: requires p > 3");
    if (kind == GroupKind::g52 && p <= 2)
      throw std::invalid_argument("g52: requires p > 2");
  }

  int64_t quotient_size() const { return ipow(p, static_cast<int64_t>(dim()) * level); }

  bool operator==(const GroupDescriptor& o) const {
    return kind == o.kind && p == o.p && d == o.d && level == o.level;
  }
};

class GroupElement {
 public:
  GroupElement(GroupDescriptor g, std::vector<PadicInt> coords)
      : g_(g), coords_(std::move(coords)) {
    if (static_cast<int>(coords_.size()) != g_.dim())
      throw std::invalid_argument("GroupElement: wrong number of coordinates");
    for (const auto& c : coords_) {
      if (c.p() != g_.p || c.precision() != g_.level)
        throw std::invalid_argument("GroupElement: coordinate p/precision mismatch");
    }
  }

  static GroupElement from_values(const GroupDescriptor& g, const std::vector<int64_t>& vals) {
    std::vector<PadicInt> cs;
    cs.reserve(vals.size());
    for (int64_t v : vals) cs.emplace_back(g.p, g.level, v);
    return GroupElement(g, std::move(cs));
  }

  const GroupDescriptor& descriptor() const { return g_; }
  const std::vector<PadicInt>& coords() const { return coords_; }
  const PadicInt& at(int i) const { return coords_.at(i); }
  int64_t value(int i) const { return coords_.at(i).value(); }

  bool operator==(const GroupElement& o) const {
    return g_ == o.g_ && coords_ == o.coords_;
  }
  bool operator!=(const GroupElement& o) const { return !(*this == o); }

 private:
  GroupDescriptor g_;
  std::vector<PadicInt> coords_;
};

inline GroupElement identity(const GroupDescriptor& g) {
  return GroupElement::from_values(g, std::vector<int64_t>(g.dim(), 0));
}

// The residue (p^N + 1)/2, i.e. the inverse of 2 mod p^N (p odd).
inline int64_t half_mod(int64_t p, int level) { return (ipow(p, level) + 1) / 2; }

inline GroupElement multiply(const GroupElement& x, const GroupElement& y) {
  const GroupDescriptor& g = x.descriptor();
  if (!(g == y.descriptor())) throw std::invalid_argument("multiply: descriptor mismatch");
  const auto& a = x.coords();
  const auto& b = y.coords();
  std::vector<PadicInt> c;
  c.reserve(a.size());
  switch (g.kind) {
    case GroupKind::abelian: {
      for (size_t i = 0; i < a.size(); ++i) c.push_back(a[i] + b[i]);
      break;
    }
    case GroupKind::heisenberg: {
      int d = g.d;
      for (int i = 0; i < 2 * d; ++i) c.push_back(a[i] + b[i]);
      PadicInt z3 = a[2 * d] + b[2 * d];
      for (int j = 0; j < d; ++j) z3 = z3 + a[j] * b[d + j];  // x1 . y2
      c.push_back(z3);
      break;
    }
    case GroupKind::engel4: {
      PadicInt half(g.p, g.level, half_mod(g.p, g.level));
      c.push_back(a[0] + b[0]);
      c.push_back(a[1] + b[1]);
      c.push_back(a[2] + b[2] + a[0] * b[1]);
      c.push_back(a[3] + b[3] + a[0] * b[2] + half * a[0] * a[0] * b[1]);
      break;
    }
    case GroupKind::g52: {
      c.push_back(a[0] + b[0]);
      c.push_back(a[1] + b[1]);
      c.push_back(a[2] + b[2]);
      c.push_back(a[3] + b[3] + a[0] * b[1]);
      c.push_back(a[4] + b[4] + a[0] * b[2]);
      break;
    }
  }
  return GroupElement(g, std::move(c));
}

inline GroupElement inverse(const GroupElement& x) {
  const GroupDescriptor& g = x.descriptor();
  const auto& a = x.coords();
  std::vector<PadicInt> c;
  c.reserve(a.size());
  switch (g.kind) {
    case GroupKind::abelian: {
      for (const auto& ai : a) c.push_back(-ai);
      break;
    }
    case GroupKind::heisenberg: {
      int d = g.d;
      for (int i = 0; i < 2 * d; ++i) c.push_back(-a[i]);
      PadicInt z3 = -a[2 * d];
      for (int j = 0; j < d; ++j) z3 = z3 + a[j] * a[d + j];
      c.push_back(z3);
      break;
    }
    case GroupKind::engel4: {
      PadicInt half(g.p, g.level, half_mod(g.p, g.level));
      c.push_back(-a[0]);
      c.push_back(-a[1]);
      c.push_back(-a[2] + a[0] * a[1]);
      c.push_back(-a[3] + a[0] * a[2] - half * a[0] * a[0] * a[1]);
      break;
    }
    case GroupKind::g52: {
      c.push_back(-a[0]);
      c.push_back(-a[1]);
      c.push_back(-a[2]);
      c.push_back(-a[3] + a[0] * a[1]);
      c.push_back(-a[4] + a[0] * a[2]);
      break;
    }
  }
  return GroupElement(g, std::move(c));
}

// Raw-residue versions of the group law, for hot loops that keep coordinates
// as plain int64 arrays mod q = p^N. Mirrors multiply()/inverse() exactly;
// the agreement is pinned by a randomized test.
inline void multiply_raw(const GroupDescriptor& g, int64_t q, const int64_t* a, const int64_t* b,
                         int64_t* c) {
  switch (g.kind) {
    case GroupKind::abelian:
      for (int i = 0; i < g.d; ++i) c[i] = (a[i] + b[i]) % q;
      break;
    case GroupKind::heisenberg: {
      int d = g.d;
      int64_t z3 = a[2 * d] + b[2 * d];
      for (int i = 0; i < 2 * d; ++i) c[i] = (a[i] + b[i]) % q;
      for (int j = 0; j < d; ++j) z3 = (z3 + a[j] * b[d + j]) % q;
      c[2 * d] = z3;
      break;
    }
    case GroupKind::engel4: {
      int64_t half = (q + 1) / 2;
      int64_t c0 = (a[0] + b[0]) % q;
      int64_t c1 = (a[1] + b[1]) % q;
      int64_t c2 = (a[2] + b[2] + a[0] * b[1]) % q;
      int64_t c3 = (a[3] + b[3] + a[0] * b[2]) % q;
      c3 = (c3 + ((half * ((a[0] * a[0]) % q)) % q) * b[1]) % q;
      c[0] = c0, c[1] = c1, c[2] = c2, c[3] = c3;
      break;
    }
    case GroupKind::g52: {
      int64_t c3 = (a[3] + b[3] + a[0] * b[1]) % q;
      int64_t c4 = (a[4] + b[4] + a[0] * b[2]) % q;
      c[0] = (a[0] + b[0]) % q;
      c[1] = (a[1] + b[1]) % q;
      c[2] = (a[2] + b[2]) % q;
      c[3] = c3, c[4] = c4;
      break;
    }
  }
}

inline void inverse_raw(const GroupDescriptor& g, int64_t q, const int64_t* a, int64_t* c) {
  auto neg = [q](int64_t v) { return (q - v % q) % q; };
  switch (g.kind) {
    case GroupKind::abelian:
      for (int i = 0; i < g.d; ++i) c[i] = neg(a[i]);
      break;
    case GroupKind::heisenberg: {
      int d = g.d;
      int64_t z3 = neg(a[2 * d]);
      for (int j = 0; j < d; ++j) z3 = (z3 + a[j] * a[d + j]) % q;
      for (int i = 0; i < 2 * d; ++i) c[i] = neg(a[i]);
      c[2 * d] = z3;
      break;
    }
    case GroupKind::engel4: {
      int64_t half = (q + 1) / 2;
      int64_t c2 = (neg(a[2]) + a[0] * a[1]) % q;
      int64_t c3 = (neg(a[3]) + a[0] * a[2]) % q;
      c3 = (c3 + neg((((half * ((a[0] * a[0]) % q)) % q) * a[1]) % q)) % q;
      c[0] = neg(a[0]), c[1] = neg(a[1]), c[2] = c2, c[3] = c3;
      break;
    }
    case GroupKind::g52: {
      int64_t c3 = (neg(a[3]) + a[0] * a[1]) % q;
      int64_t c4 = (neg(a[4]) + a[0] * a[2]) % q;
      c[0] = neg(a[0]), c[1] = neg(a[1]), c[2] = neg(a[2]);
      c[3] = c3, c[4] = c4;
      break;
    }
  }
}

// Rank of a raw coordinate tuple (coordinate-major mixed radix, matching
// rank_of).
inline int64_t rank_raw(const GroupDescriptor& g, int64_t q, const int64_t* c) {
  int64_t r = 0;
  for (int j = g.dim() - 1; j >= 0; --j) r = r * q + c[j];
  return r;
}

// Norm exponent of a raw tuple over a coordinate range: smallest p-adic
// valuation, capped at N.
inline int norm_exponent_raw(int64_t p, int N, const int64_t* c, int count) {
  int best = N;
  for (int i = 0; i < count; ++i) {
    int64_t v = c[i];
    if (v == 0) continue;
    int val = 0;
    while (v % p == 0) v /= p, ++val;
    best = std::min(best, val);
  }
  return best;
}

// Smallest valuation among the given coordinate range, capped at the working
// precision; this is the n with x in G_n \ G_{n+1} (dim*level means "zero").
inline int norm_exponent(const GroupElement& x, int first, int count) {
  int v = x.descriptor().level;
  for (int i = first; i < first + count; ++i) v = std::min(v, x.at(i).valuation());
  return v;
}

inline int norm_exponent(const GroupElement& x) {
  return norm_exponent(x, 0, x.descriptor().dim());
}

// ||x||_p = max_j |x_j|_p; zero (up to the working precision) for the identity.
inline double group_norm(const GroupElement& x) {
  int v = norm_exponent(x);
  if (v >= x.descriptor().level) return 0.0;
  return std::pow(static_cast<double>(x.descriptor().p), -v);
}

// |x|_G = ||x||_p^dim = 1/|G/G_n| for x on the n-th shell.
inline double vilenkin_norm(const GroupElement& x) {
  int v = norm_exponent(x);
  if (v >= x.descriptor().level) return 0.0;
  return std::pow(static_cast<double>(x.descriptor().p),
                  -static_cast<double>(v) * x.descriptor().dim());
}

// Norm of the projection to the polarized directions (first kappa coordinates).
inline double sub_norm(const GroupElement& x) {
  int v = norm_exponent(x, 0, x.descriptor().kappa());
  if (v >= x.descriptor().level) return 0.0;
  return std::pow(static_cast<double>(x.descriptor().p), -v);
}

// Haar measure of one level-N cell of the quotient grid.
inline double haar_weight(const GroupDescriptor& g) {
  return 1.0 / static_cast<double>(g.quotient_size());
}

// Mixed-radix bijection G/G_N -> [0, p^{dim N}): coordinate-major, digits of
// coordinate j occupy positions j*N..j*N+N-1. rank(identity) == 0.
inline int64_t rank_of(const GroupElement& x) {
  const GroupDescriptor& g = x.descriptor();
  int64_t scale = ipow(g.p, g.level);
  int64_t r = 0;
  for (int j = g.dim() - 1; j >= 0; --j) r = r * scale + x.value(j);
  return r;
}

inline GroupElement unrank(const GroupDescriptor& g, int64_t rank) {
  if (rank < 0 || rank >= g.quotient_size()) throw std::out_of_range("unrank: out of range");
  int64_t scale = ipow(g.p, g.level);
  std::vector<int64_t> vals(g.dim());
  for (int j = 0; j < g.dim(); ++j) {
    vals[j] = rank % scale;
    rank /= scale;
  }
  return GroupElement::from_values(g, vals);
}

inline std::vector<GroupElement> enumerate_quotient(const GroupDescriptor& g) {
  g.validate();
  std::vector<GroupElement> out;
  int64_t n = g.quotient_size();
  out.reserve(n);
  for (int64_t r = 0; r < n; ++r) out.push_back(unrank(g, r));
  return out;
}

}  // namespace ultraharm
