#pragma once

// Unitary dual of the supported groups, truncated at a finite level.
//
// Every irreducible representation we ship is monomial: it acts on functions
// on an index set Z_p^r/p^m Z_p^r (r = d for H_d, r = 1 for B_4 and G_{5,2},
// m = 0 for characters) by a phase times a translation of the index. The
// matrix in the delta basis therefore has exactly one nonzero entry per row
// and per column,
//
//     pi_xi(x)_{h h'} = e^{2 pi i phase(xi, x, h)} * [h' = h + x_1 mod p^m],
//
// with the phase attached to the ROW index h. That orientation is forced by
// pi(x*y) = pi(x) pi(y); the cross terms of the group law cancel against the
// index shift only on this side, which the exhaustive homomorphism tests
// check. phase() is an exact root-of-unity exponent; no floating point enters
// until a matrix entry is materialized.
//
// Parametrization of the dual (xi a vector of Q_p/Z_p classes, one per
// coordinate of the group):
//   abelian     all xi; dim 1.
//   heisenberg  m = level(xi_3); xi_1, xi_2 have digits at depths > m only;
//               dim p^{dm}.
//   engel4      either level(xi_4) < level(xi_3), with xi_1, xi_2 deep of
//               order level(xi_3); or xi_3 = 0 with xi_1 deep of order
//               level(xi_4) and xi_2 free. dim p^{max(l3,l4)}.
//   g52         either level(xi_4) > level(xi_5), with xi_1, xi_2 deep and
//               xi_3 free; or level(xi_4) <= level(xi_5) (not both 0), with
//               xi_1, xi_3 deep and xi_2 free. dim p^{max(l4,l5)}.
// Completeness of each family is certified by the exact counting identity
// sum of dim^2 over the level-n ball = |G/G_n|.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ultraharm/group.hpp"
#include "ultraharm/padic.hpp"

namespace ultraharm {

struct Irrep {
  GroupDescriptor g;
  std::vector<DualScalar> params;  // one class per group coordinate
  int64_t dim = 1;
  int level = 0;  // smallest n with pi trivial on G_n
  int m = 0;      // induction depth: index set is Z_p^r / p^m Z_p^r
  std::string id;

  double dual_norm() const { return std::pow(static_cast<double>(g.p), level); }
  bool trivial() const { return level == 0; }
};

inline double dual_norm_of(const Irrep& xi) { return xi.dual_norm(); }

namespace detail {

// True when the class has no digits at depths <= m (so it lies in the
// canonical transversal of Q_p / p^{-m} Z_p).
inline bool deep_enough(const DualScalar& c, int m) {
  if (c.level() == 0 || m == 0) return true;
  return c.level() > m && c.num() < ipow(c.p(), c.level() - m);
}

}  // namespace detail

inline std::string irrep_id(GroupKind kind, int level, const std::vector<DualScalar>& params) {
  std::string s = to_string(kind) + ":" + std::to_string(level) + ":";
  for (size_t i = 0; i < params.size(); ++i) {
    if (i) s += ",";
    s += params[i].to_string();
  }
  return s;
}

inline Irrep make_irrep(const GroupDescriptor& g, std::vector<DualScalar> params) {
  if (static_cast<int>(params.size()) != g.dim())
    throw std::invalid_argument("make_irrep: wrong parameter count");
  for (const auto& c : params)
    if (c.p() != g.p) throw std::invalid_argument("make_irrep: prime mismatch");

  Irrep out;
  out.g = g;
  int maxlev = 0;
  for (const auto& c : params) maxlev = std::max(maxlev, c.level());
  out.level = maxlev;

  auto deep = [&](int first, int count, int m) {
    for (int i = first; i < first + count; ++i)
      if (!detail::deep_enough(params[i], m))
        throw std::invalid_argument("make_irrep: parameter not in canonical transversal");
  };

  switch (g.kind) {
    case GroupKind::abelian:
      out.m = 0;
      out.dim = 1;
      break;
    case GroupKind::heisenberg: {
      int m = params[2 * g.d].level();
      deep(0, 2 * g.d, m);
      out.m = m;
      out.dim = ipow(g.p, static_cast<int64_t>(m) * g.d);
      break;
    }
    case GroupKind::engel4: {
      int l3 = params[2].level(), l4 = params[3].level();
      if (l3 > 0) {
        if (l4 >= l3) throw std::invalid_argument("make_irrep: engel4 requires |xi_4| < |xi_3| or xi_3 = 0");
        deep(0, 2, l3);
      } else {
        deep(0, 1, l4);
      }
      out.m = std::max(l3, l4);
      out.dim = ipow(g.p, out.m);
      break;
    }
    case GroupKind::g52: {
      int l4 = params[3].level(), l5 = params[4].level();
      if (l4 > l5) {
        deep(0, 2, l4);
      } else if (l5 > 0) {
        deep(0, 1, l5);
        deep(2, 1, l5);
      }
      out.m = std::max(l4, l5);
      out.dim = ipow(g.p, out.m);
      break;
    }
  }
  out.params = std::move(params);
  out.id = irrep_id(g.kind, out.level, out.params);
  return out;
}

// ---- enumeration ----------------------------------------------------------

// All classes of Q_p/Z_p with level <= n, ordered by (level, numerator).
inline std::vector<DualScalar> dual_ball(int64_t p, int n) {
  std::vector<DualScalar> out;
  out.push_back(DualScalar::zero(p));
  for (int l = 1; l <= n; ++l)
    for (int64_t a = 1; a < ipow(p, l); ++a)
      if (a % p != 0) out.emplace_back(p, a, l);
  return out;
}

inline std::vector<DualScalar> dual_level_exactly(int64_t p, int l) {
  std::vector<DualScalar> out;
  if (l == 0) {
    out.push_back(DualScalar::zero(p));
    return out;
  }
  for (int64_t a = 1; a < ipow(p, l); ++a)
    if (a % p != 0) out.emplace_back(p, a, l);
  return out;
}

// Classes with digits only at depths in (m, n]: b/p^n with 0 <= b < p^{n-m}.
inline std::vector<DualScalar> dual_deep(int64_t p, int n, int m) {
  std::vector<DualScalar> out;
  for (int64_t b = 0; b < ipow(p, std::max(0, n - m)); ++b) out.emplace_back(p, b, n);
  return out;
}

namespace detail {

// Odometer over a list of per-position choices; calls f(tuple) for each.
template <class F>
void product_over(const std::vector<std::vector<DualScalar>>& choices, F&& f) {
  std::vector<size_t> idx(choices.size(), 0);
  std::vector<DualScalar> tuple;
  while (true) {
    tuple.clear();
    for (size_t i = 0; i < choices.size(); ++i) tuple.push_back(choices[i][idx[i]]);
    f(tuple);
    size_t i = 0;
    for (; i < choices.size(); ++i) {
      if (++idx[i] < choices[i].size()) break;
      idx[i] = 0;
    }
    if (i == choices.size()) break;
  }
}

}  // namespace detail

// All irreps trivial on G_n, sorted by (level, id). Completeness is certified
// by the counting identity (tested, and cheap enough to assert here).
inline std::vector<Irrep> enumerate_irreps(const GroupDescriptor& g, int n) {
  g.validate();
  if (n > g.level) throw std::invalid_argument("enumerate_irreps: level beyond descriptor precision");
  std::vector<Irrep> out;
  auto emit = [&](const std::vector<DualScalar>& tuple) { out.push_back(make_irrep(g, tuple)); };

  switch (g.kind) {
    case GroupKind::abelian: {
      std::vector<std::vector<DualScalar>> ch(g.d, dual_ball(g.p, n));
      detail::product_over(ch, emit);
      break;
    }
    case GroupKind::heisenberg: {
      for (int m = 0; m <= n; ++m) {
        std::vector<std::vector<DualScalar>> ch;
        for (int i = 0; i < 2 * g.d; ++i) ch.push_back(dual_deep(g.p, n, m));
        ch.push_back(dual_level_exactly(g.p, m));
        detail::product_over(ch, emit);
      }
      break;
    }
    case GroupKind::engel4: {
      // xi_3 = 0 branch (k = 0 gives the characters)
      for (int k = 0; k <= n; ++k) {
        std::vector<std::vector<DualScalar>> ch = {
            dual_deep(g.p, n, k), dual_ball(g.p, n),
            {DualScalar::zero(g.p)}, dual_level_exactly(g.p, k)};
        detail::product_over(ch, emit);
      }
      // |xi_4| < |xi_3| branch
      for (int m = 1; m <= n; ++m) {
        std::vector<std::vector<DualScalar>> ch = {
            dual_deep(g.p, n, m), dual_deep(g.p, n, m),
            dual_level_exactly(g.p, m), dual_ball(g.p, m - 1)};
        detail::product_over(ch, emit);
      }
      break;
    }
    case GroupKind::g52: {
      // characters
      {
        std::vector<std::vector<DualScalar>> ch = {
            dual_ball(g.p, n), dual_ball(g.p, n), dual_ball(g.p, n),
            {DualScalar::zero(g.p)}, {DualScalar::zero(g.p)}};
        detail::product_over(ch, emit);
      }
      // |xi_4| > |xi_5|
      for (int a = 1; a <= n; ++a) {
        std::vector<std::vector<DualScalar>> ch = {
            dual_deep(g.p, n, a), dual_deep(g.p, n, a), dual_ball(g.p, n),
            dual_level_exactly(g.p, a), dual_ball(g.p, a - 1)};
        detail::product_over(ch, emit);
      }
      // |xi_4| <= |xi_5|, xi_5 nontrivial
      for (int b = 1; b <= n; ++b) {
        std::vector<std::vector<DualScalar>> ch = {
            dual_deep(g.p, n, b), dual_ball(g.p, n), dual_deep(g.p, n, b),
            dual_ball(g.p, b), dual_level_exactly(g.p, b)};
        detail::product_over(ch, emit);
      }
      break;
    }
  }

  std::sort(out.begin(), out.end(), [](const Irrep& a, const Irrep& b) {
    if (a.level != b.level) return a.level < b.level;
    return a.id < b.id;
  });

  int64_t total = 0;
  for (const auto& xi : out) total += xi.dim * xi.dim;
  int64_t expected = ipow(g.p, static_cast<int64_t>(g.dim()) * n);
  if (total != expected)
    throw std::logic_error("enumerate_irreps: counting identity failed (incomplete dual)");
  return out;
}

inline std::vector<Irrep> sphere(const GroupDescriptor& g, int n) {
  std::vector<Irrep> out;
  for (auto& xi : enumerate_irreps(g, n))
    if (xi.level == n) out.push_back(std::move(xi));
  return out;
}

// ---- evaluation -----------------------------------------------------------

namespace detail {

// Decode the row index of an induced representation into its coset tuple.
// For H_d the index set is (Z/p^m)^d in mixed-radix rank order; elsewhere it
// is a single residue mod p^m.
inline void decode_index(const Irrep& xi, int64_t h, int64_t* comps, int* count) {
  int64_t pm = ipow(xi.g.p, xi.m);
  if (xi.g.kind == GroupKind::heisenberg) {
    *count = xi.g.d;
    for (int j = 0; j < xi.g.d; ++j) {
      comps[j] = h % pm;
      h /= pm;
    }
  } else {
    *count = 1;
    comps[0] = h;
  }
}

}  // namespace detail

// Visit the nonzero entries of pi_xi(x): calls f(h, h', num) for every row h,
// where h' is the unique nonzero column and num is the exact phase exponent
// at order p^{xi.level}. Requires x carried at precision >= xi.level.
template <class F>
void for_each_nonzero(const Irrep& xi, const GroupElement& x, F&& f) {
  const GroupDescriptor& g = xi.g;
  if (!(x.descriptor().kind == g.kind && x.descriptor().p == g.p && x.descriptor().d == g.d))
    throw std::invalid_argument("for_each_nonzero: group mismatch");
  if (x.descriptor().level < xi.level)
    throw std::invalid_argument("for_each_nonzero: element precision below irrep level");

  const int L = xi.level;
  const int64_t p = g.p;
  const int64_t pL = ipow(p, L);
  const int64_t pm = ipow(p, xi.m);

  // Base phase {xi . x}_p, lifted to order p^L.
  int64_t A = 0;
  {
    int64_t acc = 0;
    for (int j = 0; j < g.dim(); ++j) {
      const DualScalar& c = xi.params[j];
      if (c.level() == 0) continue;
      int64_t pl = ipow(p, c.level());
      acc = mod_floor(acc + (pL / pl) * mod_floor(c.num() * (x.value(j) % pl), pl), pL);
    }
    A = acc;
  }

  if (xi.dim == 1) {
    f(int64_t{0}, int64_t{0}, A);
    return;
  }

  switch (g.kind) {
    case GroupKind::heisenberg: {
      if (g.d > 8) throw std::invalid_argument("for_each_nonzero: heisenberg d > 8 unsupported");
      const DualScalar& xi3 = xi.params[2 * g.d];
      const int l3 = xi3.level();  // == xi.m
      const int64_t pl3 = ipow(p, l3);
      const int64_t lift3 = pL / pl3;
      int64_t x1[8], x2[8];
      for (int j = 0; j < g.d; ++j) {
        x1[j] = x.value(j) % pm;
        x2[j] = x.value(g.d + j) % pl3;
      }
      int64_t hc[8];
      int cnt;
      for (int64_t h = 0; h < xi.dim; ++h) {
        detail::decode_index(xi, h, hc, &cnt);
        int64_t dot = 0, hp = 0, scale = 1;
        for (int j = 0; j < g.d; ++j) {
          dot += x2[j] * hc[j];
          hp += ((hc[j] + x1[j]) % pm) * scale;
          scale *= pm;
        }
        int64_t num = mod_floor(A + lift3 * mod_floor(xi3.num() * mod_floor(dot, pl3), pl3), pL);
        f(h, hp, num);
      }
      break;
    }
    case GroupKind::engel4: {
      const DualScalar &xi3 = xi.params[2], &xi4 = xi.params[3];
      const int l3 = xi3.level(), l4 = xi4.level();
      const int64_t pl3 = ipow(p, l3), pl4 = ipow(p, l4);
      const int64_t inv2 = (pl4 + 1) / 2;
      const int64_t x1 = x.value(0) % pm;
      const int64_t x2_3 = x.value(1) % pl3, x2_4 = x.value(1) % pl4;
      const int64_t x3_4 = x.value(2) % pl4;
      for (int64_t h = 0; h < xi.dim; ++h) {
        int64_t num = A;
        if (l3 > 0)
          num += (pL / pl3) * mod_floor(xi3.num() * mod_floor(x2_3 * h, pl3), pl3);
        if (l4 > 0) {
          int64_t t = mod_floor(x3_4 * h + mod_floor(x2_4 * inv2, pl4) * mod_floor(h * h, pl4), pl4);
          num += (pL / pl4) * mod_floor(xi4.num() * t, pl4);
        }
        f(h, (h + x1) % pm, mod_floor(num, pL));
      }
      break;
    }
    case GroupKind::g52: {
      const DualScalar &xi4 = xi.params[3], &xi5 = xi.params[4];
      const int l4 = xi4.level(), l5 = xi5.level();
      const int64_t pl4 = ipow(p, l4), pl5 = ipow(p, l5);
      const int64_t x1 = x.value(0) % pm;
      const int64_t x2_4 = x.value(1) % pl4;
      const int64_t x3_5 = x.value(2) % pl5;
      for (int64_t h = 0; h < xi.dim; ++h) {
        int64_t num = A;
        if (l4 > 0) num += (pL / pl4) * mod_floor(xi4.num() * mod_floor(x2_4 * h, pl4), pl4);
        if (l5 > 0) num += (pL / pl5) * mod_floor(xi5.num() * mod_floor(x3_5 * h, pl5), pl5);
        f(h, (h + x1) % pm, mod_floor(num, pL));
      }
      break;
    }
    case GroupKind::abelian:
      throw std::logic_error("unreachable");  // dim == 1 handled above
  }
}

// Precomputed evaluator for one irrep against a fixed grid precision N.
// Hoists all power/lift computations out of the inner loops and folds the
// linear part of the phase into per-coordinate lookup tables, so a visit
// costs O(dim) integer adds; this is what makes the transforms run at
// O(|G/G_N| * sum d_xi) with a small constant.
class IrrepEvaluator {
 public:
  IrrepEvaluator(const Irrep& xi, int N) : xi_(xi) {
    if (N < xi.level)
      throw std::invalid_argument("IrrepEvaluator: grid precision below irrep level");
    const GroupDescriptor& g = xi.g;
    q_ = ipow(g.p, N);
    pL_ = ipow(g.p, xi.level);
    pm_ = ipow(g.p, xi.m);
    dim_ = g.dim();
    atab_.assign(static_cast<size_t>(dim_) * q_, 0);
    for (int j = 0; j < dim_; ++j) {
      const DualScalar& c = xi.params[j];
      if (c.level() == 0) continue;
      int64_t pl = ipow(g.p, c.level()), lift = pL_ / pl;
      for (int64_t v = 0; v < q_; ++v)
        atab_[static_cast<size_t>(j) * q_ + v] = lift * mod_floor(c.num() * (v % pl), pl);
    }
    switch (g.kind) {
      case GroupKind::abelian:
        kindcase_ = 0;
        break;
      case GroupKind::heisenberg: {
        if (g.d > 8 && xi.m > 0)
          throw std::invalid_argument("IrrepEvaluator: heisenberg d > 8 unsupported");
        const DualScalar& c3 = xi.params[2 * g.d];
        n3_ = c3.num();
        pl3_ = ipow(g.p, c3.level());
        lift3_ = pL_ / pl3_;
        kindcase_ = xi.m == 0 ? 0 : (g.d == 1 ? 1 : 2);
        break;
      }
      case GroupKind::engel4: {
        const DualScalar &c3 = xi.params[2], &c4 = xi.params[3];
        n3_ = c3.num();
        pl3_ = ipow(g.p, c3.level());
        lift3_ = pL_ / pl3_;
        n4_ = c4.num();
        pl4_ = ipow(g.p, c4.level());
        lift4_ = pL_ / pl4_;
        inv2_ = (pl4_ + 1) / 2;
        kindcase_ = xi.m == 0 ? 0 : 3;
        break;
      }
      case GroupKind::g52: {
        const DualScalar &c4 = xi.params[3], &c5 = xi.params[4];
        n4_ = c4.num();
        pl4_ = ipow(g.p, c4.level());
        lift4_ = pL_ / pl4_;
        n5_ = c5.num();
        pl5_ = ipow(g.p, c5.level());
        lift5_ = pL_ / pl5_;
        kindcase_ = xi.m == 0 ? 0 : 4;
        break;
      }
    }
  }

  const Irrep& irrep() const { return xi_; }

  // c: raw coordinate residues in [0, p^N), rank order. Calls f(h, h', num)
  // for each nonzero entry, num the phase exponent at order p^{level}.
  template <class F>
  void visit(const int64_t* c, F&& f) const {
    int64_t A = 0;
    for (int j = 0; j < dim_; ++j) A += atab_[static_cast<size_t>(j) * q_ + c[j]];
    if (kindcase_ == 0) {
      f(int64_t{0}, int64_t{0}, A % pL_);
      return;
    }
    switch (kindcase_) {
      case 1: {  // heisenberg d = 1
        const int64_t x1 = c[0] % pm_, x2 = c[1] % pl3_;
        for (int64_t h = 0; h < xi_.dim; ++h)
          f(h, (h + x1) % pm_, (A + lift3_ * ((n3_ * ((x2 * h) % pl3_)) % pl3_)) % pL_);
        break;
      }
      case 2: {  // heisenberg general d
        const int d = xi_.g.d;
        int64_t x1[8], x2[8], hc[8];
        for (int j = 0; j < d; ++j) {
          x1[j] = c[j] % pm_;
          x2[j] = c[d + j] % pl3_;
        }
        for (int64_t h = 0; h < xi_.dim; ++h) {
          int64_t t = h, dot = 0, hp = 0, scale = 1;
          for (int j = 0; j < d; ++j) {
            hc[j] = t % pm_;
            t /= pm_;
            dot += x2[j] * hc[j];
            hp += ((hc[j] + x1[j]) % pm_) * scale;
            scale *= pm_;
          }
          f(h, hp, (A + lift3_ * ((n3_ * (dot % pl3_)) % pl3_)) % pL_);
        }
        break;
      }
      case 3: {  // engel4
        const int64_t x1 = c[0] % pm_;
        const int64_t x2_3 = c[1] % pl3_, x2_4 = (c[1] * inv2_) % pl4_, x3_4 = c[2] % pl4_;
        for (int64_t h = 0; h < xi_.dim; ++h) {
          int64_t num = A;
          if (pl3_ > 1) num += lift3_ * ((n3_ * ((x2_3 * h) % pl3_)) % pl3_);
          if (pl4_ > 1)
            num += lift4_ * ((n4_ * ((x3_4 * h + x2_4 * ((h * h) % pl4_)) % pl4_)) % pl4_);
          f(h, (h + x1) % pm_, num % pL_);
        }
        break;
      }
      case 4: {  // g52
        const int64_t x1 = c[0] % pm_;
        const int64_t x2 = c[1] % pl4_, x3 = c[2] % pl5_;
        for (int64_t h = 0; h < xi_.dim; ++h) {
          int64_t num = A;
          if (pl4_ > 1) num += lift4_ * ((n4_ * ((x2 * h) % pl4_)) % pl4_);
          if (pl5_ > 1) num += lift5_ * ((n5_ * ((x3 * h) % pl5_)) % pl5_);
          f(h, (h + x1) % pm_, num % pL_);
        }
        break;
      }
    }
  }

 private:
  Irrep xi_;
  int64_t q_ = 1, pL_ = 1, pm_ = 1, dim_ = 1;
  int kindcase_ = 0;
  std::vector<int64_t> atab_;
  int64_t n3_ = 0, pl3_ = 1, lift3_ = 0;
  int64_t n4_ = 0, pl4_ = 1, lift4_ = 0, inv2_ = 0;
  int64_t n5_ = 0, pl5_ = 1, lift5_ = 0;
};

inline complex_t coefficient(const Irrep& xi, const GroupElement& x, int64_t h, int64_t hp) {
  if (h < 0 || h >= xi.dim || hp < 0 || hp >= xi.dim)
    throw std::out_of_range("coefficient: index out of range");
  complex_t val(0.0, 0.0);
  for_each_nonzero(xi, x, [&](int64_t row, int64_t col, int64_t num) {
    if (row == h && col == hp) val = RootOfUnity(xi.g.p, num, xi.level).value();
  });
  return val;
}

inline complex_t character(const Irrep& xi, const GroupElement& x) {
  complex_t tr(0.0, 0.0);
  for_each_nonzero(xi, x, [&](int64_t row, int64_t col, int64_t num) {
    if (row == col) tr += RootOfUnity(xi.g.p, num, xi.level).value();
  });
  return tr;
}

inline Eigen::MatrixXcd irrep_matrix(const Irrep& xi, const GroupElement& x) {
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(xi.dim, xi.dim);
  for_each_nonzero(xi, x, [&](int64_t h, int64_t hp, int64_t num) {
    M(h, hp) = RootOfUnity(xi.g.p, num, xi.level).value();
  });
  return M;
}

// ---- tensor decomposition -------------------------------------------------

struct RepComponent {
  Irrep irrep;
  int64_t multiplicity = 1;
};

struct RepDecomposition {
  std::vector<RepComponent> components;  // sorted by (dual norm, id)

  int64_t total_dim() const {
    int64_t t = 0;
    for (const auto& c : components) t += c.multiplicity * c.irrep.dim;
    return t;
  }
};

namespace detail {

inline void sort_components(RepDecomposition& dec) {
  std::sort(dec.components.begin(), dec.components.end(),
            [](const RepComponent& a, const RepComponent& b) {
              if (a.irrep.level != b.irrep.level) return a.irrep.level < b.irrep.level;
              return a.irrep.id < b.irrep.id;
            });
}

// Strip the digits at depths <= m (projection Q_p/Z_p -> Q_p/p^{-m}Z_p
// composed with the canonical transversal section).
inline DualScalar strip_shallow(const DualScalar& c, int m) {
  if (c.level() <= m) return DualScalar::zero(c.p());
  return DualScalar(c.p(), c.num() % ipow(c.p(), c.level() - m), c.level());
}

}  // namespace detail

// Closed-form decomposition of pi_eta (x) pi_xi for H_d (and the trivial
// abelian case). With a = level(eta_3), b = level(xi_3), N = max(a,b) and
// M = level(eta_3 + xi_3), the components are exactly the irreps with
// central parameter eta_3 + xi_3 whose transverse parameters are congruent
// to eta_12 + xi_12 mod p^{-N}Z_p^{2d}, each with multiplicity
// p^{d(a + b + M - 2N)}.
inline RepDecomposition tensor_decompose_closed(const Irrep& eta, const Irrep& xi) {
  const GroupDescriptor& g = eta.g;
  RepDecomposition dec;
  if (g.kind == GroupKind::abelian) {
    std::vector<DualScalar> sum;
    for (int j = 0; j < g.d; ++j) sum.push_back(eta.params[j] + xi.params[j]);
    dec.components.push_back({make_irrep(g, sum), 1});
    return dec;
  }
  if (g.kind != GroupKind::heisenberg)
    throw std::invalid_argument("tensor_decompose_closed: closed form only for abelian/heisenberg");

  const int a = eta.m, b = xi.m, N = std::max(a, b);
  DualScalar s = eta.params[2 * g.d] + xi.params[2 * g.d];
  const int M = s.level();
  int64_t mult = ipow(g.p, static_cast<int64_t>(g.d) * (a + b + M - 2 * N));

  std::vector<DualScalar> base;
  for (int j = 0; j < 2 * g.d; ++j)
    base.push_back(detail::strip_shallow(eta.params[j] + xi.params[j], M));

  // gamma runs over classes with digits in (M, N]; when M == N only gamma = 0.
  std::vector<std::vector<DualScalar>> gchoices;
  for (int j = 0; j < 2 * g.d; ++j) {
    std::vector<DualScalar> ch;
    for (int64_t t = 0; t < ipow(g.p, N - M); ++t) {
      DualScalar gam(g.p, t, N);  // t/p^N has digits at depths (M, N] iff t < p^{N-M}
      if (detail::deep_enough(gam, M)) ch.push_back(gam);
    }
    gchoices.push_back(ch);
  }
  detail::product_over(gchoices, [&](const std::vector<DualScalar>& gam) {
    std::vector<DualScalar> params;
    for (int j = 0; j < 2 * g.d; ++j) params.push_back(base[j] + gam[j]);
    params.push_back(s);
    dec.components.push_back({make_irrep(g, params), mult});
  });
  detail::sort_components(dec);
  if (dec.total_dim() != eta.dim * xi.dim)
    throw std::logic_error("tensor_decompose_closed: dimension bookkeeping failed");
  return dec;
}

// Character-oracle decomposition, valid for every supported group: the
// multiplicity of tau in eta (x) xi is the exact integer
// (1/|G/G_N|) sum_x chi_eta(x) chi_xi(x) conj(chi_tau(x)). Characters vanish
// off a small subgroup, so the product is accumulated on its sparse support.
inline RepDecomposition tensor_decompose_oracle(const Irrep& eta, const Irrep& xi) {
  GroupDescriptor g = eta.g;
  g.level = std::max({eta.level, xi.level, 1});
  const int64_t size = g.quotient_size();

  std::vector<std::pair<GroupElement, complex_t>> support;
  for (int64_t r = 0; r < size; ++r) {
    GroupElement x = unrank(g, r);
    complex_t ce = character(eta, x);
    if (std::abs(ce) < 1e-14) continue;
    complex_t cx = character(xi, x);
    if (std::abs(cx) < 1e-14) continue;
    support.emplace_back(std::move(x), ce * cx);
  }

  RepDecomposition dec;
  for (const auto& tau : enumerate_irreps(g, g.level)) {
    complex_t acc(0.0, 0.0);
    for (const auto& [x, v] : support) acc += v * std::conj(character(tau, x));
    double mult = acc.real() / static_cast<double>(size);
    double rounded = std::round(mult);
    if (std::abs(mult - rounded) > 1e-6 || std::abs(acc.imag()) / size > 1e-6)
      throw std::runtime_error("tensor_decompose_oracle: non-integer multiplicity for " + tau.id);
    if (rounded < -0.5) throw std::runtime_error("tensor_decompose_oracle: negative multiplicity");
    if (rounded > 0.5) dec.components.push_back({tau, static_cast<int64_t>(rounded)});
  }
  detail::sort_components(dec);
  if (dec.total_dim() != eta.dim * xi.dim)
    throw std::logic_error("tensor_decompose_oracle: dimension bookkeeping failed");
  return dec;
}

inline RepDecomposition tensor_decompose(const Irrep& eta, const Irrep& xi) {
  if (!(eta.g.kind == xi.g.kind && eta.g.p == xi.g.p && eta.g.d == xi.g.d))
    throw std::invalid_argument("tensor_decompose: cross-group tensor rejected");
  if (eta.g.kind == GroupKind::abelian || eta.g.kind == GroupKind::heisenberg)
    return tensor_decompose_closed(eta, xi);
  return tensor_decompose_oracle(eta, xi);
}

// ---- dual tree export -----------------------------------------------------

// The dual of Z_p^dim is an infinite rooted tree; level-n classes hang under
// their image by multiplication by p (the canonical level-lowering map).
// For abelian groups and H_d the nodes are the parameter tuples, each
// annotated with the dim and norm of the irrep class it belongs to (for H_d
// a d_xi-dimensional irrep absorbs d_xi^2 tuples). For engel4/g52 there is
// no closed class map on full tuples, so the nodes are the canonical irreps.
inline std::string export_tree(const GroupDescriptor& g, int n, const std::string& format) {
  if (n < 1) throw std::invalid_argument("export_tree: level must be >= 1");
  if (format != "dot" && format != "json") throw std::invalid_argument("export_tree: unknown format");
  g.validate();

  struct Node {
    std::string id;
    std::string parent;  // empty for root
    int64_t dim;
    double norm;
    int level;
  };
  std::vector<Node> nodes;

  auto param_key = [](const std::vector<DualScalar>& t) {
    std::string s;
    for (size_t i = 0; i < t.size(); ++i) {
      if (i) s += ",";
      s += t[i].to_string();
    }
    return s;
  };
  auto parent_key = [&](const std::vector<DualScalar>& t) {
    std::vector<DualScalar> par;
    for (const auto& c : t) par.push_back(c.scaled(g.p));
    return param_key(par);
  };

  if (g.kind == GroupKind::abelian || g.kind == GroupKind::heisenberg) {
    // nodes = all parameter tuples of level <= n
    std::vector<std::vector<DualScalar>> ch(g.dim(), dual_ball(g.p, n));
    detail::product_over(ch, [&](const std::vector<DualScalar>& t) {
      int lev = 0;
      for (const auto& c : t) lev = std::max(lev, c.level());
      Irrep cls;
      if (g.kind == GroupKind::abelian) {
        cls = make_irrep(g, t);
      } else {
        int m = t[2 * g.d].level();
        std::vector<DualScalar> canon;
        for (int j = 0; j < 2 * g.d; ++j) canon.push_back(detail::strip_shallow(t[j], m));
        canon.push_back(t[2 * g.d]);
        cls = make_irrep(g, canon);
      }
      nodes.push_back({param_key(t), lev == 0 ? "" : parent_key(t), cls.dim,
                       cls.dual_norm(), lev});
    });
  } else {
    for (const auto& xi : enumerate_irreps(g, n)) {
      std::string par;
      if (xi.level > 0) {
        std::vector<DualScalar> pt;
        for (const auto& c : xi.params) pt.push_back(c.scaled(g.p));
        par = param_key(pt);
      }
      nodes.push_back({param_key(xi.params), par, xi.dim, xi.dual_norm(), xi.level});
    }
  }

  std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) {
    if (a.level != b.level) return a.level < b.level;
    return a.id < b.id;
  });

  std::ostringstream os;
  if (format == "dot") {
    os << "digraph dual_tree {\n";
    for (const auto& nd : nodes)
      os << "  \"" << nd.id << "\" [label=\"" << nd.id << " | " << nd.dim << " | "
         << nd.norm << "\"];\n";
    for (const auto& nd : nodes)
      if (!nd.parent.empty()) os << "  \"" << nd.parent << "\" -> \"" << nd.id << "\";\n";
    os << "}\n";
  } else {
    os << "{\"nodes\":[";
    for (size_t i = 0; i < nodes.size(); ++i) {
      if (i) os << ",";
      os << "{\"id\":\"" << nodes[i].id << "\",\"dim\":" << nodes[i].dim
         << ",\"norm\":" << nodes[i].norm << ",\"level\":" << nodes[i].level << "}";
    }
    os << "],\"edges\":[";
    bool first = true;
    for (const auto& nd : nodes) {
      if (nd.parent.empty()) continue;
      if (!first) os << ",";
      first = false;
      os << "{\"from\":\"" << nd.parent << "\",\"to\":\"" << nd.id << "\"}";
    }
    os << "]}";
  }
  return os.str();
}

}  // namespace ultraharm
