#pragma once
// Weighted measures and norms, equivalence-of-norms sums, structural scans of
// the dual (eigenvalue counting), the Littlewood-Paley square function, a
// Calderon-Zygmund decomposition over coset boxes, and certifiers for the
// smoothness hypotheses used by the multiplier checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "ultraharm/operators.hpp"

namespace ultraharm {

// ---------------------------------------------------------------------------
// weighted measures

enum class WeightKind { full, sub };

inline std::string to_string(WeightKind k) {
  return k == WeightKind::full ? "full" : "sub";
}

// Weight w(x) = ||x||^alpha, with the norm running over all coordinates
// (full) or only over the first kappa generating coordinates (sub).
// kappa <= 0 asks for the group's own generating count.
struct WeightSpec {
  double alpha = 0.0;
  WeightKind kind = WeightKind::full;
  int kappa = 0;

  int coordinate_count(const GroupDescriptor& g) const {
    if (kind == WeightKind::full) return g.dim();
    return kappa > 0 ? kappa : g.kappa();
  }
};

// Average of the weight over each grid cell, in rank order. On cells where
// the counted coordinates all vanish mod p^N the grid value ||x||^alpha = 0
// would misrepresent the cell, so those cells carry the exact integral of
// the remaining shell series:
//
//   avg = (1 - p^-c) p^{-N alpha} / (1 - p^{-(alpha+c)}),  c = #coordinates.
//
// With that convention, weighted sums over the grid equal the true integrals
// of ||x||^alpha against Haar measure.
inline Eigen::VectorXd cell_weights(const GroupDescriptor& g, const WeightSpec& w) {
  g.validate();
  const int N = g.level;
  const int cnt = w.coordinate_count(g);
  const double pr = static_cast<double>(g.p);
  if (!(w.alpha > -static_cast<double>(cnt)))
    throw std::invalid_argument("cell_weights: alpha <= -" + std::to_string(cnt) +
                                " diverges at the identity cell");
  const double deep = (1.0 - std::pow(pr, -cnt)) * std::pow(pr, -N * w.alpha) /
                      (1.0 - std::pow(pr, -(w.alpha + cnt)));
  std::vector<double> shell(N + 1);
  for (int v = 0; v <= N; ++v) shell[v] = std::pow(pr, -v * w.alpha);

  const auto flat = detail::flat_coords(g);
  const int64_t size = g.quotient_size();
  const int dmn = g.dim();
  Eigen::VectorXd out(size);
  for (int64_t r = 0; r < size; ++r) {
    int v = norm_exponent_raw(g.p, N, flat.data() + r * dmn, cnt);
    out[r] = v >= N ? deep : shell[v];
  }
  return out;
}

// Exact mu_alpha(G_k) = integral of ||x||^alpha over the ball G_k.
inline double mu_alpha_ball(const GroupDescriptor& g, double alpha, int k) {
  const int dmn = g.dim();
  const double pr = static_cast<double>(g.p);
  if (!(alpha > -static_cast<double>(dmn)))
    throw std::invalid_argument("mu_alpha_ball: alpha <= -dim diverges");
  return (1.0 - std::pow(pr, -dmn)) * std::pow(pr, -k * (alpha + dmn)) /
         (1.0 - std::pow(pr, -(alpha + dmn)));
}

// (1/|G/G_N| sum |f|^r w)^{1/r} with the identity-type cells integrated
// exactly (see cell_weights).
inline double weighted_norm(const GridFunction& f, double r, const WeightSpec& w) {
  if (!(r >= 1.0) || !std::isfinite(r))
    throw std::invalid_argument("weighted_norm: r must lie in [1, infinity)");
  GroupDescriptor g = f.group;
  g.level = f.level;
  Eigen::VectorXd wt = cell_weights(g, w);
  double acc = 0.0;
  for (int64_t i = 0; i < f.values.size(); ++i)
    acc += std::pow(std::abs(f.values[i]), r) * wt[i];
  return std::pow(acc / static_cast<double>(f.values.size()), 1.0 / r);
}

inline double lr_norm(const GridFunction& f, double r) {
  return weighted_norm(f, r, WeightSpec{0.0, WeightKind::full, 0});
}

// ---------------------------------------------------------------------------
// the I_alpha equivalence sum

struct IAlphaReport {
  double partial_sum = 0.0;
  // Tail of the series beyond level n_max, bounded via ||U - I||^2_HS <= 4 d
  // for unitary U (the sharp constant). tail_bound_alt keeps the 2 d variant
  // found in the literature for comparison; it can undercut the true tail.
  double tail_bound = 0.0;
  double tail_bound_alt = 0.0;
  double ratio_to_norm = 0.0;
};

namespace detail {

// ||pi(x) - I||_HS^2 for a monomial representation matrix: diagonal entries
// contribute |phase - 1|^2, off-diagonal positions contribute 1 for the
// misplaced entry plus 1 for the vacated diagonal slot.
inline double hs_distance_to_identity_sq(const IrrepEvaluator& ev, const int64_t* c) {
  const Irrep& xi = ev.irrep();
  const double step = 2.0 * std::numbers::pi / static_cast<double>(ipow(xi.g.p, xi.level));
  double acc = 0.0;
  ev.visit(c, [&](int64_t h, int64_t hp, int64_t num) {
    if (h == hp)
      acc += 2.0 - 2.0 * std::cos(step * static_cast<double>(num));
    else
      acc += 2.0;
  });
  return acc;
}

inline double i_alpha_tail(const GroupDescriptor& g, double alpha, int n_max, double lead) {
  const double pr = static_cast<double>(g.p);
  return lead * (1.0 - std::pow(pr, -g.dim())) * std::pow(pr, -alpha * (n_max + 1)) /
         (1.0 - std::pow(pr, -alpha));
}

}  // namespace detail

// Partial sum of I_alpha(x) = sum_eta d_eta ||eta||^{-(alpha+dim)}
// ||eta(x) - I||^2_HS over the dual ball of radius p^n_max, together with the
// analytic bound for the discarded tail and the ratio against ||x||^alpha.
inline IAlphaReport i_alpha(const GroupElement& x, double alpha, int n_max) {
  const GroupDescriptor& g = x.descriptor();
  if (!(alpha > 0.0)) throw std::invalid_argument("i_alpha: alpha must be positive");
  if (n_max < 1) throw std::invalid_argument("i_alpha: n_max must be >= 1");
  if (g.level < n_max)
    throw std::invalid_argument("i_alpha: x is not resolved past level " +
                                std::to_string(g.level));
  const int k = norm_exponent(x);
  if (k >= g.level) throw std::invalid_argument("i_alpha: x = e has no norm to compare");

  std::vector<int64_t> c(g.dim());
  for (int j = 0; j < g.dim(); ++j) c[j] = x.value(j);

  IAlphaReport rep;
  for (const Irrep& eta : enumerate_irreps(g, n_max)) {
    if (eta.trivial()) continue;
    IrrepEvaluator ev(eta, g.level);
    rep.partial_sum += static_cast<double>(eta.dim) *
                       std::pow(eta.dual_norm(), -(alpha + g.dim())) *
                       detail::hs_distance_to_identity_sq(ev, c.data());
  }
  rep.tail_bound = detail::i_alpha_tail(g, alpha, n_max, 4.0);
  rep.tail_bound_alt = detail::i_alpha_tail(g, alpha, n_max, 2.0);
  rep.ratio_to_norm = rep.partial_sum * std::pow(static_cast<double>(g.p), alpha * k);
  return rep;
}

// Same sum evaluated for every point of the grid G/G_N at once (evaluators
// are built once and shared). The identity cell gets a zeroed report.
inline std::vector<IAlphaReport> i_alpha_scan(const GroupDescriptor& g, double alpha,
                                              int n_max) {
  if (!(alpha > 0.0)) throw std::invalid_argument("i_alpha_scan: alpha must be positive");
  if (n_max < 1 || g.level < n_max)
    throw std::invalid_argument("i_alpha_scan: need 1 <= n_max <= grid level");
  g.validate();
  const auto flat = detail::flat_coords(g);
  const int64_t size = g.quotient_size();
  const int dmn = g.dim();

  std::vector<IrrepEvaluator> evs;
  std::vector<double> coeff;
  for (const Irrep& eta : enumerate_irreps(g, n_max)) {
    if (eta.trivial()) continue;
    evs.emplace_back(eta, g.level);
    coeff.push_back(static_cast<double>(eta.dim) *
                    std::pow(eta.dual_norm(), -(alpha + dmn)));
  }

  const double tail4 = detail::i_alpha_tail(g, alpha, n_max, 4.0);
  const double tail2 = detail::i_alpha_tail(g, alpha, n_max, 2.0);
  std::vector<IAlphaReport> out(size);
  for (int64_t r = 0; r < size; ++r) {
    const int64_t* c = flat.data() + r * dmn;
    const int k = norm_exponent_raw(g.p, g.level, c, dmn);
    if (k >= g.level) continue;  // identity cell
    IAlphaReport& rep = out[r];
    for (size_t i = 0; i < evs.size(); ++i)
      rep.partial_sum += coeff[i] * detail::hs_distance_to_identity_sq(evs[i], c);
    rep.tail_bound = tail4;
    rep.tail_bound_alt = tail2;
    rep.ratio_to_norm = rep.partial_sum * std::pow(static_cast<double>(g.p), alpha * k);
  }
  return out;
}

// ---------------------------------------------------------------------------
// eigenvalue-count scan behind the lower bound property

struct LowerBoundRow {
  std::string id;
  int64_t dim = 0;
  int64_t min_nonunit = 0;  // min over x with pi(x) != I of #eigenvalues != 1
  double min_ratio = 0.0;
};

struct LowerBoundReport {
  std::vector<LowerBoundRow> rows;
  double global_C = 1.0;
  // conjectured optimal constant 1 - p^{-dim} for nilpotent groups; recorded
  // for comparison, never asserted.
  double conjectured_C = 0.0;
  // true when every pi(x) != I carries at most one eigenvalue equal to 1
  bool structural_pass = true;
  std::string witness;  // first violation, "<irrep id> @ rank <r>"
};

// Exhaustive scan over all nontrivial irreps of level <= n and all x in
// G/G_n. Eigenvalues of a monomial matrix come in cycles: a cycle of length
// L with phase product P contributes the L-th roots of P, so it contains the
// eigenvalue 1 exactly when P = 1, and the count is exact integer arithmetic
// on the phase exponents.
inline LowerBoundReport lower_bound_report(const GroupDescriptor& g, int n) {
  GroupDescriptor gd = g;
  gd.level = n;
  gd.validate();
  if (n < 1) throw std::invalid_argument("lower_bound_report: need n >= 1");
  const auto flat = detail::flat_coords(gd);
  const int64_t size = gd.quotient_size();
  const int dmn = gd.dim();

  LowerBoundReport rep;
  rep.conjectured_C = 1.0 - std::pow(static_cast<double>(gd.p), -dmn);

  std::vector<int64_t> perm, expo, seen;
  for (const Irrep& xi : enumerate_irreps(gd, n)) {
    if (xi.trivial()) continue;
    IrrepEvaluator ev(xi, n);
    const int64_t pL = ipow(gd.p, xi.level);
    perm.assign(xi.dim, 0);
    expo.assign(xi.dim, 0);
    seen.assign(xi.dim, -1);  // stamped with the rank instead of re-cleared
    int64_t* const pp = perm.data();
    int64_t* const pe = expo.data();
    int64_t* const ps = seen.data();
    int64_t min_nonunit = xi.dim;
    for (int64_t r = 0; r < size; ++r) {
      const int64_t* c = flat.data() + r * dmn;
      int64_t moved = 0;
      ev.visit(c, [&](int64_t h, int64_t hp, int64_t num) {
        pp[h] = hp;
        pe[h] = num;
        moved |= (hp ^ h) | num;
      });
      if (moved == 0) continue;  // pi(x) = I

      int64_t unit_cycles = 0;
      for (int64_t h0 = 0; h0 < xi.dim; ++h0) {
        if (ps[h0] == r) continue;
        int64_t h = h0, s = 0;
        do {
          ps[h] = r;
          s += pe[h];
          h = pp[h];
        } while (h != h0);
        if (s % pL == 0) ++unit_cycles;
      }
      if (unit_cycles > 1 && rep.structural_pass) {
        rep.structural_pass = false;
        rep.witness = xi.id + " @ rank " + std::to_string(r);
      }
      min_nonunit = std::min(min_nonunit, xi.dim - unit_cycles);
    }
    double ratio = static_cast<double>(min_nonunit) / static_cast<double>(xi.dim);
    rep.rows.push_back({xi.id, xi.dim, min_nonunit, ratio});
    rep.global_C = std::min(rep.global_C, ratio);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// equivalence of the weighted L^2 norm with the difference-operator sum

struct NormEquivReport {
  double lhs = 0.0;  // ||f||^2 weighted by ||x||^alpha
  double rhs = 0.0;  // sum_xi sum_eta d_xi d_eta ||eta||^{-(alpha+d)} ||Delta_eta fhat(xi)||^2
  double ratio = 0.0;
  double tail_bound = 0.0;  // bound for the eta-levels discarded past n_max
};

inline NormEquivReport norm_equiv_check(const GridFunction& f, double alpha, int n_max) {
  if (!(alpha > 0.0)) throw std::invalid_argument("norm_equiv_check: alpha must be positive");
  if (n_max < 1 || n_max > f.level)
    throw std::invalid_argument("norm_equiv_check: need 1 <= n_max <= f.level");
  GroupDescriptor g = f.group;
  g.level = f.level;

  NormEquivReport rep;
  double l2 = weighted_norm(f, 2.0, WeightSpec{alpha, WeightKind::full, 0});
  rep.lhs = l2 * l2;

  Symbol fh = forward(f, f.level);
  const int dmn = g.dim();
  for (const Irrep& eta : fh.irreps) {
    if (eta.trivial() || eta.level > n_max) continue;
    const double wt =
        static_cast<double>(eta.dim) * std::pow(eta.dual_norm(), -(alpha + dmn));
    for (const Irrep& xi : fh.irreps) {
      DiffResult d = delta(eta, fh, xi, 0.0);
      rep.rhs += wt * static_cast<double>(xi.dim) * d.hs_norm * d.hs_norm;
    }
  }
  double plain = lr_norm(f, 2.0);
  rep.tail_bound = plain * plain * detail::i_alpha_tail(g, alpha, n_max, 4.0);
  rep.ratio = rep.lhs > 0.0 ? rep.rhs / rep.lhs : 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Sobolev norms via the radial calculus

// ||D^beta f||_{L^r} where D^beta has the radial profile <xi>^beta =
// max(1, ||xi||)^beta; the homogeneous variant drops the trivial sphere.
inline double sobolev_norm(const GridFunction& f, double beta, double r,
                           bool homogeneous = false) {
  if (!(r > 1.0) || !std::isfinite(r))
    throw std::invalid_argument("sobolev_norm: r must lie in (1, infinity)");
  RadialProfile prof;
  for (int k = 0; k <= f.level; ++k) {
    double nrm = std::pow(static_cast<double>(f.group.p), k);
    prof.phi[nrm] = k == 0 ? (homogeneous ? 0.0 : 1.0) : std::pow(nrm, beta);
  }
  GroupDescriptor g = f.group;
  g.level = f.level;
  return lr_norm(apply_multiplier(radial_calculus(prof, g, f.level), f), r);
}

// ---------------------------------------------------------------------------
// Littlewood-Paley pieces

// f_n(x) = sum over the dual sphere of radius p^n of d_xi Tr[pi(x) fhat(xi)],
// one grid function per 0 <= n <= f.level. Their sum recovers f.
inline std::vector<GridFunction> sphere_components(const GridFunction& f) {
  Symbol fh = forward(f, f.level);
  std::vector<GridFunction> out;
  for (int n = 0; n <= f.level; ++n) {
    Symbol part = fh;
    for (const Irrep& xi : part.irreps)
      if (xi.level != n) part.entries[xi.id].setZero();
    out.push_back(inverse(part, f.level));
  }
  return out;
}

inline GridFunction square_function(const GridFunction& f) {
  std::vector<GridFunction> parts = sphere_components(f);
  GridFunction s = f;
  for (int64_t i = 0; i < s.values.size(); ++i) {
    double acc = 0.0;
    for (const GridFunction& part : parts) acc += std::norm(part.values[i]);
    s.values[i] = std::sqrt(acc);
  }
  return s;
}

inline int rademacher_sign(int n, double s) {
  return std::sin(std::ldexp(1.0, n) * std::numbers::pi * s) < 0.0 ? -1 : 1;
}

// sum_n r_n(s) 1_{sphere n}: the random-sign multiplier behind the
// Littlewood-Paley argument, as a radial symbol on the dual ball.
inline Symbol rademacher_symbol(const GroupDescriptor& g, int n, double s) {
  RadialProfile prof;
  for (int k = 0; k <= n; ++k)
    prof.phi[std::pow(static_cast<double>(g.p), k)] =
        static_cast<double>(rademacher_sign(k, s));
  return radial_calculus(prof, g, n);
}

// ---------------------------------------------------------------------------
// Calderon-Zygmund decomposition

struct CZPiece {
  GridFunction part;  // supported on the coset base * G_level
  GroupElement base;
  int level = 0;
};

struct CZConstants {
  double c3 = 0.0;  // sum_j ||phi_j||_{L1_alpha} / ||phi||_{L1_alpha}
  double c4 = 0.0;  // max |phi_0| / gamma
  double c6 = 0.0;  // gamma sum_j mu_alpha(I_j) / ||phi||_{L1_alpha}, <= 1
};

struct CZResult {
  GridFunction phi0;
  std::vector<CZPiece> pieces;
  double gamma = 0.0;
  CZConstants constants;
};

// Stopping-time decomposition over the coset tree: descending from the whole
// group, a coset is selected as soon as the mu_alpha-average of |phi| over it
// exceeds gamma; selected cosets contribute the piece (phi - Haar mean) 1_I,
// so each piece integrates to zero against plain Haar measure exactly.
inline CZResult cz_decompose(const GridFunction& phi, double gamma, double alpha) {
  if (!(gamma > 0.0)) throw std::invalid_argument("cz_decompose: gamma must be positive");
  GroupDescriptor g = phi.group;
  g.level = phi.level;
  const int dmn = g.dim();
  if (!(alpha > -static_cast<double>(dmn)) || alpha > 0.0)
    throw std::invalid_argument("cz_decompose: alpha must lie in (-dim, 0]");

  const Eigen::VectorXd wt = cell_weights(g, WeightSpec{alpha, WeightKind::full, 0});
  const auto flat = detail::flat_coords(g);
  const int64_t size = g.quotient_size();
  const double flat_size = static_cast<double>(size);

  CZResult res;
  res.gamma = gamma;
  res.phi0 = phi;

  std::vector<int64_t> all(size);
  for (int64_t r = 0; r < size; ++r) all[r] = r;

  struct Frame {
    int level;
    std::vector<int64_t> ranks;
  };
  std::vector<Frame> stack;
  stack.push_back({0, std::move(all)});

  while (!stack.empty()) {
    Frame fr = std::move(stack.back());
    stack.pop_back();
    double aw = 0.0, ww = 0.0;
    for (int64_t r : fr.ranks) {
      aw += std::abs(phi.values[r]) * wt[r];
      ww += wt[r];
    }
    if (aw > gamma * ww) {
      // selected: carve out the piece over this coset
      complex_t mean = 0.0;
      for (int64_t r : fr.ranks) mean += phi.values[r];
      mean /= static_cast<double>(fr.ranks.size());
      std::vector<int64_t> base_coords(dmn);
      const int64_t pk = ipow(g.p, fr.level);
      const int64_t* c0 = flat.data() + fr.ranks.front() * dmn;
      for (int j = 0; j < dmn; ++j) base_coords[j] = c0[j] % pk;
      CZPiece piece{make_grid(g, phi.level), GroupElement::from_values(g, base_coords),
                    fr.level};
      for (int64_t r : fr.ranks) {
        piece.part.values[r] = phi.values[r] - mean;
        res.phi0.values[r] = mean;
      }
      res.pieces.push_back(std::move(piece));
      continue;
    }
    if (fr.level == phi.level) continue;  // finest scale, stays in phi0
    // split into the p^dim child cosets
    const int64_t pk1 = ipow(g.p, fr.level + 1);
    std::map<int64_t, std::vector<int64_t>> children;
    for (int64_t r : fr.ranks) {
      const int64_t* c = flat.data() + r * dmn;
      int64_t key = 0;
      for (int j = dmn - 1; j >= 0; --j) key = key * pk1 + c[j] % pk1;
      children[key].push_back(r);
    }
    for (auto& kv : children) stack.push_back({fr.level + 1, std::move(kv.second)});
  }

  // measured constants
  double phi_l1 = 0.0;
  for (int64_t r = 0; r < size; ++r) phi_l1 += std::abs(phi.values[r]) * wt[r];
  phi_l1 /= flat_size;
  double pieces_l1 = 0.0, mu_sum = 0.0;
  for (const CZPiece& piece : res.pieces) {
    double part_l1 = 0.0, mu = 0.0;
    for (int64_t r = 0; r < size; ++r)
      part_l1 += std::abs(piece.part.values[r]) * wt[r];
    // coset measure from coordinate membership (a zero of phi_j inside the
    // coset still belongs to its support set)
    const int64_t pk = ipow(g.p, piece.level);
    for (int64_t r = 0; r < size; ++r) {
      const int64_t* c = flat.data() + r * dmn;
      bool inside = true;
      for (int j = 0; j < dmn && inside; ++j)
        inside = c[j] % pk == piece.base.value(j) % pk;
      if (inside) mu += wt[r];
    }
    pieces_l1 += part_l1 / flat_size;
    mu_sum += mu / flat_size;
  }
  res.constants.c3 = phi_l1 > 0.0 ? pieces_l1 / phi_l1 : 0.0;
  res.constants.c4 = res.phi0.values.cwiseAbs().maxCoeff() / gamma;
  res.constants.c6 = phi_l1 > 0.0 ? gamma * mu_sum / phi_l1 : 0.0;
  return res;
}

// ---------------------------------------------------------------------------
// condition H(t)

struct ConditionHRow {
  int k = 0, l = 0, n = 0;
  double measured = 0.0;
  double bound = 0.0;  // B p^{d n (eps + 1/t')} p^{-d l eps} with the fitted pair
};

struct ConditionHTailRow {
  int k = 0, l = 0;
  double measured = 0.0;  // sup_y (integral over G \ G_l)^{1/t}
};

struct ConditionHReport {
  double t = 1.0;
  std::vector<ConditionHRow> table;
  std::vector<ConditionHTailRow> tail;
  double fitted_B = 0.0;
  double fitted_eps = 0.0;
  bool pass = false;
};

// Measures, for each truncation level k and each 1 <= l <= K, the suprema
// over y in G_l of the shell integrals
//   ( int_{G_n \ G_{n+1}} | r_k(x y^-1) - r_k(x) |^t dx )^{1/t},  n < l,
// where r_k is the kernel of the symbol truncated to the dual ball of radius
// p^k. A (B, eps) pair is fitted by least squares on the log scale over the
// nonzero rows; an all-zero table passes with eps unconstrained.
inline ConditionHReport condition_h_report(const Symbol& sigma, double t, int K) {
  if (!(t >= 1.0)) throw std::invalid_argument("condition_h_report: t must be >= 1");
  if (K < 1 || sigma.level < K)
    throw std::invalid_argument("condition_h_report: symbol does not cover level K");
  const GroupDescriptor& g = sigma.group;
  GroupDescriptor gg = g;
  gg.level = K;
  const auto flat = detail::flat_coords(gg);
  const int64_t size = gg.quotient_size();
  const int dmn = gg.dim();
  const int64_t q = ipow(gg.p, K);

  std::vector<int> shell(size);
  for (int64_t r = 0; r < size; ++r)
    shell[r] = norm_exponent_raw(gg.p, K, flat.data() + r * dmn, dmn);

  ConditionHReport rep;
  rep.t = t;

  for (int k = 0; k <= K; ++k) {
    Symbol trunc = sigma;
    for (const Irrep& xi : trunc.irreps)
      if (xi.level > k) trunc.entries[xi.id].setZero();
    const Eigen::VectorXcd rk = inverse(trunc, K).values;

    for (int l = 1; l <= K; ++l) {
      std::vector<double> worst(l, 0.0);
      double worst_tail = 0.0;
      // odometer over y in G_l: every coordinate a multiple of p^l
      const int64_t per = ipow(gg.p, K - l), pl = ipow(gg.p, l);
      std::vector<int64_t> idx(dmn, 0), y(dmn, 0), yi(dmn), z(dmn);
      for (int64_t cnt = ipow(per, dmn); cnt > 0; --cnt) {
        for (int j = 0; j < dmn; ++j) y[j] = idx[j] * pl;
        inverse_raw(gg, q, y.data(), yi.data());
        std::vector<double> acc(l, 0.0);
        for (int64_t r = 0; r < size; ++r) {
          if (shell[r] >= l) continue;  // x inside G_l: not part of any row
          multiply_raw(gg, q, flat.data() + r * dmn, yi.data(), z.data());
          acc[shell[r]] +=
              std::pow(std::abs(rk[r] - rk[rank_raw(gg, q, z.data())]), t);
        }
        double tail_acc = 0.0;
        for (int n = 0; n < l; ++n) {
          tail_acc += acc[n];
          worst[n] = std::max(worst[n], std::pow(acc[n] / static_cast<double>(size), 1.0 / t));
        }
        worst_tail = std::max(worst_tail,
                              std::pow(tail_acc / static_cast<double>(size), 1.0 / t));
        // advance the odometer
        for (int j = 0; j < dmn; ++j) {
          if (++idx[j] < per) break;
          idx[j] = 0;
        }
      }
      for (int n = 0; n < l; ++n) rep.table.push_back({k, l, n, worst[n], 0.0});
      rep.tail.push_back({k, l, worst_tail});
    }
  }

  // log-scale least squares for (B, eps) over the nonzero rows; 1e-12 is the
  // numerical-zero cutoff for kernels that cancel exactly up to transform
  // round-off
  const double lnp = std::log(static_cast<double>(g.p));
  const double itp = 1.0 - 1.0 / t;  // 1/t'
  std::vector<double> xs, ys;
  for (const ConditionHRow& row : rep.table) {
    if (row.measured < 1e-12) continue;
    xs.push_back(dmn * (row.n - row.l) * lnp);
    ys.push_back(std::log(row.measured) - dmn * row.n * itp * lnp);
  }
  if (xs.empty()) {
    rep.fitted_B = 0.0;
    rep.fitted_eps = 0.0;
    rep.pass = true;
  } else {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const double det = m * sxx - sx * sx;
    double eps = std::abs(det) > 1e-12 ? (m * sxy - sx * sy) / det : 1.0;
    double lnB = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < xs.size(); ++i) lnB = std::max(lnB, ys[i] - eps * xs[i]);
    rep.fitted_eps = eps;
    rep.fitted_B = std::exp(lnB);
    rep.pass = std::isfinite(rep.fitted_B) && eps > 0.0;
  }
  for (ConditionHRow& row : rep.table)
    row.bound = rep.fitted_B *
                std::exp(rep.fitted_eps * dmn * (row.n - row.l) * lnp + dmn * row.n * itp * lnp);
  return rep;
}

// ---------------------------------------------------------------------------
// Mikhlin-type hypothesis certifiers

// Which boundedness statement the scan instantiates; the pair (beta, decay)
// below is the only thing that changes:
//   l2_alpha      ||D^beta_eta sigma(xi)||_op <= C ||xi||^-decay, beta = decay = (a+d)/2
//   lr1           beta = decay = a + d/2            (a > d/2)
//   lr2           beta = a + d/2, decay = a + d(3/2 - 1/t)
//   sub_l2_alpha  beta = decay = (a+kappa)/2, eta restricted to characters
//   sub_lr1       beta = a + kappa/2, decay = a + d/2, characters only
//   sub_lr2       beta = a + d/2, decay = a + d/2 + kappa(1/t + 1/2), characters only
enum class MikhlinVariant { l2_alpha, lr1, lr2, sub_l2_alpha, sub_lr1, sub_lr2 };

inline std::string to_string(MikhlinVariant v) {
  switch (v) {
    case MikhlinVariant::l2_alpha: return "l2-alpha";
    case MikhlinVariant::lr1: return "lr-1";
    case MikhlinVariant::lr2: return "lr-2";
    case MikhlinVariant::sub_l2_alpha: return "sub-l2-alpha";
    case MikhlinVariant::sub_lr1: return "sub-lr-1";
    case MikhlinVariant::sub_lr2: return "sub-lr-2";
  }
  throw std::logic_error("unreachable");
}

inline MikhlinVariant mikhlin_variant_from_string(const std::string& s) {
  if (s == "l2-alpha") return MikhlinVariant::l2_alpha;
  if (s == "lr-1") return MikhlinVariant::lr1;
  if (s == "lr-2") return MikhlinVariant::lr2;
  if (s == "sub-l2-alpha") return MikhlinVariant::sub_l2_alpha;
  if (s == "sub-lr-1") return MikhlinVariant::sub_lr1;
  if (s == "sub-lr-2") return MikhlinVariant::sub_lr2;
  throw std::invalid_argument("unknown mikhlin variant: " + s);
}

struct MikhlinReport {
  MikhlinVariant variant = MikhlinVariant::l2_alpha;
  double beta = 0.0;
  double decay = 0.0;
  double constant = 0.0;
  std::string witness_eta, witness_xi;
  bool pass = false;
};

// Scans all pairs ||eta|| < ||xi|| within the symbol's level and reports the
// best constant C = max ||Delta^beta_eta sigma(xi)||_op ||xi||^decay together
// with the maximizing pair. The sub variants restrict eta to the genuine
// characters (the one-dimensional irreps, i.e. the dual of the first kappa
// coordinate directions).
inline MikhlinReport mikhlin_report(const Symbol& sigma, double alpha0, MikhlinVariant v,
                                    double t = 1.5) {
  const GroupDescriptor& g = sigma.group;
  const double d = static_cast<double>(g.dim());
  const double kp = static_cast<double>(g.kappa());
  MikhlinReport rep;
  rep.variant = v;
  bool characters_only = false;
  switch (v) {
    case MikhlinVariant::l2_alpha:
      rep.beta = rep.decay = 0.5 * (alpha0 + d);
      break;
    case MikhlinVariant::lr1:
      rep.beta = rep.decay = alpha0 + 0.5 * d;
      break;
    case MikhlinVariant::lr2:
      if (!(t > 1.0 && t < 2.0))
        throw std::invalid_argument("mikhlin_report: variant lr-2 needs t in (1,2)");
      rep.beta = alpha0 + 0.5 * d;
      rep.decay = alpha0 + d * (1.5 - 1.0 / t);
      break;
    case MikhlinVariant::sub_l2_alpha:
      characters_only = true;
      rep.beta = rep.decay = 0.5 * (alpha0 + kp);
      break;
    case MikhlinVariant::sub_lr1:
      characters_only = true;
      rep.beta = alpha0 + 0.5 * kp;
      rep.decay = alpha0 + 0.5 * d;
      break;
    case MikhlinVariant::sub_lr2:
      if (!(t > 1.0 && t < 2.0))
        throw std::invalid_argument("mikhlin_report: variant sub-lr-2 needs t in (1,2)");
      characters_only = true;
      rep.beta = alpha0 + 0.5 * d;
      rep.decay = alpha0 + 0.5 * d + kp * (1.0 / t + 0.5);
      break;
  }
  if (rep.beta < 0.0)
    throw std::invalid_argument("mikhlin_report: negative difference order");

  for (const Irrep& xi : sigma.irreps) {
    if (xi.trivial()) continue;
    const double damp = std::pow(xi.dual_norm(), rep.decay);
    for (const Irrep& eta : sigma.irreps) {
      if (eta.trivial() || !(eta.dual_norm() < xi.dual_norm())) continue;
      if (characters_only && eta.dim != 1) continue;
      const double c = delta(eta, sigma, xi, rep.beta).op_norm * damp;
      if (c > rep.constant) {
        rep.constant = c;
        rep.witness_eta = eta.id;
        rep.witness_xi = xi.id;
      }
    }
  }
  rep.pass = std::isfinite(rep.constant);
  return rep;
}

}  // namespace ultraharm
