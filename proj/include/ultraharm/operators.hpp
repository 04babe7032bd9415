#pragma once

// Symbols of the named operators and the difference calculus on symbols.
//
// Vladimirov--Taibleson scale: on a group of homogeneous dimension `dim` the
// operator D^alpha acts on characters of Z_p^dim with eigenvalue
// ||zeta||^alpha - c0, where c0 = (1-p^{-dim})/(1-p^{-(alpha+dim)}), and
// kills constants; the shifted operator DD^alpha = c0 + D^alpha is exactly
// radial with eigenvalue ||xi||^alpha on every nontrivial sphere and c0 on
// the trivial one. alpha = 0 and alpha = -dim are poles and rejected.
//
// The sub-Laplacian on H_d integrates differences along the first 2d
// directions only. Its symbol is computed two independent ways: (a) the
// defining integral applied to matrix coefficients at the identity, an exact
// finite sum over cells of Z_p^{2d}; (b) a closed form summing abelian VT
// eigenvalues over the induction fiber. Tests pin both against each other and
// against a hand-computed matrix.
//
// Difference operators: Delta_eta sigma(xi) = sigma(eta (x) xi) -
// sigma(1_{d_eta} (x) xi), assembled block-diagonally in canonical component
// order; matrix entries are basis-dependent, only HS/operator norms are
// contract. The RT variant multiplies the inverse transform of sigma by
// q_eta(x) = e^{2 pi i {eta.x}} - 1 on the grid and transforms back.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "ultraharm/dual.hpp"
#include "ultraharm/fourier.hpp"
#include "ultraharm/group.hpp"
#include "ultraharm/padic.hpp"

namespace ultraharm {

struct RadialProfile {
  std::map<double, complex_t> phi;  // dual norm value -> multiplier value
};

inline void check_vt_exponent(double alpha, int dimension) {
  if (alpha == 0.0) throw std::invalid_argument("vt: alpha = 0 is degenerate");
  if (std::abs(alpha + dimension) < 1e-12)
    throw std::invalid_argument("vt: alpha = -" + std::to_string(dimension) +
                                " is a pole of the normalizing constant");
}

// (1 - p^{-dim}) / (1 - p^{-(alpha+dim)}) : value of DD^alpha on constants.
inline double vt_zero_order(int64_t p, int dimension, double alpha) {
  check_vt_exponent(alpha, dimension);
  double pd = static_cast<double>(p);
  return (1.0 - std::pow(pd, -dimension)) / (1.0 - std::pow(pd, -(alpha + dimension)));
}

// (1 - p^alpha) / (1 - p^{-(alpha+dim)}) : constant in front of the integral.
inline double vt_jump_constant(int64_t p, int dimension, double alpha) {
  check_vt_exponent(alpha, dimension);
  double pd = static_cast<double>(p);
  return (1.0 - std::pow(pd, alpha)) / (1.0 - std::pow(pd, -(alpha + dimension)));
}

// Eigenvalue of DD^alpha on the sphere of dual norm `norm` (norm 1 = trivial).
inline double vt_eigenvalue(int64_t p, int dimension, double alpha, double norm) {
  if (norm <= 1.0) return vt_zero_order(p, dimension, alpha);
  return std::pow(norm, alpha);
}

// Eigenvalue of the raw operator D^alpha (no zero-order term; kills constants).
inline double vt_raw_eigenvalue(int64_t p, int dimension, double alpha, double norm) {
  if (norm <= 1.0) return 0.0;
  return std::pow(norm, alpha) - vt_zero_order(p, dimension, alpha);
}

// ---- radial calculus ------------------------------------------------------

inline Symbol radial_calculus(const RadialProfile& profile, const GroupDescriptor& g, int n) {
  Symbol s = make_symbol(g, n);
  for (const auto& xi : s.irreps) {
    auto it = profile.phi.find(xi.dual_norm());
    if (it == profile.phi.end())
      throw std::invalid_argument("radial_calculus: profile missing norm " +
                                  std::to_string(xi.dual_norm()));
    s.entries[xi.id] = it->second * Eigen::MatrixXcd::Identity(xi.dim, xi.dim);
  }
  return s;
}

inline RadialProfile vt_profile(const GroupDescriptor& g, double alpha, int n) {
  RadialProfile prof;
  for (int k = 0; k <= n; ++k) {
    double norm = std::pow(static_cast<double>(g.p), k);
    prof.phi[norm] = vt_eigenvalue(g.p, g.dim(), alpha, norm);
  }
  return prof;
}

inline Symbol vt_symbol(const GroupDescriptor& g, double alpha, int n) {
  return radial_calculus(vt_profile(g, alpha, n), g, n);
}

inline Symbol vt_raw_symbol(const GroupDescriptor& g, double alpha, int n) {
  RadialProfile prof;
  for (int k = 0; k <= n; ++k) {
    double norm = std::pow(static_cast<double>(g.p), k);
    prof.phi[norm] = vt_raw_eigenvalue(g.p, g.dim(), alpha, norm);
  }
  return radial_calculus(prof, g, n);
}

// Direct evaluation of DD^alpha f on the grid: exact finite sum
//   DD f(x) = c0 f(x) + c_J sum_{cells yhat != 0} [f(x yhat^{-1}) - f(x)]
//             ||yhat||^{-(alpha+dim)} |cell|
// (the G_N cell drops out by local constancy).
inline GridFunction vt_apply_direct(const GridFunction& f, double alpha) {
  const GroupDescriptor& g = f.group;
  const int dim = g.dim();
  const int64_t q = ipow(g.p, f.level);
  const int64_t size = g.quotient_size();
  const double c0 = vt_zero_order(g.p, dim, alpha);
  const double cj = vt_jump_constant(g.p, dim, alpha);
  const double cell = 1.0 / static_cast<double>(size);
  const auto coords = detail::flat_coords(f.group);

  // per-cell inverse and weight ||y||^{-(alpha+dim)}
  std::vector<int64_t> yinv(coords.size());
  std::vector<double> weight(size, 0.0);
  for (int64_t r = 1; r < size; ++r) {
    inverse_raw(g, q, &coords[static_cast<size_t>(r) * dim], &yinv[static_cast<size_t>(r) * dim]);
    int v = norm_exponent_raw(g.p, f.level, &coords[static_cast<size_t>(r) * dim], dim);
    double norm = std::pow(static_cast<double>(g.p), -v);  // ||y||_p
    weight[r] = std::pow(norm, -(alpha + dim)) * cell * cj;
  }

  if (dim > 16) throw std::invalid_argument("vt_apply_direct: dimension > 16 unsupported");
  GridFunction out = make_grid(g, f.level);
  detail::parallel_for(size, [&](int64_t rx) {
    const int64_t* x = &coords[static_cast<size_t>(rx) * dim];
    complex_t fx = f.values[rx];
    complex_t acc = c0 * fx;
    int64_t zz[16];
    for (int64_t ry = 1; ry < size; ++ry) {
      multiply_raw(g, q, x, &yinv[static_cast<size_t>(ry) * dim], zz);
      acc += weight[ry] * (f.values[rank_raw(g, q, zz)] - fx);
    }
    out.values[rx] = acc;
  });
  return out;
}

// ---- sub-Laplacian on H_d -------------------------------------------------

namespace detail {

inline void require_heisenberg(const GroupDescriptor& g, const char* who) {
  if (g.kind != GroupKind::heisenberg)
    throw std::invalid_argument(std::string(who) + ": Heisenberg groups only");
}

}  // namespace detail

// Path (a): the defining integral applied entrywise at the identity,
//   sigma(xi) = c_J sum_{cells w != 0 in Z_p^{2d}} [pi_xi((w,0))^* - I]
//               ||w||^{-(alpha+2d)} |cell|,
// summed at cell level M = max(level(xi), 1), where it is exact.
inline Symbol sub_laplacian_symbol_integral(const GroupDescriptor& g, double alpha, int n) {
  detail::require_heisenberg(g, "sub_laplacian_symbol_integral");
  const int kappa = 2 * g.d;
  check_vt_exponent(alpha, kappa);
  const double cj = vt_jump_constant(g.p, kappa, alpha);
  Symbol s = make_symbol(g, n);
  for (const auto& xi : s.irreps) {
    const int M = std::max(xi.level, 1);
    GroupDescriptor gM = g;
    gM.level = std::max(g.level, M);
    const int64_t cells = ipow(g.p, static_cast<int64_t>(kappa) * M);
    const int64_t pM = ipow(g.p, M);
    const double cell = 1.0 / static_cast<double>(cells);
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(xi.dim, xi.dim);
    std::vector<int64_t> w(kappa, 0);
    for (int64_t r = 1; r < cells; ++r) {
      // odometer over the 2d sub-coordinates
      for (int j = 0; j < kappa; ++j) {
        if (++w[j] < pM) break;
        w[j] = 0;
      }
      std::vector<int64_t> full(g.dim(), 0);
      for (int j = 0; j < kappa; ++j) full[j] = w[j];
      int v = norm_exponent_raw(g.p, M, w.data(), kappa);
      double wnorm = std::pow(static_cast<double>(g.p), -v);
      GroupElement el = GroupElement::from_values(gM, full);
      acc += std::pow(wnorm, -(alpha + kappa)) *
             (irrep_matrix(xi, el).adjoint() - Eigen::MatrixXcd::Identity(xi.dim, xi.dim));
    }
    s.entries[xi.id] = cj * cell * acc;
  }
  return s;
}

// Path (b): closed form. Writing m = level(xi_3), the (h,h') entry is
//   p^{-md} sum_{tau in ball_m(dual Z_p^d)} E_{2d}(||(tau - xi_1, xi_2 + xi_3 h')||)
//            e^{-2 pi i {(h-h').tau}},
// with E_{2d} the raw VT eigenvalue on Z_p^{2d}; for characters this
// collapses to the abelian eigenvalue at ||(xi_1, xi_2)||.
inline Symbol sub_laplacian_symbol(const GroupDescriptor& g, double alpha, int n) {
  detail::require_heisenberg(g, "sub_laplacian_symbol");
  const int kappa = 2 * g.d;
  check_vt_exponent(alpha, kappa);
  const int64_t p = g.p;
  Symbol s = make_symbol(g, n);
  for (const auto& xi : s.irreps) {
    const int m = xi.m;
    const int64_t pm = ipow(p, m);
    const int64_t fiber = ipow(p, static_cast<int64_t>(m) * g.d);  // = d_xi
    Eigen::MatrixXcd M(xi.dim, xi.dim);
    // enumerate tau in (Q_p/Z_p)^d with level <= m, mixed radix over t_j < p^m
    for (int64_t hp = 0; hp < xi.dim; ++hp) {
      // decode h' into residues mod p^m per copy of Z_p
      std::vector<int64_t> hpc(g.d);
      {
        int64_t t = hp;
        for (int j = 0; j < g.d; ++j) hpc[j] = t % pm, t /= pm;
      }
      for (int64_t h = 0; h < xi.dim; ++h) {
        std::vector<int64_t> hc(g.d);
        {
          int64_t t = h;
          for (int j = 0; j < g.d; ++j) hc[j] = t % pm, t /= pm;
        }
        complex_t acc(0.0, 0.0);
        std::vector<int64_t> tnum(g.d, 0);
        for (int64_t tr = 0; tr < fiber; ++tr) {
          if (tr > 0)
            for (int j = 0; j < g.d; ++j) {
              if (++tnum[j] < pm) break;
              tnum[j] = 0;
            }
          // norm of the 2d-vector (tau - xi_1, xi_2 + xi_3 h')
          double nrm = 0.0;
          for (int j = 0; j < g.d; ++j) {
            DualScalar tau = tnum[j] == 0 ? DualScalar::zero(p) : DualScalar(p, tnum[j], m);
            DualScalar a = tau - xi.params[j];
            DualScalar b = xi.params[g.d + j] + xi.params[2 * g.d].scaled(hpc[j]);
            if (!a.is_zero()) nrm = std::max(nrm, a.norm());
            if (!b.is_zero()) nrm = std::max(nrm, b.norm());
          }
          double E = nrm == 0.0 ? 0.0 : vt_raw_eigenvalue(p, kappa, alpha, nrm);
          // phase e^{-2 pi i {(h-h').tau}}
          int64_t num = 0;
          for (int j = 0; j < g.d; ++j)
            num = mod_floor(num + mod_floor((hc[j] - hpc[j]) * tnum[j], pm), pm);
          acc += E * std::conj(RootOfUnity(p, num, m).value());
        }
        M(h, hp) = acc / static_cast<double>(fiber);
      }
    }
    s.entries[xi.id] = M;
  }
  return s;
}

// ---- central direction and script-L --------------------------------------

// Closed form: diagonal with the abelian raw VT eigenvalue at ||xi_3||.
inline Symbol dir_vladimirov_symbol(const GroupDescriptor& g, double alpha, int n) {
  detail::require_heisenberg(g, "dir_vladimirov_symbol");
  check_vt_exponent(alpha, 1);
  Symbol s = make_symbol(g, n);
  for (const auto& xi : s.irreps) {
    const DualScalar& xi3 = xi.params[2 * g.d];
    double E = xi3.is_zero() ? 0.0 : vt_raw_eigenvalue(g.p, 1, alpha, xi3.norm());
    s.entries[xi.id] = E * Eigen::MatrixXcd::Identity(xi.dim, xi.dim);
  }
  return s;
}

// Integral path for the central direction, mirroring the sub-Laplacian one.
inline Symbol dir_vladimirov_symbol_integral(const GroupDescriptor& g, double alpha, int n) {
  detail::require_heisenberg(g, "dir_vladimirov_symbol_integral");
  check_vt_exponent(alpha, 1);
  const double cj = vt_jump_constant(g.p, 1, alpha);
  Symbol s = make_symbol(g, n);
  for (const auto& xi : s.irreps) {
    const int M = std::max(xi.level, 1);
    GroupDescriptor gM = g;
    gM.level = std::max(g.level, M);
    const int64_t pM = ipow(g.p, M);
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(xi.dim, xi.dim);
    for (int64_t w = 1; w < pM; ++w) {
      std::vector<int64_t> full(g.dim(), 0);
      full[2 * g.d] = w;
      int64_t v = w;
      int val = 0;
      while (v % g.p == 0) v /= g.p, ++val;
      double wnorm = std::pow(static_cast<double>(g.p), -val);
      GroupElement el = GroupElement::from_values(gM, full);
      acc += std::pow(wnorm, -(alpha + 1)) *
             (irrep_matrix(xi, el).adjoint() - Eigen::MatrixXcd::Identity(xi.dim, xi.dim));
    }
    s.entries[xi.id] = (cj / static_cast<double>(pM)) * acc;
  }
  return s;
}

// script L = sub-Laplacian + central VT operator; its symbol is the sum.
inline Symbol script_l_symbol(const GroupDescriptor& g, double alpha, int n) {
  Symbol s = sub_laplacian_symbol(g, alpha, n);
  Symbol c = dir_vladimirov_symbol(g, alpha, n);
  for (const auto& xi : s.irreps) s.entries[xi.id] += c.entries.at(xi.id);
  return s;
}

// Kernel dimension of a matrix: singular values below tol * largest count as 0.
inline int kernel_dimension(const Eigen::MatrixXcd& M, double tol = 1e-9) {
  if (M.rows() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
  double top = svd.singularValues()(0);
  if (top == 0.0) return static_cast<int>(M.rows());
  int k = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) <= tol * top) ++k;
  return k;
}

// ---- difference operators -------------------------------------------------

struct DiffResult {
  Eigen::MatrixXcd block_matrix;
  double hs_norm = 0.0;
  double op_norm = 0.0;
};

namespace detail {

inline DiffResult finish_diff(Eigen::MatrixXcd M, double scale) {
  DiffResult r;
  r.block_matrix = std::move(M);
  r.block_matrix *= scale;
  r.hs_norm = r.block_matrix.norm();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(r.block_matrix);
  r.op_norm = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  return r;
}

// sigma(eta (x) xi): block-diagonal assembly over the canonical component
// order of the decomposition.
inline Eigen::MatrixXcd assemble_tensor_symbol(const Symbol& sigma, const RepDecomposition& dec,
                                               int64_t total) {
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(total, total);
  int64_t off = 0;
  for (const auto& c : dec.components) {
    const Eigen::MatrixXcd& blk = sigma.at(c.irrep.id);
    for (int64_t copy = 0; copy < c.multiplicity; ++copy) {
      M.block(off, off, c.irrep.dim, c.irrep.dim) = blk;
      off += c.irrep.dim;
    }
  }
  return M;
}

}  // namespace detail

// Delta_eta sigma(xi) = sigma(eta (x) xi) - 1_{d_eta} (x) sigma(xi), scaled by
// ||eta||^{-beta}.
inline DiffResult delta(const Irrep& eta, const Symbol& sigma, const Irrep& xi, double beta) {
  if (beta < 0.0) throw std::invalid_argument("delta: beta must be >= 0");
  RepDecomposition dec = tensor_decompose(eta, xi);
  const int64_t total = eta.dim * xi.dim;
  Eigen::MatrixXcd M = detail::assemble_tensor_symbol(sigma, dec, total);
  const Eigen::MatrixXcd& base = sigma.at(xi.id);
  for (int64_t copy = 0; copy < eta.dim; ++copy)
    M.block(copy * xi.dim, copy * xi.dim, xi.dim, xi.dim) -= base;
  return detail::finish_diff(std::move(M), std::pow(eta.dual_norm(), -beta));
}

// RT difference: multiply the convolution kernel of sigma by
// q_eta(x) = e^{2 pi i {eta.x}} - 1 and read the symbol back at xi.
inline DiffResult rt_delta(const std::vector<DualScalar>& eta, const Symbol& sigma, double beta,
                           const Irrep& xi) {
  const GroupDescriptor& g = sigma.group;
  if (static_cast<int>(eta.size()) != g.dim())
    throw std::invalid_argument("rt_delta: eta must have one class per coordinate");
  int lev = 0;
  for (const auto& c : eta) lev = std::max(lev, c.level());
  if (lev > sigma.level)
    throw std::invalid_argument("rt_delta: eta level exceeds the symbol level");
  if (xi.level > sigma.level) throw std::invalid_argument("rt_delta: xi beyond symbol level");

  GridFunction r = inverse(sigma, sigma.level);
  const auto grid = enumerate_quotient(r.group);
  for (int64_t t = 0; t < r.values.size(); ++t) {
    RootOfUnity ph = pairing(eta, grid[t].coords());
    r.values[t] *= ph.value() - 1.0;
  }
  Symbol back = forward(r, sigma.level);
  double nrm = std::pow(static_cast<double>(g.p), lev);  // ||eta||_p
  return detail::finish_diff(back.at(xi.id), std::pow(nrm, -beta));
}

}  // namespace ultraharm
