#pragma once

// Group Fourier transform on the finite quotient G/G_N.
//
// Haar measure is the probability measure, so the forward transform is the
// average  fhat(xi) = (1/|G/G_N|) sum_x f(x) pi_xi(x)^*  and the inverse is
// f(x) = sum_xi d_xi Tr[pi_xi(x) fhat(xi)].  Every shipped representation
// matrix has exactly one nonzero entry per row (a phase), so both directions
// cost O(|G/G_N| * sum d_xi) phase evaluations rather than sum d_xi^2; the
// loops below rely on that sparsity and on precomputed root-of-unity tables.
//
// Convolution is f*g(x) = int f(y) g(y^{-1} x) dy, which transforms as
// (f*g)^ = ghat . fhat (left factor ghat); the convolution tests pin this
// order against direct summation.

#include <atomic>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "ultraharm/dual.hpp"
#include "ultraharm/group.hpp"
#include "ultraharm/padic.hpp"

namespace ultraharm {

struct GridFunction {
  GroupDescriptor group;  // group.level == level
  int level = 0;          // N: values are constant on cosets of G_N
  Eigen::VectorXcd values;
};

inline GridFunction make_grid(GroupDescriptor g, int N) {
  g.validate();
  if (N < 0 || N > g.level) throw std::invalid_argument("make_grid: bad level");
  GroupDescriptor gq = g;
  gq.level = N;
  GridFunction f;
  f.group = gq;
  f.level = N;
  f.values = Eigen::VectorXcd::Zero(gq.quotient_size());
  return f;
}

struct Symbol {
  GroupDescriptor group;
  int level = 0;              // defined on all irreps of level <= this
  std::vector<Irrep> irreps;  // enumerate_irreps(group, level) order
  std::map<std::string, Eigen::MatrixXcd> entries;

  Eigen::MatrixXcd& at(const std::string& id) {
    auto it = entries.find(id);
    if (it == entries.end()) throw std::invalid_argument("Symbol: no entry for " + id);
    return it->second;
  }
  const Eigen::MatrixXcd& at(const std::string& id) const {
    auto it = entries.find(id);
    if (it == entries.end()) throw std::invalid_argument("Symbol: no entry for " + id);
    return it->second;
  }
};

inline Symbol make_symbol(GroupDescriptor g, int n) {
  g.validate();
  if (n < 0 || n > g.level) throw std::invalid_argument("make_symbol: bad dual level");
  GroupDescriptor gq = g;
  gq.level = n;
  Symbol s;
  s.group = gq;
  s.level = n;
  s.irreps = enumerate_irreps(gq, n);
  for (const auto& xi : s.irreps)
    s.entries.emplace(xi.id, Eigen::MatrixXcd::Zero(xi.dim, xi.dim));
  return s;
}

inline Symbol identity_symbol(const GroupDescriptor& g, int n) {
  Symbol s = make_symbol(g, n);
  for (const auto& xi : s.irreps)
    s.entries[xi.id] = Eigen::MatrixXcd::Identity(xi.dim, xi.dim);
  return s;
}

namespace detail {

// exp(-2 pi i k / p^L) for k in [0, p^L); conjugate table for the forward
// transform, plain table for evaluation.
inline std::vector<complex_t> root_table(int64_t p, int L, bool conjugate) {
  int64_t n = ipow(p, L);
  std::vector<complex_t> t(n);
  double sign = conjugate ? -1.0 : 1.0;
  for (int64_t k = 0; k < n; ++k)
    t[k] = std::polar(1.0, sign * 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n));
  return t;
}

// Raw coordinate residues of every element of G/G_N in rank order, flattened
// to size * dim entries; avoids materializing GroupElements in hot loops.
inline std::vector<int64_t> flat_coords(const GroupDescriptor& g) {
  const int dim = g.dim();
  const int64_t q = ipow(g.p, g.level), size = g.quotient_size();
  std::vector<int64_t> coords(static_cast<size_t>(size) * dim, 0);
  std::vector<int64_t> cur(dim, 0);
  for (int64_t r = 0; r < size; ++r) {
    for (int j = 0; j < dim; ++j) coords[static_cast<size_t>(r) * dim + j] = cur[j];
    for (int j = 0; j < dim; ++j) {
      if (++cur[j] < q) break;
      cur[j] = 0;
    }
  }
  return coords;
}

template <class F>
void parallel_for(int64_t n, F&& f) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw < 2 || n < 64) {
    for (int64_t i = 0; i < n; ++i) f(i);
    return;
  }
  unsigned workers = std::min<unsigned>(hw, 8);
  std::vector<std::thread> pool;
  std::atomic<int64_t> next{0};
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      int64_t i;
      while ((i = next.fetch_add(1)) < n) f(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace detail

inline Symbol forward(const GridFunction& f, int n) {
  if (n > f.level) throw std::invalid_argument("forward: dual level exceeds grid level");
  Symbol out = make_symbol(f.group, n);
  const int64_t size = f.group.quotient_size();
  const int dim = f.group.dim();
  const double inv_vol = 1.0 / static_cast<double>(size);
  const auto coords = detail::flat_coords(f.group);

  std::map<int, std::vector<complex_t>> tables;
  for (const auto& xi : out.irreps)
    if (!tables.count(xi.level)) tables[xi.level] = detail::root_table(f.group.p, xi.level, true);

  detail::parallel_for(static_cast<int64_t>(out.irreps.size()), [&](int64_t a) {
    const Irrep& xi = out.irreps[a];
    const IrrepEvaluator ev(xi, f.level);
    const complex_t* tab = tables.at(xi.level).data();
    Eigen::MatrixXcd& M = out.entries.at(xi.id);
    for (int64_t r = 0; r < size; ++r) {
      complex_t w = f.values[r] * inv_vol;
      if (w == complex_t(0.0, 0.0)) continue;
      ev.visit(&coords[static_cast<size_t>(r) * dim], [&](int64_t h, int64_t hp, int64_t num) {
        M(hp, h) += tab[num] * w;  // (pi^*)_{h'h} = conj(pi_{hh'})
      });
    }
  });
  return out;
}

inline GridFunction inverse(const Symbol& sym, int N) {
  GroupDescriptor g = sym.group;
  g.level = std::max(g.level, N);
  if (sym.level < N)
    throw std::invalid_argument("inverse: symbol missing irreps above level " +
                                std::to_string(sym.level));
  for (const auto& xi : sym.irreps)
    if (!sym.entries.count(xi.id)) throw std::invalid_argument("inverse: missing entry " + xi.id);

  GridFunction out = make_grid(g, N);
  const int64_t size = out.group.quotient_size();
  const int dim = g.dim();
  const auto coords = detail::flat_coords(out.group);

  std::map<int, std::vector<complex_t>> tables;
  for (const auto& xi : sym.irreps)
    if (!tables.count(xi.level)) tables[xi.level] = detail::root_table(g.p, xi.level, false);

  std::vector<IrrepEvaluator> evals;
  std::vector<const Eigen::MatrixXcd*> blocks;
  std::vector<const complex_t*> tabs;
  evals.reserve(sym.irreps.size());
  for (const auto& xi : sym.irreps) {
    evals.emplace_back(xi, N);
    blocks.push_back(&sym.entries.at(xi.id));
    tabs.push_back(tables.at(xi.level).data());
  }

  detail::parallel_for(size, [&](int64_t r) {
    const int64_t* c = &coords[static_cast<size_t>(r) * dim];
    complex_t acc(0.0, 0.0);
    for (size_t a = 0; a < evals.size(); ++a) {
      const Eigen::MatrixXcd& A = *blocks[a];
      const complex_t* tab = tabs[a];
      complex_t tr(0.0, 0.0);
      evals[a].visit(c, [&](int64_t h, int64_t hp, int64_t num) { tr += tab[num] * A(hp, h); });
      acc += static_cast<double>(evals[a].irrep().dim) * tr;
    }
    out.values[r] = acc;
  });
  return out;
}

struct PlancherelReport {
  double lhs = 0.0;  // (1/|G/G_N|) sum |f|^2
  double rhs = 0.0;  // sum d_xi ||fhat(xi)||_HS^2
  double gap = 0.0;
};

inline PlancherelReport plancherel(const GridFunction& f) {
  PlancherelReport rep;
  rep.lhs = f.values.squaredNorm() / static_cast<double>(f.group.quotient_size());
  Symbol fh = forward(f, f.level);
  for (const auto& xi : fh.irreps)
    rep.rhs += static_cast<double>(xi.dim) * fh.entries.at(xi.id).squaredNorm();
  rep.gap = std::abs(rep.lhs - rep.rhs);
  return rep;
}

inline GridFunction convolve(const GridFunction& f, const GridFunction& g) {
  if (!(f.group == g.group) || f.level != g.level)
    throw std::invalid_argument("convolve: group/level mismatch");
  const int64_t size = f.group.quotient_size();
  const auto grid = enumerate_quotient(f.group);
  GridFunction out = make_grid(f.group, f.level);
  const double inv_vol = 1.0 / static_cast<double>(size);

  // precompute y^{-1} once per y, then out(x) = avg_y f(y) g(y^{-1} x)
  std::vector<GroupElement> yinv;
  yinv.reserve(size);
  for (int64_t r = 0; r < size; ++r) yinv.push_back(inverse(grid[r]));

  detail::parallel_for(size, [&](int64_t rx) {
    complex_t acc(0.0, 0.0);
    for (int64_t ry = 0; ry < size; ++ry) {
      if (f.values[ry] == complex_t(0.0, 0.0)) continue;
      acc += f.values[ry] * g.values[rank_of(multiply(yinv[ry], grid[rx]))];
    }
    out.values[rx] = acc * inv_vol;
  });
  return out;
}

inline GridFunction apply_multiplier(const Symbol& sym, const GridFunction& f) {
  if (sym.level < f.level)
    throw std::invalid_argument("apply_multiplier: symbol does not cover the grid level");
  if (!(sym.group.kind == f.group.kind && sym.group.p == f.group.p && sym.group.d == f.group.d))
    throw std::invalid_argument("apply_multiplier: group mismatch");
  Symbol fh = forward(f, f.level);
  for (const auto& xi : fh.irreps) fh.entries[xi.id] = sym.at(xi.id) * fh.entries.at(xi.id);
  return inverse(fh, f.level);
}

// ---- standard grid functions ---------------------------------------------

// Normalized indicator of G_k: |G_k|^{-1} on the subgroup, 0 elsewhere.
inline GridFunction epsilon_indicator(const GroupDescriptor& g, int k) {
  if (k < 0 || k > g.level) throw std::invalid_argument("epsilon_indicator: bad subgroup level");
  GridFunction f = make_grid(g, g.level);
  const auto grid = enumerate_quotient(f.group);
  const double mass = std::pow(static_cast<double>(g.p), static_cast<double>(g.dim()) * k);
  const int64_t pk = ipow(g.p, k);
  for (int64_t r = 0; r < f.values.size(); ++r) {
    bool in = true;
    for (int j = 0; j < g.dim() && in; ++j) in = grid[r].value(j) % pk == 0;
    if (in) f.values[r] = mass;
  }
  return f;
}

// Normalized point mass at x0: |G/G_N| at x0, 0 elsewhere (unit of convolution).
inline GridFunction delta_function(const GroupDescriptor& g, const GroupElement& x0) {
  GridFunction f = make_grid(g, g.level);
  f.values[rank_of(x0)] = static_cast<double>(f.group.quotient_size());
  return f;
}

inline GridFunction left_translate(const GridFunction& f, const GroupElement& y) {
  GridFunction out = make_grid(f.group, f.level);
  const auto grid = enumerate_quotient(f.group);
  for (int64_t r = 0; r < out.values.size(); ++r)
    out.values[r] = f.values[rank_of(multiply(y, grid[r]))];
  return out;
}

}  // namespace ultraharm
