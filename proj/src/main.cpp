// Command-line front end for the ultraharm library.
//
//   ultraharm dual    --group heisenberg --p 3 --level 1 [--format json|csv|dot]
//   ultraharm apply   --operator vt --alpha 2 --in f.json [--out g.json]
//   ultraharm verify  --suite plancherel --group heisenberg --p 3 --level 2 --seed 7
//   ultraharm report  --suite lower-bound ...   (same as verify, but always exits 0)
//
// Exit codes: 0 success, 1 suite assertion failure, 2 usage/config/input error,
// 3 numerical pole or insufficient truncation coverage for the request.
//
// verify/report always write two artifacts, <base>.json (summary) and
// <base>.csv (one row per witness), where <base> comes from --out (default
// "report").  Artifacts are byte-identical for identical config and seed.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <ultraharm/analysis.hpp>
#include <ultraharm/serialize.hpp>

using namespace ultraharm;

namespace {

constexpr double kTightTol = 1e-9;   // numeric identities through transforms
constexpr double kExactTol = 1e-12;  // identities that cancel exactly

struct CommonConfig {
  std::string group_name = "heisenberg";
  std::int64_t p = 3;
  int d = 1;
  int level = 1;
  double alpha = 1.0;
  std::string op_name;
  std::string suite;
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string out_path;
  std::string in_path;
  bool alpha_given = false;
  bool group_given = false;
  bool level_given = false;
};

std::string json_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += "\"";
  return out;
}

// ---- deterministic sampling (integer draws only, stable across platforms) --

GroupElement random_element(const GroupDescriptor& g, std::mt19937_64& rng) {
  const std::int64_t q = ipow(g.p, g.level);
  std::vector<std::int64_t> c(static_cast<size_t>(g.dim()));
  for (auto& v : c) v = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(q));
  return GroupElement::from_values(g, c);
}

GridFunction random_grid(const GroupDescriptor& g, int n, std::mt19937_64& rng) {
  GridFunction f = make_grid(g, n);
  for (Eigen::Index r = 0; r < f.values.size(); ++r)
    f.values[r] = complex_t(static_cast<double>(rng() % 2001) / 1000.0 - 1.0,
                            static_cast<double>(rng() % 2001) / 1000.0 - 1.0);
  return f;
}

Symbol random_symbol(const GroupDescriptor& g, int n, std::mt19937_64& rng) {
  Symbol s = make_symbol(g, n);
  for (const auto& xi : s.irreps) {
    Eigen::MatrixXcd M(xi.dim, xi.dim);
    for (int i = 0; i < xi.dim; ++i)
      for (int j = 0; j < xi.dim; ++j)
        M(i, j) = complex_t(static_cast<double>(rng() % 1000) / 500.0 - 1.0,
                            static_cast<double>(rng() % 1000) / 500.0 - 1.0);
    s.entries[xi.id] = M;
  }
  return s;
}

// ---- suite outcome assembly ------------------------------------------------

struct SuiteOutcome {
  bool pass = true;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<std::string, std::string>> summary;  // key -> JSON fragment

  void put(const std::string& key, const std::string& json_fragment) {
    summary.emplace_back(key, json_fragment);
  }
  void put_num(const std::string& key, double v) { put(key, format_double(v)); }
  void put_int(const std::string& key, std::int64_t v) { put(key, std::to_string(v)); }
  void put_str(const std::string& key, const std::string& v) { put(key, json_quote(v)); }
  void put_bool(const std::string& key, bool v) { put(key, v ? "true" : "false"); }
};

std::string params_string(const Irrep& xi) {
  std::string s;
  for (size_t i = 0; i < xi.params.size(); ++i) {
    if (i) s += ";";
    s += xi.params[i].to_string();
  }
  return s;
}

// ---- verification suites ---------------------------------------------------

SuiteOutcome suite_plancherel(const GroupDescriptor& g, const CommonConfig& cfg) {
  SuiteOutcome oc;
  oc.header = {"trial", "lhs", "rhs", "gap", "inversion_residual"};
  std::mt19937_64 rng(cfg.seed);
  const int trials = 25;
  double worst_gap = 0.0, worst_inv = 0.0;
  for (int t = 0; t < trials; ++t) {
    GridFunction f = random_grid(g, g.level, rng);
    PlancherelReport rep = plancherel(f);
    GridFunction back = inverse(forward(f, f.level), f.level);
    double inv_res = (back.values - f.values).cwiseAbs().maxCoeff();
    worst_gap = std::max(worst_gap, rep.gap);
    worst_inv = std::max(worst_inv, inv_res);
    oc.rows.push_back({std::to_string(t), format_double(rep.lhs), format_double(rep.rhs),
                       format_double(rep.gap), format_double(inv_res)});
    if (rep.gap >= kTightTol || inv_res >= kTightTol) oc.pass = false;
  }
  oc.put_int("trials", trials);
  oc.put_num("worst_gap", worst_gap);
  oc.put_num("worst_inversion_residual", worst_inv);
  oc.put_num("tolerance", kTightTol);
  return oc;
}

SuiteOutcome suite_homomorphism(const GroupDescriptor& g, const CommonConfig& cfg) {
  SuiteOutcome oc;
  oc.header = {"id", "dim", "worst_homomorphism", "worst_unitarity"};
  std::mt19937_64 rng(cfg.seed);
  const int pairs = 8;
  double worst = 0.0;
  for (const auto& xi : enumerate_irreps(g, g.level)) {
    double wh = 0.0, wu = 0.0;
    for (int t = 0; t < pairs; ++t) {
      GroupElement x = random_element(g, rng);
      GroupElement y = random_element(g, rng);
      Eigen::MatrixXcd Mx = irrep_matrix(xi, x);
      Eigen::MatrixXcd My = irrep_matrix(xi, y);
      Eigen::MatrixXcd Mxy = irrep_matrix(xi, multiply(x, y));
      wh = std::max(wh, (Mxy - Mx * My).cwiseAbs().maxCoeff());
      Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(xi.dim, xi.dim);
      wu = std::max(wu, (Mx * Mx.adjoint() - I).cwiseAbs().maxCoeff());
    }
    oc.rows.push_back({xi.id, std::to_string(xi.dim), format_double(wh), format_double(wu)});
    worst = std::max(worst, std::max(wh, wu));
    if (wh >= kTightTol || wu >= kTightTol) oc.pass = false;
  }
  oc.put_int("pairs_per_irrep", pairs);
  oc.put_num("worst_residual", worst);
  oc.put_num("tolerance", kTightTol);
  return oc;
}

SuiteOutcome suite_tensor(const GroupDescriptor& g, const CommonConfig& cfg) {
  SuiteOutcome oc;
  oc.header = {"eta", "xi", "components", "total_dim", "closed_matches_oracle",
               "character_residual"};
  std::mt19937_64 rng(cfg.seed);
  const bool have_closed =
      g.kind == GroupKind::abelian || g.kind == GroupKind::heisenberg;

  auto irreps1 = enumerate_irreps(g, std::min(g.level, 1));
  std::vector<std::pair<Irrep, Irrep>> todo;
  for (const auto& a : irreps1)
    for (const auto& b : irreps1) todo.emplace_back(a, b);
  if (g.level >= 2) {
    auto irreps2 = enumerate_irreps(g, 2);
    for (int t = 0; t < 40; ++t) {
      const Irrep& a = irreps2[rng() % irreps2.size()];
      const Irrep& b = irreps2[rng() % irreps2.size()];
      todo.emplace_back(a, b);
    }
  }

  // character identity is checked on a fixed sample of group points
  std::vector<GroupElement> pts;
  for (int i = 0; i < 48; ++i) pts.push_back(random_element(g, rng));

  double worst_char = 0.0;
  for (const auto& [eta, xi] : todo) {
    RepDecomposition dec = tensor_decompose(eta, xi);
    bool match = true;
    if (have_closed) {
      RepDecomposition oracle = tensor_decompose_oracle(eta, xi);
      match = dec.components.size() == oracle.components.size();
      if (match)
        for (size_t i = 0; i < dec.components.size(); ++i)
          if (dec.components[i].irrep.id != oracle.components[i].irrep.id ||
              dec.components[i].multiplicity != oracle.components[i].multiplicity)
            match = false;
    }
    bool dims_ok = dec.total_dim() == eta.dim * xi.dim;
    double wc = 0.0;
    for (const auto& x : pts) {
      complex_t lhs = character(eta, x) * character(xi, x);
      complex_t rhs(0.0, 0.0);
      for (const auto& c : dec.components)
        rhs += static_cast<double>(c.multiplicity) * character(c.irrep, x);
      wc = std::max(wc, std::abs(lhs - rhs));
    }
    worst_char = std::max(worst_char, wc);
    if (!match || !dims_ok || wc >= kTightTol) oc.pass = false;
    oc.rows.push_back({eta.id, xi.id, std::to_string(dec.components.size()),
                       std::to_string(dec.total_dim()), match ? "yes" : "no",
                       format_double(wc)});
  }
  oc.put_int("pairs", static_cast<std::int64_t>(todo.size()));
  oc.put_bool("closed_form_available", have_closed);
  oc.put_num("worst_character_residual", worst_char);
  oc.put_num("tolerance", kTightTol);
  return oc;
}

SuiteOutcome suite_vt_locality(const GroupDescriptor& g, const CommonConfig& cfg) {
  SuiteOutcome oc;
  oc.header = {"eta", "xi", "delta_vt", "delta_vt_raw"};
  Symbol sigma = vt_symbol(g, cfg.alpha, g.level);
  Symbol sigma_raw = vt_raw_symbol(g, cfg.alpha, g.level);
  auto irreps = enumerate_irreps(g, g.level);
  double worst = 0.0;
  for (const auto& eta : irreps) {
    if (eta.trivial()) continue;
    for (const auto& xi : irreps) {
      if (!(eta.dual_norm() < xi.dual_norm())) continue;
      double a = delta(eta, sigma, xi, 0.0).hs_norm;
      double b = delta(eta, sigma_raw, xi, 0.0).hs_norm;
      worst = std::max(worst, std::max(a, b));
      if (a >= kExactTol || b >= kExactTol) oc.pass = false;
      oc.rows.push_back({eta.id, xi.id, format_double(a), format_double(b)});
    }
  }
  oc.put_num("alpha", cfg.alpha);
  oc.put_num("worst_difference", worst);
  oc.put_num("tolerance", kExactTol);
  return oc;
}

SuiteOutcome suite_lower_bound(const GroupDescriptor& g, const CommonConfig&) {
  SuiteOutcome oc;
  oc.header = {"id", "dim", "min_nonunit_count", "min_ratio"};
  LowerBoundReport rep = lower_bound_report(g, g.level);
  for (const auto& row : rep.rows)
    oc.rows.push_back({row.id, std::to_string(row.dim), std::to_string(row.min_nonunit),
                       format_double(row.min_ratio)});
  oc.pass = rep.structural_pass;
  oc.put_bool("structural_pass", rep.structural_pass);
  oc.put_num("empirical_constant", rep.global_C);
  oc.put_num("conjectured_constant", rep.conjectured_C);
  oc.put_str("witness", rep.witness);
  return oc;
}

SuiteOutcome suite_i_alpha(const GroupDescriptor& g, const CommonConfig& cfg) {
  SuiteOutcome oc;
  oc.header = {"rank", "partial_sum", "ratio_to_norm", "tail_bound"};
  auto reports = i_alpha_scan(g, cfg.alpha, g.level);
  double min_ratio = std::numeric_limits<double>::infinity(), max_ratio = 0.0;
  for (size_t r = 1; r < reports.size(); ++r) {
    const auto& rep = reports[r];
    min_ratio = std::min(min_ratio, rep.ratio_to_norm);
    max_ratio = std::max(max_ratio, rep.ratio_to_norm);
    if (!(rep.ratio_to_norm > 0.0) || !std::isfinite(rep.ratio_to_norm) ||
        !std::isfinite(rep.tail_bound))
      oc.pass = false;
    oc.rows.push_back({std::to_string(r), format_double(rep.partial_sum),
                       format_double(rep.ratio_to_norm), format_double(rep.tail_bound)});
  }
  oc.put_num("alpha", cfg.alpha);
  oc.put_num("min_ratio", min_ratio);
  oc.put_num("max_ratio", max_ratio);
  return oc;
}

SuiteOutcome suite_norm_equiv(const GroupDescriptor& g, const CommonConfig& cfg) {
  SuiteOutcome oc;
  oc.header = {"trial", "lhs", "rhs", "ratio", "tail_bound"};
  std::mt19937_64 rng(cfg.seed);
  const int trials = 4;
  double min_ratio = std::numeric_limits<double>::infinity(), max_ratio = 0.0;
  for (int t = 0; t < trials; ++t) {
    GridFunction f = random_grid(g, g.level, rng);
    NormEquivReport rep = norm_equiv_check(f, cfg.alpha, g.level);
    min_ratio = std::min(min_ratio, rep.ratio);
    max_ratio = std::max(max_ratio, rep.ratio);
    if (!(rep.ratio > 0.0) || !std::isfinite(rep.ratio)) oc.pass = false;
    oc.rows.push_back({std::to_string(t), format_double(rep.lhs), format_double(rep.rhs),
                       format_double(rep.ratio), format_double(rep.tail_bound)});
  }
  oc.put_num("alpha", cfg.alpha);
  oc.put_num("min_ratio", min_ratio);
  oc.put_num("max_ratio", max_ratio);
  return oc;
}

SuiteOutcome suite_lp(const GroupDescriptor& g, const CommonConfig& cfg) {
  SuiteOutcome oc;
  oc.header = {"trial", "square_fn_gap", "rademacher_gap", "ratio_r1.5", "ratio_r4"};
  std::mt19937_64 rng(cfg.seed);
  const int trials = 10;
  WeightSpec ws{cfg.alpha, WeightKind::full, 0};
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    GridFunction f = random_grid(g, g.level, rng);
    GridFunction sf = square_function(f);
    double s_gap = std::abs(lr_norm(sf, 2.0) - lr_norm(f, 2.0));

    double s = 0.05 + 0.07 * static_cast<double>(t);
    GridFunction tf = apply_multiplier(rademacher_symbol(g, g.level, s), f);
    double rad_gap = std::abs(lr_norm(tf, 2.0) - lr_norm(f, 2.0));

    double r15 = weighted_norm(sf, 1.5, ws) / weighted_norm(f, 1.5, ws);
    double r4 = weighted_norm(sf, 4.0, ws) / weighted_norm(f, 4.0, ws);
    worst = std::max(worst, std::max(s_gap, rad_gap));
    if (s_gap >= kTightTol || rad_gap >= kTightTol) oc.pass = false;
    oc.rows.push_back({std::to_string(t), format_double(s_gap), format_double(rad_gap),
                       format_double(r15), format_double(r4)});
  }
  oc.put_num("alpha", cfg.alpha);
  oc.put_num("worst_isometry_gap", worst);
  oc.put_num("tolerance", kTightTol);
  return oc;
}

SuiteOutcome suite_cz(const GroupDescriptor& g, const CommonConfig& cfg) {
  SuiteOutcome oc;
  oc.header = {"trial", "gamma", "pieces", "c3", "c4", "c6", "mean_residual",
               "reconstruction_residual", "supports_disjoint"};
  std::mt19937_64 rng(cfg.seed);
  const int trials = 10;
  // the decomposition needs a weight exponent in (-dim, 0]
  double alpha = (cfg.alpha_given && cfg.alpha <= 0.0) ? cfg.alpha : 0.0;
  const auto flat = detail::flat_coords(g);
  const int dmn = g.dim();
  for (int t = 0; t < trials; ++t) {
    GridFunction phi = random_grid(g, g.level, rng);
    double mean_abs = phi.values.cwiseAbs().mean();
    double gamma = mean_abs * ((t % 2 == 0) ? 1.2 : 3.0);
    CZResult cz = cz_decompose(phi, gamma, alpha);

    // (i) each piece has plain-Haar mean zero
    double mean_res = 0.0;
    for (const auto& piece : cz.pieces)
      mean_res = std::max(mean_res, std::abs(piece.part.values.mean()));

    // (v) supports live on pairwise disjoint coset boxes
    std::vector<int> owner(static_cast<size_t>(phi.values.size()), -1);
    bool disjoint = true;
    for (size_t pi = 0; pi < cz.pieces.size(); ++pi) {
      const auto& piece = cz.pieces[pi];
      const std::int64_t box = ipow(g.p, piece.level);
      for (Eigen::Index r = 0; r < phi.values.size(); ++r) {
        bool inside = true;
        for (int j = 0; j < dmn && inside; ++j)
          inside = flat[r * dmn + j] % box == piece.base.value(j) % box;
        if (inside) {
          if (owner[static_cast<size_t>(r)] != -1) disjoint = false;
          owner[static_cast<size_t>(r)] = static_cast<int>(pi);
        }
      }
    }

    // (vii) phi0 + sum of pieces reconstructs phi
    Eigen::VectorXcd recon = cz.phi0.values;
    for (const auto& piece : cz.pieces) recon += piece.part.values;
    double rec_res = (recon - phi.values).cwiseAbs().maxCoeff();

    bool ok = mean_res < kExactTol && rec_res < kTightTol && disjoint &&
              cz.constants.c6 <= 1.0 + kExactTol;
    if (!ok) oc.pass = false;
    oc.rows.push_back({std::to_string(t), format_double(gamma),
                       std::to_string(cz.pieces.size()), format_double(cz.constants.c3),
                       format_double(cz.constants.c4), format_double(cz.constants.c6),
                       format_double(mean_res), format_double(rec_res),
                       disjoint ? "yes" : "no"});
  }
  oc.put_num("weight_alpha", alpha);
  oc.put_int("trials", trials);
  return oc;
}

SuiteOutcome suite_h_condition(const GroupDescriptor& g, const CommonConfig& cfg) {
  SuiteOutcome oc;
  oc.header = {"symbol", "k", "l", "n", "measured", "bound"};
  std::mt19937_64 rng(cfg.seed);
  const int K = g.level;
  struct Named { std::string name; Symbol sym; double t; };
  std::vector<Named> cases;
  cases.push_back({"vt", vt_symbol(g, cfg.alpha, g.level), 2.0});
  cases.push_back({"rademacher", rademacher_symbol(g, g.level, 0.37), 1.5});
  cases.push_back({"random", random_symbol(g, g.level, rng), 2.0});
  for (auto& c : cases) {
    ConditionHReport rep = condition_h_report(c.sym, c.t, K);
    if (!rep.pass) oc.pass = false;
    for (const auto& row : rep.table)
      oc.rows.push_back({c.name, std::to_string(row.k), std::to_string(row.l),
                         std::to_string(row.n), format_double(row.measured),
                         format_double(row.bound)});
    oc.put_num("fitted_B_" + c.name, rep.fitted_B);
    oc.put_num("fitted_eps_" + c.name, rep.fitted_eps);
    oc.put_bool("pass_" + c.name, rep.pass);
  }
  return oc;
}

SuiteOutcome suite_mikhlin(const GroupDescriptor& g, const CommonConfig& cfg) {
  SuiteOutcome oc;
  oc.header = {"symbol", "variant", "beta", "decay", "constant", "witness_eta", "witness_xi"};
  std::mt19937_64 rng(cfg.seed);
  std::vector<MikhlinVariant> variants = {MikhlinVariant::l2_alpha, MikhlinVariant::lr1,
                                          MikhlinVariant::lr2};
  if (g.kind != GroupKind::abelian) {
    variants.push_back(MikhlinVariant::sub_l2_alpha);
    variants.push_back(MikhlinVariant::sub_lr1);
    variants.push_back(MikhlinVariant::sub_lr2);
  }
  struct Named { std::string name; Symbol sym; };
  std::vector<Named> cases;
  cases.push_back({"vt", vt_symbol(g, cfg.alpha, g.level)});
  cases.push_back({"random", random_symbol(g, g.level, rng)});
  for (const auto& c : cases)
    for (auto v : variants) {
      MikhlinReport rep = mikhlin_report(c.sym, cfg.alpha, v, 1.5);
      if (!rep.pass) oc.pass = false;
      oc.rows.push_back({c.name, to_string(v), format_double(rep.beta),
                         format_double(rep.decay), format_double(rep.constant),
                         rep.witness_eta, rep.witness_xi});
    }
  oc.put_num("alpha0", cfg.alpha);
  oc.put_int("variants", static_cast<std::int64_t>(variants.size()));
  return oc;
}

SuiteOutcome suite_product_rule(const GroupDescriptor& g, const CommonConfig& cfg) {
  SuiteOutcome oc;
  oc.header = {"eta", "xi", "residual"};
  std::mt19937_64 rng(cfg.seed);
  Symbol sigma = random_symbol(g, g.level, rng);
  GridFunction f = random_grid(g, g.level, rng);
  Symbol fh = forward(f, g.level);
  Symbol prod = make_symbol(g, g.level);
  for (const auto& xi : prod.irreps) prod.entries[xi.id] = sigma.at(xi.id) * fh.at(xi.id);

  double worst = 0.0;
  auto irreps1 = enumerate_irreps(g, std::min(g.level, 1));
  for (const auto& eta : irreps1)
    for (const auto& xi : irreps1) {
      RepDecomposition dec = tensor_decompose(eta, xi);
      const std::int64_t total = eta.dim * xi.dim;
      Eigen::MatrixXcd lhs = delta(eta, prod, xi, 0.0).block_matrix;
      Eigen::MatrixXcd fh_tensor = detail::assemble_tensor_symbol(fh, dec, total);
      Eigen::MatrixXcd sig_base = Eigen::MatrixXcd::Zero(total, total);
      for (std::int64_t c = 0; c < eta.dim; ++c)
        sig_base.block(c * xi.dim, c * xi.dim, xi.dim, xi.dim) = sigma.at(xi.id);
      Eigen::MatrixXcd rhs = delta(eta, sigma, xi, 0.0).block_matrix * fh_tensor +
                             sig_base * delta(eta, fh, xi, 0.0).block_matrix;
      double res = (lhs - rhs).cwiseAbs().maxCoeff();
      worst = std::max(worst, res);
      if (res >= kTightTol) oc.pass = false;
      oc.rows.push_back({eta.id, xi.id, format_double(res)});
    }
  oc.put_num("worst_residual", worst);
  oc.put_num("tolerance", kTightTol);
  return oc;
}

SuiteOutcome suite_phase_bound(const GroupDescriptor& g, const CommonConfig&) {
  SuiteOutcome oc;
  oc.header = {"order_level", "worst_margin", "worst_k"};
  const int max_m = 6;
  for (int m = 1; m <= max_m; ++m) {
    PhaseBoundReport rep = phase_lower_bound_check(g.p, m);
    if (!rep.pass) oc.pass = false;
    oc.rows.push_back({std::to_string(m), format_double(rep.worst_margin),
                       std::to_string(rep.worst_k)});
  }
  oc.put_int("max_order_level", max_m);
  return oc;
}

SuiteOutcome run_suite(const GroupDescriptor& g, const CommonConfig& cfg) {
  if (cfg.suite == "plancherel") return suite_plancherel(g, cfg);
  if (cfg.suite == "homomorphism") return suite_homomorphism(g, cfg);
  if (cfg.suite == "tensor") return suite_tensor(g, cfg);
  if (cfg.suite == "vt-locality") return suite_vt_locality(g, cfg);
  if (cfg.suite == "lower-bound") return suite_lower_bound(g, cfg);
  if (cfg.suite == "i-alpha") return suite_i_alpha(g, cfg);
  if (cfg.suite == "norm-equiv") return suite_norm_equiv(g, cfg);
  if (cfg.suite == "lp") return suite_lp(g, cfg);
  if (cfg.suite == "cz") return suite_cz(g, cfg);
  if (cfg.suite == "h-condition") return suite_h_condition(g, cfg);
  if (cfg.suite == "mikhlin") return suite_mikhlin(g, cfg);
  if (cfg.suite == "product-rule") return suite_product_rule(g, cfg);
  if (cfg.suite == "phase-bound") return suite_phase_bound(g, cfg);
  throw std::runtime_error("unknown suite: " + cfg.suite);
}

// ---- artifact output -------------------------------------------------------

std::string outcome_json(const std::string& command, const GroupDescriptor& g,
                         const CommonConfig& cfg, const SuiteOutcome& oc) {
  std::string j = "{";
  j += "\"command\":" + json_quote(command);
  j += ",\"suite\":" + json_quote(cfg.suite);
  j += ",\"group\":" + to_json(g);
  j += ",\"alpha\":" + format_double(cfg.alpha);
  j += ",\"seed\":" + std::to_string(cfg.seed);
  j += ",\"pass\":" + std::string(oc.pass ? "true" : "false");
  j += ",\"row_count\":" + std::to_string(oc.rows.size());
  j += ",\"summary\":{";
  for (size_t i = 0; i < oc.summary.size(); ++i) {
    if (i) j += ",";
    j += json_quote(oc.summary[i].first) + ":" + oc.summary[i].second;
  }
  j += "}}\n";
  return j;
}

std::string outcome_csv(const SuiteOutcome& oc) {
  std::string s = csv_row(oc.header);
  for (const auto& row : oc.rows) s += csv_row(row);
  return s;
}

std::string artifact_base(const CommonConfig& cfg) {
  std::string base = cfg.out_path.empty() ? "report" : cfg.out_path;
  for (const char* ext : {".json", ".csv"}) {
    size_t n = std::string(ext).size();
    if (base.size() > n && base.compare(base.size() - n, n, ext) == 0)
      return base.substr(0, base.size() - n);
  }
  return base;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty())
    std::cout << text;
  else
    write_text_file(path, text);
}

// ---- commands --------------------------------------------------------------

int cmd_dual(const GroupDescriptor& g, const CommonConfig& cfg) {
  if (cfg.format == "dot") {
    emit(export_tree(g, g.level, "dot"), cfg.out_path);
    return 0;
  }
  auto irreps = enumerate_irreps(g, g.level);
  if (cfg.format == "csv") {
    std::string s = csv_row({"id", "params", "dim", "norm"});
    for (const auto& xi : irreps)
      s += csv_row({xi.id, params_string(xi), std::to_string(xi.dim),
                    format_double(xi.dual_norm())});
    emit(s, cfg.out_path);
    return 0;
  }
  std::string j = "{\"command\":\"dual\",\"group\":" + to_json(g);
  j += ",\"count\":" + std::to_string(irreps.size()) + ",\"irreps\":[";
  for (size_t i = 0; i < irreps.size(); ++i) {
    const auto& xi = irreps[i];
    if (i) j += ",";
    j += "{\"id\":" + json_quote(xi.id) + ",\"params\":[";
    for (size_t k = 0; k < xi.params.size(); ++k) {
      if (k) j += ",";
      j += json_quote(xi.params[k].to_string());
    }
    j += "],\"dim\":" + std::to_string(xi.dim);
    j += ",\"norm\":" + format_double(xi.dual_norm()) + "}";
  }
  j += "]}\n";
  emit(j, cfg.out_path);
  return 0;
}

int cmd_apply(const GroupDescriptor& g, const CommonConfig& cfg) {
  GridFunction f = load_grid(cfg.in_path);
  if (cfg.group_given &&
      (f.group.kind != g.kind || f.group.p != g.p || f.group.d != g.d))
    throw std::runtime_error("apply: input group does not match --group/--p/--d");
  if (cfg.level_given && cfg.level != f.level)
    throw std::invalid_argument(
        "apply: input truncation level " + std::to_string(f.level) +
        " does not cover requested level " + std::to_string(cfg.level));

  const GroupDescriptor& fg = f.group;
  Symbol sigma = make_symbol(fg, f.level);
  if (cfg.op_name == "vt") {
    sigma = vt_symbol(fg, cfg.alpha, f.level);
  } else if (cfg.op_name == "vt-raw") {
    sigma = vt_raw_symbol(fg, cfg.alpha, f.level);
  } else if (cfg.op_name == "sub-laplacian") {
    sigma = sub_laplacian_symbol(fg, cfg.alpha, f.level);
  } else if (cfg.op_name == "dir-x3") {
    sigma = dir_vladimirov_symbol(fg, cfg.alpha, f.level);
  } else if (cfg.op_name == "script-l") {
    sigma = script_l_symbol(fg, cfg.alpha, f.level);
  } else if (cfg.op_name.rfind("radial:", 0) == 0) {
    RadialProfile prof = load_profile(cfg.op_name.substr(7));
    sigma = radial_calculus(prof, fg, f.level);
  } else {
    throw std::runtime_error("apply: unknown operator: " + cfg.op_name);
  }
  GridFunction out = apply_multiplier(sigma, f);
  emit(to_json(out), cfg.out_path);
  return 0;
}

int cmd_suite(const GroupDescriptor& g, const CommonConfig& cfg, bool assert_pass) {
  SuiteOutcome oc = run_suite(g, cfg);
  std::string base = artifact_base(cfg);
  write_text_file(base + ".json", outcome_json(assert_pass ? "verify" : "report", g, cfg, oc));
  write_text_file(base + ".csv", outcome_csv(oc));
  std::cout << "suite " << cfg.suite << ": " << (oc.pass ? "pass" : "FAIL") << " ("
            << oc.rows.size() << " rows; artifacts " << base << ".json, " << base
            << ".csv)\n";
  return assert_pass ? (oc.pass ? 0 : 1) : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fourier analysis on compact p-adic groups at finite truncation level"};
  app.require_subcommand(1);
  CommonConfig cfg;

  app.set_config("--config", "", "plain key=value file supplying flag defaults");
  app.add_option("--group", cfg.group_name, "group kind")
      ->check(CLI::IsMember({"abelian", "heisenberg", "engel4", "g52"}));
  app.add_option("--p", cfg.p, "odd prime");
  app.add_option("--d", cfg.d, "copies (abelian Z_p^d / Heisenberg H_d)");
  auto* level_opt = app.add_option("--level", cfg.level, "truncation level N >= 1");
  auto* alpha_opt = app.add_option("--alpha", cfg.alpha, "order / weight exponent");
  app.add_option("--operator", cfg.op_name,
                 "apply: vt|vt-raw|sub-laplacian|dir-x3|script-l|radial:<profile.json>");
  app.add_option("--suite", cfg.suite, "verification suite name")
      ->check(CLI::IsMember({"plancherel", "homomorphism", "tensor", "vt-locality",
                             "lower-bound", "i-alpha", "norm-equiv", "lp", "cz",
                             "h-condition", "mikhlin", "product-rule", "phase-bound"}));
  app.add_option("--seed", cfg.seed, "deterministic sampling seed");
  app.add_option("--format", cfg.format, "output format for dual")
      ->check(CLI::IsMember({"json", "csv", "dot"}));
  app.add_option("--out", cfg.out_path, "output path (verify/report: artifact base)");
  app.add_option("--in", cfg.in_path, "input grid function (JSON) for apply");
  auto* group_opt = app.get_option("--group");

  CLI::App* sub_dual = app.add_subcommand("dual", "enumerate the unitary dual");
  CLI::App* sub_apply = app.add_subcommand("apply", "apply a multiplier to a grid function");
  CLI::App* sub_verify = app.add_subcommand("verify", "run a suite; exit 1 on failure");
  CLI::App* sub_report = app.add_subcommand("report", "run a suite; always exit 0");
  for (CLI::App* s : {sub_dual, sub_apply, sub_verify, sub_report}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  cfg.alpha_given = alpha_opt->count() > 0;
  cfg.group_given = group_opt->count() > 0;
  cfg.level_given = level_opt->count() > 0;

  // config validation phase: any problem here is a usage error
  GroupDescriptor g{GroupKind::heisenberg, cfg.p, cfg.d, cfg.level};
  try {
    g.kind = group_kind_from_string(cfg.group_name);
    g.validate();
    if (sub_apply->parsed()) {
      if (cfg.in_path.empty()) throw std::invalid_argument("apply requires --in <grid.json>");
      if (cfg.op_name.empty()) throw std::invalid_argument("apply requires --operator");
      if (cfg.format != "json")
        throw std::invalid_argument("apply writes JSON output only");
      const bool nonabelian_only = cfg.op_name == "sub-laplacian" ||
                                   cfg.op_name == "dir-x3" || cfg.op_name == "script-l";
      if (nonabelian_only && g.kind == GroupKind::abelian)
        throw std::invalid_argument("operator " + cfg.op_name +
                                    " needs a nonabelian group");
    }
    if ((sub_verify->parsed() || sub_report->parsed()) && cfg.suite.empty())
      throw std::invalid_argument("verify/report require --suite");
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  // execution phase: invalid_argument marks poles / insufficient coverage,
  // anything else (missing files, malformed JSON) is an input error
  try {
    if (sub_dual->parsed()) return cmd_dual(g, cfg);
    if (sub_apply->parsed()) return cmd_apply(g, cfg);
    if (sub_verify->parsed()) return cmd_suite(g, cfg, true);
    return cmd_suite(g, cfg, false);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
