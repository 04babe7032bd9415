#include <doctest.h>

#include <complex>
#include <random>
#include <set>

#include "ultraharm/dual.hpp"

using namespace ultraharm;

namespace {

GroupElement elem(const GroupDescriptor& g, std::vector<int64_t> v) {
  return GroupElement::from_values(g, v);
}

GroupElement random_elem(const GroupDescriptor& g, std::mt19937_64& rng) {
  std::vector<int64_t> v(g.dim());
  int64_t q = ipow(g.p, g.level);
  for (auto& c : v) c = static_cast<int64_t>(rng() % q);
  return GroupElement::from_values(g, v);
}

double hom_defect(const Irrep& xi, const GroupElement& x, const GroupElement& y) {
  Eigen::MatrixXcd lhs = irrep_matrix(xi, multiply(x, y));
  Eigen::MatrixXcd rhs = irrep_matrix(xi, x) * irrep_matrix(xi, y);
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

double unitary_defect(const Irrep& xi, const GroupElement& x) {
  Eigen::MatrixXcd M = irrep_matrix(xi, x);
  return (M * M.adjoint() - Eigen::MatrixXcd::Identity(xi.dim, xi.dim)).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("dual counting identities") {
  struct Row {
    GroupDescriptor g;
    int n;
    size_t irreps;
  };
  const Row rows[] = {
      {{GroupKind::abelian, 3, 1, 2}, 1, 3},
      {{GroupKind::abelian, 3, 1, 2}, 2, 9},
      {{GroupKind::abelian, 3, 2, 2}, 1, 9},
      {{GroupKind::heisenberg, 3, 1, 2}, 1, 11},
      {{GroupKind::heisenberg, 3, 1, 2}, 2, 105},
      {{GroupKind::heisenberg, 3, 2, 1}, 1, 83},
      {{GroupKind::heisenberg, 5, 1, 2}, 1, 29},
      {{GroupKind::engel4, 5, 1, 2}, 1, 49},
      {{GroupKind::engel4, 5, 1, 2}, 2, 1825},
      {{GroupKind::g52, 3, 1, 2}, 1, 51},
      {{GroupKind::g52, 3, 1, 2}, 2, 2025},
      {{GroupKind::g52, 5, 1, 1}, 1, 245},
  };
  for (const auto& r : rows) {
    CAPTURE(to_string(r.g.kind));
    CAPTURE(r.n);
    // enumerate_irreps throws if sum d^2 != |G/G_n|, so success certifies it
    auto irreps = enumerate_irreps(r.g, r.n);
    CHECK(irreps.size() == r.irreps);
    std::set<std::string> ids;
    for (const auto& xi : irreps) ids.insert(xi.id);
    CHECK(ids.size() == irreps.size());  // ids are unique
    // sorted by (level, id); spheres are contiguous
    for (size_t i = 1; i < irreps.size(); ++i)
      CHECK(irreps[i - 1].level <= irreps[i].level);
  }
}

TEST_CASE("sphere picks exactly the new irreps") {
  GroupDescriptor g{GroupKind::heisenberg, 3, 1, 2};
  auto s2 = sphere(g, 2);
  CHECK(s2.size() == 105 - 11);
  for (const auto& xi : s2) {
    CHECK(xi.level == 2);
    CHECK(xi.dual_norm() == doctest::Approx(9.0));
  }
}

TEST_CASE("identity maps to identity matrix") {
  GroupDescriptor g{GroupKind::heisenberg, 3, 1, 2};
  for (const auto& xi : enumerate_irreps(g, 2)) {
    Eigen::MatrixXcd M = irrep_matrix(xi, identity(g));
    CHECK((M - Eigen::MatrixXcd::Identity(xi.dim, xi.dim)).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("frozen coefficients on the Heisenberg group") {
  GroupDescriptor g{GroupKind::heisenberg, 3, 1, 1};
  Irrep xi = make_irrep(g, {DualScalar::zero(3), DualScalar::zero(3), DualScalar(3, 1, 1)});
  CHECK(xi.dim == 3);
  CHECK(xi.level == 1);
  CHECK(xi.id == "heisenberg:1:0/1,0/1,1/3");
  CHECK(dual_norm_of(xi) == doctest::Approx(3.0));

  const complex_t w = std::polar(1.0, 2.0 * M_PI / 3.0);  // e^{2 pi i/3}

  // central element: diagonal with constant phase
  Eigen::MatrixXcd Mc = irrep_matrix(xi, elem(g, {0, 0, 1}));
  for (int h = 0; h < 3; ++h)
    for (int k = 0; k < 3; ++k) {
      if (h == k)
        CHECK(std::abs(Mc(h, k) - w) < 1e-12);
      else
        CHECK(std::abs(Mc(h, k)) < 1e-15);
    }

  // x = (1,0,0): pure index shift h -> h+1, all phases 1
  Eigen::MatrixXcd Ms = irrep_matrix(xi, elem(g, {1, 0, 0}));
  for (int h = 0; h < 3; ++h)
    for (int k = 0; k < 3; ++k) {
      if (k == (h + 1) % 3)
        CHECK(std::abs(Ms(h, k) - 1.0) < 1e-15);
      else
        CHECK(std::abs(Ms(h, k)) < 1e-15);
    }

  // characters of the trace
  CHECK(std::abs(character(xi, identity(g)) - complex_t(3.0, 0.0)) < 1e-15);
  CHECK(std::abs(character(xi, elem(g, {1, 0, 0}))) < 1e-15);
  CHECK(std::abs(character(xi, elem(g, {0, 0, 1})) - 3.0 * w) < 1e-12);
}

TEST_CASE("coefficient errors") {
  GroupDescriptor g1{GroupKind::heisenberg, 3, 1, 1};
  GroupDescriptor g2{GroupKind::heisenberg, 3, 1, 2};
  Irrep xi2 = make_irrep(g2, {DualScalar::zero(3), DualScalar::zero(3), DualScalar(3, 1, 2)});
  CHECK_THROWS_AS((void)coefficient(xi2, identity(g1), 0, 0), std::invalid_argument);
  Irrep xi1 = make_irrep(g1, {DualScalar::zero(3), DualScalar::zero(3), DualScalar(3, 1, 1)});
  CHECK_THROWS_AS((void)coefficient(xi1, identity(g1), 0, 3), std::out_of_range);
  CHECK_THROWS_AS((void)coefficient(xi1, identity(g1), -1, 0), std::out_of_range);
}

TEST_CASE("make_irrep rejects non-canonical parameters") {
  GroupDescriptor h{GroupKind::heisenberg, 3, 1, 2};
  // xi_1 must have digits at depths >= 2 when the central level is 1
  CHECK_THROWS_AS(make_irrep(h, {DualScalar(3, 1, 1), DualScalar::zero(3), DualScalar(3, 1, 1)}),
                  std::invalid_argument);
  // deep representative 1/9 is fine
  CHECK_NOTHROW(make_irrep(h, {DualScalar(3, 1, 2), DualScalar::zero(3), DualScalar(3, 1, 1)}));

  GroupDescriptor e{GroupKind::engel4, 5, 1, 2};
  // |xi_4| == |xi_3| is outside the dual set
  CHECK_THROWS_AS(make_irrep(e, {DualScalar::zero(5), DualScalar::zero(5), DualScalar(5, 1, 1),
                                 DualScalar(5, 2, 1)}),
                  std::invalid_argument);
  GroupDescriptor f{GroupKind::g52, 3, 1, 2};
  // xi_3 must be deep when |xi_5| >= |xi_4|  (xi_2 is the free one there)
  CHECK_THROWS_AS(make_irrep(f, {DualScalar::zero(3), DualScalar::zero(3), DualScalar(3, 1, 1),
                                 DualScalar::zero(3), DualScalar(3, 1, 1)}),
                  std::invalid_argument);
  CHECK_NOTHROW(make_irrep(f, {DualScalar::zero(3), DualScalar(3, 1, 1), DualScalar::zero(3),
                               DualScalar::zero(3), DualScalar(3, 1, 1)}));
  CHECK_THROWS_AS(make_irrep(h, {DualScalar::zero(3), DualScalar::zero(3)}), std::invalid_argument);
}

TEST_CASE("homomorphism and unitarity, sampled across all groups") {
  struct Cfg {
    GroupDescriptor g;
    int n;
    int pairs_per_irrep;
  };
  const Cfg cfgs[] = {
      {{GroupKind::heisenberg, 3, 1, 2}, 2, 12},
      {{GroupKind::heisenberg, 3, 2, 1}, 1, 6},
      {{GroupKind::engel4, 5, 1, 2}, 2, 2},
      {{GroupKind::g52, 3, 1, 2}, 2, 6},
      {{GroupKind::abelian, 5, 2, 2}, 2, 4},
  };
  std::mt19937_64 rng(20240811);
  for (const auto& cfg : cfgs) {
    double worst_h = 0.0, worst_u = 0.0;
    for (const auto& xi : enumerate_irreps(cfg.g, cfg.n)) {
      for (int s = 0; s < cfg.pairs_per_irrep; ++s) {
        GroupElement x = random_elem(cfg.g, rng), y = random_elem(cfg.g, rng);
        worst_h = std::max(worst_h, hom_defect(xi, x, y));
        worst_u = std::max(worst_u, unitary_defect(xi, x));
      }
    }
    CAPTURE(to_string(cfg.g.kind));
    CHECK(worst_h < 1e-9);
    CHECK(worst_u < 1e-9);
  }
}

TEST_CASE("Schur orthogonality at level 1") {
  for (GroupDescriptor g : {GroupDescriptor{GroupKind::heisenberg, 3, 1, 1},
                            GroupDescriptor{GroupKind::g52, 3, 1, 1}}) {
    auto irreps = enumerate_irreps(g, 1);
    auto grid = enumerate_quotient(g);
    const double vol = static_cast<double>(g.quotient_size());

    // cache matrices per grid point
    std::vector<std::vector<Eigen::MatrixXcd>> mats(irreps.size());
    for (size_t a = 0; a < irreps.size(); ++a)
      for (const auto& x : grid) mats[a].push_back(irrep_matrix(irreps[a], x));

    double worst = 0.0;
    for (size_t a = 0; a < irreps.size(); ++a)
      for (size_t b = 0; b < irreps.size(); ++b)
        for (int i = 0; i < irreps[a].dim; ++i)
          for (int j = 0; j < irreps[a].dim; ++j)
            for (int k = 0; k < irreps[b].dim; ++k)
              for (int l = 0; l < irreps[b].dim; ++l) {
                complex_t acc(0, 0);
                for (size_t t = 0; t < grid.size(); ++t)
                  acc += mats[a][t](i, j) * std::conj(mats[b][t](k, l));
                acc /= vol;
                double want = (a == b && i == k && j == l) ? 1.0 / irreps[a].dim : 0.0;
                worst = std::max(worst, std::abs(acc - want));
              }
    CAPTURE(to_string(g.kind));
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("tensor decomposition: closed form frozen cases") {
  GroupDescriptor g{GroupKind::heisenberg, 3, 1, 2};
  Irrep triv = make_irrep(g, {DualScalar::zero(3), DualScalar::zero(3), DualScalar::zero(3)});
  Irrep xi = make_irrep(g, {DualScalar::zero(3), DualScalar::zero(3), DualScalar(3, 1, 1)});
  Irrep eta = make_irrep(g, {DualScalar::zero(3), DualScalar::zero(3), DualScalar(3, 2, 1)});

  // trivial tensor anything is that thing
  auto d0 = tensor_decompose(triv, xi);
  REQUIRE(d0.components.size() == 1);
  CHECK(d0.components[0].irrep.id == xi.id);
  CHECK(d0.components[0].multiplicity == 1);

  // same central level, nonzero sum: one component with multiplicity p
  auto d1 = tensor_decompose(xi, xi);
  REQUIRE(d1.components.size() == 1);
  CHECK(d1.components[0].irrep.id == eta.id);
  CHECK(d1.components[0].multiplicity == 3);
  CHECK(d1.total_dim() == 9);

  // opposite central characters: 9 characters, multiplicity 1 each
  auto d2 = tensor_decompose(xi, eta);
  CHECK(d2.components.size() == 9);
  for (const auto& c : d2.components) {
    CHECK(c.irrep.dim == 1);
    CHECK(c.multiplicity == 1);
  }
  CHECK(d2.total_dim() == 9);

  CHECK_THROWS_AS(tensor_decompose(triv, make_irrep({GroupKind::heisenberg, 5, 1, 2},
                                                    {DualScalar::zero(5), DualScalar::zero(5),
                                                     DualScalar::zero(5)})),
                  std::invalid_argument);
}

TEST_CASE("tensor decomposition matches the character oracle on H_1") {
  GroupDescriptor g{GroupKind::heisenberg, 3, 1, 2};
  auto irreps = enumerate_irreps(g, 1);
  for (const auto& eta : irreps)
    for (const auto& xi : irreps) {
      auto closed = tensor_decompose_closed(eta, xi);
      auto oracle = tensor_decompose_oracle(eta, xi);
      REQUIRE(closed.components.size() == oracle.components.size());
      for (size_t i = 0; i < closed.components.size(); ++i) {
        CHECK(closed.components[i].irrep.id == oracle.components[i].irrep.id);
        CHECK(closed.components[i].multiplicity == oracle.components[i].multiplicity);
      }
    }
  // a deeper pair: central levels 2 and 2 with cancellation to level 1
  Irrep a = make_irrep(g, {DualScalar::zero(3), DualScalar::zero(3), DualScalar(3, 1, 2)});
  Irrep b = make_irrep(g, {DualScalar::zero(3), DualScalar::zero(3), DualScalar(3, 2, 2)});
  auto closed = tensor_decompose_closed(a, b);  // sum 3/9 = 1/3
  auto oracle = tensor_decompose_oracle(a, b);
  REQUIRE(closed.components.size() == oracle.components.size());
  for (size_t i = 0; i < closed.components.size(); ++i) {
    CHECK(closed.components[i].irrep.id == oracle.components[i].irrep.id);
    CHECK(closed.components[i].multiplicity == oracle.components[i].multiplicity);
  }
  CHECK(closed.total_dim() == 81);
}

TEST_CASE("tensor decomposition properties on engel4 and g52") {
  std::mt19937_64 rng(7);
  for (GroupDescriptor g : {GroupDescriptor{GroupKind::engel4, 5, 1, 1},
                            GroupDescriptor{GroupKind::g52, 3, 1, 1}}) {
    auto irreps = enumerate_irreps(g, 1);
    // a fixed slice plus random pairs
    std::vector<std::pair<size_t, size_t>> pairs;
    for (size_t i = 0; i < irreps.size(); i += 9) pairs.emplace_back(i, irreps.size() - 1 - i);
    for (int s = 0; s < 12; ++s)
      pairs.emplace_back(rng() % irreps.size(), rng() % irreps.size());

    for (auto [ia, ib] : pairs) {
      const Irrep &eta = irreps[ia], &xi = irreps[ib];
      auto dec = tensor_decompose(eta, xi);
      CHECK(dec.total_dim() == eta.dim * xi.dim);
      double bound = std::max(eta.dual_norm(), xi.dual_norm());
      for (const auto& c : dec.components) {
        CHECK(c.multiplicity >= 1);
        CHECK(c.irrep.dual_norm() <= bound + 1e-12);  // ultrametric submultiplicativity
      }
      // character multiplicativity against the decomposition
      for (int s = 0; s < 5; ++s) {
        GroupElement x = random_elem(g, rng);
        complex_t lhs = character(eta, x) * character(xi, x);
        complex_t rhs(0, 0);
        for (const auto& c : dec.components)
          rhs += static_cast<double>(c.multiplicity) * character(c.irrep, x);
        CHECK(std::abs(lhs - rhs) < 1e-9);
      }
    }
  }
}

TEST_CASE("submultiplicativity of the dual norm on H_1") {
  GroupDescriptor g{GroupKind::heisenberg, 3, 1, 2};
  auto irreps = enumerate_irreps(g, 2);
  std::mt19937_64 rng(99);
  for (int s = 0; s < 60; ++s) {
    const Irrep& eta = irreps[rng() % irreps.size()];
    const Irrep& xi = irreps[rng() % irreps.size()];
    double bound = std::max(eta.dual_norm(), xi.dual_norm());
    for (const auto& c : tensor_decompose(eta, xi).components)
      CHECK(c.irrep.dual_norm() <= bound + 1e-12);
  }
}

TEST_CASE("IrrepEvaluator agrees with for_each_nonzero") {
  std::mt19937_64 rng(4242);
  const GroupDescriptor gs[] = {{GroupKind::heisenberg, 3, 1, 2},
                                {GroupKind::heisenberg, 3, 2, 1},
                                {GroupKind::engel4, 5, 1, 2},
                                {GroupKind::g52, 3, 1, 2},
                                {GroupKind::abelian, 3, 2, 2}};
  for (const auto& g : gs) {
    int n = g.level;
    for (const auto& xi : enumerate_irreps(g, n)) {
      IrrepEvaluator ev(xi, n);
      for (int s = 0; s < 3; ++s) {
        GroupElement x = random_elem(g, rng);
        std::vector<std::tuple<int64_t, int64_t, int64_t>> want, got;
        for_each_nonzero(xi, x, [&](int64_t h, int64_t hp, int64_t num) {
          want.emplace_back(h, hp, num);
        });
        std::vector<int64_t> c(g.dim());
        for (int j = 0; j < g.dim(); ++j) c[j] = x.value(j);
        ev.visit(c.data(), [&](int64_t h, int64_t hp, int64_t num) {
          got.emplace_back(h, hp, num);
        });
        REQUIRE(want == got);
      }
    }
  }
}

TEST_CASE("dual tree export") {
  GroupDescriptor z3{GroupKind::abelian, 3, 1, 3};

  SUBCASE("abelian depth 1") {
    std::string dot = export_tree(z3, 1, "dot");
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("\"1/3\" [label=\"1/3 | 1 | 3\"]") != std::string::npos);
    CHECK(dot.find("\"2/3\" [label=\"2/3 | 1 | 3\"]") != std::string::npos);
    CHECK(dot.find("\"0/1\" -> \"1/3\"") != std::string::npos);
    CHECK(dot.find("\"0/1\" -> \"2/3\"") != std::string::npos);
    // exactly 2 edges
    size_t edges = 0, pos = 0;
    while ((pos = dot.find("->", pos)) != std::string::npos) ++edges, ++pos;
    CHECK(edges == 2);
  }

  SUBCASE("abelian depth 2: 2 + 6 nodes below the root") {
    std::string json = export_tree(z3, 2, "json");
    size_t nodes = 0, pos = 0;
    while ((pos = json.find("\"id\"", pos)) != std::string::npos) ++nodes, ++pos;
    CHECK(nodes == 9);  // root + 2 + 6
    size_t edges = 0;
    pos = 0;
    while ((pos = json.find("\"from\"", pos)) != std::string::npos) ++edges, ++pos;
    CHECK(edges == 8);
    // each level-1 class has exactly 3 children (its preimages under mult by p)
    for (const char* par : {"\"from\":\"1/3\"", "\"from\":\"2/3\""}) {
      size_t cnt = 0;
      pos = 0;
      while ((pos = json.find(par, pos)) != std::string::npos) ++cnt, ++pos;
      CHECK(cnt == 3);
    }
  }

  SUBCASE("heisenberg depth 1: 26 nonroot tuples annotated by class") {
    GroupDescriptor h{GroupKind::heisenberg, 3, 1, 2};
    std::string dot = export_tree(h, 1, "dot");
    size_t labels = 0, pos = 0;
    while ((pos = dot.find("[label=", pos)) != std::string::npos) ++labels, ++pos;
    CHECK(labels == 27);  // root + 26
    // a tuple lying over the induced class shows dim 3, norm 3
    CHECK(dot.find("\"1/3,0/1,1/3\" [label=\"1/3,0/1,1/3 | 3 | 3\"]") != std::string::npos);
    // a character tuple shows dim 1
    CHECK(dot.find("\"1/3,0/1,0/1\" [label=\"1/3,0/1,0/1 | 1 | 3\"]") != std::string::npos);
  }

  SUBCASE("engel4 nodes are the canonical irreps") {
    GroupDescriptor e{GroupKind::engel4, 5, 1, 1};
    std::string json = export_tree(e, 1, "json");
    size_t nodes = 0, pos = 0;
    while ((pos = json.find("\"id\"", pos)) != std::string::npos) ++nodes, ++pos;
    CHECK(nodes == 49);
  }

  CHECK_THROWS_AS((void)export_tree(z3, 0, "dot"), std::invalid_argument);
  CHECK_THROWS_AS((void)export_tree(z3, 1, "yaml"), std::invalid_argument);
}
