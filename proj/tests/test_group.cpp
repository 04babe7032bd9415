#include <doctest.h>

#include <random>
#include <vector>

#include "ultraharm/group.hpp"

using namespace ultraharm;

namespace {

// Independent upper-unitriangular matrix models, used only as oracles here.
// Entries are residues mod p^N; matrix product mod p^N must reproduce the
// polynomial group law exactly.
using Mat = std::vector<std::vector<int64_t>>;

Mat matmul(const Mat& A, const Mat& B, int64_t mod) {
  size_t n = A.size();
  Mat C(n, std::vector<int64_t>(n, 0));
  for (size_t i = 0; i < n; ++i)
    for (size_t k = 0; k < n; ++k)
      for (size_t j = 0; j < n; ++j)
        C[i][j] = mod_floor(C[i][j] + A[i][k] * B[k][j], mod);
  return C;
}

Mat heis_matrix(const GroupElement& x, int64_t mod) {
  return {{1, x.value(0), x.value(2)}, {0, 1, x.value(1)}, {0, 0, 1}};
}

Mat engel_matrix(const GroupElement& x, int64_t mod) {
  int64_t h = half_mod(x.descriptor().p, x.descriptor().level);
  int64_t x1 = x.value(0);
  return {{1, x1, mod_floor(h * x1 % mod * x1, mod), x.value(3)},
          {0, 1, x1, x.value(2)},
          {0, 0, 1, x.value(1)},
          {0, 0, 0, 1}};
}

// G_{5,2} embeds as a pair of Heisenberg triples sharing the first coordinate.
std::pair<Mat, Mat> g52_matrices(const GroupElement& x, int64_t mod) {
  Mat m1 = {{1, x.value(0), x.value(3)}, {0, 1, x.value(1)}, {0, 0, 1}};
  Mat m2 = {{1, x.value(0), x.value(4)}, {0, 1, x.value(2)}, {0, 0, 1}};
  return {m1, m2};
}

GroupElement random_element(const GroupDescriptor& g, std::mt19937_64& rng) {
  std::vector<int64_t> vals(g.dim());
  for (auto& v : vals) v = static_cast<int64_t>(rng() % g.quotient_size());
  return GroupElement::from_values(g, vals);
}

}  // namespace

TEST_CASE("frozen products and inverses") {
  GroupDescriptor h1{GroupKind::heisenberg, 3, 1, 1};
  auto a = GroupElement::from_values(h1, {1, 0, 0});
  auto b = GroupElement::from_values(h1, {0, 1, 0});
  CHECK(multiply(a, b) == GroupElement::from_values(h1, {1, 1, 1}));
  CHECK(multiply(b, a) == GroupElement::from_values(h1, {1, 1, 0}));
  auto c = GroupElement::from_values(h1, {1, 1, 0});
  CHECK(inverse(c) == GroupElement::from_values(h1, {2, 2, 1}));
  CHECK(multiply(c, inverse(c)) == identity(h1));

  GroupDescriptor g52{GroupKind::g52, 3, 1, 1};
  auto u = GroupElement::from_values(g52, {1, 0, 1, 0, 0});
  auto v = GroupElement::from_values(g52, {0, 0, 1, 0, 0});
  CHECK(multiply(u, v) == GroupElement::from_values(g52, {1, 0, 2, 0, 1}));
}

TEST_CASE("norms: max over coordinates, Vilenkin power, sub-norm") {
  GroupDescriptor h1{GroupKind::heisenberg, 3, 1, 3};
  auto x = GroupElement::from_values(h1, {0, 3, 9});
  CHECK(group_norm(x) == doctest::Approx(1.0 / 3.0));
  CHECK(vilenkin_norm(x) == doctest::Approx(1.0 / 27.0));
  CHECK(sub_norm(x) == doctest::Approx(1.0 / 3.0));        // first 2 coords: 0, 3
  auto y = GroupElement::from_values(h1, {0, 0, 9});
  CHECK(sub_norm(y) == 0.0);
  CHECK(group_norm(y) == doctest::Approx(1.0 / 9.0));
  CHECK(group_norm(identity(h1)) == 0.0);
  CHECK(vilenkin_norm(identity(h1)) == 0.0);
}

TEST_CASE("matrix oracle: heisenberg law equals 3x3 unitriangular product") {
  GroupDescriptor g{GroupKind::heisenberg, 3, 1, 2};
  int64_t mod = ipow(3, 2);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 500; ++t) {
    auto x = random_element(g, rng), y = random_element(g, rng);
    auto z = multiply(x, y);
    auto M = matmul(heis_matrix(x, mod), heis_matrix(y, mod), mod);
    CHECK(M[0][1] == z.value(0));
    CHECK(M[1][2] == z.value(1));
    CHECK(M[0][2] == z.value(2));
  }
}

TEST_CASE("matrix oracle: engel4 law equals 4x4 unitriangular product") {
  GroupDescriptor g{GroupKind::engel4, 5, 1, 2};
  int64_t mod = ipow(5, 2);
  std::mt19937_64 rng(12);
  for (int t = 0; t < 500; ++t) {
    auto x = random_element(g, rng), y = random_element(g, rng);
    auto z = multiply(x, y);
    auto M = matmul(engel_matrix(x, mod), engel_matrix(y, mod), mod);
    CHECK(M[0][1] == z.value(0));
    CHECK(M[2][3] == z.value(1));
    CHECK(M[1][3] == z.value(2));
    CHECK(M[0][3] == z.value(3));
    // consistency of the derived entry (0,2) = half*(x1+y1)^2
    int64_t s = mod_floor(x.value(0) + y.value(0), mod);
    CHECK(M[0][2] == mod_floor(half_mod(5, 2) * s % mod * s, mod));
  }
}

TEST_CASE("matrix oracle: g52 law equals paired heisenberg triples") {
  GroupDescriptor g{GroupKind::g52, 3, 1, 2};
  int64_t mod = ipow(3, 2);
  std::mt19937_64 rng(13);
  for (int t = 0; t < 500; ++t) {
    auto x = random_element(g, rng), y = random_element(g, rng);
    auto z = multiply(x, y);
    auto [x1m, x2m] = g52_matrices(x, mod);
    auto [y1m, y2m] = g52_matrices(y, mod);
    auto M1 = matmul(x1m, y1m, mod);
    auto M2 = matmul(x2m, y2m, mod);
    CHECK(M1[0][1] == z.value(0));
    CHECK(M1[1][2] == z.value(1));
    CHECK(M2[1][2] == z.value(2));
    CHECK(M1[0][2] == z.value(3));
    CHECK(M2[0][2] == z.value(4));
  }
}

TEST_CASE("associativity: exhaustive at level 1, randomized at level 2") {
  for (GroupKind kind : {GroupKind::abelian, GroupKind::heisenberg, GroupKind::engel4, GroupKind::g52}) {
    int64_t p = (kind == GroupKind::engel4) ? 5 : 3;
    GroupDescriptor g1{kind, p, 1, 1};
    auto elems = enumerate_quotient(g1);
    // full triple loop is too big for p=5 dim 4; sample a dense subset there
    size_t stride = elems.size() > 200 ? 7 : 1;
    for (size_t i = 0; i < elems.size(); i += stride)
      for (size_t j = 0; j < elems.size(); j += stride)
        for (size_t k = 0; k < elems.size(); k += stride) {
          REQUIRE(multiply(multiply(elems[i], elems[j]), elems[k]) ==
                  multiply(elems[i], multiply(elems[j], elems[k])));
        }

    GroupDescriptor g2{kind, p, 1, 2};
    std::mt19937_64 rng(17);
    for (int t = 0; t < 10000; ++t) {
      auto x = random_element(g2, rng), y = random_element(g2, rng), z = random_element(g2, rng);
      REQUIRE(multiply(multiply(x, y), z) == multiply(x, multiply(y, z)));
      REQUIRE(multiply(x, inverse(x)) == identity(g2));
      REQUIRE(multiply(inverse(x), x) == identity(g2));
    }
  }
}

TEST_CASE("ultrametric triangle inequality and filtration closure") {
  GroupDescriptor g{GroupKind::g52, 3, 1, 2};
  std::mt19937_64 rng(19);
  for (int t = 0; t < 2000; ++t) {
    auto x = random_element(g, rng), y = random_element(g, rng);
    double nx = group_norm(x), ny = group_norm(y);
    CHECK(group_norm(multiply(x, y)) <= std::max(nx, ny) + 1e-15);
    CHECK(group_norm(inverse(x)) == doctest::Approx(nx));
  }
  // G_1 is a subgroup: products of elements with all coords in pZ_p stay there
  for (int t = 0; t < 500; ++t) {
    std::vector<int64_t> a(5), b(5);
    for (auto& v : a) v = 3 * static_cast<int64_t>(rng() % 3);
    for (auto& v : b) v = 3 * static_cast<int64_t>(rng() % 3);
    auto x = GroupElement::from_values(g, a), y = GroupElement::from_values(g, b);
    CHECK(group_norm(multiply(x, y)) <= 1.0 / 3.0 + 1e-15);
  }
}

TEST_CASE("rank/unrank bijection and translation bijectivity") {
  GroupDescriptor g{GroupKind::heisenberg, 3, 1, 2};
  auto elems = enumerate_quotient(g);
  REQUIRE(static_cast<int64_t>(elems.size()) == g.quotient_size());
  CHECK(rank_of(identity(g)) == 0);
  for (int64_t r = 0; r < g.quotient_size(); ++r) CHECK(rank_of(elems[r]) == r);

  // left translation by a fixed element permutes the quotient
  auto a = GroupElement::from_values(g, {1, 2, 5});
  std::vector<bool> seen(elems.size(), false);
  for (const auto& x : elems) {
    int64_t r = rank_of(multiply(a, x));
    CHECK(!seen[r]);
    seen[r] = true;
  }
}

TEST_CASE("descriptor validation rejects bad parameters") {
  GroupDescriptor bad1{GroupKind::engel4, 3, 1, 1};
  CHECK_THROWS_AS(bad1.validate(), std::invalid_argument);
  GroupDescriptor bad2{GroupKind::heisenberg, 2, 1, 1};
  CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
  GroupDescriptor bad3{GroupKind::abelian, 9, 1, 1};
  CHECK_THROWS_AS(bad3.validate(), std::invalid_argument);
  GroupDescriptor ok{GroupKind::g52, 3, 1, 2};
  CHECK_NOTHROW(ok.validate());
}
