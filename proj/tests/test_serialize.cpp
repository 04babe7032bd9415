#include <doctest.h>

#include <random>

#include "ultraharm/serialize.hpp"

using namespace ultraharm;

TEST_CASE("double formatting round-trips") {
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(-2.5) == "-2.5");
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    double v = (static_cast<double>(rng()) / 1e19 - 0.9) * std::pow(10.0, int(rng() % 9) - 4);
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("grid function round trip") {
  std::mt19937_64 rng(5);
  GroupDescriptor g{GroupKind::heisenberg, 3, 1, 1};
  GridFunction f = make_grid(g, 1);
  for (int64_t r = 0; r < f.values.size(); ++r)
    f.values[r] = complex_t(static_cast<double>(rng() % 2000) / 777.0 - 1.0,
                            static_cast<double>(rng() % 2000) / 777.0 - 1.0);
  std::string doc = to_json(f);
  GridFunction back = grid_from_json(nlohmann::json::parse(doc));
  CHECK(back.group.kind == g.kind);
  CHECK(back.group.p == 3);
  CHECK(back.level == 1);
  REQUIRE(back.values.size() == f.values.size());
  for (int64_t r = 0; r < f.values.size(); ++r) CHECK(back.values[r] == f.values[r]);
  // determinism: serialize(parse(serialize)) is byte-identical
  CHECK(to_json(back) == doc);
}

TEST_CASE("symbol round trip") {
  GroupDescriptor g{GroupKind::abelian, 3, 1, 2};
  Symbol s = vt_symbol(g, 1.0, 2);
  std::string doc = to_json(s);
  Symbol back = symbol_from_json(nlohmann::json::parse(doc));
  for (const Irrep& xi : s.irreps) {
    CHECK(back.at(xi.id) == s.at(xi.id));
  }
  CHECK(to_json(back) == doc);

  // nonabelian with genuine matrix blocks
  GroupDescriptor h{GroupKind::heisenberg, 3, 1, 1};
  Symbol hs = sub_laplacian_symbol(h, 1.0, 1);
  Symbol hb = symbol_from_json(nlohmann::json::parse(to_json(hs)));
  for (const Irrep& xi : hs.irreps) CHECK(hb.at(xi.id) == hs.at(xi.id));
}

TEST_CASE("radial profile round trip with decimal norm keys") {
  RadialProfile prof;
  prof.phi[1.0] = complex_t(1.0, 0.0);
  prof.phi[3.0] = complex_t(-1.0, 0.0);
  prof.phi[9.0] = complex_t(0.0, 0.5);
  std::string doc = to_json(prof);
  CHECK(doc == "{\"1\":[1,0],\"3\":[-1,0],\"9\":[0,0.5]}");
  RadialProfile back = profile_from_json(nlohmann::json::parse(doc));
  REQUIRE(back.phi.size() == 3);
  CHECK(back.phi.at(3.0) == complex_t(-1.0, 0.0));
  CHECK(back.phi.at(9.0) == complex_t(0.0, 0.5));
}

TEST_CASE("schema errors are reported") {
  CHECK_THROWS_AS(grid_from_json(nlohmann::json::parse("{}")), std::runtime_error);
  CHECK_THROWS_AS(grid_from_json(nlohmann::json::parse(
                      R"({"group":{"kind":"abelian","p":3,"d":1,"level":1},"level":1,"values":[[0,0]]})")),
                  std::runtime_error);
  CHECK_THROWS(descriptor_from_json(nlohmann::json::parse(
      R"({"kind":"dodecahedral","p":3,"d":1,"level":1})")));
  CHECK_THROWS_AS(symbol_from_json(nlohmann::json::parse(
                      R"({"group":{"kind":"abelian","p":3,"d":1,"level":1},"level":1,"entries":{"nope":[[[0,0]]]}})")),
                  std::runtime_error);
  CHECK_THROWS_AS(profile_from_json(nlohmann::json::parse(R"({"wide":[1,0]})")),
                  std::runtime_error);
  CHECK_THROWS_AS(load_grid("/nonexistent/path.json"), std::runtime_error);
  // malformed complex pair
  CHECK_THROWS_AS(grid_from_json(nlohmann::json::parse(
                      R"({"group":{"kind":"abelian","p":3,"d":1,"level":0},"level":0,"values":[[1]]})")),
                  std::runtime_error);
}

TEST_CASE("csv rows") {
  CHECK(csv_row({"a", "b", format_double(0.5)}) == "a,b,0.5\n");
  CHECK(csv_row({}) == "\n");
  // fields holding commas or quotes are quoted per RFC 4180
  CHECK(csv_row({"heisenberg:1:0/1,0/1,1/3", "x"}) == "\"heisenberg:1:0/1,0/1,1/3\",x\n");
  CHECK(csv_row({"say \"hi\""}) == "\"say \"\"hi\"\"\"\n");
}
