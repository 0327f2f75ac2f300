#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "orbitlab/error.hpp"
#include "orbitlab/maps.hpp"

using namespace orbitlab;

namespace {

Space space_of(const char* json) {
  return make_space(nlohmann::json::parse(json).get<SpaceSpec>());
}

DynamicMap map_of(const char* json, const Space& s) {
  return make_map(nlohmann::json::parse(json).get<MapSpec>(), s);
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an orbitlab::Error");
  return Errc::InternalContradiction;
}

struct Fixture {
  const char* space;
  const char* map;
};

const Fixture kCatalog[] = {
    {R"({"name":"euclidean","dim":2})", R"({"name":"identity"})"},
    {R"({"name":"euclidean","dim":1})", R"({"name":"scale","params":{"c":0.5}})"},
    {R"({"name":"euclidean","dim":2})", R"({"name":"scale","params":{"c":-1}})"},
    {R"({"name":"half-line"})", R"({"name":"scale","params":{"c":0.25}})"},
    {R"({"name":"euclidean","dim":2})", R"({"name":"affine","params":{"c":0.5,"offset":[1,-1]}})"},
    {R"({"name":"euclidean","dim":2})", R"({"name":"translation","params":{"v":[1,2]}})"},
    {R"({"name":"integer-lattice","dim":1})", R"({"name":"translation","params":{"v":1}})"},
    {R"({"name":"circle"})", R"({"name":"rotation","params":{"turns":0.2}})"},
    {R"({"name":"circle"})", R"({"name":"rotation","params":{"theta":1.0}})"},
    {R"({"name":"poincare-disk"})", R"({"name":"mobius-elliptic","params":{"turns":0.2,"a":[0.3,0.1]}})"},
    {R"({"name":"poincare-disk"})", R"({"name":"mobius-hyperbolic","params":{"a":0.5}})"},
    {R"({"name":"poincare-disk"})", R"({"name":"mobius-parabolic"})"},
    {R"({"name":"poincare-disk"})", R"({"name":"blaschke","params":{"zeros":[0,0]}})"},
    {R"({"name":"poincare-disk"})", R"({"name":"blaschke","params":{"zeros":[0,0.3]}})"},
    {R"({"name":"poincare-disk"})", R"({"name":"blaschke","params":{"zeros":[[0.2,-0.4]],"theta":0.7}})"},
    {R"({"name":"polydisc","dim":2})",
     R"({"name":"product","params":{"factors":[{"name":"mobius-hyperbolic","params":{"a":0.2}},{"name":"blaschke","params":{"zeros":[0,0.5]}}]}})"},
    {R"({"name":"product","params":{"factors":[{"name":"circle"},{"name":"euclidean","dim":1}]}})",
     R"({"name":"product","params":{"factors":[{"name":"rotation","params":{"turns":0.2}},{"name":"scale","params":{"c":0.5}}]}})"},
};

}  // namespace

TEST_CASE("make_map examples") {
  const Space line = space_of(R"({"name":"euclidean","dim":1})");
  const DynamicMap half = map_of(R"({"name":"scale","params":{"c":0.5}})", line);
  CHECK(half(line.point({2.0})) == line.point({1.0}));

  const Space c = space_of(R"({"name":"circle"})");
  const DynamicMap quarter = map_of(R"({"name":"rotation","params":{"theta":1.5707963267948966}})", c);
  for (const Point& p : c.sample(1, 50)) {
    const Point q = iterate(quarter, p, 4);
    CHECK(std::abs(q[0] - p[0]) <= 1e-12);
    CHECK(std::abs(q[1] - p[1]) <= 1e-12);
  }

  const Space d = space_of(R"({"name":"poincare-disk"})");
  const DynamicMap hyp = map_of(R"({"name":"mobius-hyperbolic","params":{"a":0.5}})", d);
  const Point img = hyp(d.point({0.25, -0.1}));
  const oracle::C expect = oracle::phi_inv(0.5, {0.25, -0.1});
  CHECK(std::abs(img[0] - expect.real()) <= 1e-15);
  CHECK(std::abs(img[1] - expect.imag()) <= 1e-15);
  const AuditReport a = audit_nonexpansive(hyp, 1000, 0);
  CHECK(a.passed);
  CHECK(std::abs(a.max_defect) <= kTolMetric);
  CHECK(std::abs(a.min_defect) <= kTolMetric);
}

TEST_CASE("make_map errors") {
  const Space line = space_of(R"({"name":"euclidean","dim":1})");
  const Space c = space_of(R"({"name":"circle"})");
  CHECK(code_of([&] { map_of(R"({"name":"tent"})", line); }) == Errc::UnknownMap);
  CHECK(code_of([&] { map_of(R"({"name":"rotation","params":{"turns":0.1}})", line); }) ==
        Errc::IncompatibleSpace);
  CHECK(code_of([&] { map_of(R"({"name":"scale","params":{"c":0.5}})", c); }) ==
        Errc::IncompatibleSpace);
  CHECK(code_of([&] { map_of(R"({"name":"affine","params":{"c":2}})", line); }) ==
        Errc::NotNonexpansive);
  CHECK(code_of([&] { map_of(R"({"name":"scale","params":{"c":3}})", line); }) ==
        Errc::NotNonexpansive);
  CHECK(code_of([&] { map_of(R"({"name":"scale"})", line); }) == Errc::BadParameter);
  const Space d = space_of(R"({"name":"poincare-disk"})");
  CHECK(code_of([&] { map_of(R"({"name":"mobius-hyperbolic","params":{"a":1.0}})", d); }) ==
        Errc::BadParameter);
  const Space z = space_of(R"({"name":"integer-lattice","dim":1})");
  CHECK(code_of([&] { map_of(R"({"name":"translation","params":{"v":0.5}})", z); }) ==
        Errc::BadParameter);
}

TEST_CASE("iterate examples") {
  const Space line = space_of(R"({"name":"euclidean","dim":1})");
  const DynamicMap half = map_of(R"({"name":"scale","params":{"c":0.5}})", line);
  CHECK(iterate(half, line.point({8.0}), 3) == line.point({1.0}));
  const Point p = line.point({-3.25});
  CHECK(iterate(half, p, 0) == p);

  const Space c = space_of(R"({"name":"circle"})");
  const double turns = static_cast<double>(oracle::kGoldenTurns);
  nlohmann::json spec{{"name", "rotation"}, {"params", {{"turns", turns}}}};
  const DynamicMap g = make_map(spec.get<MapSpec>(), c);
  const Point q = iterate(g, c.point({1.0, 0.0}), 1000);
  // Angle 1000 theta mod 2 pi from turn arithmetic in long double.
  long double t = 1000.0L * static_cast<long double>(turns);
  t -= std::floor(t);
  const long double ang = 2.0L * std::numbers::pi_v<long double> * t;
  CHECK(std::abs(q[0] - static_cast<double>(std::cos(ang))) <= 1e-10);
  CHECK(std::abs(q[1] - static_cast<double>(std::sin(ang))) <= 1e-10);
}

TEST_CASE("iteration semigroup law is bit-for-bit") {
  for (const Fixture& f : kCatalog) {
    CAPTURE(f.map);
    const Space s = space_of(f.space);
    const DynamicMap m = map_of(f.map, s);
    for (const Point& p : s.sample(3, 5)) {
      for (std::size_t j : {0u, 1u, 7u}) {
        for (std::size_t k : {0u, 3u, 11u}) {
          try {
            CHECK(iterate(m, p, j + k) == iterate(m, iterate(m, p, j), k));
          } catch (const Error& e) {
            CHECK(e.code() == Errc::NumericEscape);
          }
        }
      }
    }
  }
}

TEST_CASE("audit_nonexpansive examples") {
  const Space line = space_of(R"({"name":"euclidean","dim":1})");
  const DynamicMap half = map_of(R"({"name":"scale","params":{"c":0.5}})", line);
  const AuditReport a = audit_nonexpansive(half, 500, 1);
  CHECK(a.passed);
  REQUIRE(a.witness_a);
  REQUIRE(a.witness_b);
  const double d = line.distance(*a.witness_a, *a.witness_b);
  CHECK(a.max_defect == doctest::Approx(-d / 2).epsilon(1e-12));

  const Space disk = space_of(R"({"name":"poincare-disk"})");
  const DynamicMap b = map_of(R"({"name":"blaschke","params":{"zeros":[0,0.3]}})", disk);
  CHECK(audit_nonexpansive(b, 1000, 0).passed);

  // An expanding map cannot be built from the catalog, so wrap the rule.
  const DynamicMap dbl("double", line, [](std::span<const double> in, std::span<double> out) {
    out[0] = 2.0 * in[0];
  });
  const AuditReport bad = audit_nonexpansive(dbl, 200, 0);
  CHECK_FALSE(bad.passed);
  REQUIRE(bad.witness_a);
  CHECK(bad.max_defect ==
        doctest::Approx(line.distance(*bad.witness_a, *bad.witness_b)).epsilon(1e-12));
}

TEST_CASE("every catalog map passes 1e4-pair audits, seeds 0-4") {
  for (const Fixture& f : kCatalog) {
    CAPTURE(f.map);
    const Space s = space_of(f.space);
    const DynamicMap m = map_of(f.map, s);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const AuditReport a = audit_nonexpansive(m, 10'000, seed);
      CHECK(a.passed);
      CHECK(a.max_defect <= kTolMetric);
      if (m.claims_isometry()) CHECK(a.min_defect >= -kTolMetric);
    }
  }
}

TEST_CASE("images stay admissible") {
  for (const Fixture& f : kCatalog) {
    CAPTURE(f.map);
    const Space s = space_of(f.space);
    const DynamicMap m = map_of(f.map, s);
    for (const Point& p : s.sample(9, 200)) CHECK(s.contains(m(p)));
  }
}

TEST_CASE("composition of nonexpansive maps is nonexpansive") {
  const Space d = space_of(R"({"name":"poincare-disk"})");
  const DynamicMap e = map_of(R"({"name":"mobius-elliptic","params":{"turns":0.2,"a":[0.3,0.1]}})", d);
  const DynamicMap h = map_of(R"({"name":"mobius-hyperbolic","params":{"a":0.5}})", d);
  const DynamicMap b = map_of(R"({"name":"blaschke","params":{"zeros":[0,0.3]}})", d);
  for (const auto& [outer, inner] : {std::pair{e, h}, {h, b}, {b, e}, {b, b}}) {
    const DynamicMap c = compose(outer, inner);
    CHECK(audit_nonexpansive(c, 2000, 3).passed);
    const Point p = d.point({0.1, 0.2});
    CHECK(c(p) == outer(inner(p)));
  }
  const DynamicMap eh = compose(e, h);
  CHECK(eh.claims_isometry());
  CHECK_FALSE(compose(e, b).claims_isometry());

  const Space line = space_of(R"({"name":"euclidean","dim":1})");
  const DynamicMap half = map_of(R"({"name":"scale","params":{"c":0.5}})", line);
  const DynamicMap shift = map_of(R"({"name":"translation","params":{"v":3}})", line);
  CHECK(audit_nonexpansive(compose(half, shift), 2000, 0).passed);
  CHECK(code_of([&] { compose(half, e); }) == Errc::SpaceMismatch);
}

TEST_CASE("product maps act componentwise") {
  const Space pd = space_of(R"({"name":"polydisc","dim":2})");
  const DynamicMap m = map_of(
      R"({"name":"product","params":{"factors":[{"name":"mobius-hyperbolic","params":{"a":0.2}},{"name":"blaschke","params":{"zeros":[0,0.5]}}]}})",
      pd);
  const Point p = pd.point({0.1, 0.2, -0.3, 0.4});
  const Point q = m(p);
  const oracle::C z1 = oracle::phi_inv(0.2, {0.1, 0.2});
  const oracle::C w{-0.3, 0.4};
  const oracle::C z2 = w * oracle::phi(0.5, w);
  CHECK(std::abs(q[0] - z1.real()) <= 1e-15);
  CHECK(std::abs(q[1] - z1.imag()) <= 1e-15);
  CHECK(std::abs(q[2] - z2.real()) <= 1e-15);
  CHECK(std::abs(q[3] - z2.imag()) <= 1e-15);
  CHECK(m.factors().size() == 2);
  CHECK_FALSE(m.claims_isometry());
  CHECK(code_of([&] { map_of(R"({"name":"product","params":{"factors":[{"name":"identity"}]}})", pd); }) ==
        Errc::BadParameter);
}

TEST_CASE("ball surjectivity: identity") {
  const Space e = space_of(R"({"name":"euclidean","dim":2})");
  const DynamicMap id = map_of(R"({"name":"identity"})", e);
  const AuditReport r = audit_ball_surjectivity(id, e.point({1.0, -2.0}), 3.0, 20, 0);
  CHECK(r.passed);
  CHECK(r.max_defect == 0.0);
}

TEST_CASE("ball surjectivity: rotation, checked against the analytic inverse") {
  const Space c = space_of(R"({"name":"circle"})");
  const double theta = 0.9;
  nlohmann::json spec{{"name", "rotation"}, {"params", {{"theta", theta}}}};
  const DynamicMap rot = make_map(spec.get<MapSpec>(), c);
  const Point center = c.point({std::cos(0.3), std::sin(0.3)});
  const AuditReport r = audit_ball_surjectivity(rot, center, 0.5, 30, 4);
  CHECK(r.passed);
  CHECK(r.max_defect <= kTolSolve);

  // Oracle: rotating a probe back by theta lands inside B(center, 0.5).
  std::mt19937_64 rng(4);
  const Point img = rot(center);
  for (int i = 0; i < 200; ++i) {
    const Point q = sample_in_ball(c, img, 0.5, rng);
    const double a = std::atan2(q[1], q[0]) - theta;
    const Point pre = c.wrap({std::cos(a), std::sin(a)});
    CHECK(c.distance(pre, center) < 0.5 + 1e-12);
  }
}

TEST_CASE("ball surjectivity: disk automorphism, checked against the closed-form inverse") {
  const Space d = space_of(R"({"name":"poincare-disk"})");
  const DynamicMap phi = map_of(R"({"name":"mobius-hyperbolic","params":{"a":-0.3}})", d);
  const Point center = d.point({0.0, 0.0});
  const AuditReport r = audit_ball_surjectivity(phi, center, 1.0, 20, 2);
  CHECK(r.passed);

  std::mt19937_64 rng(2);
  const Point img = phi(center);
  for (int i = 0; i < 200; ++i) {
    const Point q = sample_in_ball(d, img, 1.0, rng);
    const oracle::C pre = oracle::phi_inv(0.3, {q[0], q[1]});
    CHECK(oracle::poincare(pre, 0.0) < 1.0 + 1e-12);
  }
}

TEST_CASE("ball surjectivity preconditions") {
  const Space line = space_of(R"({"name":"euclidean","dim":1})");
  const DynamicMap half = map_of(R"({"name":"scale","params":{"c":0.5}})", line);
  CHECK(code_of([&] { audit_ball_surjectivity(half, line.point({0.0}), 1.0, 5, 0); }) ==
        Errc::PreconditionUnmet);
  const Space d = space_of(R"({"name":"poincare-disk"})");
  const DynamicMap h = map_of(R"({"name":"mobius-hyperbolic","params":{"a":0.5}})", d);
  CHECK(code_of([&] { audit_ball_surjectivity(h, d.point({0.0, 0.0}), 100.0, 5, 0); }) ==
        Errc::BadParameter);
}

TEST_CASE("checked application escapes instead of producing boundary points") {
  const Space d = space_of(R"({"name":"poincare-disk"})");
  const DynamicMap h = map_of(R"({"name":"mobius-hyperbolic","params":{"a":0.5}})", d);
  CHECK(code_of([&] { iterate(h, d.point({0.0, 0.0}), 100); }) == Errc::NumericEscape);
}
