#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "orbitlab/error.hpp"
#include "orbitlab/maps.hpp"
#include "orbitlab/metric.hpp"

using namespace orbitlab;

namespace {

Space space_of(const char* json) {
  return make_space(nlohmann::json::parse(json).get<SpaceSpec>());
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

const char* kCatalog[] = {
    R"({"name":"euclidean","dim":3})",
    R"({"name":"integer-lattice","dim":2})",
    R"({"name":"circle"})",
    R"({"name":"poincare-disk"})",
    R"({"name":"polydisc","dim":2})",
    R"({"name":"half-line"})",
    R"({"name":"product","params":{"factors":[{"name":"circle"},{"name":"euclidean","dim":1}]}})",
};

}  // namespace

TEST_CASE("make_space examples") {
  const Space e2 = space_of(R"({"name":"euclidean","dim":2})");
  CHECK(e2.distance(e2.point({0, 0}), e2.point({3, 4})) == doctest::Approx(5.0).epsilon(1e-15));

  const Space z1 = space_of(R"({"name":"integer-lattice","dim":1})");
  CHECK(z1.distance(z1.point({0}), z1.point({7})) == 7.0);

  const Space d = space_of(R"({"name":"poincare-disk"})");
  const double w = d.distance(d.point({0, 0}), d.point({0.5, 0}));
  CHECK(std::abs(w - oracle::poincare(0.0, 0.5)) <= 1e-15);
  CHECK(std::abs(w - 0.5 * std::log(3.0)) <= 1e-15);
}

TEST_CASE("make_space errors") {
  CHECK(code_of([] { space_of(R"({"name":"klein-bottle"})"); }) == Errc::UnknownSpace);
  CHECK(code_of([] { space_of(R"({"name":"euclidean","dim":0})"); }) == Errc::BadParameter);
  CHECK(code_of([] { space_of(R"({"name":"polydisc","dim":-2})"); }) == Errc::BadParameter);
}

TEST_CASE("point invariants") {
  const Space e2 = space_of(R"({"name":"euclidean","dim":2})");
  CHECK(code_of([&] { e2.point({1.0}); }) == Errc::BadPoint);
  CHECK(code_of([&] { e2.point({1.0, NAN}); }) == Errc::BadPoint);
  const Space d = space_of(R"({"name":"poincare-disk"})");
  CHECK(code_of([&] { d.point({0.6, 0.8}); }) == Errc::BadPoint);
  CHECK_NOTHROW(d.point({0.6, 0.79}));
  const Space h = space_of(R"({"name":"half-line"})");
  CHECK(code_of([&] { h.point({-1.0}); }) == Errc::BadPoint);
  CHECK(code_of([&] { e2.require(d.point({0.0, 0.0})); }) == Errc::SpaceMismatch);
}

TEST_CASE("covered examples") {
  const Space line = space_of(R"({"name":"euclidean","dim":1})");
  const BallCover cover{line, {line.point({0.0})}, 0.5};
  CHECK(covered(line.point({0.4}), cover));
  CHECK_FALSE(covered(line.point({0.6}), cover));
  CHECK_FALSE(covered(line.point({0.5}), cover));  // open ball
  CHECK(covered(line.point({0.0}), BallCover{line, {line.point({0.0})}, 1e-300}));

  const Space c = space_of(R"({"name":"circle"})");
  CHECK(code_of([&] { covered(c.point({1.0, 0.0}), cover); }) == Errc::SpaceMismatch);
}

TEST_CASE("epsilon_net examples") {
  const Space line = space_of(R"({"name":"euclidean","dim":1})");
  std::vector<Point> a{line.point({0}), line.point({0.1}), line.point({0.2})};
  CHECK(epsilon_net(line, a, 0.5).centers.size() == 1);
  CHECK(epsilon_net(line, a, 0.5).centers[0] == a[0]);
  std::vector<Point> b{line.point({0}), line.point({1}), line.point({2})};
  CHECK(epsilon_net(line, b, 0.5).centers.size() == 3);
  CHECK(code_of([&] { epsilon_net(line, std::vector<Point>{}, 0.5); }) == Errc::EmptyInput);
  CHECK(code_of([&] { epsilon_net(line, a, 0.0); }) == Errc::BadParameter);
}

TEST_CASE("epsilon_net on an irrational rotation orbit") {
  const Space c = space_of(R"({"name":"circle"})");
  const DynamicMap f = make_map(
      nlohmann::json::parse(R"({"name":"rotation","params":{"turns":0.6180339887498949}})")
          .get<MapSpec>(),
      c);
  std::vector<Point> pts{c.point({1.0, 0.0})};
  for (int k = 0; k < 999; ++k) pts.push_back(f(pts.back()));
  const double eps = 0.1;
  const BallCover net = epsilon_net(c, pts, eps);
  CHECK(net.centers.size() <= static_cast<std::size_t>(std::ceil(2 * std::numbers::pi / eps)) + 1);
  // Every input covered exactly, centers eps-separated.
  for (const Point& p : pts) CHECK(covered(p, net));
  for (std::size_t i = 0; i < net.centers.size(); ++i)
    for (std::size_t j = i + 1; j < net.centers.size(); ++j)
      CHECK(c.distance(net.centers[i], net.centers[j]) >= eps - kTolMetric);
}

TEST_CASE("epsilon_net covers and separates on every catalog space") {
  for (const char* spec : kCatalog) {
    CAPTURE(spec);
    const Space s = space_of(spec);
    const auto pts = s.sample(7, 300);
    for (double eps : {0.3, 1.0, 2.5}) {
      const BallCover net = epsilon_net(s, pts, eps);
      for (const Point& p : pts) CHECK(covered(p, net));
      for (std::size_t i = 0; i < net.centers.size(); ++i)
        for (std::size_t j = i + 1; j < net.centers.size(); ++j)
          CHECK(s.distance(net.centers[i], net.centers[j]) >= eps - kTolMetric);
    }
  }
}

TEST_CASE("metric axioms on 1000 triples for every catalog space") {
  for (const char* spec : kCatalog) {
    CAPTURE(spec);
    const Space s = space_of(spec);
    for (std::uint64_t seed : {0u, 1u, 2u}) {
      const MetricAudit a = audit_metric_axioms(s, 1000, seed);
      CHECK(a.passed);
      CHECK(a.max_triangle_defect <= kTolMetric);
      CHECK(a.max_symmetry_defect <= kTolMetric);
      CHECK(a.positivity_violations == 0);
    }
  }
}

TEST_CASE("Poincare distance invariant under disk automorphisms") {
  const Space d = space_of(R"({"name":"poincare-disk"})");
  std::mt19937_64 rng(11);
  const auto pts = d.sample(3, 300);
  for (std::size_t i = 0; i < 100; ++i) {
    const oracle::C a{pts[3 * i][0], pts[3 * i][1]};
    const oracle::C z{pts[3 * i + 1][0], pts[3 * i + 1][1]};
    const oracle::C w{pts[3 * i + 2][0], pts[3 * i + 2][1]};
    const oracle::C pz = oracle::phi(a, z), pw = oracle::phi(a, w);
    const double before = d.distance(std::vector<double>{z.real(), z.imag()},
                                     std::vector<double>{w.real(), w.imag()});
    const double after = d.distance(std::vector<double>{pz.real(), pz.imag()},
                                    std::vector<double>{pw.real(), pw.imag()});
    CHECK(std::abs(before - after) <= 1e-9);
    CHECK(std::abs(before - oracle::poincare(z, w)) <= 1e-9);
  }
}

TEST_CASE("polydisc and product distances") {
  const Space p = space_of(R"({"name":"polydisc","dim":2})");
  const double v = p.distance(p.point({0, 0, 0, 0}), p.point({0.5, 0, 0.3, 0}));
  CHECK(std::abs(v - std::max(oracle::poincare(0.0, 0.5), oracle::poincare(0.0, 0.3))) <= 1e-15);
  const Space lat = space_of(R"({"name":"integer-lattice","dim":2})");
  CHECK(lat.distance(lat.point({1, -2}), lat.point({-2, 2})) == 7.0);
  const Space c = space_of(R"({"name":"circle"})");
  CHECK(c.distance(c.point({1, 0}), c.point({-1, 0})) == doctest::Approx(2.0));
}

TEST_CASE("sample_in_ball stays in the open ball") {
  for (const char* spec : kCatalog) {
    CAPTURE(spec);
    const Space s = space_of(spec);
    std::mt19937_64 rng(5);
    const Point c = s.base_point();
    for (int i = 0; i < 200; ++i) {
      const Point q = sample_in_ball(s, c, 0.7, rng);
      CHECK(s.contains(q));
      CHECK(s.distance(q, c) < 0.7);
    }
  }
}

TEST_CASE("SpaceSpec json round trip and field errors") {
  SpaceSpec spec = nlohmann::json::parse(R"({"name":"polydisc","dim":3})").get<SpaceSpec>();
  nlohmann::json back = spec;
  CHECK(back["name"] == "polydisc");
  CHECK(back["dim"] == 3);
  CHECK(code_of([] { nlohmann::json::parse(R"({"dim":3})").get<SpaceSpec>(); }) == Errc::ConfigError);
  CHECK(code_of([] { nlohmann::json::parse(R"({"name":"circle","dim":"x"})").get<SpaceSpec>(); }) ==
        Errc::ConfigError);
}

TEST_CASE("default radii respect properness") {
  const Space d = space_of(R"({"name":"poincare-disk"})");
  REQUIRE(d.properness_radius());
  const auto r = default_radii(d);
  REQUIRE_FALSE(r.empty());
  CHECK(r.back() <= *d.properness_radius());
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] > r[i - 1]);
  const Space e = space_of(R"({"name":"euclidean","dim":1})");
  CHECK(default_radii(e).back() == 64.0);
}
