#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "orbitlab/error.hpp"
#include "orbitlab/kobayashi.hpp"

using namespace orbitlab;
using oracle::C;

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

HoloMap identity_map() {
  return {"identity", [](disk::Complex z) { return Coords{z.real(), z.imag()}; }};
}

HoloMap from_origin_map(C a) {
  return {"phi", [a](disk::Complex z) {
            const C w = oracle::phi_inv(a, z);
            return Coords{w.real(), w.imag()};
          }};
}

MapSpec spec_of(const char* json) { return nlohmann::json::parse(json).get<MapSpec>(); }

}  // namespace

TEST_CASE("poincare_distance examples") {
  CHECK(poincare_distance({0, 0}, {0, 0}) == 0.0);
  const double w = poincare_distance({0, 0}, {0.5, 0});
  CHECK(std::abs(w - 0.5 * std::log(3.0)) <= 1e-12);
  CHECK(std::abs(w - oracle::poincare(0.0, 0.5)) <= 1e-12);
  CHECK(code_of([] { poincare_distance({1.0, 0}, {0, 0}); }) == Errc::OnBoundary);
  CHECK(code_of([] { poincare_distance({0, 0}, {0.6, 0.8}); }) == Errc::OnBoundary);
  CHECK(code_of([] { poincare_distance({0, 0}, {1.0 - 1e-15, 0}); }) == Errc::OnBoundary);
  CHECK_NOTHROW(poincare_distance({0, 0}, {1.0 - 1e-12, 0}));
}

TEST_CASE("poincare_distance: symmetry, formula, invariance, triangle") {
  const Space d = space_of(R"({"name":"poincare-disk"})");
  const auto pts = d.sample(17, 30'000);
  auto dp = [](const Point& p) { return DiskPoint{p[0], p[1]}; };
  for (std::size_t i = 0; i < 100; ++i) {
    const Point &a = pts[3 * i], &z = pts[3 * i + 1], &w = pts[3 * i + 2];
    const double v = poincare_distance(dp(z), dp(w));
    CHECK(v == poincare_distance(dp(w), dp(z)));
    CHECK(std::abs(v - oracle::poincare({z[0], z[1]}, {w[0], w[1]})) <= 1e-9);
    const C pz = oracle::phi({a[0], a[1]}, {z[0], z[1]});
    const C pw = oracle::phi({a[0], a[1]}, {w[0], w[1]});
    CHECK(std::abs(poincare_distance({pz.real(), pz.imag()}, {pw.real(), pw.imag()}) - v) <= 1e-9);
  }
  double worst = -1.0;
  for (std::size_t i = 0; i < 10'000; ++i) {
    const DiskPoint a = dp(pts[3 * i]), b = dp(pts[3 * i + 1]), c = dp(pts[3 * i + 2]);
    worst = std::max(worst, poincare_distance(a, c) - poincare_distance(a, b) -
                                poincare_distance(b, c));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("chain_length examples") {
  const double L = 0.5 * std::log(3.0);
  AnalyticChain one{{ChainLink{{0, 0}, {0.5, 0}, identity_map()}}};
  CHECK(std::abs(chain_length(one) - L) <= 1e-12);

  // Second link starts where the first ends: phi_{0.5}(0) = 0.5.
  AnalyticChain two{{ChainLink{{0, 0}, {0.5, 0}, identity_map()},
                     ChainLink{{0, 0}, {0.5, 0}, from_origin_map(0.5)}}};
  CHECK(std::abs(chain_length(two) - 2 * L) <= 1e-12);
  CHECK(std::abs(chain_end(two)[0] - 0.8) <= 1e-15);  // (0.5 + 0.5) / 1.25

  CHECK(chain_length(AnalyticChain{}) == 0.0);

  AnalyticChain broken{{ChainLink{{0, 0}, {0.5, 0}, identity_map()},
                        ChainLink{{0.1, 0}, {0.5, 0}, identity_map()}}};
  CHECK(code_of([&] { chain_length(broken); }) == Errc::BrokenChain);
  CHECK(code_of([&] { chain_start(AnalyticChain{}); }) == Errc::EmptyInput);
}

TEST_CASE("kobayashi_upper_bound: disk matches Poincare") {
  const Space d = space_of(R"({"name":"poincare-disk"})");
  CHECK(std::abs(kobayashi_upper_bound("poincare-disk", d.point({0, 0}), d.point({0.5, 0})) -
                 oracle::poincare(0.0, 0.5)) <= 1e-9);
  const auto pts = d.sample(5, 200);
  for (std::size_t i = 0; i < 100; ++i) {
    const Point &a = pts[2 * i], &b = pts[2 * i + 1];
    const double k = kobayashi_upper_bound("poincare-disk", a, b);
    CHECK(std::abs(k - oracle::poincare({a[0], a[1]}, {b[0], b[1]})) <= 1e-9);
  }
}

TEST_CASE("kobayashi_upper_bound: polydisc matches the product formula") {
  const Space p = space_of(R"({"name":"polydisc","dim":2})");
  const double v = kobayashi_upper_bound("polydisc", p.point({0, 0, 0, 0}), p.point({0.5, 0, 0.3, 0}));
  CHECK(std::abs(v - std::max(oracle::poincare(0.0, 0.5), oracle::poincare(0.0, 0.3))) <= 1e-6);
  const auto pts = p.sample(8, 40);
  for (std::size_t i = 0; i < 20; ++i) {
    const Point &a = pts[2 * i], &b = pts[2 * i + 1];
    const double k = kobayashi_upper_bound("polydisc", a, b);
    const double o = oracle::polydisc({{a[0], a[1]}, {a[2], a[3]}}, {{b[0], b[1]}, {b[2], b[3]}});
    CHECK(std::abs(k - o) <= 1e-6);
    CHECK(k >= o - 1e-9);  // an upper bound
  }
}

TEST_CASE("kobayashi_search returns an admissible chain") {
  const Space p = space_of(R"({"name":"polydisc","dim":3})");
  const auto pts = p.sample(2, 10);
  for (std::size_t i = 0; i < 5; ++i) {
    const Point &a = pts[2 * i], &b = pts[2 * i + 1];
    const ChainSearchResult r = kobayashi_search("polydisc", a, b);
    REQUIRE_FALSE(r.chain.links.empty());
    CHECK(chain_length(r.chain) == r.bound);
    const Coords s = chain_start(r.chain), e = chain_end(r.chain);
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(std::abs(s[j] - a[j]) <= kTolMetric);
      CHECK(std::abs(e[j] - b[j]) <= kTolMetric);
    }
  }
}

TEST_CASE("kobayashi_upper_bound: trivial and unsupported cases") {
  const Space d = space_of(R"({"name":"poincare-disk"})");
  CHECK(kobayashi_upper_bound("poincare-disk", d.point({0.3, 0.1}), d.point({0.3, 0.1})) == 0.0);
  const Space p = space_of(R"({"name":"polydisc","dim":2})");
  CHECK(kobayashi_upper_bound("polydisc", p.point({0.1, 0, 0.2, 0}), p.point({0.1, 0, 0.2, 0})) == 0.0);
  const Space c = space_of(R"({"name":"circle"})");
  CHECK(code_of([&] { kobayashi_upper_bound("circle", c.point({1, 0}), c.point({0, 1})); }) ==
        Errc::UnsupportedSpace);
  CHECK(code_of([&] { kobayashi_upper_bound("poincare-disk", p.point({0, 0, 0, 0}), p.point({0.1, 0, 0, 0})); }) ==
        Errc::BadPoint);
}

TEST_CASE("larger budgets never raise the bound") {
  const Space p = space_of(R"({"name":"polydisc","dim":2})");
  const ChainSearchBudget budgets[] = {{1, 0, 5}, {1, 0, 50}, {2, 4, 50}, {2, 16, 100}, {2, 64, 200}, {2, 128, 400}};
  const auto pts = p.sample(31, 20);
  for (std::size_t i = 0; i < 10; ++i) {
    double prev = std::numeric_limits<double>::infinity();
    for (const ChainSearchBudget& b : budgets) {
      const double v = kobayashi_upper_bound("polydisc", pts[2 * i], pts[2 * i + 1], b);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("audit_schwarz_pick examples") {
  const AuditReport id = audit_schwarz_pick(spec_of(R"({"name":"identity"})"), 500, 0);
  CHECK(id.passed);
  CHECK(id.max_defect == 0.0);
  CHECK(id.min_defect == 0.0);

  const AuditReport sq = audit_schwarz_pick(spec_of(R"({"name":"blaschke","params":{"zeros":[0,0]}})"), 500, 0);
  CHECK(sq.passed);
  MESSAGE("z^2 max defect " << sq.max_defect << ": " << sq.note);

  const AuditReport phi = audit_schwarz_pick(spec_of(R"({"name":"mobius-hyperbolic","params":{"a":-0.3}})"), 500, 0);
  CHECK(phi.passed);
  CHECK(std::abs(phi.max_defect) <= 1e-9);
  CHECK(std::abs(phi.min_defect) <= 1e-9);

  CHECK(code_of([] { audit_schwarz_pick(spec_of(R"({"name":"rotation","params":{"turns":0.1}})"), 10, 0); }) ==
        Errc::IncompatibleSpace);
}

TEST_CASE("holomorphic catalog maps are nonexpansive DynamicMaps") {
  const Space d = space_of(R"({"name":"poincare-disk"})");
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  std::uniform_int_distribution<int> k(1, 3);
  for (int i = 0; i < 30; ++i) {
    nlohmann::json zeros = nlohmann::json::array();
    for (int j = k(rng); j > 0; --j) zeros.push_back({u(rng), u(rng)});
    nlohmann::json spec{{"name", "blaschke"}, {"params", {{"zeros", zeros}, {"theta", u(rng)}}}};
    const DynamicMap f = make_map(spec.get<MapSpec>(), d);
    CHECK(audit_nonexpansive(f, 1000, i).passed);
    CHECK(audit_schwarz_pick(spec.get<MapSpec>(), 200, i).passed);
  }
}
