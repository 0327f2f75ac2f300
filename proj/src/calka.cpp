#include "orbitlab/calka.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "orbitlab/error.hpp"

namespace orbitlab {

namespace {

ShiftDir direction_of(const kernels::ShiftExtremes& s, double tol) {
  if (s.pairs == 0) return ShiftDir::InvariantShift;
  const bool no_increase = s.max_increase <= tol;
  const bool no_decrease = s.max_decrease <= tol;
  if (no_increase && no_decrease) return ShiftDir::InvariantShift;
  if (no_decrease) return ShiftDir::NonDecreasingShift;
  if (no_increase) return ShiftDir::NonIncreasingShift;
  throw Error(Errc::NotShiftMonotone,
              "shift deltas of both signs: +" + std::to_string(s.max_increase) +
                  " at (" + std::to_string(s.max_increase_at.first) + "," +
                  std::to_string(s.max_increase_at.second) + "), -" +
                  std::to_string(s.max_decrease) + " at (" +
                  std::to_string(s.max_decrease_at.first) + "," +
                  std::to_string(s.max_decrease_at.second) + ")");
}

bool satisfies(ShiftDir claimed, ShiftDir observed) {
  if (claimed == observed) return true;
  return observed == ShiftDir::InvariantShift;
}

void require_theorem_direction(const NatMetric& nm, const char* who) {
  if (nm.monotone_dir() == ShiftDir::NonIncreasingShift)
    throw Error(Errc::WrongMonotonicity,
                std::string(who) +
                    ": the lemma needs d(n+1,m+1) >= d(n,m); this metric only "
                    "has the reverse inequality");
}

}  // namespace

std::string_view shift_dir_name(ShiftDir dir) {
  switch (dir) {
    case ShiftDir::NonDecreasingShift: return "NonDecreasingShift";
    case ShiftDir::NonIncreasingShift: return "NonIncreasingShift";
    case ShiftDir::InvariantShift: return "InvariantShift";
  }
  return "InvariantShift";
}

NatMetric NatMetric::from_function(std::size_t horizon, Fn d,
                                   std::optional<ShiftDir> claimed,
                                   double tol) {
  if (horizon < 1)
    throw Error(Errc::BadParameter, "NatMetric: horizon must be >= 1");
  NatMetric nm;
  nm.horizon_ = horizon;
  nm.d_ = std::move(d);
  nm.shift_ = kernels::parallel::shift_extremes(
      horizon + 1, nm.d_,
      [tol](std::size_t, std::size_t) { return tol; });
  const ShiftDir observed = direction_of(nm.shift_, tol);
  if (claimed && !satisfies(*claimed, observed))
    throw Error(Errc::NotShiftMonotone,
                "claimed " + std::string(shift_dir_name(*claimed)) +
                    " but observed " + std::string(shift_dir_name(observed)));
  nm.dir_ = claimed.value_or(observed);
  return nm;
}

NatMetric NatMetric::from_table(std::size_t horizon, std::vector<double> table,
                                double tol) {
  const std::size_t n = horizon + 1;
  if (table.size() != n * n)
    throw Error(Errc::BadParameter, "NatMetric: table size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (table[i * n + i] != 0.0)
      throw Error(Errc::BadParameter,
                  "NatMetric: d(" + std::to_string(i) + "," +
                      std::to_string(i) + ") != 0");
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = table[i * n + j];
      if (!(a >= 0.0) || !std::isfinite(a) || a != table[j * n + i])
        throw Error(Errc::BadParameter,
                    "NatMetric: entry (" + std::to_string(i) + "," +
                        std::to_string(j) +
                        ") is negative, non-finite or asymmetric");
    }
  }
  // All triples when small, otherwise a seeded sample.
  auto at = [&](std::size_t a, std::size_t b) { return table[a * n + b]; };
  auto triangle = [&](std::size_t a, std::size_t b, std::size_t c) {
    if (at(a, c) > at(a, b) + at(b, c) + tol)
      throw Error(Errc::BadParameter,
                  "NatMetric: triangle inequality fails at (" +
                      std::to_string(a) + "," + std::to_string(b) + "," +
                      std::to_string(c) + ")");
  };
  if (n <= 64) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n; ++c) triangle(a, b, c);
  } else {
    std::mt19937_64 rng(0);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int t = 0; t < 200000; ++t) triangle(pick(rng), pick(rng), pick(rng));
  }
  auto shared = std::make_shared<const std::vector<double>>(std::move(table));
  return from_function(
      horizon,
      [shared, n](std::size_t a, std::size_t b) { return (*shared)[a * n + b]; },
      std::nullopt, tol);
}

NatMetric from_orbit(Orbit orbit) {
  if (orbit.escape_index())
    throw Error(Errc::NumericEscape,
                "orbit escaped at exponent " +
                    std::to_string(*orbit.escape_index()));
  auto o = std::make_shared<const Orbit>(std::move(orbit));
  auto d = [o](std::size_t n, std::size_t m) {
    return o->direct_distance(n, m);
  };
  if (auto hit = kernels::parallel::first_collision(o->size(), d, kTolMetric))
    throw Error(Errc::NotInjective,
                "f^" + std::to_string(hit->first) + "(x0) and f^" +
                    std::to_string(hit->second) + "(x0) coincide");

  NatMetric nm;
  nm.horizon_ = o->horizon();
  nm.d_ = d;
  nm.shift_ = shift_monotonicity(*o);
  if (nm.shift_.pairs > 0 && nm.shift_.max_slack_excess > 0.0)
    throw Error(Errc::NotShiftMonotone,
                "orbit distances grow under the shift at (" +
                    std::to_string(nm.shift_.max_slack_excess_at.first) + "," +
                    std::to_string(nm.shift_.max_slack_excess_at.second) +
                    "); the map is not nonexpansive there");
  const bool flat = nm.shift_.pairs == 0 ||
                    (nm.shift_.max_increase <= kTolMetric &&
                     nm.shift_.max_decrease <= kTolMetric);
  nm.dir_ = o->map().claims_isometry() && flat ? ShiftDir::InvariantShift
                                               : ShiftDir::NonIncreasingShift;
  return nm;
}

NatMetric read_nat_metric_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw Error(Errc::EmptyInput, "distance table: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "n,m,d")
    throw Error(Errc::ConfigError,
                "distance table: header must be 'n,m,d', got '" + line + "'");

  struct Row {
    std::size_t n, m;
    double d;
  };
  std::vector<Row> rows;
  std::size_t top = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    long long n = -1, m = -1;
    double d = 0.0;
    char c1 = 0, c2 = 0;
    if (!(ss >> n >> c1 >> m >> c2 >> d) || c1 != ',' || c2 != ',' || n < 0 ||
        m < 0)
      throw Error(Errc::ConfigError,
                  "distance table line " + std::to_string(lineno) +
                      ": expected 'n,m,d' with nonnegative integers");
    rows.push_back({std::size_t(n), std::size_t(m), d});
    top = std::max({top, std::size_t(n), std::size_t(m)});
  }
  if (rows.empty()) throw Error(Errc::EmptyInput, "distance table: no rows");

  const std::size_t dim = top + 1;
  constexpr double kMissing = -1.0;
  std::vector<double> table(dim * dim, kMissing);
  for (std::size_t i = 0; i < dim; ++i) table[i * dim + i] = 0.0;
  for (const Row& r : rows) {
    if (r.n == r.m) {
      if (r.d != 0.0)
        throw Error(Errc::BadParameter, "distance table: nonzero diagonal");
      continue;
    }
    const double prev = table[r.n * dim + r.m];
    if (prev != kMissing && prev != r.d)
      throw Error(Errc::BadParameter,
                  "distance table: conflicting entries for (" +
                      std::to_string(r.n) + "," + std::to_string(r.m) + ")");
    table[r.n * dim + r.m] = table[r.m * dim + r.n] = r.d;
  }
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = i + 1; j < dim; ++j)
      if (table[i * dim + j] == kMissing)
        throw Error(Errc::BadParameter,
                    "distance table: missing pair (" + std::to_string(i) +
                        "," + std::to_string(j) + ")");
  return NatMetric::from_table(top, std::move(table));
}

std::size_t ball0_count(const NatMetric& nm, double rho) {
  std::size_t count = 0;
  for (std::size_t k = 0; k <= nm.horizon(); ++k)
    if (nm(0, k) < rho) ++count;
  return count;
}

HypothesisResult check_hypothesis(const NatMetric& nm, double rho,
                                  std::size_t min_ball_count) {
  require_theorem_direction(nm, "check_hypothesis");
  if (!(rho > 0.0))
    throw Error(Errc::BadParameter, "check_hypothesis: rho must be positive");
  if (min_ball_count < 1)
    throw Error(Errc::BadParameter, "check_hypothesis: min_ball_count >= 1");

  std::vector<std::size_t> ball;
  for (std::size_t k = 0; k <= nm.horizon(); ++k)
    if (nm(0, k) < rho) ball.push_back(k);

  HypothesisResult r{std::nullopt, ball.size()};
  if (ball.size() < min_ball_count) return r;

  // For each k in the ball, the first j with k in B(j, rho/2); j = k always
  // qualifies, so the search terminates.
  const double half = rho / 2.0;
  const auto first = kernels::parallel::evaluate_all(
      ball.size(), [&](std::size_t i) {
        const std::size_t k = ball[i];
        std::size_t j = 0;
        while (!(nm(k, j) < half)) ++j;
        return static_cast<double>(j);
      });
  r.N = static_cast<std::size_t>(*std::max_element(first.begin(), first.end()));
  return r;
}

CalkaReport find_covering_M(const NatMetric& nm, double rho, std::size_t N) {
  require_theorem_direction(nm, "find_covering_M");
  if (!(rho > 0.0))
    throw Error(Errc::BadParameter, "find_covering_M: rho must be positive");
  CalkaReport r;
  r.rho = rho;
  r.ball0_count = ball0_count(nm, rho);
  r.N = N;

  std::optional<std::size_t> M;
  for (std::size_t k = N + 1; k <= nm.horizon(); ++k) {
    if (nm(0, k) < rho / 2.0) {
      M = k;
      break;
    }
  }
  if (!M)
    throw Error(Errc::BudgetExceeded,
                "no M > " + std::to_string(N) + " with d(0,M) < rho/2 within "
                "horizon " + std::to_string(nm.horizon()));
  r.M = M;

  const auto gap = kernels::parallel::first_uncovered(
      nm.horizon() + 1, *M + 1,
      [&](std::size_t n, std::size_t k) { return nm(n, k); }, rho);
  if (gap)
    throw Error(Errc::CoverFailure,
                "index " + std::to_string(*gap) + " is outside E(" +
                    std::to_string(*M) + ", rho)");
  r.conclusion_verified_to = nm.horizon();
  return r;
}

CalkaReport calka_check(const NatMetric& nm, double rho,
                        std::size_t min_ball_count) {
  const HypothesisResult h = check_hypothesis(nm, rho, min_ball_count);
  if (!h.N) {
    CalkaReport r;
    r.rho = rho;
    r.ball0_count = h.ball0_count;
    return r;
  }
  return find_covering_M(nm, rho, *h.N);
}

bool sublemma_check(const NatMetric& nm, std::size_t n, std::size_t nu,
                    std::size_t m, double rho, double tol) {
  if (nm.monotone_dir() == ShiftDir::NonIncreasingShift)
    throw Error(Errc::PreconditionUnmet,
                "sublemma: metric has NonIncreasingShift");
  if (!(n < nu && nu < m && m <= nm.horizon()))
    throw Error(Errc::PreconditionUnmet,
                "sublemma: need n < nu < m <= horizon");
  for (std::size_t k = 0; k <= n; ++k) {
    if (nm(k, nu) < rho)
      throw Error(Errc::PreconditionUnmet,
                  "sublemma: nu lies in E(n, rho) via B(" + std::to_string(k) +
                      ", rho)");
  }
  const double dmn = nm(m, n);
  if (!(dmn < rho))
    throw Error(Errc::PreconditionUnmet, "sublemma: m is not in B(n, rho)");
  return nu < m - n && nm(m - n, 0) <= dmn + tol;
}

kernels::SublemmaScan sublemma_scan(const NatMetric& nm, double rho,
                                    std::size_t cap, double tol) {
  if (nm.monotone_dir() == ShiftDir::NonIncreasingShift)
    throw Error(Errc::PreconditionUnmet,
                "sublemma: metric has NonIncreasingShift");
  return kernels::parallel::sublemma_scan(
      std::min(nm.horizon(), cap),
      [&](std::size_t a, std::size_t b) { return nm(a, b); }, rho, tol);
}

}  // namespace orbitlab
