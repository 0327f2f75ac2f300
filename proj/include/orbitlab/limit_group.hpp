#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <vector>

#include "orbitlab/maps.hpp"
#include "orbitlab/orbit.hpp"

namespace orbitlab {

inline constexpr double kDefaultEpsRetract = 1e-3;
inline constexpr double kDefaultEpsGroup = 5e-3;
// Consecutive exponents checked by the convergence criterion.
inline constexpr std::size_t kConvergenceWindow = 8;
// Later eps-returns that make an orbit point an accumulation point.
inline constexpr std::size_t kAccumulationReturns = 3;

struct RetractionOptions {
  // Classification of the starts.
  double eps = kDefaultEps;
  std::vector<double> radii;  // empty: default_radii(space)
};

struct RetractionEstimate {
  std::vector<Point> sample;
  std::vector<VerdictKind> verdicts;
  // Certified recurrent points, pairwise >= eps_retract apart.
  std::vector<Point> anchors;
  // Exponents 1..horizon at which every anchor returns within eps_retract.
  std::vector<std::size_t> return_sequence;
  std::size_t k_last = 0;
  // rho(start) = f^k_last(start); nullopt marks a CompactlyDivergent start.
  std::vector<std::optional<Point>> values;
  double residual = 0.0;
  double eps_retract = 0.0;
  std::size_t horizon = 0;
};

RetractionEstimate estimate_retraction(const DynamicMap& map,
                                       const std::vector<Point>& starts,
                                       std::size_t horizon, double eps_retract,
                                       const RetractionOptions& opts = {});

// rho(x) for an arbitrary x: f^k_last(x).
Point apply_retraction(const DynamicMap& map, const RetractionEstimate& est,
                       const Point& x);

// Triangle-inequality bound behind the transfer of limits between nearby
// sequences: d(c, f_n(a_n)) <= d(c, f_n(a0_n)) + d(a0_n, a) + d(a, a_n).
double convergence_transfer_bound(double image_gap, double seed_gap,
                                  double target_gap);

// Bound on d(f^k y, y) given d(f^k a, a) and nonexpansiveness:
// anchor_defect + 2 d(a, y).
double return_defect_bound(double anchor_defect, double anchor_distance);

struct GroupAudit {
  // f^m restricted to the anchors for each net exponent m.
  std::vector<std::size_t> element_exponents;
  std::vector<std::vector<Point>> element_net;
  double composition_closure_defect = 0.0;
  double identity_defect = 0.0;
  double inverse_defect = 0.0;
  double generator_defect = 0.0;
  double isometry_defect = 0.0;

  bool passes(double eps_group) const {
    return composition_closure_defect <= eps_group &&
           identity_defect <= eps_group && inverse_defect <= eps_group &&
           generator_defect <= eps_group && isometry_defect <= eps_group;
  }
};

// Greedy net (sup distance over anchors) of f^m, m = 1..est.horizon, then
// closure, identity, inverse, generator (powers of f o rho) and
// isometry-on-anchors defects.
GroupAudit audit_group_structure(const DynamicMap& map,
                                 const RetractionEstimate& est, double net_eps);

struct ConvergenceCriterion {
  bool anchors_fixed = false;
  bool iterates_converge = false;
  bool agreement = false;
  double max_anchor_motion = 0.0;
  double max_tail_defect = 0.0;
};

// (a) d(f a, a) <= eps on every anchor; (b) d(f^k x, rho(x)) <= eps for
// every non-divergent start and every k in [horizon, horizon + window).
ConvergenceCriterion check_convergence_criterion(const DynamicMap& map,
                                                 const RetractionEstimate& est,
                                                 std::size_t horizon,
                                                 double eps);

struct AccumulationReport {
  std::size_t accumulation_points = 0;
  std::size_t group_orbit_points = 0;
  double hausdorff = 0.0;
  bool agrees = false;
};

// A: orbit points (up to est.horizon) with >= 3 later eps-returns.
// B: g(rho(start)) for g in the net of limit maps built at net_eps = eps.
AccumulationReport accumulation_vs_group_orbit(const DynamicMap& map,
                                               const RetractionEstimate& est,
                                               const Point& start, double eps);

AuditReport audit_mono_to_iso(const DynamicMap& map,
                              const RetractionEstimate& est, std::size_t pairs,
                              std::uint64_t seed);

// Recurrent-set closedness proxy: certifies x as recurrent at eps within
// horizon, i.e. detect_recurrence + certify_limit_recurrent(2 eps).
bool certified_recurrent(const DynamicMap& map, const Point& x,
                         std::size_t horizon, double eps);

class FiniteSemigroup {
 public:
  // Row-major table; throws InvalidSemigroup unless closed and associative.
  FiniteSemigroup(std::size_t order, std::vector<std::size_t> table);

  std::size_t order() const { return order_; }
  std::size_t operator()(std::size_t i, std::size_t j) const {
    return table_[i * order_ + j];
  }
  const std::vector<std::size_t>& table() const { return table_; }

 private:
  std::size_t order_;
  std::vector<std::size_t> table_;
};

// One row per line, entries separated by ','.
FiniteSemigroup read_semigroup_csv(std::istream& in);

// Divisibility: for all g, h there are u, v with u g = h = g v. A positive
// answer is cross-checked by exhibiting identity and inverses;
// InternalContradiction if that fails.
bool semigroup_is_group(const FiniteSemigroup& sg);

}  // namespace orbitlab
