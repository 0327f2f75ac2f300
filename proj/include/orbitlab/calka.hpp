#pragma once

#include <cstddef>
#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "orbitlab/kernels.hpp"
#include "orbitlab/orbit.hpp"

namespace orbitlab {

inline constexpr std::size_t kDefaultMinBallCount = 50;
inline constexpr std::size_t kSublemmaScanCap = 500;

enum class ShiftDir { NonDecreasingShift, NonIncreasingShift, InvariantShift };

std::string_view shift_dir_name(ShiftDir dir);

// A distance on {0, ..., horizon} with a certified shift direction.
// Balls are open: B(n, r) = {k : d(k, n) < r}.
class NatMetric {
 public:
  using Fn = std::function<double(std::size_t, std::size_t)>;

  NatMetric() = default;

  std::size_t horizon() const { return horizon_; }
  ShiftDir monotone_dir() const { return dir_; }
  const kernels::ShiftExtremes& shift() const { return shift_; }
  // Thread-safe.
  double operator()(std::size_t n, std::size_t m) const { return d_(n, m); }

  // Detects the shift direction when `claimed` is empty, otherwise checks
  // it; throws NotShiftMonotone when neither direction holds within tol.
  static NatMetric from_function(std::size_t horizon, Fn d,
                                 std::optional<ShiftDir> claimed = {},
                                 double tol = kTolMetric);

  // Dense row-major (horizon+1)^2 table. Validates zero diagonal, symmetry,
  // nonnegativity and the triangle inequality on sampled triples.
  static NatMetric from_table(std::size_t horizon, std::vector<double> table,
                              double tol = kTolMetric);

 private:
  friend NatMetric from_orbit(Orbit orbit);

  std::size_t horizon_ = 0;
  Fn d_;
  ShiftDir dir_ = ShiftDir::InvariantShift;
  kernels::ShiftExtremes shift_;
};

// d(n, m) = distance(f^n x0, f^m x0). NotInjective on the first pair closer
// than tol_metric; InvariantShift only for maps claiming isometry whose
// shift deltas all vanish within tol_metric.
NatMetric from_orbit(Orbit orbit);

// Triangular CSV with header "n,m,d"; every pair n < m up to the largest
// index must be present.
NatMetric read_nat_metric_csv(std::istream& in);

struct HypothesisResult {
  std::optional<std::size_t> N;
  std::size_t ball0_count = 0;
};

std::size_t ball0_count(const NatMetric& nm, double rho);

HypothesisResult check_hypothesis(const NatMetric& nm, double rho,
                                  std::size_t min_ball_count =
                                      kDefaultMinBallCount);

struct CalkaReport {
  double rho = 0.0;
  std::size_t ball0_count = 0;
  std::optional<std::size_t> N;
  std::optional<std::size_t> M;
  std::size_t conclusion_verified_to = 0;
};

// Least M > N with d(0, M) < rho/2, then checks {0..horizon} is inside
// E(M, rho). CoverFailure names the least uncovered index.
CalkaReport find_covering_M(const NatMetric& nm, double rho, std::size_t N);

// check_hypothesis followed by find_covering_M when N exists.
CalkaReport calka_check(const NatMetric& nm, double rho,
                        std::size_t min_ball_count = kDefaultMinBallCount);

bool sublemma_check(const NatMetric& nm, std::size_t n, std::size_t nu,
                    std::size_t m, double rho, double tol = kTolMetric);

// Exhaustive scan of all admissible triples up to min(horizon, cap).
kernels::SublemmaScan sublemma_scan(const NatMetric& nm, double rho,
                                    std::size_t cap = kSublemmaScanCap,
                                    double tol = kTolMetric);

}  // namespace orbitlab
