#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "orbitlab/kernels.hpp"
#include "orbitlab/maps.hpp"

namespace orbitlab {

inline constexpr std::size_t kDefaultMaxOrbitPoints = 1'000'000;
inline constexpr double kDefaultEps = 1e-3;
inline constexpr double kDefaultEpsRecur = 1e-3;
inline constexpr std::size_t kDefaultHorizon = 10'000;

// f^0(x0), ..., f^K(x0), stored flat. If an iterate leaves the representable
// part of the space (e.g. reaches the disk's double-precision boundary) the
// orbit stops there and escape_index() records the first missing exponent.
class Orbit {
 public:
  const DynamicMap& map() const { return map_; }
  const Space& space() const { return map_.space(); }
  const Point& start() const { return start_; }
  std::size_t horizon() const { return horizon_; }
  // Number of stored points: horizon + 1 unless the orbit escaped.
  std::size_t size() const { return coords_.size() / dim_; }
  const std::optional<std::size_t>& escape_index() const { return escape_; }

  std::span<const double> view(std::size_t k) const {
    return {coords_.data() + k * dim_, dim_};
  }
  Point point(std::size_t k) const;

  // Pure, thread-safe; both indices must be < size().
  double direct_distance(std::size_t n, std::size_t m) const {
    return space().distance(view(n), view(m));
  }
  // Memoized symmetric access for serial analyses.
  double pair_distance(std::size_t n, std::size_t m);
  // Metric size of coordinate rounding at point k.
  double resolution(std::size_t k) const { return space().resolution(view(k)); }

 private:
  friend Orbit compute_orbit(const DynamicMap&, const Point&, std::size_t,
                             std::size_t);
  static constexpr std::size_t kMemoCap = std::size_t{1} << 22;

  DynamicMap map_;
  Point start_;
  std::size_t horizon_ = 0;
  std::size_t dim_ = 1;
  std::vector<double> coords_;
  std::optional<std::size_t> escape_;
  std::unordered_map<std::uint64_t, double> memo_;
};

Orbit compute_orbit(const DynamicMap& map, const Point& start,
                    std::size_t horizon,
                    std::size_t max_points = kDefaultMaxOrbitPoints);

// d(n+1, m+1) - d(n, m) over the stored orbit; slack is tol plus the
// rounding resolution at both shifted points.
kernels::ShiftExtremes shift_monotonicity(const Orbit& orbit,
                                          double tol = kTolMetric);

enum class VerdictKind { RelativelyCompact, CompactlyDivergent, Inconclusive };

std::string_view verdict_name(VerdictKind kind);

struct CompactEvidence {
  double eps = 0.0;
  std::size_t net_size = 0;
  std::size_t half_net_size = 0;
  std::size_t half_count = 0;
  std::size_t full_count = 0;
};

struct DivergentEvidence {
  std::vector<double> radii;
  // k_R: every stored point from this index on lies outside B(base, R).
  std::vector<std::size_t> leave_index;
  std::optional<std::size_t> numeric_escape;
};

struct BudgetReport {
  std::size_t horizon = 0;
  std::size_t points = 0;
  std::size_t half_net_size = 0;
  std::size_t net_size = 0;
  // Radii for which a leaving index <= horizon/2 was found.
  std::size_t radii_escaped = 0;
  std::size_t radii_tested = 0;
  std::string note;
};

struct OrbitVerdict {
  VerdictKind kind = VerdictKind::Inconclusive;
  std::optional<CompactEvidence> compact;
  std::optional<DivergentEvidence> divergent;
  std::optional<BudgetReport> budget;
};

OrbitVerdict classify_orbit(const Orbit& orbit, double eps,
                            const std::vector<double>& radii);

struct RecurrenceCertificate {
  Point point;
  std::vector<std::size_t> return_times;
  bool gaps_increasing = false;
  std::vector<double> return_defects;
};

struct RecurrenceResult {
  std::optional<RecurrenceCertificate> certificate;
  // min over k >= 1 of d(x0, f^k x0); infinity for a one-point orbit.
  double min_return_defect = 0.0;
  std::size_t returns_seen = 0;
};

// Return times k >= 1 with d(x0, f^k x0) <= eps_recur, thinned greedily so
// that consecutive gaps strictly increase (the first gap is free).
RecurrenceResult detect_recurrence(const Orbit& orbit, double eps_recur);

std::vector<std::size_t> gap_increasing_subsequence(
    const std::vector<std::size_t>& times);

// d(f^g(point), point) for each consecutive gap g of the certificate;
// +infinity where the iterate escapes.
std::vector<double> limit_return_defects(const DynamicMap& map,
                                         const RecurrenceCertificate& cert);

// True iff every consecutive-gap return is within eps. Throws
// PreconditionUnmet when the certificate's gaps do not increase.
bool certify_limit_recurrent(const Orbit& orbit,
                             const RecurrenceCertificate& cert, double eps);

}  // namespace orbitlab
