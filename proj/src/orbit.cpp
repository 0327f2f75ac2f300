#include "orbitlab/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "orbitlab/error.hpp"

namespace orbitlab {

Point Orbit::point(std::size_t k) const {
  if (k >= size())
    throw Error(Errc::NumericEscape,
                "orbit point " + std::to_string(k) + " was not representable");
  return space().wrap(Coords(view(k).begin(), view(k).end()));
}

double Orbit::pair_distance(std::size_t n, std::size_t m) {
  if (n >= size() || m >= size())
    throw Error(Errc::NumericEscape, "pair_distance past the escape index");
  if (n == m) return 0.0;
  if (n > m) std::swap(n, m);
  const std::uint64_t key = (std::uint64_t{n} << 32) | m;
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  const double d = direct_distance(n, m);
  if (memo_.size() < kMemoCap) memo_.emplace(key, d);
  return d;
}

Orbit compute_orbit(const DynamicMap& map, const Point& start,
                    std::size_t horizon, std::size_t max_points) {
  map.space().require(start);
  if (horizon < 1)
    throw Error(Errc::BadParameter, "compute_orbit: horizon must be >= 1");
  if (horizon >= max_points)
    throw Error(Errc::BudgetExceeded,
                "horizon " + std::to_string(horizon) + " exceeds the limit of " +
                    std::to_string(max_points) + " points");
  Orbit o;
  o.map_ = map;
  o.start_ = start;
  o.horizon_ = horizon;
  o.dim_ = start.dimension();
  o.coords_.reserve((horizon + 1) * o.dim_);
  o.coords_.insert(o.coords_.end(), start.coords().begin(),
                   start.coords().end());
  Coords next(o.dim_);
  for (std::size_t k = 1; k <= horizon; ++k) {
    map.apply(o.view(k - 1), next);
    if (!map.space().admits(next)) {
      o.escape_ = k;
      break;
    }
    o.coords_.insert(o.coords_.end(), next.begin(), next.end());
  }
  return o;
}

kernels::ShiftExtremes shift_monotonicity(const Orbit& orbit, double tol) {
  std::vector<double> res(orbit.size());
  for (std::size_t k = 0; k < res.size(); ++k) res[k] = orbit.resolution(k);
  return kernels::parallel::shift_extremes(
      orbit.size(),
      [&](std::size_t n, std::size_t m) { return orbit.direct_distance(n, m); },
      [&](std::size_t n, std::size_t m) {
        return tol + 8.0 * (res[n] + res[m]);
      });
}

std::string_view verdict_name(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::RelativelyCompact: return "RelativelyCompact";
    case VerdictKind::CompactlyDivergent: return "CompactlyDivergent";
    case VerdictKind::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

OrbitVerdict classify_orbit(const Orbit& orbit, double eps,
                            const std::vector<double>& radii) {
  if (!(eps > 0.0))
    throw Error(Errc::BadParameter, "classify_orbit: eps must be positive");
  if (radii.empty())
    throw Error(Errc::BadParameter, "classify_orbit: radii must be nonempty");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] > radii[i - 1])))
      throw Error(Errc::BadParameter,
                  "classify_orbit: radii must be positive and increasing");
  }
  const auto& proper = orbit.space().properness_radius();
  if (proper && radii.back() > *proper)
    throw Error(Errc::BadParameter,
                "classify_orbit: radius exceeds the properness radius");

  const std::size_t K = orbit.horizon();
  const std::size_t half = K / 2;
  const std::size_t stored = orbit.size();

  // Divergence: leave index per radius. Points past a numeric escape are
  // outside every ball within the properness radius.
  const Point base = orbit.space().base_point();
  std::vector<double> from_base =
      kernels::parallel::evaluate_all(stored, [&](std::size_t k) {
        return orbit.space().distance(base.view(), orbit.view(k));
      });
  DivergentEvidence div{radii, {}, orbit.escape_index()};
  std::size_t escaped = 0;
  for (double R : radii) {
    std::size_t leave = 0;
    for (std::size_t k = stored; k-- > 0;) {
      if (!(from_base[k] > R)) {
        leave = k + 1;
        break;
      }
    }
    div.leave_index.push_back(leave);
    if (leave <= half) ++escaped;
  }
  const bool divergent = escaped == radii.size();

  // Compactness: greedy net over the full orbit; being first-fit, its
  // restriction to indices <= K/2 is the net of the first half.
  CompactEvidence comp{eps, 0, 0, half + 1, K + 1};
  bool compact = false;
  if (!orbit.escape_index()) {
    const auto centers = epsilon_net_indices(
        stored,
        [&](std::size_t i, std::size_t j) { return orbit.direct_distance(i, j); },
        eps);
    comp.net_size = centers.size();
    comp.half_net_size = static_cast<std::size_t>(
        std::upper_bound(centers.begin(), centers.end(), half) -
        centers.begin());
    compact = comp.net_size == comp.half_net_size;
  }

  OrbitVerdict v;
  if (compact && !divergent) {
    v.kind = VerdictKind::RelativelyCompact;
    v.compact = comp;
  } else if (divergent && !compact) {
    v.kind = VerdictKind::CompactlyDivergent;
    v.divergent = std::move(div);
  } else {
    BudgetReport b{K,          stored, comp.half_net_size, comp.net_size,
                   escaped,    radii.size(), {}};
    if (compact && divergent)
      b.note = "net stabilized and every radius was left; no verdict";
    else if (orbit.escape_index())
      b.note = "orbit escaped numerically before leaving every ball";
    else
      b.note = "net still growing and some radius not left by horizon/2";
    v.budget = std::move(b);
  }
  return v;
}

std::vector<std::size_t> gap_increasing_subsequence(
    const std::vector<std::size_t>& times) {
  std::vector<std::size_t> out;
  std::optional<std::size_t> last_gap;
  for (std::size_t t : times) {
    if (out.empty()) {
      out.push_back(t);
      continue;
    }
    if (t <= out.back()) continue;
    const std::size_t gap = t - out.back();
    if (!last_gap || gap > *last_gap) {
      out.push_back(t);
      last_gap = gap;
    }
  }
  return out;
}

RecurrenceResult detect_recurrence(const Orbit& orbit, double eps_recur) {
  if (!(eps_recur > 0.0))
    throw Error(Errc::BadParameter, "detect_recurrence: eps_recur must be > 0");
  const std::size_t n = orbit.size();
  const std::vector<double> d =
      kernels::parallel::evaluate_all(n, [&](std::size_t k) {
        return orbit.direct_distance(0, k);
      });

  RecurrenceResult r;
  r.min_return_defect = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> times;
  for (std::size_t k = 1; k < n; ++k) {
    r.min_return_defect = std::min(r.min_return_defect, d[k]);
    if (d[k] <= eps_recur) times.push_back(k);
  }
  r.returns_seen = times.size();

  const auto kept = gap_increasing_subsequence(times);
  if (kept.size() >= 3) {
    RecurrenceCertificate c;
    c.point = orbit.start();
    c.return_times = kept;
    c.gaps_increasing = true;
    for (std::size_t i = 2; i < kept.size(); ++i)
      c.gaps_increasing = c.gaps_increasing &&
                          kept[i] - kept[i - 1] > kept[i - 1] - kept[i - 2];
    for (std::size_t k : kept) c.return_defects.push_back(d[k]);
    r.certificate = std::move(c);
  }
  return r;
}

std::vector<double> limit_return_defects(const DynamicMap& map,
                                         const RecurrenceCertificate& cert) {
  std::vector<double> out;
  const auto& t = cert.return_times;
  for (std::size_t i = 1; i < t.size(); ++i) {
    try {
      const Point y = iterate(map, cert.point, t[i] - t[i - 1]);
      out.push_back(map.space().distance(y, cert.point));
    } catch (const Error& e) {
      if (e.code() != Errc::NumericEscape) throw;
      out.push_back(std::numeric_limits<double>::infinity());
    }
  }
  return out;
}

bool certify_limit_recurrent(const Orbit& orbit,
                             const RecurrenceCertificate& cert, double eps) {
  if (!cert.gaps_increasing)
    throw Error(Errc::PreconditionUnmet,
                "certificate return gaps are not strictly increasing");
  orbit.space().require(cert.point);
  const auto defects = limit_return_defects(orbit.map(), cert);
  return std::all_of(defects.begin(), defects.end(),
                     [eps](double d) { return d <= eps; });
}

}  // namespace orbitlab
