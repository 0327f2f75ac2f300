#include "orbitlab/limit_group.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "orbitlab/error.hpp"
#include "orbitlab/kernels.hpp"
#include "orbitlab/parallel.hpp"

namespace orbitlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Iterate tables f^m(a), m = 0..length, one orbit per anchor.
struct AnchorTables {
  std::vector<Orbit> orbits;

  AnchorTables(const DynamicMap& map, const std::vector<Point>& anchors,
               std::size_t length) {
    orbits.resize(anchors.size());
    parallel::for_each_index(anchors.size(), [&](std::size_t i) {
      orbits[i] = compute_orbit(map, anchors[i], std::max<std::size_t>(length, 1));
      if (orbits[i].escape_index())
        throw Error(Errc::NumericEscape,
                    "anchor orbit left the representable region");
    });
  }

  // sup over anchors of d(f^m1 a, f^m2 a)
  double sup(std::size_t m1, std::size_t m2) const {
    double s = 0.0;
    for (const Orbit& o : orbits)
      s = std::max(s, o.direct_distance(m1, m2));
    return s;
  }
};

std::vector<std::size_t> exponent_net(const AnchorTables& t,
                                      std::size_t horizon, double net_eps) {
  std::vector<std::size_t> centers;
  for (std::size_t m = 1; m <= horizon; ++m) {
    bool near = false;
    for (std::size_t c : centers) {
      if (t.sup(m, c) < net_eps) {
        near = true;
        break;
      }
    }
    if (!near) centers.push_back(m);
  }
  return centers;
}

std::vector<double> resolve_radii(const Space& space,
                                  const std::vector<double>& radii) {
  return radii.empty() ? default_radii(space) : radii;
}

}  // namespace

bool certified_recurrent(const DynamicMap& map, const Point& x,
                         std::size_t horizon, double eps) {
  const Orbit orbit = compute_orbit(map, x, horizon);
  const RecurrenceResult r = detect_recurrence(orbit, eps);
  if (!r.certificate) return false;
  // Consecutive returns within eps give gap returns within 2 eps.
  return certify_limit_recurrent(orbit, *r.certificate, 2.0 * eps);
}

RetractionEstimate estimate_retraction(const DynamicMap& map,
                                       const std::vector<Point>& starts,
                                       std::size_t horizon, double eps_retract,
                                       const RetractionOptions& opts) {
  if (starts.empty())
    throw Error(Errc::EmptyInput, "estimate_retraction: no starts");
  if (!(eps_retract > 0.0))
    throw Error(Errc::BadParameter, "estimate_retraction: eps_retract <= 0");
  const Space& space = map.space();
  const std::vector<double> radii = resolve_radii(space, opts.radii);

  RetractionEstimate est;
  est.sample = starts;
  est.eps_retract = eps_retract;
  est.horizon = horizon;
  est.verdicts.resize(starts.size());
  std::vector<std::optional<Point>> tails(starts.size());
  parallel::for_each_index(starts.size(), [&](std::size_t i) {
    const Orbit orbit = compute_orbit(map, starts[i], horizon);
    est.verdicts[i] = classify_orbit(orbit, opts.eps, radii).kind;
    if (!orbit.escape_index()) tails[i] = orbit.point(horizon);
  });

  std::vector<Point> candidates;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    if (est.verdicts[i] == VerdictKind::CompactlyDivergent) continue;
    candidates.push_back(starts[i]);
    if (tails[i]) candidates.push_back(*tails[i]);
  }
  std::vector<std::uint8_t> ok(candidates.size(), 0);
  parallel::for_each_index(candidates.size(), [&](std::size_t i) {
    try {
      ok[i] = certified_recurrent(map, candidates[i], horizon, eps_retract);
    } catch (const Error& e) {
      if (e.code() != Errc::NumericEscape) throw;
    }
  });
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!ok[i]) continue;
    const bool dup = std::any_of(
        est.anchors.begin(), est.anchors.end(), [&](const Point& a) {
          return space.distance(a, candidates[i]) < eps_retract;
        });
    if (!dup) est.anchors.push_back(candidates[i]);
  }
  if (est.anchors.empty())
    throw Error(Errc::NoRecurrentAnchor,
                "no start or f^horizon(start) is certified recurrent");

  // Simultaneous returns: intersection of the per-anchor return sets.
  const AnchorTables tables(map, est.anchors, horizon);
  for (std::size_t k = 1; k <= horizon; ++k) {
    bool all = true;
    for (const Orbit& o : tables.orbits) {
      if (!(o.direct_distance(0, k) <= eps_retract)) {
        all = false;
        break;
      }
    }
    if (all) est.return_sequence.push_back(k);
  }
  if (est.return_sequence.empty())
    throw Error(Errc::BudgetExceeded,
                "anchors never return simultaneously within horizon " +
                    std::to_string(horizon));
  est.k_last = est.return_sequence.back();
  est.residual = tables.sup(0, est.k_last);

  est.values.resize(starts.size());
  parallel::for_each_index(starts.size(), [&](std::size_t i) {
    if (est.verdicts[i] != VerdictKind::CompactlyDivergent)
      est.values[i] = iterate(map, starts[i], est.k_last);
  });
  return est;
}

Point apply_retraction(const DynamicMap& map, const RetractionEstimate& est,
                       const Point& x) {
  return iterate(map, x, est.k_last);
}

double convergence_transfer_bound(double image_gap, double seed_gap,
                                  double target_gap) {
  return image_gap + seed_gap + target_gap;
}

double return_defect_bound(double anchor_defect, double anchor_distance) {
  return anchor_defect + 2.0 * anchor_distance;
}

GroupAudit audit_group_structure(const DynamicMap& map,
                                 const RetractionEstimate& est,
                                 double net_eps) {
  if (est.anchors.empty())
    throw Error(Errc::PreconditionUnmet, "audit_group_structure: no anchors");
  if (!(net_eps > 0.0))
    throw Error(Errc::BadParameter, "audit_group_structure: net_eps <= 0");
  const std::size_t H = est.horizon;
  const AnchorTables t(map, est.anchors, 2 * H);

  GroupAudit g;
  g.element_exponents = exponent_net(t, H, net_eps);
  const auto& net = g.element_exponents;
  for (std::size_t m : net) {
    std::vector<Point> table;
    for (const Orbit& o : t.orbits) table.push_back(o.point(m));
    g.element_net.push_back(std::move(table));
  }

  auto nearest = [&](std::size_t m) {
    double best = kInf;
    for (std::size_t c : net) best = std::min(best, t.sup(m, c));
    return best;
  };
  auto worst = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  };

  // f^a o f^b = f^(a+b): closure measures how far each product is from
  // the net.
  g.composition_closure_defect =
      worst(kernels::parallel::evaluate_all(net.size(), [&](std::size_t i) {
        double row = 0.0;
        for (std::size_t m : net) row = std::max(row, nearest(net[i] + m));
        return row;
      }));

  g.identity_defect = std::max(est.residual, nearest(0));

  g.inverse_defect =
      worst(kernels::parallel::evaluate_all(net.size(), [&](std::size_t i) {
        double best = kInf;
        for (std::size_t m : net) best = std::min(best, t.sup(net[i] + m, 0));
        return best;
      }));

  // (f o rho)^p = f^p o rho = f^(p + k_last) on the anchors.
  g.generator_defect =
      worst(kernels::parallel::evaluate_all(net.size(), [&](std::size_t i) {
        double best = kInf;
        for (std::size_t p = 1; p <= H && best > kTolMetric; ++p)
          best = std::min(best, t.sup(p + est.k_last, net[i]));
        return best;
      }));

  const Space& space = map.space();
  g.isometry_defect =
      worst(kernels::parallel::evaluate_all(net.size(), [&](std::size_t i) {
        double d = 0.0;
        const auto& o = t.orbits;
        for (std::size_t a = 0; a < o.size(); ++a)
          for (std::size_t b = a + 1; b < o.size(); ++b)
            d = std::max(d, std::abs(space.distance(o[a].view(net[i]),
                                                    o[b].view(net[i])) -
                                     space.distance(o[a].view(0),
                                                    o[b].view(0))));
        return d;
      }));
  return g;
}

ConvergenceCriterion check_convergence_criterion(const DynamicMap& map,
                                                 const RetractionEstimate& est,
                                                 std::size_t horizon,
                                                 double eps) {
  const Space& space = map.space();
  ConvergenceCriterion c;
  for (const Point& a : est.anchors)
    c.max_anchor_motion =
        std::max(c.max_anchor_motion, space.distance(map(a), a));
  c.anchors_fixed = c.max_anchor_motion <= eps;

  std::vector<double> tail(est.sample.size(), 0.0);
  parallel::for_each_index(est.sample.size(), [&](std::size_t i) {
    if (!est.values[i]) return;
    const Orbit o =
        compute_orbit(map, est.sample[i], horizon + kConvergenceWindow - 1);
    double worst = 0.0;
    for (std::size_t k = horizon; k < horizon + kConvergenceWindow; ++k) {
      worst = k < o.size()
                  ? std::max(worst, space.distance(o.view(k),
                                                   est.values[i]->view()))
                  : kInf;
    }
    tail[i] = worst;
  });
  for (double v : tail) c.max_tail_defect = std::max(c.max_tail_defect, v);
  c.iterates_converge = c.max_tail_defect <= eps;
  c.agreement = c.anchors_fixed == c.iterates_converge;
  return c;
}

AccumulationReport accumulation_vs_group_orbit(const DynamicMap& map,
                                               const RetractionEstimate& est,
                                               const Point& start,
                                               double eps) {
  if (!(eps > 0.0))
    throw Error(Errc::BadParameter, "accumulation_vs_group_orbit: eps <= 0");
  for (std::size_t i = 0; i < est.sample.size(); ++i) {
    if (est.sample[i] == start && !est.values[i])
      throw Error(Errc::PreconditionUnmet,
                  "accumulation_vs_group_orbit: start is divergent");
  }
  const Space& space = map.space();
  const Orbit orbit = compute_orbit(map, start, est.horizon);
  if (orbit.escape_index())
    throw Error(Errc::PreconditionUnmet,
                "accumulation_vs_group_orbit: orbit escaped");

  const auto counts = kernels::parallel::later_return_counts(
      orbit.size(),
      [&](std::size_t a, std::size_t b) { return orbit.direct_distance(a, b); },
      eps, kAccumulationReturns);
  std::vector<std::size_t> A;
  for (std::size_t k = 0; k < counts.size(); ++k)
    if (counts[k] >= kAccumulationReturns) A.push_back(k);

  const AnchorTables t(map, est.anchors, est.horizon);
  const auto net = exponent_net(t, est.horizon, eps);
  const Point r = apply_retraction(map, est, start);
  const Orbit group_orbit = compute_orbit(map, r, net.empty() ? 1 : net.back());

  AccumulationReport rep;
  rep.accumulation_points = A.size();
  rep.group_orbit_points = net.size();
  rep.hausdorff = kernels::parallel::hausdorff(
      A.size(), net.size(), [&](std::size_t i, std::size_t j) {
        return space.distance(orbit.view(A[i]), group_orbit.view(net[j]));
      });
  rep.agrees = rep.hausdorff <= 3.0 * eps;
  return rep;
}

AuditReport audit_mono_to_iso(const DynamicMap& map,
                              const RetractionEstimate& est, std::size_t pairs,
                              std::uint64_t seed) {
  AuditReport r;
  const auto& a = est.anchors;
  if (a.size() < 2) {
    r.passed = true;
    r.note = "fewer than two anchors; vacuous";
    return r;
  }
  if (pairs == 0)
    throw Error(Errc::BadParameter, "audit_mono_to_iso: pairs must be >= 1");
  const Space& space = map.space();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, a.size() - 1);
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  for (std::size_t p = 0; p < pairs; ++p) {
    const std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    while (j == i) j = pick(rng);
    idx.emplace_back(i, j);
  }
  const auto defects =
      kernels::parallel::evaluate_all(pairs, [&](std::size_t p) {
        const Point& x = a[idx[p].first];
        const Point& y = a[idx[p].second];
        return std::abs(space.distance(map(x), map(y)) - space.distance(x, y));
      });
  const std::size_t w = kernels::argmax(defects);
  r.samples = pairs;
  r.max_defect = defects[w];
  r.min_defect = *std::min_element(defects.begin(), defects.end());
  r.witness_a = a[idx[w].first];
  r.witness_b = a[idx[w].second];
  r.passed = r.max_defect <= 2.0 * est.residual + kTolMetric;
  return r;
}

FiniteSemigroup::FiniteSemigroup(std::size_t order,
                                 std::vector<std::size_t> table)
    : order_(order), table_(std::move(table)) {
  if (order_ == 0) throw Error(Errc::InvalidSemigroup, "order must be >= 1");
  if (table_.size() != order_ * order_)
    throw Error(Errc::InvalidSemigroup, "table is not order x order");
  for (std::size_t v : table_)
    if (v >= order_)
      throw Error(Errc::InvalidSemigroup,
                  "entry " + std::to_string(v) + " outside 0.." +
                      std::to_string(order_ - 1));
  const FiniteSemigroup& s = *this;
  for (std::size_t x = 0; x < order_; ++x)
    for (std::size_t y = 0; y < order_; ++y)
      for (std::size_t z = 0; z < order_; ++z)
        if (s(s(x, y), z) != s(x, s(y, z)))
          throw Error(Errc::InvalidSemigroup,
                      "not associative at (" + std::to_string(x) + "," +
                          std::to_string(y) + "," + std::to_string(z) + ")");
}

FiniteSemigroup read_semigroup_csv(std::istream& in) {
  std::vector<std::vector<std::size_t>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::size_t> row;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t pos = 0;
      long long v = -1;
      try {
        v = std::stoll(cell, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
      if (pos != cell.size() || v < 0)
        throw Error(Errc::ConfigError,
                    "semigroup table row " + std::to_string(rows.size()) +
                        ": bad entry '" + cell + "'");
      row.push_back(static_cast<std::size_t>(v));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(Errc::EmptyInput, "semigroup table is empty");
  std::vector<std::size_t> flat;
  for (const auto& r : rows) {
    if (r.size() != rows.size())
      throw Error(Errc::InvalidSemigroup, "semigroup table is not square");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return FiniteSemigroup(rows.size(), std::move(flat));
}

bool semigroup_is_group(const FiniteSemigroup& sg) {
  const std::size_t n = sg.order();
  // Divisibility holds iff every left and right translation is onto.
  for (std::size_t g = 0; g < n; ++g) {
    std::vector<std::uint8_t> left(n, 0), right(n, 0);
    for (std::size_t x = 0; x < n; ++x) {
      left[sg(x, g)] = 1;
      right[sg(g, x)] = 1;
    }
    for (std::size_t h = 0; h < n; ++h)
      if (!left[h] || !right[h]) return false;
  }

  std::optional<std::size_t> e;
  for (std::size_t c = 0; c < n && !e; ++c) {
    bool unit = true;
    for (std::size_t x = 0; x < n && unit; ++x)
      unit = sg(c, x) == x && sg(x, c) == x;
    if (unit) e = c;
  }
  if (!e)
    throw Error(Errc::InternalContradiction,
                "divisible semigroup without identity");
  for (std::size_t g = 0; g < n; ++g) {
    bool inv = false;
    for (std::size_t h = 0; h < n && !inv; ++h)
      inv = sg(g, h) == *e && sg(h, g) == *e;
    if (!inv)
      throw Error(Errc::InternalContradiction,
                  "divisible semigroup: element " + std::to_string(g) +
                      " has no inverse");
  }
  return true;
}

}  // namespace orbitlab
