#include "orbitlab/kobayashi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "orbitlab/error.hpp"
#include "orbitlab/kernels.hpp"

namespace orbitlab {

namespace {

using disk::Complex;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kRestarts = 3;

void require_inside(Complex z, const char* what) {
  if (!disk::inside(z))
    throw Error(Errc::OnBoundary,
                std::string(what) + " is not strictly inside the disk");
}

std::vector<Complex> factors_of(const Point& p) {
  std::vector<Complex> out;
  for (std::size_t i = 0; i + 1 < p.dimension(); i += 2)
    out.emplace_back(p[i], p[i + 1]);
  return out;
}

Coords coords_of(const std::vector<Complex>& zs) {
  Coords c;
  for (Complex z : zs) {
    c.push_back(z.real());
    c.push_back(z.imag());
  }
  return c;
}

// zeta -> (phi_{a_j}(lambda_j zeta))_j; sends 0 to a.
HoloMap embedding(std::vector<Complex> a, std::vector<Complex> lambda) {
  return {"coordinate-embedding",
          [a = std::move(a), lambda = std::move(lambda)](Complex zeta) {
            std::vector<Complex> out(a.size());
            for (std::size_t j = 0; j < a.size(); ++j)
              out[j] = disk::from_origin(a[j], lambda[j] * zeta);
            return coords_of(out);
          }};
}

// Minimizes artanh(t) over t in [lo, 1) by compass descent from a few
// fixed starts; a longer run extends a shorter one, so the result only
// decreases with iters.
double descend(double lo, std::size_t iters) {
  auto objective = [lo](double t) {
    return (t >= lo && disk::inside(t, 0.0)) ? std::atanh(t) : kInf;
  };
  const double starts[kRestarts] = {0.5, 0.1, 0.9};
  double best_t = 0.0, best = kInf;
  for (double f : starts) {
    double t = lo + f * (1.0 - lo);
    double v = objective(t);
    double step = 0.5 * (1.0 - lo);
    for (std::size_t it = 0; it < iters; ++it) {
      const double down = objective(t - step);
      const double up = objective(t + step);
      if (down < v && down <= up) {
        t -= step;
        v = down;
      } else if (up < v) {
        t += step;
        v = up;
      } else {
        step *= 0.5;
      }
    }
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  return best_t;
}

// Single coordinate-embedding link from a to b: lambda_j = beta_j / t with
// beta_j = phi_{a_j}^{-1}(b_j), feasible iff t >= max |beta_j|.
std::optional<ChainLink> single_link(const std::vector<Complex>& a,
                                     const std::vector<Complex>& b,
                                     std::size_t iters) {
  std::vector<Complex> beta(a.size());
  double lo = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    beta[j] = disk::to_origin(a[j], b[j]);
    lo = std::max(lo, std::abs(beta[j]));
  }
  if (lo == 0.0) return std::nullopt;
  if (!disk::inside(lo, 0.0)) return std::nullopt;
  const double t = descend(lo, iters);
  std::vector<Complex> lambda(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    lambda[j] = beta[j] / t;
    // Rounding can leave |lambda| a hair above 1 at the optimum.
    if (std::abs(lambda[j]) > 1.0) lambda[j] /= std::abs(lambda[j]);
  }
  return ChainLink{{0.0, 0.0}, {t, 0.0}, embedding(a, std::move(lambda))};
}

double radical_inverse(std::size_t i, std::size_t base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= double(base);
    r += f * double(i % base);
    i /= base;
  }
  return r;
}

// i-th waypoint of a fixed sequence, so smaller budgets see a prefix.
std::vector<Complex> waypoint(const std::vector<Complex>& a,
                              const std::vector<Complex>& b, std::size_t i) {
  const double s = radical_inverse(i + 1, 2);
  const double v = radical_inverse(i + 1, 3);
  const double theta = 2.0 * std::numbers::pi * radical_inverse(i + 1, 5);
  std::vector<Complex> c(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    const Complex along = s * disk::to_origin(a[j], b[j]);
    const Complex u =
        along + 0.25 * (1.0 - std::abs(along)) * v * std::polar(1.0, theta);
    c[j] = disk::from_origin(a[j], u);
  }
  return c;
}

double max_coord_gap(const Coords& x, const Coords& y) {
  double g = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) g = std::max(g, std::abs(x[i] - y[i]));
  return g;
}

}  // namespace

double poincare_distance(const DiskPoint& z, const DiskPoint& w) {
  require_inside(z.z(), "z");
  require_inside(w.z(), "w");
  return disk::omega(z.re, z.im, w.re, w.im);
}

Coords chain_start(const AnalyticChain& chain) {
  if (chain.links.empty())
    throw Error(Errc::EmptyInput, "chain_start: empty chain");
  return chain.links.front().map.eval(chain.links.front().z.z());
}

Coords chain_end(const AnalyticChain& chain) {
  if (chain.links.empty())
    throw Error(Errc::EmptyInput, "chain_end: empty chain");
  return chain.links.back().map.eval(chain.links.back().w.z());
}

double chain_length(const AnalyticChain& chain, double tol) {
  double total = 0.0;
  for (std::size_t j = 0; j < chain.links.size(); ++j) {
    const ChainLink& l = chain.links[j];
    total += poincare_distance(l.z, l.w);
    if (j + 1 < chain.links.size()) {
      const ChainLink& n = chain.links[j + 1];
      const double gap = max_coord_gap(l.map.eval(l.w.z()), n.map.eval(n.z.z()));
      if (!(gap <= tol))
        throw Error(Errc::BrokenChain,
                    "links " + std::to_string(j) + " and " +
                        std::to_string(j + 1) + " do not meet (gap " +
                        std::to_string(gap) + ")");
    }
  }
  return total;
}

ChainSearchResult kobayashi_search(const std::string& space_name,
                                   const Point& a, const Point& b,
                                   const ChainSearchBudget& budget) {
  if (space_name != "poincare-disk" && space_name != "polydisc")
    throw Error(Errc::UnsupportedSpace,
                "no chain search on '" + space_name + "'");
  if (a.dimension() != b.dimension() || a.dimension() == 0 ||
      a.dimension() % 2 != 0 ||
      (space_name == "poincare-disk" && a.dimension() != 2))
    throw Error(Errc::BadPoint, "kobayashi: points have the wrong dimension");
  const auto za = factors_of(a);
  const auto zb = factors_of(b);
  for (std::size_t j = 0; j < za.size(); ++j) {
    require_inside(za[j], "a");
    require_inside(zb[j], "b");
  }

  ChainSearchResult best{0.0, {}};
  if (a.coords() == b.coords()) return best;
  best.bound = kInf;

  const Coords ca = a.coords();
  const Coords cb = b.coords();
  auto consider = [&](AnalyticChain chain) {
    try {
      if (max_coord_gap(chain_start(chain), ca) > kTolMetric ||
          max_coord_gap(chain_end(chain), cb) > kTolMetric)
        return;
      const double len = chain_length(chain);
      if (len < best.bound) {
        best.bound = len;
        best.chain = std::move(chain);
      }
    } catch (const Error& e) {
      if (e.code() != Errc::BrokenChain && e.code() != Errc::OnBoundary) throw;
    }
  };

  if (budget.max_links >= 1) {
    if (auto l = single_link(za, zb, budget.descent_iters))
      consider(AnalyticChain{{*l}});
  }
  if (budget.max_links >= 2) {
    for (std::size_t i = 0; i < budget.waypoints; ++i) {
      const auto c = waypoint(za, zb, i);
      auto l1 = single_link(za, c, budget.descent_iters);
      auto l2 = single_link(c, zb, budget.descent_iters);
      if (l1 && l2) consider(AnalyticChain{{*l1, *l2}});
    }
  }
  if (best.bound == kInf)
    throw Error(Errc::AuditInconclusive,
                "chain search found no admissible chain within budget");
  return best;
}

double kobayashi_upper_bound(const std::string& space_name, const Point& a,
                             const Point& b, const ChainSearchBudget& budget) {
  return kobayashi_search(space_name, a, b, budget).bound;
}

AuditReport audit_schwarz_pick(const MapSpec& spec, std::size_t pairs,
                               std::uint64_t seed, double tol) {
  if (pairs == 0)
    throw Error(Errc::BadParameter, "audit_schwarz_pick: pairs must be >= 1");
  SpaceSpec disk_spec;
  disk_spec.name = "poincare-disk";
  const Space space = make_space(disk_spec);
  const DynamicMap f = make_map(spec, space);
  const std::vector<Point> pts = space.sample(seed, 2 * pairs);
  const auto defects =
      kernels::parallel::evaluate_all(pairs, [&](std::size_t i) {
        Coords fa(2), fb(2);
        f.apply(pts[2 * i].view(), fa);
        f.apply(pts[2 * i + 1].view(), fb);
        return space.distance(fa, fb) -
               space.distance(pts[2 * i], pts[2 * i + 1]);
      });
  const std::size_t w = kernels::argmax(defects);
  AuditReport r;
  r.samples = pairs;
  r.max_defect = defects[w];
  r.min_defect = *std::min_element(defects.begin(), defects.end());
  r.witness_a = pts[2 * w];
  r.witness_b = pts[2 * w + 1];
  r.passed = r.max_defect <= tol;
  if (f.claims_isometry()) {
    r.passed = r.passed && r.min_defect >= -tol;
    r.note = "automorphism: equality required";
  } else if (r.max_defect < -tol) {
    r.note = "strict contraction on every sampled pair";
  }
  return r;
}

}  // namespace orbitlab
