#include "orbitlab/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "orbitlab/disk.hpp"
#include "orbitlab/error.hpp"
#include "orbitlab/kernels.hpp"

namespace orbitlab {

namespace {

constexpr double kUlp = std::numeric_limits<double>::epsilon();

// Balls of the hyperbolic models are representable in double precision up
// to omega(0, 1 - kBoundaryGuard) ~ 16.47; the catalog declares 16.
constexpr double kDiskProperness = 16.0;
constexpr double kCircleTolerance = 1e-9;

bool all_finite(std::span<const double> c) {
  return std::all_of(c.begin(), c.end(),
                     [](double v) { return std::isfinite(v); });
}

double euclid(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double l1(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

double max_abs(std::span<const double> c) {
  double m = 0.0;
  for (double v : c) m = std::max(m, std::abs(v));
  return m;
}

int read_dim(const SpaceSpec& spec, int fallback) {
  const int dim = spec.dim.value_or(fallback);
  if (dim <= 0)
    throw Error(Errc::BadParameter,
                spec.name + ": dim must be positive, got " +
                    std::to_string(dim));
  return dim;
}

Space finish(Space::Model m) {
  return Space(std::make_shared<const Space::Model>(std::move(m)));
}

Space euclidean(int dim) {
  Space::Model m;
  m.name = "euclidean";
  m.tag = "euclidean(" + std::to_string(dim) + ")";
  m.dimension = static_cast<std::size_t>(dim);
  m.distance = euclid;
  m.base.assign(m.dimension, 0.0);
  m.draw = [n = m.dimension](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    Coords c(n);
    for (double& v : c) v = u(rng);
    return c;
  };
  m.admits = all_finite;
  m.project = [](std::span<double>) {};
  m.resolution = [](std::span<const double> p) {
    return 4.0 * kUlp * (1.0 + max_abs(p)) * std::sqrt(double(p.size()));
  };
  return finish(std::move(m));
}

Space integer_lattice(int dim) {
  Space::Model m;
  m.name = "integer-lattice";
  m.tag = "integer-lattice(" + std::to_string(dim) + ")";
  m.dimension = static_cast<std::size_t>(dim);
  m.distance = l1;
  m.base.assign(m.dimension, 0.0);
  m.draw = [n = m.dimension](std::mt19937_64& rng) {
    std::uniform_int_distribution<int> u(-16, 16);
    Coords c(n);
    for (double& v : c) v = u(rng);
    return c;
  };
  m.admits = [](std::span<const double> c) {
    return std::all_of(c.begin(), c.end(), [](double v) {
      return std::isfinite(v) && v == std::round(v);
    });
  };
  m.project = [](std::span<double> c) {
    for (double& v : c) v = std::round(v);
  };
  m.resolution = [](std::span<const double>) { return 0.0; };
  m.discrete = true;
  return finish(std::move(m));
}

Space circle() {
  Space::Model m;
  m.name = "circle";
  m.tag = "circle";
  m.dimension = 2;
  m.distance = euclid;
  m.base = {1.0, 0.0};
  m.draw = [](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    const double t = u(rng);
    return Coords{std::cos(t), std::sin(t)};
  };
  m.admits = [](std::span<const double> c) {
    return all_finite(c) &&
           std::abs(std::hypot(c[0], c[1]) - 1.0) <= kCircleTolerance;
  };
  m.project = [](std::span<double> c) {
    const double r = std::hypot(c[0], c[1]);
    if (r == 0.0 || !std::isfinite(r)) {
      c[0] = 1.0;
      c[1] = 0.0;
    } else {
      c[0] /= r;
      c[1] /= r;
    }
  };
  m.resolution = [](std::span<const double>) { return 4.0 * kUlp; };
  return finish(std::move(m));
}

void disk_project(std::span<double> c) {
  const double r = std::hypot(c[0], c[1]);
  constexpr double limit = 1.0 - 1e-9;
  if (!std::isfinite(r)) {
    c[0] = 0.0;
    c[1] = 0.0;
  } else if (r >= limit) {
    c[0] *= limit / r;
    c[1] *= limit / r;
  }
}

double disk_resolution(double x, double y) {
  return 2.0 * kUlp / disk::one_minus_abs2(x, y);
}

Coords disk_draw(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = 0.95 * std::sqrt(u(rng));
  const double t = 2.0 * std::numbers::pi * u(rng);
  return Coords{r * std::cos(t), r * std::sin(t)};
}

Space poincare_disk() {
  Space::Model m;
  m.name = "poincare-disk";
  m.tag = "poincare-disk";
  m.dimension = 2;
  m.distance = [](std::span<const double> a, std::span<const double> b) {
    return disk::omega(a[0], a[1], b[0], b[1]);
  };
  m.base = {0.0, 0.0};
  m.properness_radius = kDiskProperness;
  m.draw = disk_draw;
  m.admits = [](std::span<const double> c) { return disk::inside(c[0], c[1]); };
  m.project = disk_project;
  m.resolution = [](std::span<const double> p) {
    return disk_resolution(p[0], p[1]);
  };
  return finish(std::move(m));
}

Space polydisc(int n) {
  Space::Model m;
  m.name = "polydisc";
  m.tag = "polydisc(" + std::to_string(n) + ")";
  m.dimension = 2 * static_cast<std::size_t>(n);
  m.distance = [](std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i + 1 < a.size(); i += 2)
      d = std::max(d, disk::omega(a[i], a[i + 1], b[i], b[i + 1]));
    return d;
  };
  m.base.assign(m.dimension, 0.0);
  m.properness_radius = kDiskProperness;
  m.draw = [n](std::mt19937_64& rng) {
    Coords c;
    for (int i = 0; i < n; ++i) {
      const Coords z = disk_draw(rng);
      c.insert(c.end(), z.begin(), z.end());
    }
    return c;
  };
  m.admits = [](std::span<const double> c) {
    for (std::size_t i = 0; i + 1 < c.size(); i += 2)
      if (!disk::inside(c[i], c[i + 1])) return false;
    return true;
  };
  m.project = [](std::span<double> c) {
    for (std::size_t i = 0; i + 1 < c.size(); i += 2)
      disk_project(c.subspan(i, 2));
  };
  m.resolution = [](std::span<const double> p) {
    double r = 0.0;
    for (std::size_t i = 0; i + 1 < p.size(); i += 2)
      r = std::max(r, disk_resolution(p[i], p[i + 1]));
    return r;
  };
  const Space factor = poincare_disk();
  m.factors.assign(static_cast<std::size_t>(n), factor);
  return finish(std::move(m));
}

Space half_line() {
  Space::Model m;
  m.name = "half-line";
  m.tag = "half-line";
  m.dimension = 1;
  m.distance = [](std::span<const double> a, std::span<const double> b) {
    return std::abs(a[0] - b[0]);
  };
  m.base = {0.0};
  m.draw = [](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 8.0);
    return Coords{u(rng)};
  };
  m.admits = [](std::span<const double> c) {
    return std::isfinite(c[0]) && c[0] >= 0.0;
  };
  m.project = [](std::span<double> c) {
    if (!(c[0] >= 0.0)) c[0] = 0.0;
  };
  m.resolution = [](std::span<const double> p) {
    return 4.0 * kUlp * (1.0 + std::abs(p[0]));
  };
  return finish(std::move(m));
}

// Sup-metric product; factor coordinates are concatenated.
Space product(std::vector<Space> factors) {
  if (factors.empty())
    throw Error(Errc::BadParameter, "product: needs at least one factor");
  Space::Model m;
  m.name = "product";
  m.tag = "product[";
  std::vector<std::size_t> offsets;
  std::optional<double> properness;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (i) m.tag += ",";
    m.tag += factors[i].tag();
    offsets.push_back(m.dimension);
    m.dimension += factors[i].dimension();
    const Coords b = factors[i].base_point().coords();
    m.base.insert(m.base.end(), b.begin(), b.end());
    if (const auto& r = factors[i].properness_radius())
      properness = properness ? std::min(*properness, *r) : *r;
  }
  m.tag += "]";
  m.properness_radius = properness;
  offsets.push_back(m.dimension);

  auto slice = [offsets](std::span<const double> c, std::size_t i) {
    return c.subspan(offsets[i], offsets[i + 1] - offsets[i]);
  };
  m.distance = [factors, slice](std::span<const double> a,
                                std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < factors.size(); ++i)
      d = std::max(d, factors[i].distance(slice(a, i), slice(b, i)));
    return d;
  };
  m.draw = [factors](std::mt19937_64& rng) {
    Coords c;
    for (const Space& f : factors) {
      const Point p = f.draw(rng);
      c.insert(c.end(), p.coords().begin(), p.coords().end());
    }
    return c;
  };
  m.admits = [factors, slice](std::span<const double> c) {
    for (std::size_t i = 0; i < factors.size(); ++i)
      if (!factors[i].admits(slice(c, i))) return false;
    return true;
  };
  m.project = [factors, offsets](std::span<double> c) {
    for (std::size_t i = 0; i < factors.size(); ++i)
      factors[i].project(c.subspan(offsets[i], offsets[i + 1] - offsets[i]));
  };
  m.resolution = [factors, slice](std::span<const double> p) {
    double r = 0.0;
    for (std::size_t i = 0; i < factors.size(); ++i)
      r = std::max(r, factors[i].resolution(slice(p, i)));
    return r;
  };
  m.discrete = std::all_of(factors.begin(), factors.end(),
                           [](const Space& f) { return f.discrete(); });
  m.factors = std::move(factors);
  return finish(std::move(m));
}

}  // namespace

void from_json(const nlohmann::json& j, SpaceSpec& spec) {
  if (!j.is_object())
    throw Error(Errc::ConfigError, "space: expected an object");
  if (!j.contains("name") || !j.at("name").is_string())
    throw Error(Errc::ConfigError, "space.name: expected a string");
  spec.name = j.at("name").get<std::string>();
  spec.dim.reset();
  if (j.contains("dim")) {
    if (!j.at("dim").is_number_integer())
      throw Error(Errc::ConfigError, "space.dim: expected an integer");
    spec.dim = j.at("dim").get<int>();
  }
  spec.params = j.value("params", nlohmann::json::object());
  if (!spec.params.is_object())
    throw Error(Errc::ConfigError, "space.params: expected an object");
}

void to_json(nlohmann::json& j, const SpaceSpec& spec) {
  j = nlohmann::json{{"name", spec.name}};
  if (spec.dim) j["dim"] = *spec.dim;
  if (!spec.params.empty()) j["params"] = spec.params;
}

Space make_space(const SpaceSpec& spec) {
  const std::string& n = spec.name;
  if (n == "euclidean") return euclidean(read_dim(spec, 1));
  if (n == "integer-lattice") return integer_lattice(read_dim(spec, 1));
  if (n == "circle") return circle();
  if (n == "poincare-disk") return poincare_disk();
  if (n == "polydisc") return polydisc(read_dim(spec, 1));
  if (n == "half-line") return half_line();
  if (n == "product") {
    const auto it = spec.params.find("factors");
    if (it == spec.params.end() || !it->is_array() || it->empty())
      throw Error(Errc::BadParameter,
                  "product: params.factors must be a nonempty array");
    std::vector<Space> factors;
    for (const auto& f : *it) factors.push_back(make_space(f.get<SpaceSpec>()));
    return product(std::move(factors));
  }
  throw Error(Errc::UnknownSpace, "'" + n + "'");
}

bool Space::admits(std::span<const double> coords) const {
  return coords.size() == dimension() && m_->admits(coords);
}

bool Space::contains(const Point& p) const {
  return p.space_tag() == tag() && admits(p.view());
}

void Space::require(const Point& p) const {
  if (p.space_tag() != tag())
    throw Error(Errc::SpaceMismatch,
                "point of '" + p.space_tag() + "' used in '" + tag() + "'");
  if (!admits(p.view()))
    throw Error(Errc::BadPoint, "coordinates not admissible in " + tag());
}

Point Space::point(Coords coords) const {
  if (coords.size() != dimension())
    throw Error(Errc::BadPoint, tag() + " expects " +
                                    std::to_string(dimension()) +
                                    " coordinates, got " +
                                    std::to_string(coords.size()));
  if (!m_->admits(coords))
    throw Error(Errc::BadPoint, "coordinates not admissible in " + tag());
  return wrap(std::move(coords));
}

std::vector<Point> Space::sample(std::uint64_t seed, std::size_t count) const {
  std::mt19937_64 rng(seed);
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(draw(rng));
  return out;
}

bool covered(const Point& p, const BallCover& cover) {
  cover.space.require(p);
  for (const Point& c : cover.centers) {
    if (c.space_tag() != cover.space.tag())
      throw Error(Errc::SpaceMismatch, "cover center outside its space");
    if (cover.space.distance(p, c) < cover.radius) return true;
  }
  return false;
}

std::vector<std::size_t> epsilon_net_indices(
    std::size_t count,
    const std::function<double(std::size_t, std::size_t)>& dist, double eps) {
  std::vector<std::size_t> centers;
  for (std::size_t i = 0; i < count; ++i) {
    bool near = false;
    for (std::size_t c : centers) {
      if (dist(i, c) < eps) {
        near = true;
        break;
      }
    }
    if (!near) centers.push_back(i);
  }
  return centers;
}

BallCover epsilon_net(const Space& space, std::span<const Point> points,
                      double eps) {
  if (points.empty()) throw Error(Errc::EmptyInput, "epsilon_net: no points");
  if (!(eps > 0.0))
    throw Error(Errc::BadParameter, "epsilon_net: eps must be positive");
  for (const Point& p : points) {
    if (p.space_tag() != space.tag())
      throw Error(Errc::SpaceMismatch, "epsilon_net: mixed spaces");
  }
  const auto idx = epsilon_net_indices(
      points.size(),
      [&](std::size_t i, std::size_t j) {
        return space.distance(points[i], points[j]);
      },
      eps);
  BallCover cover{space, {}, eps};
  for (std::size_t i : idx) cover.centers.push_back(points[i]);
  return cover;
}

Point sample_in_ball(const Space& space, const Point& center, double radius,
                     std::mt19937_64& rng) {
  space.require(center);
  if (!(radius > 0.0))
    throw Error(Errc::BadParameter, "sample_in_ball: radius must be positive");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = space.dimension();

  for (int attempt = 0; attempt < 64; ++attempt) {
    Coords dir(n);
    double norm = 0.0;
    for (double& v : dir) {
      v = gauss(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    for (double& v : dir) v /= norm;

    const double target = radius * unit(rng);
    auto along = [&](double t) {
      Coords c = center.coords();
      for (std::size_t i = 0; i < n; ++i) c[i] += t * dir[i];
      space.project(c);
      return c;
    };
    auto reach = [&](double t) {
      return space.distance(center.view(), along(t));
    };

    // Bracket the step length whose image sits at `target`, then bisect.
    double lo = 0.0;
    double hi = 1e-6;
    while (hi < 1e8 && reach(hi) < target) {
      lo = hi;
      hi *= 2.0;
    }
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (reach(mid) < target)
        lo = mid;
      else
        hi = mid;
    }
    Coords c = along(lo);
    if (space.admits(c) && space.distance(center.view(), c) < radius)
      return space.wrap(std::move(c));
  }
  return center;
}

MetricAudit audit_metric_axioms(const Space& space, std::size_t triples,
                                std::uint64_t seed, double tol) {
  const std::vector<Point> pts = space.sample(seed, 3 * triples);
  auto at = [&](std::size_t t, std::size_t k) -> const Point& {
    return pts[3 * t + k];
  };
  auto sym = kernels::parallel::evaluate_all(triples, [&](std::size_t t) {
    return std::abs(space.distance(at(t, 0), at(t, 1)) -
                    space.distance(at(t, 1), at(t, 0)));
  });
  auto ident = kernels::parallel::evaluate_all(triples, [&](std::size_t t) {
    return std::abs(space.distance(at(t, 0), at(t, 0)));
  });
  auto tri = kernels::parallel::evaluate_all(triples, [&](std::size_t t) {
    return space.distance(at(t, 0), at(t, 2)) -
           space.distance(at(t, 0), at(t, 1)) -
           space.distance(at(t, 1), at(t, 2));
  });
  auto pos = kernels::parallel::evaluate_all(triples, [&](std::size_t t) {
    double sep = 0.0;
    for (std::size_t i = 0; i < space.dimension(); ++i)
      sep = std::max(sep, std::abs(at(t, 0)[i] - at(t, 1)[i]));
    return (sep > tol && !(space.distance(at(t, 0), at(t, 1)) > 0.0)) ? 1.0
                                                                       : 0.0;
  });

  MetricAudit a;
  a.triples = triples;
  for (std::size_t t = 0; t < triples; ++t) {
    a.max_symmetry_defect = std::max(a.max_symmetry_defect, sym[t]);
    a.max_identity_defect = std::max(a.max_identity_defect, ident[t]);
    a.max_triangle_defect = std::max(a.max_triangle_defect, tri[t]);
    if (pos[t] > 0.0) ++a.positivity_violations;
  }
  a.passed = a.max_symmetry_defect <= tol && a.max_identity_defect <= tol &&
             a.max_triangle_defect <= tol && a.positivity_violations == 0;
  return a;
}

std::vector<double> default_radii(const Space& space) {
  std::vector<double> r;
  if (const auto& p = space.properness_radius()) {
    for (int k = 6; k >= 0; --k) r.push_back(*p / double(1 << k));
  } else {
    for (int k = 0; k <= 6; ++k) r.push_back(double(1 << k));
  }
  return r;
}

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::UnknownSpace: return "UnknownSpace";
    case Errc::BadParameter: return "BadParameter";
    case Errc::BadPoint: return "BadPoint";
    case Errc::SpaceMismatch: return "SpaceMismatch";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::UnknownMap: return "UnknownMap";
    case Errc::IncompatibleSpace: return "IncompatibleSpace";
    case Errc::NotNonexpansive: return "NotNonexpansive";
    case Errc::NumericEscape: return "NumericEscape";
    case Errc::AuditInconclusive: return "AuditInconclusive";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::NotInjective: return "NotInjective";
    case Errc::WrongMonotonicity: return "WrongMonotonicity";
    case Errc::NotShiftMonotone: return "NotShiftMonotone";
    case Errc::CoverFailure: return "CoverFailure";
    case Errc::PreconditionUnmet: return "PreconditionUnmet";
    case Errc::NoRecurrentAnchor: return "NoRecurrentAnchor";
    case Errc::InternalContradiction: return "InternalContradiction";
    case Errc::InvalidSemigroup: return "InvalidSemigroup";
    case Errc::OnBoundary: return "OnBoundary";
    case Errc::BrokenChain: return "BrokenChain";
    case Errc::UnsupportedSpace: return "UnsupportedSpace";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace orbitlab
