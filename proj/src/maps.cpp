#include "orbitlab/maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "orbitlab/disk.hpp"
#include "orbitlab/error.hpp"
#include "orbitlab/kernels.hpp"

namespace orbitlab {

namespace {

using disk::Complex;

double number_param(const MapSpec& spec, const char* key,
                    std::optional<double> fallback = std::nullopt) {
  const auto it = spec.params.find(key);
  if (it == spec.params.end()) {
    if (fallback) return *fallback;
    throw Error(Errc::BadParameter,
                spec.name + ": missing numeric param '" + key + "'");
  }
  if (!it->is_number())
    throw Error(Errc::BadParameter,
                spec.name + ": param '" + key + "' must be a number");
  return it->get<double>();
}

Complex as_complex(const nlohmann::json& v, const std::string& what) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw Error(Errc::BadParameter, what + " must be a number or [re, im]");
}

Complex complex_param(const MapSpec& spec, const char* key,
                      std::optional<Complex> fallback = std::nullopt) {
  const auto it = spec.params.find(key);
  if (it == spec.params.end()) {
    if (fallback) return *fallback;
    throw Error(Errc::BadParameter,
                spec.name + ": missing param '" + key + "'");
  }
  return as_complex(*it, spec.name + "." + key);
}

// Accepts a scalar (broadcast) or an array of length `dim`.
Coords vector_param(const MapSpec& spec, const char* key, std::size_t dim) {
  const auto it = spec.params.find(key);
  if (it == spec.params.end())
    throw Error(Errc::BadParameter,
                spec.name + ": missing param '" + key + "'");
  if (it->is_number()) return Coords(dim, it->get<double>());
  if (!it->is_array() || it->size() != dim)
    throw Error(Errc::BadParameter, spec.name + "." + key +
                                        " must be a number or an array of " +
                                        std::to_string(dim) + " numbers");
  Coords v;
  for (const auto& x : *it) {
    if (!x.is_number())
      throw Error(Errc::BadParameter, spec.name + "." + key + ": not numeric");
    v.push_back(x.get<double>());
  }
  return v;
}

double angle_param(const MapSpec& spec) {
  const bool has_theta = spec.params.contains("theta");
  const bool has_turns = spec.params.contains("turns");
  if (has_theta && has_turns)
    throw Error(Errc::BadParameter,
                spec.name + ": give either 'theta' or 'turns', not both");
  if (has_turns) return 2.0 * std::numbers::pi * number_param(spec, "turns");
  return number_param(spec, "theta", 0.0);
}

void require_space(const MapSpec& spec, const Space& space,
                   std::initializer_list<const char*> names) {
  for (const char* n : names)
    if (space.name() == n) return;
  throw Error(Errc::IncompatibleSpace,
              spec.name + " is not defined on " + space.tag());
}

Complex at(std::span<const double> c) { return {c[0], c[1]}; }
void put(std::span<double> c, Complex z) {
  c[0] = z.real();
  c[1] = z.imag();
}

// Disk self-map as a complex function.
DynamicMap disk_map(std::string name, const Space& space,
                    std::function<Complex(Complex)> f, MapClaims claims) {
  Rule rule = [f = std::move(f)](std::span<const double> in,
                                 std::span<double> out) { put(out, f(at(in))); };
  return DynamicMap(std::move(name), space, std::move(rule), claims);
}

DynamicMap build(const MapSpec& spec, const Space& space);

DynamicMap build_product(const MapSpec& spec, const Space& space) {
  if (space.factors().empty())
    throw Error(Errc::IncompatibleSpace,
                "product map needs a product space or polydisc, got " +
                    space.tag());
  const auto it = spec.params.find("factors");
  if (it == spec.params.end() || !it->is_array())
    throw Error(Errc::BadParameter, "product: params.factors must be an array");
  if (it->size() != space.factors().size())
    throw Error(Errc::BadParameter,
                "product: expected " + std::to_string(space.factors().size()) +
                    " factor maps, got " + std::to_string(it->size()));
  std::vector<DynamicMap> factors;
  for (std::size_t i = 0; i < it->size(); ++i)
    factors.push_back(build((*it)[i].get<MapSpec>(), space.factors()[i]));
  return product_map(std::move(factors), space);
}

DynamicMap build(const MapSpec& spec, const Space& space) {
  const std::string& n = spec.name;
  const std::size_t dim = space.dimension();

  if (n == "identity") {
    return DynamicMap(
        "identity", space,
        [](std::span<const double> in, std::span<double> out) {
          std::copy(in.begin(), in.end(), out.begin());
        },
        {true, true});
  }

  if (n == "scale") {
    require_space(spec, space, {"euclidean", "half-line"});
    const double c = number_param(spec, "c");
    if (space.name() == "half-line" && c < 0.0)
      throw Error(Errc::BadParameter,
                  "scale: c must be nonnegative on the half-line");
    return DynamicMap(
        "scale", space,
        [c](std::span<const double> in, std::span<double> out) {
          for (std::size_t i = 0; i < in.size(); ++i) out[i] = c * in[i];
        },
        {std::abs(c) == 1.0, c != 0.0 && (space.name() == "euclidean" ||
                                          c == 1.0)});
  }

  if (n == "affine") {
    require_space(spec, space, {"euclidean"});
    const double c = number_param(spec, "c");
    const Coords offset = spec.params.contains("offset")
                              ? vector_param(spec, "offset", dim)
                              : Coords(dim, 0.0);
    return DynamicMap(
        "affine", space,
        [c, offset](std::span<const double> in, std::span<double> out) {
          for (std::size_t i = 0; i < in.size(); ++i)
            out[i] = c * in[i] + offset[i];
        },
        {std::abs(c) == 1.0, c != 0.0});
  }

  if (n == "translation") {
    require_space(spec, space, {"euclidean", "integer-lattice"});
    const Coords v = vector_param(spec, "v", dim);
    if (space.name() == "integer-lattice" &&
        std::any_of(v.begin(), v.end(),
                    [](double x) { return x != std::round(x); }))
      throw Error(Errc::BadParameter,
                  "translation: lattice translations need integer v");
    return DynamicMap(
        "translation", space,
        [v](std::span<const double> in, std::span<double> out) {
          for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] + v[i];
        },
        {true, true});
  }

  if (n == "rotation") {
    require_space(spec, space, {"circle"});
    const double theta = angle_param(spec);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return DynamicMap(
        "rotation", space,
        [c, s](std::span<const double> in, std::span<double> out) {
          const double x = c * in[0] - s * in[1];
          const double y = s * in[0] + c * in[1];
          const double r = std::hypot(x, y);
          out[0] = x / r;
          out[1] = y / r;
        },
        {true, true});
  }

  if (n == "mobius-elliptic") {
    require_space(spec, space, {"poincare-disk"});
    const double theta = angle_param(spec);
    const Complex a = complex_param(spec, "a", Complex{});
    if (!disk::inside(a))
      throw Error(Errc::BadParameter, "mobius-elliptic: |a| must be < 1");
    const Complex turn = std::polar(1.0, theta);
    return disk_map(
        "mobius-elliptic", space,
        [a, turn](Complex z) {
          return disk::from_origin(a, turn * disk::to_origin(a, z));
        },
        {true, true});
  }

  if (n == "mobius-hyperbolic") {
    require_space(spec, space, {"poincare-disk"});
    const Complex a = complex_param(spec, "a");
    if (!disk::inside(a))
      throw Error(Errc::BadParameter, "mobius-hyperbolic: |a| must be < 1");
    return disk_map(
        "mobius-hyperbolic", space,
        [a](Complex z) { return disk::from_origin(a, z); }, {true, true});
  }

  if (n == "mobius-parabolic") {
    require_space(spec, space, {"poincare-disk"});
    // Cayley conjugate of the half-plane translation w -> w + b; fixes 1.
    const double b = number_param(spec, "b", 1.0);
    const Complex two_i{0.0, 2.0};
    return disk_map(
        "mobius-parabolic", space,
        [b, two_i](Complex z) {
          return ((two_i - b) * z + b) / (-b * z + two_i + b);
        },
        {true, true});
  }

  if (n == "blaschke") {
    require_space(spec, space, {"poincare-disk"});
    const auto it = spec.params.find("zeros");
    if (it == spec.params.end() || !it->is_array() || it->empty())
      throw Error(Errc::BadParameter,
                  "blaschke: params.zeros must be a nonempty array");
    std::vector<Complex> zeros;
    for (const auto& z : *it) {
      zeros.push_back(as_complex(z, "blaschke.zeros[]"));
      if (!disk::inside(zeros.back()))
        throw Error(Errc::BadParameter, "blaschke: zeros must lie in the disk");
    }
    const Complex turn = std::polar(1.0, angle_param(spec));
    const bool automorphism = zeros.size() == 1;
    return disk_map(
        "blaschke", space,
        [zeros, turn](Complex z) {
          Complex w = turn;
          for (const Complex& a : zeros) w *= disk::to_origin(a, z);
          return w;
        },
        {automorphism, automorphism});
  }

  if (n == "product") return build_product(spec, space);

  throw Error(Errc::UnknownMap, "'" + n + "'");
}

}  // namespace

void from_json(const nlohmann::json& j, MapSpec& spec) {
  if (!j.is_object()) throw Error(Errc::ConfigError, "map: expected an object");
  if (!j.contains("name") || !j.at("name").is_string())
    throw Error(Errc::ConfigError, "map.name: expected a string");
  spec.name = j.at("name").get<std::string>();
  spec.params = j.value("params", nlohmann::json::object());
  if (!spec.params.is_object())
    throw Error(Errc::ConfigError, "map.params: expected an object");
}

void to_json(nlohmann::json& j, const MapSpec& spec) {
  j = nlohmann::json{{"name", spec.name}, {"params", spec.params}};
}

DynamicMap::DynamicMap(std::string name, Space space, Rule rule,
                       MapClaims claims)
    : s_(std::make_shared<const State>(
          State{std::move(name), std::move(space), std::move(rule), claims, {}})) {}

Point DynamicMap::operator()(const Point& p) const {
  space().require(p);
  Coords out(p.dimension());
  apply(p.view(), out);
  if (!space().admits(out))
    throw Error(Errc::NumericEscape,
                name() + ": image left the representable part of " +
                    space().tag());
  return space().wrap(std::move(out));
}

DynamicMap make_map(const MapSpec& spec, const Space& space) {
  DynamicMap map = build(spec, space);

  const std::vector<Point> probe = space.sample(0x5eed, 64);
  for (const Point& p : probe) {
    Coords out(p.dimension());
    map.apply(p.view(), out);
    if (!space.admits(out))
      throw Error(Errc::BadParameter,
                  spec.name + " does not map " + space.tag() + " into itself");
  }

  const AuditReport audit =
      audit_nonexpansive(map, kConstructionAuditPairs, 0);
  if (!audit.passed)
    throw Error(Errc::NotNonexpansive,
                spec.name + ": expansion defect " +
                    std::to_string(audit.max_defect) + " on sampled pair");
  return map;
}

DynamicMap compose(const DynamicMap& outer, const DynamicMap& inner) {
  if (!outer.space().same_as(inner.space()))
    throw Error(Errc::SpaceMismatch, "compose: maps act on different spaces");
  Rule rule = [outer, inner](std::span<const double> in,
                             std::span<double> out) {
    Coords mid(in.size());
    inner.apply(in, mid);
    outer.apply(mid, out);
  };
  return DynamicMap(
      outer.name() + "∘" + inner.name(), outer.space(), std::move(rule),
      {outer.claims_isometry() && inner.claims_isometry(),
       outer.claims_surjective() && inner.claims_surjective()});
}

DynamicMap product_map(std::vector<DynamicMap> factors, const Space& space) {
  if (factors.size() != space.factors().size())
    throw Error(Errc::IncompatibleSpace,
                "product_map: factor count does not match " + space.tag());
  std::vector<std::size_t> offsets{0};
  MapClaims claims{true, true};
  std::string name = "product(";
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (!factors[i].space().same_as(space.factors()[i]))
      throw Error(Errc::IncompatibleSpace,
                  "product_map: factor " + std::to_string(i) + " acts on " +
                      factors[i].space().tag());
    offsets.push_back(offsets.back() + space.factors()[i].dimension());
    claims.isometry = claims.isometry && factors[i].claims_isometry();
    claims.surjective = claims.surjective && factors[i].claims_surjective();
    name += (i ? "," : "") + factors[i].name();
  }
  name += ")";
  Rule rule = [factors, offsets](std::span<const double> in,
                                 std::span<double> out) {
    for (std::size_t i = 0; i < factors.size(); ++i) {
      const std::size_t len = offsets[i + 1] - offsets[i];
      factors[i].apply(in.subspan(offsets[i], len),
                       out.subspan(offsets[i], len));
    }
  };
  DynamicMap map(std::move(name), space, std::move(rule), claims);
  auto state = std::make_shared<DynamicMap::State>(*map.s_);
  state->factors = std::move(factors);
  map.s_ = std::move(state);
  return map;
}

Point iterate(const DynamicMap& map, const Point& p, std::size_t k) {
  map.space().require(p);
  Coords a = p.coords();
  Coords b(a.size());
  for (std::size_t step = 0; step < k; ++step) {
    map.apply(a, b);
    if (!map.space().admits(b))
      throw Error(Errc::NumericEscape,
                  map.name() + ": iterate " + std::to_string(step + 1) +
                      " left the representable part of " +
                      map.space().tag());
    a.swap(b);
  }
  return map.space().wrap(std::move(a));
}

AuditReport audit_nonexpansive(const DynamicMap& map, std::size_t pairs,
                               std::uint64_t seed, double tol) {
  if (pairs == 0)
    throw Error(Errc::BadParameter, "audit_nonexpansive: pairs must be >= 1");
  const Space& space = map.space();
  const std::vector<Point> pts = space.sample(seed, 2 * pairs);
  const auto defects =
      kernels::parallel::evaluate_all(pairs, [&](std::size_t i) {
        const Point& a = pts[2 * i];
        const Point& b = pts[2 * i + 1];
        Coords fa(a.dimension()), fb(b.dimension());
        map.apply(a.view(), fa);
        map.apply(b.view(), fb);
        return space.distance(fa, fb) - space.distance(a, b);
      });
  const std::size_t worst = kernels::argmax(defects);

  AuditReport r;
  r.samples = pairs;
  r.max_defect = defects[worst];
  r.min_defect = *std::min_element(defects.begin(), defects.end());
  r.witness_a = pts[2 * worst];
  r.witness_b = pts[2 * worst + 1];
  r.passed = r.max_defect <= tol;
  return r;
}

namespace {

// Compass search on coordinates for argmin_p distance(f(p), target).
struct InverseSearch {
  const DynamicMap& map;
  const Point& target;
  std::size_t evaluations = 0;

  double objective(std::span<const double> p) {
    ++evaluations;
    Coords fp(p.size());
    map.apply(p, fp);
    if (!map.space().admits(fp)) return std::numeric_limits<double>::infinity();
    return map.space().distance(fp, target.view());
  }

  std::pair<Coords, double> run(Coords start, double step,
                                std::size_t budget) {
    const Space& space = map.space();
    space.project(start);
    double best = objective(start);
    const double floor = space.discrete() ? 1.0 : 1e-16;
    while (best > 0.1 * kTolSolve && step >= floor && evaluations < budget) {
      bool moved = false;
      for (std::size_t i = 0; i < start.size() && !moved; ++i) {
        for (double sign : {1.0, -1.0}) {
          Coords trial = start;
          trial[i] += sign * step;
          space.project(trial);
          if (!space.admits(trial)) continue;
          const double v = objective(trial);
          if (v < best) {
            best = v;
            start = std::move(trial);
            moved = true;
            break;
          }
        }
      }
      if (!moved) step *= 0.5;
    }
    return {std::move(start), best};
  }
};

}  // namespace

AuditReport audit_ball_surjectivity(const DynamicMap& map, const Point& center,
                                    double radius, std::size_t probes,
                                    std::uint64_t seed) {
  if (!map.claims_isometry() || !map.claims_surjective())
    throw Error(Errc::PreconditionUnmet,
                map.name() + " does not claim to be a surjective isometry");
  const Space& space = map.space();
  space.require(center);
  if (!(radius > 0.0))
    throw Error(Errc::BadParameter, "audit_ball_surjectivity: radius <= 0");
  if (const auto& pr = space.properness_radius(); pr && radius > *pr)
    throw Error(Errc::BadParameter,
                "audit_ball_surjectivity: radius exceeds properness radius");

  const Point image = map(center);
  std::mt19937_64 rng(seed);
  constexpr std::size_t kBudget = 200000;

  AuditReport r;
  r.samples = probes;
  r.passed = true;
  r.max_defect = 0.0;
  r.min_defect = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < probes; ++i) {
    const Point q = sample_in_ball(space, image, radius, rng);

    // Seeds: the probe itself, the center, and a few points of the ball.
    std::vector<Coords> starts{q.coords(), center.coords()};
    for (int s = 0; s < 6; ++s)
      starts.push_back(sample_in_ball(space, center, radius, rng).coords());

    InverseSearch search{map, q};
    Coords best_p;
    double best = std::numeric_limits<double>::infinity();
    for (const Coords& s : starts) {
      const double v = search.objective(s);
      if (v < best) {
        best = v;
        best_p = s;
      }
    }
    const double step = space.discrete() ? std::exp2(std::ceil(std::log2(
                                               std::max(1.0, radius))))
                                         : 0.5;
    auto [p, residual] = search.run(best_p, step, kBudget);
    if (residual > kTolSolve)
      throw Error(Errc::AuditInconclusive,
                  "preimage search stalled at residual " +
                      std::to_string(residual) + " on probe " +
                      std::to_string(i));
    const double reach = space.distance(p, center.view());
    r.max_defect = std::max(r.max_defect, residual);
    r.min_defect = std::min(r.min_defect, residual);
    if (!(reach < radius + kTolSolve)) {
      if (r.passed) {
        r.witness_a = space.wrap(p);
        r.witness_b = q;
        r.note = "preimage at distance " + std::to_string(reach) +
                 " from center";
      }
      r.passed = false;
    }
  }
  if (probes == 0) r.min_defect = 0.0;
  return r;
}

}  // namespace orbitlab
