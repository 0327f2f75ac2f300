#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace orbitlab {

using Coords = std::vector<double>;

// Default tolerance for metric-axiom and nonexpansiveness audits.
inline constexpr double kTolMetric = 1e-9;

class Point {
 public:
  Point() = default;
  Point(Coords coords, std::string space_tag)
      : coords_(std::move(coords)), tag_(std::move(space_tag)) {}

  const Coords& coords() const noexcept { return coords_; }
  std::span<const double> view() const noexcept { return coords_; }
  const std::string& space_tag() const noexcept { return tag_; }
  std::size_t dimension() const noexcept { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }

  friend bool operator==(const Point&, const Point&) = default;

 private:
  Coords coords_;
  std::string tag_;
};

// {"name": string, "dim": int?, "params": object?}
struct SpaceSpec {
  std::string name;
  std::optional<int> dim;
  nlohmann::json params = nlohmann::json::object();
};

void from_json(const nlohmann::json& j, SpaceSpec& spec);
void to_json(nlohmann::json& j, const SpaceSpec& spec);

using DistanceFn =
    std::function<double(std::span<const double>, std::span<const double>)>;

// A proper metric space: distance oracle, base point, properness radius and
// a seeded sampler. Immutable; copies share one model.
class Space {
 public:
  struct Model {
    std::string name;
    std::string tag;
    std::size_t dimension = 0;
    DistanceFn distance;
    Coords base;
    // Radius up to which closed balls around the base are compact and
    // representable; nullopt means unbounded.
    std::optional<double> properness_radius;
    std::function<Coords(std::mt19937_64&)> draw;
    std::function<bool(std::span<const double>)> admits;
    // Moves ambient coordinates onto the nearest admissible point.
    std::function<void(std::span<double>)> project;
    // Metric size of a one-ulp perturbation of the coordinates at a point.
    std::function<double(std::span<const double>)> resolution;
    std::vector<Space> factors;
    bool discrete = false;
  };

  Space() = default;
  explicit Space(std::shared_ptr<const Model> model) : m_(std::move(model)) {}

  const std::string& name() const { return m_->name; }
  const std::string& tag() const { return m_->tag; }
  std::size_t dimension() const { return m_->dimension; }
  const std::optional<double>& properness_radius() const {
    return m_->properness_radius;
  }
  const std::vector<Space>& factors() const { return m_->factors; }
  bool discrete() const { return m_->discrete; }

  double distance(std::span<const double> a, std::span<const double> b) const {
    return m_->distance(a, b);
  }
  // Unchecked: callers guarantee both points belong to this space.
  double distance(const Point& a, const Point& b) const {
    return m_->distance(a.view(), b.view());
  }
  double resolution(std::span<const double> p) const {
    return m_->resolution(p);
  }

  bool admits(std::span<const double> coords) const;
  bool contains(const Point& p) const;
  // Throws SpaceMismatch or BadPoint.
  void require(const Point& p) const;

  // Validated construction of a member point.
  Point point(Coords coords) const;
  Point wrap(Coords coords) const { return Point(std::move(coords), tag()); }
  Point base_point() const { return wrap(m_->base); }

  void project(std::span<double> coords) const { m_->project(coords); }

  std::vector<Point> sample(std::uint64_t seed, std::size_t count) const;
  Point draw(std::mt19937_64& rng) const { return wrap(m_->draw(rng)); }

  bool same_as(const Space& other) const { return tag() == other.tag(); }

 private:
  std::shared_ptr<const Model> m_;
};

Space make_space(const SpaceSpec& spec);

struct BallCover {
  Space space;
  std::vector<Point> centers;
  double radius = 0.0;
};

// true iff distance(p, c) < cover.radius for some center c.
bool covered(const Point& p, const BallCover& cover);

// Greedy first-fit eps-net in input order: a point becomes a center unless
// some earlier center lies strictly within eps of it.
BallCover epsilon_net(const Space& space, std::span<const Point> points,
                      double eps);

// Index form used on orbits: returns the indices of the chosen centers.
std::vector<std::size_t> epsilon_net_indices(
    std::size_t count,
    const std::function<double(std::size_t, std::size_t)>& dist, double eps);

// Random point of the open ball B(center, radius) (not volume-uniform).
Point sample_in_ball(const Space& space, const Point& center, double radius,
                     std::mt19937_64& rng);

struct MetricAudit {
  std::size_t triples = 0;
  double max_symmetry_defect = 0.0;
  double max_identity_defect = 0.0;
  double max_triangle_defect = 0.0;
  std::size_t positivity_violations = 0;
  bool passed = false;
};

MetricAudit audit_metric_axioms(const Space& space, std::size_t triples,
                                std::uint64_t seed, double tol = kTolMetric);

// Geometric radius ladder: halvings of the properness radius when finite,
// otherwise 1, 2, 4, ..., 64.
std::vector<double> default_radii(const Space& space);

}  // namespace orbitlab
