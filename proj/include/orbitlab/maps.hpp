#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "orbitlab/metric.hpp"

namespace orbitlab {

// Tolerance for inverse searches; looser than kTolMetric because it
// compounds a root-find.
inline constexpr double kTolSolve = 1e-7;

// Number of sampled pairs in the audit every catalog map passes at
// construction.
inline constexpr std::size_t kConstructionAuditPairs = 256;

// Writes the image of `in` into `out`; the spans never alias.
using Rule = std::function<void(std::span<const double>, std::span<double>)>;

// {"name": string, "params": object}
struct MapSpec {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
};

void from_json(const nlohmann::json& j, MapSpec& spec);
void to_json(nlohmann::json& j, const MapSpec& spec);

struct MapClaims {
  bool isometry = false;
  bool surjective = false;
};

// A self-map of a Space. Immutable and safe to evaluate concurrently.
class DynamicMap {
 public:
  DynamicMap() = default;
  DynamicMap(std::string name, Space space, Rule rule, MapClaims claims = {});

  const std::string& name() const { return s_->name; }
  const Space& space() const { return s_->space; }
  bool claims_isometry() const { return s_->claims.isometry; }
  bool claims_surjective() const { return s_->claims.surjective; }
  const std::vector<DynamicMap>& factors() const { return s_->factors; }

  void apply(std::span<const double> in, std::span<double> out) const {
    s_->rule(in, out);
  }

  // Checked application; throws NumericEscape when the image leaves the
  // representable part of the space.
  Point operator()(const Point& p) const;

 private:
  friend DynamicMap product_map(std::vector<DynamicMap>, const Space&);

  struct State {
    std::string name;
    Space space;
    Rule rule;
    MapClaims claims;
    std::vector<DynamicMap> factors;
  };
  std::shared_ptr<const State> s_;
};

// Catalog construction. Runs a kConstructionAuditPairs-pair
// nonexpansiveness audit and throws NotNonexpansive when it fails.
DynamicMap make_map(const MapSpec& spec, const Space& space);

// outer o inner
DynamicMap compose(const DynamicMap& outer, const DynamicMap& inner);

// Componentwise map on a product space (or polydisc) whose factors match.
DynamicMap product_map(std::vector<DynamicMap> factors, const Space& space);

// f^k(p) by k repeated applications; f^(j+k)(p) == f^k(f^j(p)) bit for bit.
Point iterate(const DynamicMap& map, const Point& p, std::size_t k);

struct AuditReport {
  bool passed = false;
  std::size_t samples = 0;
  // Largest and smallest observed value of the audited defect.
  double max_defect = 0.0;
  double min_defect = 0.0;
  std::optional<Point> witness_a;
  std::optional<Point> witness_b;
  std::string note;
};

// defect = distance(f a, f b) - distance(a, b) over seeded random pairs.
AuditReport audit_nonexpansive(const DynamicMap& map, std::size_t pairs,
                               std::uint64_t seed, double tol = kTolMetric);

// Checks B(f(center), radius) is contained in f(B(center, radius)) on
// sampled probes by searching preimages numerically.
AuditReport audit_ball_surjectivity(const DynamicMap& map, const Point& center,
                                    double radius, std::size_t probes,
                                    std::uint64_t seed);

}  // namespace orbitlab
