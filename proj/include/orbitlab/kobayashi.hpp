#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "orbitlab/disk.hpp"
#include "orbitlab/maps.hpp"
#include "orbitlab/metric.hpp"

namespace orbitlab {

struct DiskPoint {
  double re = 0.0;
  double im = 0.0;

  disk::Complex z() const { return {re, im}; }
};

// Throws OnBoundary when either point is within kBoundaryGuard of |z| = 1.
double poincare_distance(const DiskPoint& z, const DiskPoint& w);

// A holomorphic map from the disk into the target, with target points in
// real coordinates (re, im per complex factor).
struct HoloMap {
  std::string name;
  std::function<Coords(disk::Complex)> eval;
};

struct ChainLink {
  DiskPoint z;
  DiskPoint w;
  HoloMap map;
};

struct AnalyticChain {
  std::vector<ChainLink> links;
};

// Sum of omega(z_j, w_j). BrokenChain when map_j(w_j) and
// map_{j+1}(z_{j+1}) differ by more than tol in some coordinate.
double chain_length(const AnalyticChain& chain, double tol = kTolMetric);

// First and last point of a nonempty chain in target coordinates.
Coords chain_start(const AnalyticChain& chain);
Coords chain_end(const AnalyticChain& chain);

struct ChainSearchBudget {
  std::size_t max_links = 2;
  std::size_t waypoints = 64;
  std::size_t descent_iters = 200;
};

struct ChainSearchResult {
  double bound = 0.0;
  AnalyticChain chain;
};

// Budgeted search over single-link coordinate-embedding chains
// zeta -> (phi_{a_j}(lambda_j zeta))_j and two-link chains through a fixed
// waypoint sequence. Raising any budget field never raises the bound.
ChainSearchResult kobayashi_search(const std::string& space_name,
                                   const Point& a, const Point& b,
                                   const ChainSearchBudget& budget = {});

double kobayashi_upper_bound(const std::string& space_name, const Point& a,
                             const Point& b,
                             const ChainSearchBudget& budget = {});

// omega(f z, f w) - omega(z, w) on seeded disk pairs; automorphisms must
// also keep |defect| <= tol.
AuditReport audit_schwarz_pick(const MapSpec& spec, std::size_t pairs,
                               std::uint64_t seed, double tol = kTolMetric);

}  // namespace orbitlab
