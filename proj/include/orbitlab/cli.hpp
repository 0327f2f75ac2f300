#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "orbitlab/error.hpp"
#include "orbitlab/maps.hpp"
#include "orbitlab/metric.hpp"

namespace orbitlab::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum Exit : int {
  kOk = 0,
  kConfig = 1,
  kBudget = 2,
  kCalkaPrecondition = 3,
  kNoAnchor = 4,
  kInternal = 5,
};

struct Tolerances {
  double eps = 1e-3;
  double eps_recur = 1e-3;
  double eps_retract = 1e-3;
  double eps_group = 5e-3;
};

struct Outputs {
  std::string dir = "out";
  bool json = true;
  bool csv = true;
};

struct RunConfig {
  SpaceSpec space;
  MapSpec map;
  std::vector<Coords> starts;
  std::size_t horizon = 10'000;
  Tolerances tolerances;
  std::vector<double> radii;  // empty: properness-scaled ladder
  std::uint64_t seed = 0;
  Outputs outputs;
  // Raw config, kept for subcommands with extra sections.
  nlohmann::json raw;
};

// Throws ConfigError naming the offending field path.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json config_json(const RunConfig& cfg);
// FNV-1a over the canonical dump of config_json.
std::uint64_t config_hash(const RunConfig& cfg);
std::string hex64(std::uint64_t v);

int exit_code_for(Errc code);

// Shortest round-trip decimal; "inf"/"-inf"/"nan" for non-finite values.
std::string format_double(double v);

struct CommandOptions {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> horizon;
  std::optional<std::filesystem::path> table;
  std::vector<double> rho;
  std::size_t min_ball_count = 50;
};

// Each command writes its reports under the output directory and returns
// an exit code; diagnostics go to `err`.
int run_analyze(RunConfig cfg, const CommandOptions& opts, std::ostream& err);
int run_calka(std::optional<RunConfig> cfg, const CommandOptions& opts,
              std::ostream& out, std::ostream& err);
int run_retract(RunConfig cfg, const CommandOptions& opts, std::ostream& err);
int run_kobayashi(const nlohmann::json& cfg, const CommandOptions& opts,
                  std::ostream& out, std::ostream& err);
int run_semigroup(const std::filesystem::path& table, const CommandOptions& opts,
                  std::ostream& out, std::ostream& err);

// Full command line entry point (subcommand dispatch).
int main(int argc, const char* const* argv);

}  // namespace orbitlab::cli
