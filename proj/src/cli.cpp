#include "orbitlab/cli.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "orbitlab/calka.hpp"
#include "orbitlab/kobayashi.hpp"
#include "orbitlab/limit_group.hpp"
#include "orbitlab/orbit.hpp"
#include "orbitlab/parallel.hpp"

namespace orbitlab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& msg) {
  throw Error(Errc::ConfigError, path + ": " + msg);
}

double positive_number(const json& obj, const char* key, double fallback,
                       const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number() || !(v.get<double>() > 0.0))
    config_error(path + "." + key, "expected a positive number");
  return v.get<double>();
}

Coords coordinate_array(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty())
    config_error(path, "expected a nonempty array of numbers");
  Coords c;
  for (std::size_t i = 0; i < v.size(); ++i) {
    // Nested [re, im] pairs are flattened (polydisc points).
    if (v[i].is_array()) {
      const Coords inner = coordinate_array(v[i], path + "[" + std::to_string(i) + "]");
      c.insert(c.end(), inner.begin(), inner.end());
    } else if (v[i].is_number()) {
      c.push_back(v[i].get<double>());
    } else {
      config_error(path + "[" + std::to_string(i) + "]", "expected a number");
    }
  }
  return c;
}

json point_json(const Point& p) { return p.coords(); }

json maybe_number(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

json indices_json(const std::vector<std::size_t>& v) { return v; }

json report_header(const RunConfig& cfg, const char* command) {
  return json{{"tool", "orbitlab"},
              {"version", kToolVersion},
              {"command", command},
              {"config_hash", hex64(config_hash(cfg))}};
}

fs::path output_dir(const RunConfig& cfg, const CommandOptions& opts) {
  fs::path dir = opts.out ? *opts.out : fs::path(cfg.outputs.dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::ConfigError, "cannot write " + path.string());
  f << text;
}

void write_json(const fs::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

void apply_overrides(RunConfig& cfg, const CommandOptions& opts) {
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.horizon) {
    if (*opts.horizon < 1) config_error("--horizon", "must be >= 1");
    cfg.horizon = *opts.horizon;
  }
}

struct Built {
  Space space;
  DynamicMap map;
  std::vector<Point> starts;
};

Built build(const RunConfig& cfg, bool need_starts) {
  Built b;
  try {
    b.space = make_space(cfg.space);
  } catch (const Error& e) {
    throw Error(e.code(), "space: " + e.detail());
  }
  try {
    b.map = make_map(cfg.map, b.space);
  } catch (const Error& e) {
    throw Error(e.code(), "map: " + e.detail());
  }
  if (need_starts && cfg.starts.empty())
    config_error("starts", "at least one start is required");
  for (std::size_t i = 0; i < cfg.starts.size(); ++i) {
    try {
      b.starts.push_back(b.space.point(cfg.starts[i]));
    } catch (const Error& e) {
      throw Error(Errc::ConfigError,
                  "starts[" + std::to_string(i) + "]: " + e.detail());
    }
  }
  return b;
}

std::vector<double> radii_for(const RunConfig& cfg, const Space& space) {
  return cfg.radii.empty() ? default_radii(space) : cfg.radii;
}

std::string iso_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

using Clock = std::chrono::steady_clock;
double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

json verdict_json(const OrbitVerdict& v) {
  json ev = json::object();
  if (v.compact) {
    const auto& c = *v.compact;
    ev = {{"eps", c.eps},
          {"net_size", c.net_size},
          {"half_net_size", c.half_net_size},
          {"half_count", c.half_count},
          {"full_count", c.full_count}};
  } else if (v.divergent) {
    const auto& d = *v.divergent;
    ev = {{"radii", d.radii}, {"leave_index", indices_json(d.leave_index)}};
    ev["numeric_escape"] =
        d.numeric_escape ? json(*d.numeric_escape) : json(nullptr);
  } else if (v.budget) {
    const auto& b = *v.budget;
    ev = {{"horizon", b.horizon},
          {"points", b.points},
          {"half_net_size", b.half_net_size},
          {"net_size", b.net_size},
          {"radii_escaped", b.radii_escaped},
          {"radii_tested", b.radii_tested},
          {"note", b.note}};
  }
  return {{"verdict", verdict_name(v.kind)}, {"evidence", ev}};
}

json certificate_json(const RecurrenceCertificate& c) {
  return {{"point", point_json(c.point)},
          {"return_times", indices_json(c.return_times)},
          {"gaps_increasing", c.gaps_increasing},
          {"return_defects", c.return_defects}};
}

std::string orbit_csv(const Orbit& o) {
  std::string s = "k";
  for (std::size_t i = 0; i < o.start().dimension(); ++i)
    s += ",x" + std::to_string(i);
  s += ",dist_base\n";
  const Point base = o.space().base_point();
  for (std::size_t k = 0; k < o.size(); ++k) {
    s += std::to_string(k);
    for (double x : o.view(k)) s += "," + format_double(x);
    s += "," + format_double(o.space().distance(base.view(), o.view(k))) + "\n";
  }
  return s;
}

json calka_json(const CalkaReport& r) {
  json j = {{"rho", r.rho},
            {"ball0_count", r.ball0_count},
            {"conclusion_verified_to", r.conclusion_verified_to}};
  j["N"] = r.N ? json(*r.N) : json(nullptr);
  j["M"] = r.M ? json(*r.M) : json(nullptr);
  return j;
}

}  // namespace

RunConfig parse_run_config(const json& j) {
  if (!j.is_object()) config_error("<root>", "expected a JSON object");
  RunConfig cfg;
  cfg.raw = j;

  if (!j.contains("space")) config_error("space", "missing");
  try {
    cfg.space = j.at("space").get<SpaceSpec>();
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, "space: " + e.detail());
  } catch (const json::exception& e) {
    config_error("space", e.what());
  }
  if (!j.contains("map")) config_error("map", "missing");
  try {
    cfg.map = j.at("map").get<MapSpec>();
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, "map: " + e.detail());
  } catch (const json::exception& e) {
    config_error("map", e.what());
  }

  if (j.contains("starts")) {
    const json& s = j.at("starts");
    if (!s.is_array()) config_error("starts", "expected an array");
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string path = "starts[" + std::to_string(i) + "]";
      if (s[i].is_number())
        cfg.starts.push_back({s[i].get<double>()});
      else
        cfg.starts.push_back(coordinate_array(s[i], path));
    }
  }

  if (j.contains("horizon")) {
    const json& h = j.at("horizon");
    if (!h.is_number_integer() || h.get<long long>() < 1)
      config_error("horizon", "expected an integer >= 1");
    cfg.horizon = h.get<std::size_t>();
  }

  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    if (!t.is_object()) config_error("tolerances", "expected an object");
    for (auto it = t.begin(); it != t.end(); ++it) {
      const std::string& k = it.key();
      if (k != "eps" && k != "eps_recur" && k != "eps_retract" &&
          k != "eps_group")
        config_error("tolerances." + k, "unknown tolerance");
    }
    Tolerances& tol = cfg.tolerances;
    tol.eps = positive_number(t, "eps", tol.eps, "tolerances");
    tol.eps_recur = positive_number(t, "eps_recur", tol.eps_recur, "tolerances");
    tol.eps_retract =
        positive_number(t, "eps_retract", tol.eps_retract, "tolerances");
    tol.eps_group = positive_number(t, "eps_group", tol.eps_group, "tolerances");
  }

  if (j.contains("radii")) {
    const json& r = j.at("radii");
    if (!r.is_array()) config_error("radii", "expected an array");
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!r[i].is_number() || !(r[i].get<double>() > 0.0))
        config_error("radii[" + std::to_string(i) + "]",
                     "expected a positive number");
      cfg.radii.push_back(r[i].get<double>());
    }
  }

  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_integer() || s.get<long long>() < 0)
      config_error("seed", "expected a nonnegative integer");
    cfg.seed = s.get<std::uint64_t>();
  }

  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    if (!o.is_object()) config_error("outputs", "expected an object");
    if (o.contains("dir")) {
      if (!o.at("dir").is_string()) config_error("outputs.dir", "expected a string");
      cfg.outputs.dir = o.at("dir").get<std::string>();
    }
    if (o.contains("formats")) {
      const json& f = o.at("formats");
      if (!f.is_array()) config_error("outputs.formats", "expected an array");
      cfg.outputs.json = cfg.outputs.csv = false;
      for (std::size_t i = 0; i < f.size(); ++i) {
        const std::string path = "outputs.formats[" + std::to_string(i) + "]";
        if (!f[i].is_string()) config_error(path, "expected \"json\" or \"csv\"");
        const auto name = f[i].get<std::string>();
        if (name == "json")
          cfg.outputs.json = true;
        else if (name == "csv")
          cfg.outputs.csv = true;
        else
          config_error(path, "unknown format '" + name + "'");
      }
    }
  }
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::ConfigError, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ConfigError, path.string() + ": " + e.what());
  }
  return parse_run_config(j);
}

json config_json(const RunConfig& cfg) {
  json starts = json::array();
  for (const Coords& c : cfg.starts) starts.push_back(c);
  json formats = json::array();
  if (cfg.outputs.json) formats.push_back("json");
  if (cfg.outputs.csv) formats.push_back("csv");
  json j = cfg.raw.is_object() ? cfg.raw : json::object();
  j["space"] = cfg.space;
  j["map"] = cfg.map;
  j["starts"] = starts;
  j["horizon"] = cfg.horizon;
  j["tolerances"] = {{"eps", cfg.tolerances.eps},
                     {"eps_recur", cfg.tolerances.eps_recur},
                     {"eps_retract", cfg.tolerances.eps_retract},
                     {"eps_group", cfg.tolerances.eps_group}};
  j["radii"] = cfg.radii;
  j["seed"] = cfg.seed;
  // The output directory does not affect results.
  j["outputs"] = {{"formats", formats}};
  return j;
}

std::uint64_t config_hash(const RunConfig& cfg) {
  const std::string s = config_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::ConfigError:
    case Errc::UnknownSpace:
    case Errc::UnknownMap:
    case Errc::BadParameter:
    case Errc::BadPoint:
    case Errc::SpaceMismatch:
    case Errc::EmptyInput:
    case Errc::IncompatibleSpace:
    case Errc::NotNonexpansive:
    case Errc::InvalidSemigroup:
    case Errc::UnsupportedSpace:
    case Errc::OnBoundary:
      return kConfig;
    case Errc::BudgetExceeded:
      return kBudget;
    case Errc::NotInjective:
    case Errc::WrongMonotonicity:
    case Errc::PreconditionUnmet:
    case Errc::NotShiftMonotone:
      return kCalkaPrecondition;
    case Errc::NoRecurrentAnchor:
      return kNoAnchor;
    default:
      return kInternal;
  }
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

int run_analyze(RunConfig cfg, const CommandOptions& opts, std::ostream& err) {
  (void)err;
  apply_overrides(cfg, opts);
  const Built b = build(cfg, true);
  const auto radii = radii_for(cfg, b.space);
  const fs::path dir = output_dir(cfg, opts);

  struct Result {
    json report;
    std::string summary_row;
    std::string orbit_csv;
    double ms = 0.0;
  };
  std::vector<Result> results(b.starts.size());
  const auto t_all = Clock::now();
  parallel::for_each_index(b.starts.size(), [&](std::size_t i) {
    const auto t0 = Clock::now();
    const Orbit orbit = compute_orbit(b.map, b.starts[i], cfg.horizon);
    const OrbitVerdict v = classify_orbit(orbit, cfg.tolerances.eps, radii);
    const RecurrenceResult rec =
        detect_recurrence(orbit, cfg.tolerances.eps_recur);

    json j = report_header(cfg, "analyze");
    j["start_index"] = i;
    j["start"] = point_json(b.starts[i]);
    j["horizon"] = cfg.horizon;
    j["points_computed"] = orbit.size();
    j["escape_index"] =
        orbit.escape_index() ? json(*orbit.escape_index()) : json(nullptr);
    j.update(verdict_json(v));
    j["recurrence"] = {{"min_return_defect", maybe_number(rec.min_return_defect)},
                       {"returns_seen", rec.returns_seen}};
    j["recurrence"]["certificate"] =
        rec.certificate ? certificate_json(*rec.certificate) : json(nullptr);
    if (rec.certificate)
      j["recurrence"]["limit_recurrent"] = certify_limit_recurrent(
          orbit, *rec.certificate, 2.0 * cfg.tolerances.eps_recur);

    std::string net = v.compact   ? std::to_string(v.compact->net_size)
                      : v.budget  ? std::to_string(v.budget->net_size)
                                  : "";
    std::string escape =
        v.divergent ? format_double(v.divergent->radii.back()) : "";
    results[i].summary_row =
        std::to_string(i) + "," + std::string(verdict_name(v.kind)) + "," +
        net + "," + escape + "," + (rec.certificate ? "true" : "false") + "," +
        format_double(rec.min_return_defect) + "\n";
    results[i].report = std::move(j);
    if (cfg.outputs.csv) results[i].orbit_csv = orbit_csv(orbit);
    results[i].ms = ms_since(t0);
  });

  // Single writer, in start order.
  std::string summary =
      "start_index,verdict,net_size,escape_radius,recurrent,min_return_defect\n";
  json timings = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (cfg.outputs.json)
      write_json(dir / ("start_" + std::to_string(i) + ".json"),
                 results[i].report);
    if (cfg.outputs.csv)
      write_text(dir / ("orbit_" + std::to_string(i) + ".csv"),
                 results[i].orbit_csv);
    summary += results[i].summary_row;
    timings.push_back(results[i].ms);
  }
  write_text(dir / "summary.csv", summary);
  write_json(dir / "metadata.json",
             {{"command", "analyze"},
              {"generated_at", iso_now()},
              {"threads", parallel::max_threads()},
              {"per_start_ms", timings},
              {"total_ms", ms_since(t_all)}});
  return kOk;
}

int run_calka(std::optional<RunConfig> cfg, const CommandOptions& opts,
              std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  std::vector<double> rhos = opts.rho;
  if (rhos.empty()) rhos = {0.5};
  for (double r : rhos)
    if (!(r > 0.0)) config_error("--rho", "must be positive");

  json report;
  NatMetric nm;
  fs::path dir;
  if (opts.table) {
    std::ifstream f(*opts.table);
    if (!f)
      throw Error(Errc::ConfigError, "cannot open table " + opts.table->string());
    nm = read_nat_metric_csv(f);
    report = {{"tool", "orbitlab"},
              {"version", kToolVersion},
              {"command", "calka"},
              {"source", "table"}};
    dir = opts.out ? *opts.out : fs::path("out");
    fs::create_directories(dir);
  } else {
    if (!cfg) config_error("--config", "calka needs --config or --table");
    apply_overrides(*cfg, opts);
    const Built b = build(*cfg, true);
    report = report_header(*cfg, "calka");
    report["source"] = "orbit";
    report["start"] = point_json(b.starts.front());
    nm = from_orbit(compute_orbit(b.map, b.starts.front(), cfg->horizon));
    dir = output_dir(*cfg, opts);
  }
  report["horizon"] = nm.horizon();
  report["monotone_dir"] = shift_dir_name(nm.monotone_dir());
  report["rho"] = rhos;
  report["min_ball_count"] = opts.min_ball_count;

  int code = kOk;
  json reports = json::array();
  for (double rho : rhos) {
    const CalkaReport r = calka_check(nm, rho, opts.min_ball_count);
    json j = calka_json(r);
    j["verified"] = r.M.has_value() && r.conclusion_verified_to == nm.horizon();
    if (!j["verified"].get<bool>()) {
      code = kCalkaPrecondition;
      err << "calka: rho=" << format_double(rho)
          << ": B(0,rho) has only " << r.ball0_count
          << " members in the horizon; hypothesis not met\n";
    }
    reports.push_back(std::move(j));
  }
  report["reports"] = std::move(reports);
  write_json(dir / "calka.json", report);
  write_json(dir / "metadata.json", {{"command", "calka"},
                                     {"generated_at", iso_now()},
                                     {"total_ms", ms_since(t0)}});
  out << report.dump(2) << "\n";
  return code;
}

int run_retract(RunConfig cfg, const CommandOptions& opts, std::ostream& err) {
  (void)err;
  const auto t0 = Clock::now();
  apply_overrides(cfg, opts);
  const Built b = build(cfg, true);
  const fs::path dir = output_dir(cfg, opts);

  RetractionOptions ro;
  ro.eps = cfg.tolerances.eps;
  ro.radii = cfg.radii;
  const RetractionEstimate est = estimate_retraction(
      b.map, b.starts, cfg.horizon, cfg.tolerances.eps_retract, ro);
  const GroupAudit g = audit_group_structure(b.map, est, cfg.tolerances.eps_group);
  const ConvergenceCriterion cc =
      check_convergence_criterion(b.map, est, cfg.horizon, cfg.tolerances.eps);
  const AuditReport iso = audit_mono_to_iso(b.map, est, 256, cfg.seed);

  json report = report_header(cfg, "retract");
  json anchors = json::array();
  for (const Point& a : est.anchors) anchors.push_back(point_json(a));
  report["anchors"] = anchors;
  report["return_sequence"] = indices_json(est.return_sequence);
  report["k_last"] = est.k_last;
  report["residual"] = est.residual;

  json values = json::array();
  json accumulation = json::array();
  std::string csv = "start_index,verdict,divergent";
  for (std::size_t i = 0; i < b.space.dimension(); ++i)
    csv += ",rho" + std::to_string(i);
  csv += "\n";
  for (std::size_t i = 0; i < est.sample.size(); ++i) {
    json v = {{"start_index", i},
              {"start", point_json(est.sample[i])},
              {"verdict", verdict_name(est.verdicts[i])}};
    v["rho"] = est.values[i] ? point_json(*est.values[i]) : json("Divergent");
    if (est.values[i]) {
      const Point rr = apply_retraction(b.map, est, *est.values[i]);
      v["idempotence_defect"] = b.space.distance(rr, *est.values[i]);
      const AccumulationReport acc = accumulation_vs_group_orbit(
          b.map, est, est.sample[i], cfg.tolerances.eps);
      accumulation.push_back({{"start_index", i},
                              {"accumulation_points", acc.accumulation_points},
                              {"group_orbit_points", acc.group_orbit_points},
                              {"hausdorff", maybe_number(acc.hausdorff)},
                              {"agrees", acc.agrees}});
    }
    values.push_back(std::move(v));
    csv += std::to_string(i) + "," + std::string(verdict_name(est.verdicts[i])) +
           "," + (est.values[i] ? "false" : "true");
    for (std::size_t k = 0; k < b.space.dimension(); ++k)
      csv += "," + (est.values[i] ? format_double((*est.values[i])[k]) : "");
    csv += "\n";
  }
  report["values"] = std::move(values);

  double anchor_fix = 0.0;
  for (const Point& a : est.anchors)
    anchor_fix = std::max(
        anchor_fix, b.space.distance(apply_retraction(b.map, est, a), a));
  report["anchor_fixing_defect"] = anchor_fix;

  report["group_defects"] = {
      {"net_size", g.element_exponents.size()},
      {"element_exponents", indices_json(g.element_exponents)},
      {"composition_closure", g.composition_closure_defect},
      {"identity", g.identity_defect},
      {"inverse", g.inverse_defect},
      {"generator", g.generator_defect},
      {"isometry_on_anchors", g.isometry_defect},
      {"passes_eps_group", g.passes(cfg.tolerances.eps_group)}};
  report["criterion_agreement"] = {{"anchors_fixed", cc.anchors_fixed},
                                   {"iterates_converge", cc.iterates_converge},
                                   {"agreement", cc.agreement},
                                   {"max_anchor_motion", cc.max_anchor_motion},
                                   {"max_tail_defect", cc.max_tail_defect}};
  report["accumulation"] = std::move(accumulation);
  report["accumulation_note"] =
      "accumulation points are orbit points with >= 3 later eps-returns "
      "within the horizon (finite proxy)";
  report["mono_to_iso"] = {{"passed", iso.passed},
                           {"max_defect", iso.max_defect},
                           {"note", iso.note}};

  if (cfg.outputs.json) write_json(dir / "retract.json", report);
  if (cfg.outputs.csv) write_text(dir / "retraction.csv", csv);
  write_json(dir / "metadata.json", {{"command", "retract"},
                                     {"generated_at", iso_now()},
                                     {"threads", parallel::max_threads()},
                                     {"total_ms", ms_since(t0)}});
  return kOk;
}

int run_kobayashi(const json& cfg, const CommandOptions& opts, std::ostream& out,
                  std::ostream& err) {
  (void)err;
  if (!cfg.is_object()) config_error("<root>", "expected a JSON object");
  if (!cfg.contains("space")) config_error("space", "missing");
  SpaceSpec spec;
  try {
    spec = cfg.at("space").get<SpaceSpec>();
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, "space: " + e.detail());
  }
  const Space space = make_space(spec);
  if (!cfg.contains("pairs") || !cfg.at("pairs").is_array())
    config_error("pairs", "expected an array of {\"a\": point, \"b\": point}");

  ChainSearchBudget budget;
  if (cfg.contains("budget")) {
    const json& bj = cfg.at("budget");
    auto count = [&](const char* key, std::size_t& dst) {
      if (!bj.contains(key)) return;
      if (!bj.at(key).is_number_unsigned())
        config_error(std::string("budget.") + key, "expected a nonnegative integer");
      dst = bj.at(key).get<std::size_t>();
    };
    count("max_links", budget.max_links);
    count("waypoints", budget.waypoints);
    count("descent_iters", budget.descent_iters);
  }

  json results = json::array();
  const json& pairs = cfg.at("pairs");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::string path = "pairs[" + std::to_string(i) + "]";
    if (!pairs[i].is_object() || !pairs[i].contains("a") || !pairs[i].contains("b"))
      config_error(path, "expected {\"a\": point, \"b\": point}");
    Point a, b;
    try {
      a = space.point(coordinate_array(pairs[i].at("a"), path + ".a"));
      b = space.point(coordinate_array(pairs[i].at("b"), path + ".b"));
    } catch (const Error& e) {
      if (e.code() == Errc::ConfigError) throw;
      throw Error(Errc::ConfigError, path + ": " + e.detail());
    }
    const ChainSearchResult r = kobayashi_search(space.name(), a, b, budget);
    json j = {{"a", point_json(a)},
              {"b", point_json(b)},
              {"upper_bound", r.bound},
              {"links", r.chain.links.size()}};
    if (space.name() == "poincare-disk")
      j["poincare"] = poincare_distance({a[0], a[1]}, {b[0], b[1]});
    results.push_back(std::move(j));
  }
  json report = {{"tool", "orbitlab"},
                 {"version", kToolVersion},
                 {"command", "kobayashi"},
                 {"space", space.tag()},
                 {"budget",
                  {{"max_links", budget.max_links},
                   {"waypoints", budget.waypoints},
                   {"descent_iters", budget.descent_iters}}},
                 {"pairs", std::move(results)}};
  if (opts.out) {
    fs::create_directories(*opts.out);
    write_json(*opts.out / "kobayashi.json", report);
  }
  out << report.dump(2) << "\n";
  return kOk;
}

int run_semigroup(const fs::path& table, const CommandOptions& opts,
                  std::ostream& out, std::ostream& err) {
  (void)err;
  std::ifstream f(table);
  if (!f) throw Error(Errc::ConfigError, "cannot open table " + table.string());
  const FiniteSemigroup sg = read_semigroup_csv(f);
  const json report = {{"tool", "orbitlab"},
                       {"version", kToolVersion},
                       {"command", "semigroup"},
                       {"order", sg.order()},
                       {"is_group", semigroup_is_group(sg)}};
  if (opts.out) {
    fs::create_directories(*opts.out);
    write_json(*opts.out / "semigroup.json", report);
  }
  out << report.dump(2) << "\n";
  return kOk;
}

int main(int argc, const char* const* argv) {
  CLI::App app{"orbitlab: orbits of nonexpansive maps on proper metric spaces"};
  app.require_subcommand(1);

  std::string config_path, out_dir, table_path;
  int jobs = 0;
  std::uint64_t seed = 0;
  std::size_t horizon = 0;
  std::vector<double> rho;

  auto common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", config_path, "run config (JSON)");
    if (config_required) c->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--jobs", jobs, "worker threads (default: all processors)");
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--horizon", horizon, "override the config horizon");
  };
  auto* analyze = app.add_subcommand("analyze", "classify orbits of each start");
  common(analyze, true);
  auto* calka = app.add_subcommand("calka", "check the covering lemma on N");
  common(calka, false);
  calka->add_option("--table", table_path, "CSV distance table (n,m,d)");
  calka->add_option("--rho", rho, "ball radius (repeatable)");
  std::size_t min_ball_count = kDefaultMinBallCount;
  calka->add_option("--min-ball-count", min_ball_count,
                    "members of B(0,rho) that stand in for an infinite ball");
  auto* retract = app.add_subcommand("retract", "limit retraction and group audit");
  common(retract, true);
  auto* koba = app.add_subcommand("kobayashi", "chain bounds on disk/polydisc");
  common(koba, true);
  auto* semi = app.add_subcommand("semigroup", "is a finite semigroup a group");
  semi->add_option("--table", table_path, "row-major composition table (CSV)")
      ->required();
  semi->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  CommandOptions opts;
  if (!out_dir.empty()) opts.out = out_dir;
  if (!table_path.empty()) opts.table = table_path;
  opts.rho = rho;
  opts.min_ball_count = min_ball_count;
  auto given = [](CLI::App* sub, const char* name) {
    return sub->parsed() && sub->count(name) > 0;
  };
  for (CLI::App* sub : {analyze, calka, retract, koba}) {
    if (given(sub, "--seed")) opts.seed = seed;
    if (given(sub, "--horizon")) opts.horizon = horizon;
  }
  std::optional<parallel::ScopedThreads> threads;
  if (jobs > 0) threads.emplace(jobs);

  try {
    if (analyze->parsed())
      return run_analyze(load_run_config(config_path), opts, std::cerr);
    if (calka->parsed()) {
      std::optional<RunConfig> cfg;
      if (!config_path.empty()) cfg = load_run_config(config_path);
      return run_calka(cfg, opts, std::cout, std::cerr);
    }
    if (retract->parsed())
      return run_retract(load_run_config(config_path), opts, std::cerr);
    if (koba->parsed()) {
      std::ifstream f(config_path);
      if (!f) throw Error(Errc::ConfigError, "cannot open config " + config_path);
      json j;
      try {
        j = json::parse(f);
      } catch (const json::parse_error& e) {
        throw Error(Errc::ConfigError, config_path + ": " + e.what());
      }
      return run_kobayashi(j, opts, std::cout, std::cerr);
    }
    if (semi->parsed()) return run_semigroup(table_path, opts, std::cout, std::cerr);
  } catch (const Error& e) {
    std::cerr << "orbitlab: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    std::cerr << "orbitlab: config: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "orbitlab: internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}

}  // namespace orbitlab::cli
