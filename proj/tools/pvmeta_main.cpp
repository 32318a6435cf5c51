// Command-line front end: synthesize datasets, infer panel orientation from
// generation traces, and publish the result under differential privacy.
//
// Verbs: synth, infer, oracle, publish, sweep. Every output file carries a
// header line (CSV comment or "_meta" object) with the tool version, the
// seed, and a hash of the effective configuration, and every verb is a pure
// function of (inputs, config, seed): re-runs are byte-identical.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pvmeta/pvmeta.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace pvmeta;

std::string hash_hex(const json& effective) {
  const std::uint64_t h = fnv1a64(effective.dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string meta_line(const std::string& config_hash, std::uint64_t seed) {
  std::ostringstream s;
  s << "pvmeta " << kVersion << " seed=" << seed << " config=" << config_hash;
  return s.str();
}

json meta_json(const std::string& config_hash, std::uint64_t seed) {
  json m;
  m["version"] = kVersion;
  m["seed"] = seed;
  m["config_hash"] = config_hash;
  return m;
}

void write_output(const fs::path& dir, const std::string& name, const std::string& text) {
  fs::create_directories(dir);
  write_file((dir / name).string(), text);
}

void write_json_output(const fs::path& dir, const std::string& name, const json& j) {
  write_output(dir, name, j.dump(2) + "\n");
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto v = parse_double(item);
    if (!v) throw InvalidConfig("bad numeric value in " + what + ": '" + item + "'");
    out.push_back(*v);
  }
  if (out.empty()) throw InvalidConfig(what + " must contain at least one value");
  return out;
}

// ---------------------------------------------------------------------------
// Effective configuration: defaults, overridden by --config JSON, overridden
// by explicit flags.

struct Config {
  double grid_az_step = 1.0;
  double grid_tilt_step = 1.0;
  int iters = 100;
  int warm_start = 10;
  double epsilon = 1.0;
  double delta = 0.1;
  int samples = 1;
  std::uint64_t seed = 0;
  double ls_az = 30.0;
  double ls_tilt = 10.0;
  double jitter = 1e-8;
  bool unit_lengthscales = false;
  std::string grouping = "month";
  bool force_unvisited = false;
  bool schedule_denominator = false;
  std::vector<double> epsilons;
  std::vector<double> deltas;
};

// Optional-typed flag targets; only values the user actually set override.
struct ConfigFlags {
  std::optional<double> grid_az_step, grid_tilt_step;
  std::optional<int> iters, warm_start, samples;
  std::optional<double> epsilon, delta;
  std::optional<std::uint64_t> seed;
  std::optional<double> ls_az, ls_tilt, jitter;
  std::optional<bool> unit_lengthscales, force_unvisited, schedule_denominator;
  std::optional<std::string> grouping;
  std::optional<std::string> epsilons, deltas;
  std::string config_path;

  void add_common(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file mirroring the flags");
    cmd->add_option("--seed", seed, "RNG seed recorded in every output");
  }
  void add_grid(CLI::App* cmd) {
    cmd->add_option("--grid-az-step", grid_az_step, "azimuth grid step, degrees");
    cmd->add_option("--grid-tilt-step", grid_tilt_step, "tilt grid step, degrees");
  }
  void add_bo(CLI::App* cmd) {
    cmd->add_option("--iters", iters, "total observation budget T");
    cmd->add_option("--warm-start", warm_start, "random observations before UCB");
    cmd->add_option("--delta", delta, "confidence/privacy parameter delta");
    cmd->add_option("--ls-az", ls_az, "kernel lengthscale, azimuth degrees");
    cmd->add_option("--ls-tilt", ls_tilt, "kernel lengthscale, tilt degrees");
    cmd->add_option("--jitter", jitter, "kernel diagonal regularizer");
    cmd->add_flag("--unit-lengthscales", unit_lengthscales,
                  "use the raw exp(-|x-y|^2) kernel on degree coordinates");
    cmd->add_flag("--force-unvisited", force_unvisited,
                  "acquisition skips visited points (exhaustive-coverage mode)");
  }
  void add_grouping(CLI::App* cmd) {
    cmd->add_option("--grouping", grouping, "day grouping: month or week");
  }
  void add_dp(CLI::App* cmd) {
    cmd->add_option("--epsilon", epsilon, "privacy budget epsilon");
    cmd->add_option("--delta", delta, "privacy parameter delta");
    cmd->add_option("--samples", samples, "number of mechanism draws");
    cmd->add_flag("--schedule-denominator", schedule_denominator,
                  "use the 2(2*sqrt(phi)+c) calibration instead of the proven bound");
  }

  Config resolve() const {
    Config c;
    if (!config_path.empty()) {
      json j = json::parse(read_file(config_path), nullptr, false);
      if (j.is_discarded()) throw InvalidConfig("config file is not valid JSON: " + config_path);
      try {
        if (j.contains("grid_az_step")) c.grid_az_step = j["grid_az_step"].get<double>();
        if (j.contains("grid_tilt_step")) c.grid_tilt_step = j["grid_tilt_step"].get<double>();
        if (j.contains("iters")) c.iters = j["iters"].get<int>();
        if (j.contains("warm_start")) c.warm_start = j["warm_start"].get<int>();
        if (j.contains("epsilon")) c.epsilon = j["epsilon"].get<double>();
        if (j.contains("delta")) c.delta = j["delta"].get<double>();
        if (j.contains("samples")) c.samples = j["samples"].get<int>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("ls_az")) c.ls_az = j["ls_az"].get<double>();
        if (j.contains("ls_tilt")) c.ls_tilt = j["ls_tilt"].get<double>();
        if (j.contains("jitter")) c.jitter = j["jitter"].get<double>();
        if (j.contains("unit_lengthscales")) c.unit_lengthscales = j["unit_lengthscales"].get<bool>();
        if (j.contains("grouping")) c.grouping = j["grouping"].get<std::string>();
        if (j.contains("force_unvisited")) c.force_unvisited = j["force_unvisited"].get<bool>();
        if (j.contains("schedule_denominator"))
          c.schedule_denominator = j["schedule_denominator"].get<bool>();
        if (j.contains("epsilons")) c.epsilons = j["epsilons"].get<std::vector<double>>();
        if (j.contains("deltas")) c.deltas = j["deltas"].get<std::vector<double>>();
      } catch (const json::exception& e) {
        throw InvalidConfig(std::string("config file field has wrong type: ") + e.what());
      }
    }
    if (grid_az_step) c.grid_az_step = *grid_az_step;
    if (grid_tilt_step) c.grid_tilt_step = *grid_tilt_step;
    if (iters) c.iters = *iters;
    if (warm_start) c.warm_start = *warm_start;
    if (epsilon) c.epsilon = *epsilon;
    if (delta) c.delta = *delta;
    if (samples) c.samples = *samples;
    if (seed) c.seed = *seed;
    if (ls_az) c.ls_az = *ls_az;
    if (ls_tilt) c.ls_tilt = *ls_tilt;
    if (jitter) c.jitter = *jitter;
    if (unit_lengthscales) c.unit_lengthscales = *unit_lengthscales;
    if (grouping) c.grouping = *grouping;
    if (force_unvisited) c.force_unvisited = *force_unvisited;
    if (schedule_denominator) c.schedule_denominator = *schedule_denominator;
    if (epsilons) c.epsilons = parse_double_list(*epsilons, "--epsilons");
    if (deltas) c.deltas = parse_double_list(*deltas, "--deltas");
    return c;
  }
};

KernelSpec kernel_from(const Config& c) {
  KernelSpec k = c.unit_lengthscales ? KernelSpec::unit() : KernelSpec{};
  if (!c.unit_lengthscales) {
    k.ls_az = c.ls_az;
    k.ls_tilt = c.ls_tilt;
  }
  k.jitter = c.jitter;
  return k;
}

GroupingScheme grouping_from(const Config& c) {
  if (c.grouping == "month") return GroupingScheme::Monthly;
  if (c.grouping == "week") return GroupingScheme::IsoWeekly;
  throw InvalidConfig("grouping must be 'month' or 'week', got '" + c.grouping + "'");
}

json grid_json(const DomainGrid& g, double az_step, double tilt_step) {
  json j;
  j["az_step"] = az_step;
  j["tilt_step"] = tilt_step;
  j["n_azimuth"] = g.azimuth_values.size();
  j["n_tilt"] = g.tilt_values.size();
  j["size"] = g.size();
  return j;
}

// ---------------------------------------------------------------------------
// synth

int cmd_synth(const std::string& scenario_path, const std::string& out_dir,
              const ConfigFlags& flags) {
  const Config cfg = flags.resolve();
  json scenario_doc = json::parse(read_file(scenario_path), nullptr, false);
  if (scenario_doc.is_discarded())
    throw InvalidScenario("scenario file is not valid JSON: " + scenario_path);
  SyntheticScenario scen;
  try {
    scen = parse_scenario(scenario_doc);
  } catch (const InvalidScenario&) {
    throw;
  } catch (const json::exception& e) {
    throw InvalidScenario(std::string("scenario field has wrong type: ") + e.what());
  }
  if (flags.seed) scen.rng_seed = *flags.seed;

  json eff;
  eff["command"] = "synth";
  eff["scenario"] = scenario_doc;
  eff["seed"] = scen.rng_seed;
  const std::string h = hash_hex(eff);
  const std::string meta = meta_line(h, scen.rng_seed);

  auto [irr, gen] = synthesize(scen);
  write_output(out_dir, "irradiance.csv", irradiance_csv_text(irr, meta));
  write_output(out_dir, "generation.csv", generation_csv_text(gen, meta));

  json truth;
  truth["_meta"] = meta_json(h, scen.rng_seed);
  truth["site_id"] = scen.site_id;
  truth["location"] = {{"latitude_deg", scen.location.latitude_deg},
                       {"longitude_deg", scen.location.longitude_deg}};
  truth["start_date"] = format_date(scen.start_date);
  truth["end_date"] = format_date(scen.end_date);
  truth["step_minutes"] = scen.step_minutes;
  truth["azimuth_deg"] = scen.ground_truth.azimuth_deg;
  truth["tilt_deg"] = scen.ground_truth.tilt_deg;
  truth["nameplate_w"] = scen.panel.nameplate_w;
  truth["temp_coeff_per_c"] = scen.panel.temp_coeff_per_c;
  truth["ref_temp_c"] = scen.panel.ref_temp_c;
  truth["derate"] = scen.panel.derate;
  truth["noise_std"] = scen.noise_std;
  truth["rng_seed"] = scen.rng_seed;
  write_json_output(out_dir, "ground_truth.json", truth);
  std::cout << "synth: wrote " << irr.size() << " irradiance rows, " << gen.samples.size()
            << " generation rows to " << out_dir << "\n";
  (void)cfg;
  return 0;
}

// ---------------------------------------------------------------------------
// shared inference plumbing

struct Inputs {
  std::vector<IrradianceRecord> irradiance;
  PowerProfile generation;
  PreprocessResult pre;
  ScoreContext ctx;
};

Inputs load_inputs(const std::string& generation_path, const std::string& irradiance_path,
                   GroupingScheme scheme) {
  Inputs in;
  in.irradiance = load_irradiance_csv(irradiance_path);
  in.generation = load_generation_csv(generation_path);
  in.pre = preprocess(in.generation, in.irradiance, scheme);
  in.ctx = ScoreContext::build(in.pre, in.irradiance);
  return in;
}

json best_point_json(const SurfaceOrientation& p, double score) {
  json b;
  b["azimuth_deg"] = p.azimuth_deg;
  b["tilt_deg"] = p.tilt_deg;
  b["fit_score"] = score;
  return b;
}

// ---------------------------------------------------------------------------
// infer

int cmd_infer(const std::string& generation_path, const std::string& irradiance_path,
              const std::string& out_dir, const ConfigFlags& flags) {
  const Config cfg = flags.resolve();
  const GroupingScheme scheme = grouping_from(cfg);
  Inputs in = load_inputs(generation_path, irradiance_path, scheme);

  BoConfig bo;
  bo.grid = DomainGrid::regular(cfg.grid_az_step, cfg.grid_tilt_step);
  bo.budget = cfg.iters;
  bo.warm_start = cfg.warm_start;
  bo.delta = cfg.delta;
  bo.kernel = kernel_from(cfg);
  bo.rng_seed = cfg.seed;
  bo.force_unvisited = cfg.force_unvisited;
  bo.validate();

  json eff;
  eff["command"] = "infer";
  eff["grid_az_step"] = cfg.grid_az_step;
  eff["grid_tilt_step"] = cfg.grid_tilt_step;
  eff["iters"] = cfg.iters;
  eff["warm_start"] = cfg.warm_start;
  eff["delta"] = cfg.delta;
  eff["ls_az"] = bo.kernel.ls_az;
  eff["ls_tilt"] = bo.kernel.ls_tilt;
  eff["jitter"] = bo.kernel.jitter;
  eff["unit_lengthscales"] = cfg.unit_lengthscales;
  eff["grouping"] = cfg.grouping;
  eff["force_unvisited"] = cfg.force_unvisited;
  eff["seed"] = cfg.seed;
  const std::string h = hash_hex(eff);
  const std::string meta = meta_line(h, cfg.seed);

  BoTrace trace = run_bo(
      [&](const SurfaceOrientation& lam) { return fit_score(lam, in.ctx); }, bo);

  // Posterior over the whole grid from the final state.
  std::vector<SurfaceOrientation> pts;
  pts.reserve(bo.grid.size());
  for (size_t i = 0; i < bo.grid.size(); ++i) pts.push_back(bo.grid.point(i));
  std::vector<double> mu, var;
  trace.final_state.posterior_batch(pts, mu, var);
  size_t mu_argmax = 0;
  for (size_t i = 1; i < mu.size(); ++i)
    if (mu[i] > mu[mu_argmax]) mu_argmax = i;

  std::ostringstream surface;
  surface << "# " << meta << "\n";
  surface << "azimuth_deg,tilt_deg,posterior_mean,posterior_sd\n";
  for (size_t i = 0; i < pts.size(); ++i)
    surface << fmt_double(pts[i].azimuth_deg) << ',' << fmt_double(pts[i].tilt_deg) << ','
            << fmt_double(mu[i]) << ',' << fmt_double(std::sqrt(std::max(0.0, var[i])))
            << '\n';

  const SurfaceOrientation best = trace.grid.point(trace.incumbent_index);
  json best_doc;
  best_doc["_meta"] = meta_json(h, cfg.seed);
  best_doc["command"] = "infer";
  best_doc["grid"] = grid_json(bo.grid, cfg.grid_az_step, cfg.grid_tilt_step);
  best_doc["config"] = {{"iters", cfg.iters},
                        {"warm_start", cfg.warm_start},
                        {"delta", cfg.delta},
                        {"ls_az", bo.kernel.ls_az},
                        {"ls_tilt", bo.kernel.ls_tilt},
                        {"jitter", bo.kernel.jitter},
                        {"unit_lengthscales", cfg.unit_lengthscales},
                        {"circular_azimuth", bo.kernel.circular_azimuth},
                        {"grouping", cfg.grouping},
                        {"force_unvisited", cfg.force_unvisited},
                        {"seed", cfg.seed}};
  best_doc["best"] = best_point_json(best, trace.incumbent_score);
  best_doc["posterior_argmax"] = {{"azimuth_deg", pts[mu_argmax].azimuth_deg},
                                  {"tilt_deg", pts[mu_argmax].tilt_deg},
                                  {"mean", mu[mu_argmax]}};
  // A flat panel generates the same profile whatever way it "faces": at
  // tilt 0 every azimuth ties and the reported azimuth carries no signal.
  best_doc["azimuth_identifiable"] = best.tilt_deg != 0.0;

  json report = preprocess_report_json(in.pre);
  report["_meta"] = meta_json(h, cfg.seed);

  write_output(out_dir, "trace.csv", trace_csv(trace, meta));
  write_output(out_dir, "samples.csv", samples_csv(trace, meta));
  write_output(out_dir, "posterior_surface.csv", surface.str());
  write_json_output(out_dir, "best.json", best_doc);
  write_json_output(out_dir, "preprocess_report.json", report);
  std::cout << "infer: incumbent (" << best.azimuth_deg << ", " << best.tilt_deg
            << ") score " << trace.incumbent_score << " after " << cfg.iters
            << " observations\n";
  return 0;
}

// ---------------------------------------------------------------------------
// oracle

int cmd_oracle(const std::string& generation_path, const std::string& irradiance_path,
               const std::string& out_dir, const ConfigFlags& flags) {
  const Config cfg = flags.resolve();
  const GroupingScheme scheme = grouping_from(cfg);
  Inputs in = load_inputs(generation_path, irradiance_path, scheme);
  const DomainGrid grid = DomainGrid::regular(cfg.grid_az_step, cfg.grid_tilt_step);

  json eff;
  eff["command"] = "oracle";
  eff["grid_az_step"] = cfg.grid_az_step;
  eff["grid_tilt_step"] = cfg.grid_tilt_step;
  eff["grouping"] = cfg.grouping;
  eff["seed"] = cfg.seed;
  const std::string h = hash_hex(eff);
  const std::string meta = meta_line(h, cfg.seed);

  FitScoreTable table = grid_search(grid, in.ctx);
  const SurfaceOrientation best = table.argmax();

  json best_doc;
  best_doc["_meta"] = meta_json(h, cfg.seed);
  best_doc["command"] = "oracle";
  best_doc["grid"] = grid_json(grid, cfg.grid_az_step, cfg.grid_tilt_step);
  best_doc["config"] = {{"grouping", cfg.grouping}, {"seed", cfg.seed}};
  best_doc["best"] = best_point_json(best, table.total_scores[table.argmax_index]);
  best_doc["azimuth_identifiable"] = best.tilt_deg != 0.0;

  json report = preprocess_report_json(in.pre);
  report["_meta"] = meta_json(h, cfg.seed);

  write_output(out_dir, "surface.csv", score_surface_csv(table, meta));
  write_json_output(out_dir, "best.json", best_doc);
  write_json_output(out_dir, "preprocess_report.json", report);
  std::cout << "oracle: argmax (" << best.azimuth_deg << ", " << best.tilt_deg << ") score "
            << table.total_scores[table.argmax_index] << " over " << grid.size()
            << " grid points\n";
  return 0;
}

// ---------------------------------------------------------------------------
// run-artifact replay (publish/sweep input)

struct RunArtifacts {
  DomainGrid grid;
  double az_step = 0, tilt_step = 0;
  KernelSpec kernel;
  int iters = 0;
  GpState state;
  std::vector<SurfaceOrientation> pts;
  std::vector<double> mu;
};

RunArtifacts load_run(const std::string& run_dir) {
  const fs::path dir(run_dir);
  json best = json::parse(read_file((dir / "best.json").string()), nullptr, false);
  if (best.is_discarded())
    throw DataError("cannot parse " + (dir / "best.json").string());
  RunArtifacts run;
  try {
    if (best.at("command").get<std::string>() != "infer")
      throw DataError("run directory does not contain infer artifacts");
    run.az_step = best.at("grid").at("az_step").get<double>();
    run.tilt_step = best.at("grid").at("tilt_step").get<double>();
    const json& c = best.at("config");
    run.kernel.ls_az = c.at("ls_az").get<double>();
    run.kernel.ls_tilt = c.at("ls_tilt").get<double>();
    run.kernel.jitter = c.at("jitter").get<double>();
    run.kernel.circular_azimuth = c.at("circular_azimuth").get<bool>();
    run.iters = c.at("iters").get<int>();
  } catch (const json::exception& e) {
    throw DataError(std::string("best.json is missing required fields: ") + e.what());
  }
  run.grid = DomainGrid::regular(run.az_step, run.tilt_step);

  // Replay the observation sequence to reconstruct the fitted state exactly
  // (floats round-trip through the trace unchanged).
  const std::string text = read_file((dir / "trace.csv").string());
  std::istringstream inp(text);
  std::string line;
  std::vector<std::string> cols;
  long lineno = 0;
  while (std::getline(inp, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    cols = split_csv_line(line);
    break;
  }
  size_t c_az = cols.size(), c_tilt = cols.size(), c_score = cols.size();
  for (size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == "azimuth_deg") c_az = i;
    if (cols[i] == "tilt_deg") c_tilt = i;
    if (cols[i] == "score") c_score = i;
  }
  if (c_az == cols.size() || c_tilt == cols.size() || c_score == cols.size())
    throw DataError("trace.csv lacks azimuth_deg/tilt_deg/score columns");

  GpState state(run.kernel);
  int rows = 0;
  while (std::getline(inp, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    auto f = split_csv_line(line);
    auto az = parse_double(f[c_az]);
    auto tilt = parse_double(f[c_tilt]);
    auto sc = parse_double(f[c_score]);
    if (!az || !tilt || !sc) throw MalformedRow(lineno, "bad trace row");
    state = state.update({*az, *tilt}, *sc);
    ++rows;
  }
  if (rows == 0) throw DataError("trace.csv contains no observations");
  if (rows != run.iters)
    throw DataError("trace.csv row count does not match the recorded budget");
  run.state = std::move(state);

  run.pts.reserve(run.grid.size());
  for (size_t i = 0; i < run.grid.size(); ++i) run.pts.push_back(run.grid.point(i));
  std::vector<double> var;
  run.state.posterior_batch(run.pts, run.mu, var);
  return run;
}

// ---------------------------------------------------------------------------
// publish

int cmd_publish(const std::string& run_dir, const std::string& out_dir,
                const ConfigFlags& flags) {
  const Config cfg = flags.resolve();
  RunArtifacts run = load_run(run_dir);

  DpParams params;
  params.epsilon = cfg.epsilon;
  params.delta = cfg.delta;
  params.domain_size = run.grid.size();
  params.budget = run.iters;
  params.validate();
  if (cfg.samples < 1) throw InvalidConfig("--samples must be >= 1");

  json eff;
  eff["command"] = "publish";
  eff["epsilon"] = cfg.epsilon;
  eff["delta"] = cfg.delta;
  eff["samples"] = cfg.samples;
  eff["seed"] = cfg.seed;
  eff["schedule_denominator"] = cfg.schedule_denominator;
  eff["grid_az_step"] = run.az_step;
  eff["grid_tilt_step"] = run.tilt_step;
  eff["iters"] = run.iters;
  const std::string h = hash_hex(eff);
  const std::string meta = meta_line(h, cfg.seed);

  const SensitivityBound bound = sensitivity_bound(params);
  const double sens =
      cfg.schedule_denominator ? schedule_sensitivity(params) : bound.bound;
  const std::vector<double> prior(run.grid.size(), 1.0);
  const std::vector<double> log_probs =
      mechanism_log_probs(run.mu, params.epsilon, sens, prior);
  const std::vector<double> probs = probs_from_log(log_probs);
  const std::vector<size_t> draws =
      draw_many(probs, static_cast<size_t>(cfg.samples), cfg.seed);

  std::ostringstream releases;
  releases << "# " << meta << "\n";
  releases << "draw,azimuth_deg,tilt_deg\n";
  for (size_t i = 0; i < draws.size(); ++i) {
    const SurfaceOrientation p = run.grid.point(draws[i]);
    releases << i << ',' << fmt_double(p.azimuth_deg) << ',' << fmt_double(p.tilt_deg) << '\n';
  }

  std::ostringstream weights;
  weights << "# " << meta << "\n";
  weights << "azimuth_deg,tilt_deg,log_weight\n";
  for (size_t i = 0; i < run.pts.size(); ++i)
    weights << fmt_double(run.pts[i].azimuth_deg) << ',' << fmt_double(run.pts[i].tilt_deg)
            << ',' << fmt_double(params.epsilon * run.mu[i] / (2.0 * sens)) << '\n';

  const SurfaceOrientation first = run.grid.point(draws.front());
  json report;
  report["_meta"] = meta_json(h, cfg.seed);
  report["epsilon"] = params.epsilon;
  report["delta"] = params.delta;
  report["budget"] = params.budget;
  report["domain_size"] = params.domain_size;
  report["sensitivity"] = {{"phi_bar", bound.phi_bar},
                           {"nu", bound.nu},
                           {"bound", bound.bound},
                           {"used", sens},
                           {"schedule_form", cfg.schedule_denominator}};
  report["release"] = {{"azimuth_deg", first.azimuth_deg}, {"tilt_deg", first.tilt_deg}};
  report["samples"] = cfg.samples;
  report["seed"] = cfg.seed;

  write_output(out_dir, "releases.csv", releases.str());
  write_output(out_dir, "weights.csv", weights.str());
  write_json_output(out_dir, "report.json", report);
  std::cout << "publish: released (" << first.azimuth_deg << ", " << first.tilt_deg
            << ") at epsilon=" << params.epsilon << ", delta=" << params.delta
            << " (sensitivity " << sens << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

int cmd_sweep(const std::string& run_dir, const std::string& out_dir,
              const ConfigFlags& flags) {
  const Config cfg = flags.resolve();
  if (cfg.epsilons.empty()) throw InvalidConfig("--epsilons must list at least one value");
  if (cfg.deltas.empty()) throw InvalidConfig("--deltas must list at least one value");
  if (cfg.samples < 1) throw InvalidConfig("--samples must be >= 1");
  RunArtifacts run = load_run(run_dir);

  json eff;
  eff["command"] = "sweep";
  eff["epsilons"] = cfg.epsilons;
  eff["deltas"] = cfg.deltas;
  eff["samples"] = cfg.samples;
  eff["seed"] = cfg.seed;
  eff["schedule_denominator"] = cfg.schedule_denominator;
  eff["grid_az_step"] = run.az_step;
  eff["grid_tilt_step"] = run.tilt_step;
  eff["iters"] = run.iters;
  const std::string h = hash_hex(eff);
  const std::string meta = meta_line(h, cfg.seed);

  // The non-private reference point: posterior-mean argmax over the grid.
  size_t star = 0;
  for (size_t i = 1; i < run.mu.size(); ++i)
    if (run.mu[i] > run.mu[star]) star = i;
  const SurfaceOrientation lam_star = run.grid.point(star);

  // Cells sorted by posterior mean, best first. Sampling ranks of this fixed
  // order with one shared uniform stream couples the cells monotonically: a
  // more concentrated mechanism (larger epsilon, or larger delta through a
  // smaller sensitivity bound) maps every uniform to a rank at least as good,
  // so RMSE differences between cells reflect the weights, not resampling
  // noise.
  std::vector<size_t> order(run.grid.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (run.mu[a] != run.mu[b]) return run.mu[a] > run.mu[b];
    return a < b;
  });
  std::vector<double> sorted_mu(order.size());
  std::vector<double> sq_dist(order.size());
  for (size_t r = 0; r < order.size(); ++r) {
    sorted_mu[r] = run.mu[order[r]];
    const SurfaceOrientation p = run.grid.point(order[r]);
    const double daz = circular_azimuth_difference(p.azimuth_deg, lam_star.azimuth_deg) / 360.0;
    const double dtilt = (p.tilt_deg - lam_star.tilt_deg) / 90.0;
    sq_dist[r] = (daz * daz + dtilt * dtilt) / 2.0;
  }

  const std::vector<double> prior(run.grid.size(), 1.0);
  const size_t n_draws = static_cast<size_t>(cfg.samples);
  std::ostringstream out;
  out << "# " << meta << "\n";
  out << "epsilon,delta,rmse,rmse_se,mean_azimuth_deg,mean_tilt_deg\n";
  for (double eps : cfg.epsilons) {
    for (double del : cfg.deltas) {
      DpParams params;
      params.epsilon = eps;
      params.delta = del;
      params.domain_size = run.grid.size();
      params.budget = run.iters;
      params.validate();
      const double sens = cfg.schedule_denominator ? schedule_sensitivity(params)
                                                     : sensitivity_bound(params).bound;
      const std::vector<double> probs =
          probs_from_log(mechanism_log_probs(sorted_mu, eps, sens, prior));
      // Stratified systematic draws: uniforms (k + u0)/n instead of n iid
      // uniforms. Each draw is still an exact sample of the mechanism, but
      // the stratification removes almost all Monte Carlo noise from the
      // RMSE estimate, so cells of the sweep are comparable.
      std::mt19937_64 rng(cfg.seed);
      const double u0 = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      std::vector<size_t> ranks(n_draws);
      for (size_t k = 0; k < n_draws; ++k)
        ranks[k] = inverse_cdf_sample(probs, (static_cast<double>(k) + u0) /
                                                 static_cast<double>(n_draws));

      double sum_d2 = 0, sum_d4 = 0, sum_sin = 0, sum_cos = 0, sum_tilt = 0;
      for (size_t r : ranks) {
        sum_d2 += sq_dist[r];
        sum_d4 += sq_dist[r] * sq_dist[r];
        const SurfaceOrientation p = run.grid.point(order[r]);
        sum_sin += std::sin(deg2rad(p.azimuth_deg));
        sum_cos += std::cos(deg2rad(p.azimuth_deg));
        sum_tilt += p.tilt_deg;
      }
      const double n = static_cast<double>(n_draws);
      const double mean_d2 = sum_d2 / n;
      const double rmse = std::sqrt(mean_d2);
      // Delta-method standard error of sqrt(mean of squared distances).
      const double var_d2 = std::max(0.0, sum_d4 / n - mean_d2 * mean_d2);
      const double rmse_se = rmse > 0 ? std::sqrt(var_d2 / n) / (2.0 * rmse) : 0.0;
      double mean_az = rad2deg(std::atan2(sum_sin, sum_cos));
      if (mean_az < 0) mean_az += 360.0;
      const double mean_tilt = sum_tilt / n;
      out << fmt_double(eps) << ',' << fmt_double(del) << ',' << fmt_double(rmse) << ','
          << fmt_double(rmse_se) << ',' << fmt_double(mean_az) << ','
          << fmt_double(mean_tilt) << '\n';
    }
  }
  write_output(out_dir, "rmse.csv", out.str());
  std::cout << "sweep: wrote " << cfg.epsilons.size() * cfg.deltas.size()
            << " rows against reference (" << lam_star.azimuth_deg << ", "
            << lam_star.tilt_deg << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solar PV metadata inference with differentially private release"};
  app.require_subcommand(1);

  std::string scenario_path, generation_path, irradiance_path, run_dir, out_dir;

  ConfigFlags synth_flags;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--scenario", scenario_path, "scenario JSON document")->required();
  synth->add_option("--out", out_dir, "output directory")->required();
  synth_flags.add_common(synth);

  ConfigFlags infer_flags;
  CLI::App* infer = app.add_subcommand("infer", "recover orientation by GP-UCB search");
  infer->add_option("--generation", generation_path, "generation CSV")->required();
  infer->add_option("--irradiance", irradiance_path, "irradiance CSV")->required();
  infer->add_option("--out", out_dir, "output directory")->required();
  infer_flags.add_common(infer);
  infer_flags.add_grid(infer);
  infer_flags.add_bo(infer);
  infer_flags.add_grouping(infer);

  ConfigFlags oracle_flags;
  CLI::App* oracle = app.add_subcommand("oracle", "recover orientation by exhaustive search");
  oracle->add_option("--generation", generation_path, "generation CSV")->required();
  oracle->add_option("--irradiance", irradiance_path, "irradiance CSV")->required();
  oracle->add_option("--out", out_dir, "output directory")->required();
  oracle_flags.add_common(oracle);
  oracle_flags.add_grid(oracle);
  oracle_flags.add_grouping(oracle);

  ConfigFlags publish_flags;
  CLI::App* publish = app.add_subcommand("publish", "release the result under (eps, delta)-DP");
  publish->add_option("--run", run_dir, "directory produced by infer")->required();
  publish->add_option("--out", out_dir, "output directory")->required();
  publish_flags.add_common(publish);
  publish_flags.add_dp(publish);

  ConfigFlags sweep_flags;
  CLI::App* sweep = app.add_subcommand("sweep", "privacy-utility curve over (eps, delta) pairs");
  sweep->add_option("--run", run_dir, "directory produced by infer")->required();
  sweep->add_option("--out", out_dir, "output directory")->required();
  sweep->add_option("--epsilons", sweep_flags.epsilons, "comma-separated epsilon list");
  sweep->add_option("--deltas", sweep_flags.deltas, "comma-separated delta list");
  sweep_flags.add_common(sweep);
  sweep->add_option("--samples", sweep_flags.samples, "draws per (epsilon, delta) cell");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(scenario_path, out_dir, synth_flags);
    if (infer->parsed()) return cmd_infer(generation_path, irradiance_path, out_dir, infer_flags);
    if (oracle->parsed())
      return cmd_oracle(generation_path, irradiance_path, out_dir, oracle_flags);
    if (publish->parsed()) return cmd_publish(run_dir, out_dir, publish_flags);
    if (sweep->parsed()) return cmd_sweep(run_dir, out_dir, sweep_flags);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
