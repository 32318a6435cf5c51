// End-to-end checks of the command-line tool: files produced, exit-code
// families, determinism of re-runs, and config/flag precedence. The binary
// path arrives as argv[1] from CMake.
#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pvmeta/io_util.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_work;

int run_cli(const std::string& args) {
  const std::string cmd = "'" + g_cli + "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string slurp(const fs::path& p) { return pvmeta::read_file(p.string()); }

void spit(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  pvmeta::write_file(p.string(), text);
}

size_t count_lines(const std::string& text) {
  size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

const char* kScenario = R"({
  "site_id": "cli",
  "location": {"latitude_deg": 34.0122, "longitude_deg": -117.6889},
  "start_date": "2016-07-01",
  "end_date": "2016-07-03",
  "step_minutes": 60,
  "ground_truth": {"azimuth_deg": 180, "tilt_deg": 20, "nameplate_w": 5000, "derate": 0.85},
  "noise_std": 0.02,
  "cloud_model": {"kind": "clear"},
  "rng_seed": 7
})";

// one synth + one small infer run shared by the downstream tests
struct SharedRuns {
  fs::path scenario = g_work / "scenario.json";
  fs::path synth_dir = g_work / "synth";
  fs::path infer_dir = g_work / "infer";

  SharedRuns() {
    spit(scenario, kScenario);
    if (!fs::exists(synth_dir / "generation.csv")) {
      EXPECT_EQ(run_cli("synth --scenario '" + scenario.string() + "' --out '" +
                        synth_dir.string() + "'"),
                0);
    }
    if (!fs::exists(infer_dir / "best.json")) {
      EXPECT_EQ(run_cli("infer --generation '" + (synth_dir / "generation.csv").string() +
                        "' --irradiance '" + (synth_dir / "irradiance.csv").string() +
                        "' --out '" + infer_dir.string() +
                        "' --grid-az-step 60 --grid-tilt-step 30 --iters 15 --warm-start 5"
                        " --seed 3"),
                0);
    }
  }
};

}  // namespace

TEST(CliExitCodes, HelpIsZero) {
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("infer --help"), 0);
}

TEST(CliExitCodes, UsageErrorsAreTwo) {
  EXPECT_EQ(run_cli(""), 2);                 // a subcommand is required
  EXPECT_EQ(run_cli("frobnicate"), 2);       // unknown verb
  EXPECT_EQ(run_cli("synth --bogus x"), 2);  // unknown flag
  EXPECT_EQ(run_cli("synth"), 2);            // missing required options
}

TEST(CliExitCodes, MissingInputFileIsThree) {
  EXPECT_EQ(run_cli("synth --scenario '" + (g_work / "nope.json").string() + "' --out '" +
                    (g_work / "x1").string() + "'"),
            3);
}

TEST(CliExitCodes, InvalidScenarioIsTwo) {
  const fs::path bad = g_work / "bad_scenario.json";
  spit(bad, "{\"location\": {}}");
  EXPECT_EQ(run_cli("synth --scenario '" + bad.string() + "' --out '" +
                    (g_work / "x2").string() + "'"),
            2);
  const fs::path notjson = g_work / "not_json.json";
  spit(notjson, "this is not json");
  EXPECT_EQ(run_cli("synth --scenario '" + notjson.string() + "' --out '" +
                    (g_work / "x3").string() + "'"),
            2);
}

TEST(CliSynth, WritesDatasetWithMetaHeaders) {
  SharedRuns runs;
  for (const char* name : {"irradiance.csv", "generation.csv", "ground_truth.json"})
    EXPECT_TRUE(fs::exists(runs.synth_dir / name)) << name;

  const std::string irr = slurp(runs.synth_dir / "irradiance.csv");
  const std::regex meta_re("^# pvmeta [0-9]+\\.[0-9]+\\.[0-9]+ seed=7 config=[0-9a-f]{16}\n");
  EXPECT_TRUE(std::regex_search(irr, meta_re)) << irr.substr(0, 80);
  // 3 days x 24 samples + meta + header
  EXPECT_EQ(count_lines(irr), 72u + 2u);

  const auto truth = nlohmann::json::parse(slurp(runs.synth_dir / "ground_truth.json"));
  EXPECT_EQ(truth.at("azimuth_deg").get<double>(), 180.0);
  EXPECT_EQ(truth.at("tilt_deg").get<double>(), 20.0);
  EXPECT_EQ(truth.at("rng_seed").get<std::uint64_t>(), 7u);
  EXPECT_TRUE(truth.contains("_meta"));
}

TEST(CliSynth, SeedFlagOverridesTheScenario) {
  SharedRuns runs;
  const fs::path a = g_work / "seed_a";
  EXPECT_EQ(run_cli("synth --scenario '" + runs.scenario.string() + "' --out '" + a.string() +
                    "' --seed 99"),
            0);
  const auto truth = nlohmann::json::parse(slurp(a / "ground_truth.json"));
  EXPECT_EQ(truth.at("rng_seed").get<std::uint64_t>(), 99u);
  // different seed, different noise
  EXPECT_NE(slurp(a / "generation.csv"), slurp(runs.synth_dir / "generation.csv"));
}

TEST(CliInfer, WritesRunArtifactsDeterministically) {
  SharedRuns runs;
  for (const char* name : {"trace.csv", "samples.csv", "posterior_surface.csv", "best.json",
                           "preprocess_report.json"})
    EXPECT_TRUE(fs::exists(runs.infer_dir / name)) << name;

  // 15 observations + meta + header
  EXPECT_EQ(count_lines(slurp(runs.infer_dir / "trace.csv")), 15u + 2u);

  const auto best = nlohmann::json::parse(slurp(runs.infer_dir / "best.json"));
  EXPECT_EQ(best.at("command").get<std::string>(), "infer");
  EXPECT_EQ(best.at("grid").at("size").get<size_t>(), 18u);  // 6 azimuths x 3 tilts
  EXPECT_EQ(best.at("config").at("iters").get<int>(), 15);
  EXPECT_TRUE(best.at("best").contains("fit_score"));
  EXPECT_TRUE(best.at("posterior_argmax").contains("mean"));
  EXPECT_TRUE(best.at("azimuth_identifiable").is_boolean());

  // byte-identical re-run
  const fs::path again = g_work / "infer_again";
  EXPECT_EQ(run_cli("infer --generation '" + (runs.synth_dir / "generation.csv").string() +
                    "' --irradiance '" + (runs.synth_dir / "irradiance.csv").string() +
                    "' --out '" + again.string() +
                    "' --grid-az-step 60 --grid-tilt-step 30 --iters 15 --warm-start 5"
                    " --seed 3"),
            0);
  for (const char* name : {"trace.csv", "samples.csv", "posterior_surface.csv", "best.json",
                           "preprocess_report.json"})
    EXPECT_EQ(slurp(runs.infer_dir / name), slurp(again / name)) << name;
}

TEST(CliInfer, MalformedCsvIsThree) {
  SharedRuns runs;
  const fs::path broken = g_work / "broken.csv";
  spit(broken, "timestamp,power_w\n2016-07-01T10:00:00Z,not_a_number\n");
  EXPECT_EQ(run_cli("infer --generation '" + broken.string() + "' --irradiance '" +
                    (runs.synth_dir / "irradiance.csv").string() + "' --out '" +
                    (g_work / "x4").string() + "'"),
            3);
}

TEST(CliInfer, ConfigFileYieldsToExplicitFlags) {
  SharedRuns runs;
  const fs::path cfg = g_work / "cfg.json";
  spit(cfg, "{\"iters\": 7, \"warm_start\": 3, \"grid_az_step\": 60, \"grid_tilt_step\": 30}\n");

  const fs::path from_cfg = g_work / "infer_cfg";
  EXPECT_EQ(run_cli("infer --generation '" + (runs.synth_dir / "generation.csv").string() +
                    "' --irradiance '" + (runs.synth_dir / "irradiance.csv").string() +
                    "' --out '" + from_cfg.string() + "' --config '" + cfg.string() + "'"),
            0);
  EXPECT_EQ(count_lines(slurp(from_cfg / "trace.csv")), 7u + 2u);

  const fs::path overridden = g_work / "infer_cfg_flag";
  EXPECT_EQ(run_cli("infer --generation '" + (runs.synth_dir / "generation.csv").string() +
                    "' --irradiance '" + (runs.synth_dir / "irradiance.csv").string() +
                    "' --out '" + overridden.string() + "' --config '" + cfg.string() +
                    "' --iters 5"),
            0);
  EXPECT_EQ(count_lines(slurp(overridden / "trace.csv")), 5u + 2u);
}

TEST(CliOracle, WritesExhaustiveArtifacts) {
  SharedRuns runs;
  const fs::path out = g_work / "oracle";
  EXPECT_EQ(run_cli("oracle --generation '" + (runs.synth_dir / "generation.csv").string() +
                    "' --irradiance '" + (runs.synth_dir / "irradiance.csv").string() +
                    "' --out '" + out.string() + "' --grid-az-step 60 --grid-tilt-step 30"),
            0);
  for (const char* name : {"surface.csv", "best.json", "preprocess_report.json"})
    EXPECT_TRUE(fs::exists(out / name)) << name;
  EXPECT_EQ(count_lines(slurp(out / "surface.csv")), 18u + 2u);
  const auto best = nlohmann::json::parse(slurp(out / "best.json"));
  EXPECT_EQ(best.at("command").get<std::string>(), "oracle");
}

TEST(CliPublish, ReleasesFromAnInferRun) {
  SharedRuns runs;
  const fs::path out = g_work / "publish";
  EXPECT_EQ(run_cli("publish --run '" + runs.infer_dir.string() + "' --out '" + out.string() +
                    "' --epsilon 1 --delta 0.1 --samples 5 --seed 2"),
            0);
  for (const char* name : {"releases.csv", "weights.csv", "report.json"})
    EXPECT_TRUE(fs::exists(out / name)) << name;

  const std::string releases = slurp(out / "releases.csv");
  EXPECT_NE(releases.find("draw,azimuth_deg,tilt_deg\n"), std::string::npos);
  EXPECT_EQ(count_lines(releases), 5u + 2u);
  EXPECT_EQ(count_lines(slurp(out / "weights.csv")), 18u + 2u);

  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  EXPECT_EQ(report.at("epsilon").get<double>(), 1.0);
  EXPECT_EQ(report.at("delta").get<double>(), 0.1);
  EXPECT_EQ(report.at("domain_size").get<size_t>(), 18u);
  EXPECT_EQ(report.at("samples").get<int>(), 5);
  EXPECT_GT(report.at("sensitivity").at("used").get<double>(), 0.0);
  EXPECT_TRUE(report.at("release").contains("azimuth_deg"));

  // deterministic re-run
  const fs::path again = g_work / "publish_again";
  EXPECT_EQ(run_cli("publish --run '" + runs.infer_dir.string() + "' --out '" + again.string() +
                    "' --epsilon 1 --delta 0.1 --samples 5 --seed 2"),
            0);
  for (const char* name : {"releases.csv", "weights.csv", "report.json"})
    EXPECT_EQ(slurp(out / name), slurp(again / name)) << name;
}

TEST(CliPublish, RejectsNonInferRunDirectories) {
  SharedRuns runs;
  const fs::path oracle_out = g_work / "oracle_for_publish";
  EXPECT_EQ(run_cli("oracle --generation '" + (runs.synth_dir / "generation.csv").string() +
                    "' --irradiance '" + (runs.synth_dir / "irradiance.csv").string() +
                    "' --out '" + oracle_out.string() + "' --grid-az-step 60 --grid-tilt-step 30"),
            0);
  EXPECT_EQ(run_cli("publish --run '" + oracle_out.string() + "' --out '" +
                    (g_work / "x5").string() + "' --epsilon 1"),
            3);
}

TEST(CliSweep, WritesTheUtilityCurve) {
  SharedRuns runs;
  const fs::path out = g_work / "sweep";
  EXPECT_EQ(run_cli("sweep --run '" + runs.infer_dir.string() + "' --out '" + out.string() +
                    "' --epsilons 0.5,1 --deltas 0.1 --samples 50 --seed 0"),
            0);
  const std::string rmse = slurp(out / "rmse.csv");
  EXPECT_NE(rmse.find("epsilon,delta,rmse,rmse_se,mean_azimuth_deg,mean_tilt_deg\n"),
            std::string::npos);
  EXPECT_EQ(count_lines(rmse), 2u + 2u);  // 2 epsilons x 1 delta

  // deterministic re-run
  const fs::path again = g_work / "sweep_again";
  EXPECT_EQ(run_cli("sweep --run '" + runs.infer_dir.string() + "' --out '" + again.string() +
                    "' --epsilons 0.5,1 --deltas 0.1 --samples 50 --seed 0"),
            0);
  EXPECT_EQ(slurp(out / "rmse.csv"), slurp(again / "rmse.csv"));

  EXPECT_EQ(run_cli("sweep --run '" + runs.infer_dir.string() + "' --out '" +
                    (g_work / "x6").string() + "' --epsilons nope --samples 10"),
            2);
}

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  if (argc < 2) {
    fprintf(stderr, "usage: test_cli <path-to-cli-binary>\n");
    return 1;
  }
  g_cli = argv[1];
  g_work = fs::temp_directory_path() / ("pvmeta_cli_test_" + std::to_string(getpid()));
  fs::remove_all(g_work);
  fs::create_directories(g_work);
  const int rc = RUN_ALL_TESTS();
  fs::remove_all(g_work);
  return rc;
}
