#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mixedsde/commands.hpp"

using namespace mixedsde;
namespace fs = std::filesystem;

namespace {

// Process-level checks drive the installed binary; the in-process
// checks below cover the same run_* functions without a shell.

int run_cli(const std::string& args) {
  const std::string command = std::string(MIXEDSDE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

fs::path make_temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("mixedsde_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST_CASE("cli: missing and malformed configs exit with code 2") {
  CHECK(run_cli("convergence --config /nonexistent.ini") == 2);

  const fs::path dir = make_temp_dir("badcfg");
  write_file(dir / "bad.ini", "[convergence]\nfine_n = lots\n");
  CHECK(run_cli("convergence --config " + (dir / "bad.ini").string()) == 2);

  write_file(dir / "factor.ini",
             "[convergence]\nmodel = trig\nhurst = 0.6\nfine_n = 4096\n"
             "factors = 16,48,64\npaths = 10\n");
  CHECK(run_cli("convergence --config " + (dir / "factor.ini").string()) == 2);

  CHECK(run_cli("bogus-subcommand") == 2);
}

TEST_CASE("cli: simulate writes a trajectory and the resolved config") {
  const fs::path dir = make_temp_dir("simulate");
  write_file(dir / "sim.ini",
             "[simulate]\nmodel = additive\nhurst = 0.75\nn = 32\nseed = 7\n");
  const std::string out_dir = (dir / "out").string();
  CHECK(run_cli("simulate --config " + (dir / "sim.ini").string() + " --output " + out_dir) == 0);
  CHECK(fs::exists(fs::path(out_dir) / "trajectory.csv"));
  CHECK(fs::exists(fs::path(out_dir) / "noise.csv"));
  CHECK(fs::exists(fs::path(out_dir) / "config_resolved.ini"));
  const std::string csv = read_file(fs::path(out_dir) / "trajectory.csv");
  CHECK(csv.rfind("k,t,x\n", 0) == 0);
  // 32 steps -> 33 rows + header.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 34);
}

TEST_CASE("cli: exact additive convergence study passes and skips the fit") {
  const fs::path dir = make_temp_dir("additive");
  write_file(dir / "conv.ini",
             "[convergence]\nmodel = additive\nhurst = 0.75\nfine_n = 1024\n"
             "factors = 8,16,32\npaths = 20\nseed = 5\nsampler = circulant\n");
  std::ostringstream log;
  ExperimentConfig config =
      load_config((dir / "conv.ini").string(), Command::kConvergence, {});
  config.output_dir = (dir / "out").string();
  CHECK(run_convergence(config, log) == 0);
  CHECK(log.str().find("exact") != std::string::npos);
  const std::string meta = read_file(fs::path(config.output_dir) / "errors_meta.json");
  CHECK(meta.find("\"exact\": true") != std::string::npos);
  CHECK(meta.find("\"slope\": null") != std::string::npos);
}

TEST_CASE("cli: noise-test emits cov.csv and passes for both samplers") {
  for (const std::string sampler : {"cholesky", "circulant"}) {
    const fs::path dir = make_temp_dir("noise_" + sampler);
    write_file(dir / "noise.ini",
               "[noise-test]\nhurst = 0.75\nn = 16\npaths = 20000\nseed = 3\nsampler = " +
                   sampler + "\n");
    std::ostringstream log;
    ExperimentConfig config =
        load_config((dir / "noise.ini").string(), Command::kNoiseTest, {});
    config.output_dir = (dir / "out").string();
    CHECK(run_noise_test(config, log) == 0);
    const std::string csv = read_file(fs::path(config.output_dir) / "cov.csv");
    CHECK(csv.rfind("lag,empirical,analytic,z\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 17);
    CHECK(log.str().find("PASS") != std::string::npos);
  }
}

TEST_CASE("cli: byte-identical outputs for identical config and different workers") {
  const fs::path dir = make_temp_dir("repro");
  write_file(dir / "conv.ini",
             "[convergence]\nmodel = trig\nhurst = 0.6\nfine_n = 2048\n"
             "factors = 8,16,32,64\npaths = 40\nseed = 11\nsampler = circulant\n");
  std::string csv[2];
  int worker_choice[2] = {1, 3};
  for (int i = 0; i < 2; ++i) {
    CliOverrides overrides;
    overrides.workers = worker_choice[i];
    ExperimentConfig config =
        load_config((dir / "conv.ini").string(), Command::kConvergence, overrides);
    config.output_dir = (dir / ("out" + std::to_string(i))).string();
    std::ostringstream log;
    run_convergence(config, log);
    csv[i] = read_file(fs::path(config.output_dir) / "errors.csv");
  }
  CHECK(!csv[0].empty());
  CHECK(csv[0] == csv[1]);
}

TEST_CASE("cli: diagnostics runs its checks and reports a skipped bound") {
  const fs::path dir = make_temp_dir("diag");
  // exp_n = 2 with H = 0.6 violates 2MN delta^2H < 1, so the
  // exponential-moment check must be SKIPPED, not failed.
  write_file(dir / "diag.ini",
             "[diagnostics]\nmodel = trig\nhurst = 0.75\npaths = 3000\n"
             "sampler = circulant\nseed = 99\nmoment_n_min = 64\nmoment_n_max = 256\n"
             "continuity_n_min = 16\ncontinuity_n_max = 128\nexp_n = 2\nexp_m = 1.0\n");
  std::ostringstream log;
  ExperimentConfig config =
      load_config((dir / "diag.ini").string(), Command::kDiagnostics, {});
  config.hurst = 0.6;  // makes the bound precondition fail for exp_n = 2
  config.output_dir = (dir / "out").string();
  CHECK(run_diagnostics(config, log) == 0);
  const std::string text = log.str();
  CHECK(text.find("check exp_moment: SKIPPED") != std::string::npos);
  CHECK(text.find("check derivative_moment_bounded: PASS") != std::string::npos);
  CHECK(text.find("check terminal_moment_bounded: PASS") != std::string::npos);
  CHECK(text.find("check grid_continuity_slope: PASS") != std::string::npos);
  CHECK(text.find("RESULT: PASS") != std::string::npos);
  const std::string csv = read_file(fs::path(config.output_dir) / "diagnostics.csv");
  CHECK(csv.rfind("check,n,value,stderr\n", 0) == 0);
  CHECK(csv.find("derivative_moment_p2,64,") != std::string::npos);
  CHECK(csv.find("grid_continuity,128,") != std::string::npos);
}

TEST_CASE("cli: diagnostics on the additive model sees exact derivative moments") {
  const fs::path dir = make_temp_dir("diag_additive");
  write_file(dir / "diag.ini",
             "[diagnostics]\nmodel = additive\nhurst = 0.75\npaths = 4000\n"
             "sampler = circulant\nseed = 12\nmoment_n_min = 64\nmoment_n_max = 256\n"
             "continuity_n_min = 16\ncontinuity_n_max = 128\nexp_n = 1024\n");
  std::ostringstream log;
  ExperimentConfig config =
      load_config((dir / "diag.ini").string(), Command::kDiagnostics, {});
  config.output_dir = (dir / "out").string();
  CHECK(run_diagnostics(config, log) == 0);
  // Constant c = 1, so E|D_s X_T|^2 is exactly 1 at every mesh.
  const std::string csv = read_file(fs::path(config.output_dir) / "diagnostics.csv");
  CHECK(csv.find("derivative_moment_p2,64,1,0\n") != std::string::npos);
  CHECK(csv.find("derivative_moment_p2,256,1,0\n") != std::string::npos);
  CHECK(log.str().find("RESULT: PASS") != std::string::npos);
}

TEST_CASE("cli: degenerate mode is locked behind the flag") {
  const fs::path dir = make_temp_dir("degenerate");
  write_file(dir / "noise.ini", "[noise-test]\nhurst = 0.5\nn = 8\npaths = 4000\nseed = 2\n");
  const std::string base =
      "noise-test --config " + (dir / "noise.ini").string() + " --output " +
      (dir / "out").string();
  CHECK(run_cli(base) == 2);
  CHECK(run_cli(base + " --degenerate-brownian") == 0);
}
