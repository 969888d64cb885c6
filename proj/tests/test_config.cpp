#include <doctest.h>

#include <sstream>

#include "mixedsde/config.hpp"

using namespace mixedsde;

namespace {

ExperimentConfig parse(const std::string& text, Command command,
                       const CliOverrides& overrides = {}) {
  std::istringstream in(text);
  return load_config_text(in, "test.ini", command, overrides);
}

}  // namespace

TEST_CASE("convergence config parses and resolves") {
  const std::string text = R"(
# experiment archive
[convergence]
model = trig
hurst = 0.6
horizon = 1.0
fine_n = 65536
factors = 16,32,64,128,256,512
paths = 2000
seed = 99
sampler = circulant
)";
  const ExperimentConfig config = parse(text, Command::kConvergence);
  CHECK(config.model == "trig");
  CHECK(config.hurst == 0.6);
  CHECK(config.fine_n == 65536);
  CHECK(config.factors == std::vector<std::int64_t>{16, 32, 64, 128, 256, 512});
  CHECK(config.paths == 2000);
  CHECK(config.seed == 99);
  CHECK(config.sampler == SamplerKind::kCirculant);

  std::ostringstream out;
  write_resolved_config(config, out);
  const ExperimentConfig reparsed = parse(out.str(), Command::kConvergence);
  CHECK(reparsed.model == config.model);
  CHECK(reparsed.factors == config.factors);
  CHECK(reparsed.seed == config.seed);
}

TEST_CASE("config errors carry file, line and field") {
  const std::string bad_value = "[convergence]\nfine_n = many\n";
  try {
    parse(bad_value, Command::kConvergence);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("test.ini:2") != std::string::npos);
    CHECK(what.find("fine_n") != std::string::npos);
  }

  const std::string unknown_key = "[convergence]\nmodle = trig\n";
  try {
    parse(unknown_key, Command::kConvergence);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("modle") != std::string::npos);
  }

  CHECK_THROWS_AS(parse("[convergence]\nfactors = 16,\n", Command::kConvergence), ConfigError);
  CHECK_THROWS_AS(parse("model = trig\n", Command::kConvergence), ConfigError);
  CHECK_THROWS_AS(parse("[typo]\nmodel = trig\n", Command::kConvergence), ConfigError);
  CHECK_THROWS_AS(parse("[simulate]\nn = 8\n", Command::kConvergence), ConfigError);
}

TEST_CASE("non-dividing factor is rejected with its name") {
  const std::string text = "[convergence]\nfine_n = 65536\nfactors = 16,48,64\n";
  try {
    parse(text, Command::kConvergence);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("48") != std::string::npos);
  }
}

TEST_CASE("hurst gate honors the degenerate flag") {
  const std::string text = "[noise-test]\nhurst = 0.5\nn = 16\n";
  CHECK_THROWS_AS(parse(text, Command::kNoiseTest), ConfigError);
  CliOverrides overrides;
  overrides.degenerate_brownian = true;
  const ExperimentConfig config = parse(text, Command::kNoiseTest, overrides);
  CHECK(config.hurst_index().degenerate());
  CHECK_THROWS_AS(parse("[noise-test]\nhurst = 0.4\nn = 16\n", Command::kNoiseTest, overrides),
                  ConfigError);
}

TEST_CASE("overrides take precedence over file values") {
  const std::string text = "[diagnostics]\nseed = 5\nworkers = 4\npaths = 100\n";
  CliOverrides overrides;
  overrides.seed = 17;
  overrides.workers = 1;
  overrides.output_dir = std::string("elsewhere");
  overrides.sampler = SamplerKind::kCholesky;
  const ExperimentConfig config = parse(text, Command::kDiagnostics, overrides);
  CHECK(config.seed == 17);
  CHECK(config.workers == 1);
  CHECK(config.output_dir == "elsewhere");
  CHECK(config.sampler == SamplerKind::kCholesky);
}

TEST_CASE("per-command defaults") {
  CHECK(parse("[noise-test]\n", Command::kNoiseTest).steps_n == 64);
  CHECK(parse("[noise-test]\n", Command::kNoiseTest).paths == 100000);
  CHECK(parse("[simulate]\n", Command::kSimulate).steps_n == 1024);
  const ExperimentConfig diag = parse("[diagnostics]\n", Command::kDiagnostics);
  CHECK(diag.moment_n_min == 64);
  CHECK(diag.moment_n_max == 4096);
  CHECK(diag.exp_n == 1024);
  CHECK(parse_sampler_kind("auto") == SamplerKind::kAuto);
  CHECK_THROWS_AS(parse_sampler_kind("fft"), ConfigError);
}

TEST_CASE("duplicate keys are rejected") {
  CHECK_THROWS_AS(parse("[simulate]\nn = 8\nn = 9\n", Command::kSimulate), ConfigError);
}
