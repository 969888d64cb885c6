#include "mixedsde/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "mixedsde/textio.hpp"

namespace mixedsde {

namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry>;

std::string trim(const std::string& text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return text.substr(begin, end - begin);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& message) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + message);
}

std::map<std::string, Section> parse_ini(std::istream& in, const std::string& origin) {
  std::map<std::string, Section> sections;
  std::string current;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, line_number, "unterminated section header");
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty()) fail(origin, line_number, "empty section name");
      sections[current];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(origin, line_number, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(origin, line_number, "empty key");
    if (current.empty()) fail(origin, line_number, "key '" + key + "' outside any section");
    if (sections[current].count(key) != 0) {
      fail(origin, line_number, "duplicate key '" + key + "' in section [" + current + "]");
    }
    sections[current][key] = {value, line_number, false};
  }
  return sections;
}

std::int64_t parse_int(const std::string& origin, const Entry& entry, const std::string& key) {
  std::int64_t value = 0;
  const std::string& text = entry.value;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc{} || result.ptr != text.data() + text.size()) {
    fail(origin, entry.line, "field '" + key + "': expected an integer, got '" + text + "'");
  }
  return value;
}

std::uint64_t parse_uint(const std::string& origin, const Entry& entry, const std::string& key) {
  std::uint64_t value = 0;
  const std::string& text = entry.value;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc{} || result.ptr != text.data() + text.size()) {
    fail(origin, entry.line, "field '" + key + "': expected an unsigned integer, got '" + text + "'");
  }
  return value;
}

double parse_double(const std::string& origin, const Entry& entry, const std::string& key) {
  try {
    return parse_float(entry.value);
  } catch (const DomainError&) {
    fail(origin, entry.line, "field '" + key + "': expected a number, got '" + entry.value + "'");
  }
}

std::vector<std::int64_t> parse_int_list(const std::string& origin, const Entry& entry,
                                         const std::string& key) {
  std::vector<std::int64_t> values;
  const std::string& text = entry.value;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = text.find(',', start);
    const std::string item =
        trim(comma == std::string::npos ? text.substr(start) : text.substr(start, comma - start));
    if (item.empty()) fail(origin, entry.line, "field '" + key + "': empty list element");
    std::int64_t value = 0;
    const auto result = std::from_chars(item.data(), item.data() + item.size(), value);
    if (result.ec != std::errc{} || result.ptr != item.data() + item.size()) {
      fail(origin, entry.line, "field '" + key + "': expected an integer, got '" + item + "'");
    }
    values.push_back(value);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return values;
}

bool parse_bool(const std::string& origin, const Entry& entry, const std::string& key) {
  if (entry.value == "true" || entry.value == "1" || entry.value == "yes") return true;
  if (entry.value == "false" || entry.value == "0" || entry.value == "no") return false;
  fail(origin, entry.line, "field '" + key + "': expected a boolean, got '" + entry.value + "'");
}

}  // namespace

const char* command_name(Command command) {
  switch (command) {
    case Command::kConvergence: return "convergence";
    case Command::kSimulate: return "simulate";
    case Command::kNoiseTest: return "noise-test";
    case Command::kDiagnostics: return "diagnostics";
  }
  return "unknown";
}

SamplerKind parse_sampler_kind(const std::string& text) {
  if (text == "auto") return SamplerKind::kAuto;
  if (text == "cholesky") return SamplerKind::kCholesky;
  if (text == "circulant") return SamplerKind::kCirculant;
  throw ConfigError("sampler must be one of auto|cholesky|circulant, got '" + text + "'");
}

HurstIndex ExperimentConfig::hurst_index() const {
  if (degenerate_brownian && hurst == 0.5) return HurstIndex::degenerate_brownian();
  return HurstIndex::checked(hurst);
}

ExperimentConfig load_config(const std::string& path, Command command,
                             const CliOverrides& overrides) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open config file '" + path + "'");
  return load_config_text(file, path, command, overrides);
}

ExperimentConfig load_config_text(std::istream& in, const std::string& origin, Command command,
                                  const CliOverrides& overrides) {
  auto sections = parse_ini(in, origin);
  const std::string wanted = command_name(command);
  for (const auto& [name, entries] : sections) {
    (void)entries;
    if (name != "convergence" && name != "simulate" && name != "noise-test" &&
        name != "diagnostics") {
      throw ConfigError(origin + ": unknown section [" + name + "]");
    }
  }
  auto it = sections.find(wanted);
  if (it == sections.end()) {
    throw ConfigError(origin + ": missing section [" + wanted + "]");
  }
  Section& section = it->second;

  ExperimentConfig config;
  config.command = command;
  switch (command) {
    case Command::kConvergence:
      config.paths = 2000;
      break;
    case Command::kSimulate:
      config.paths = 1;
      config.steps_n = 1024;
      break;
    case Command::kNoiseTest:
      config.paths = 100000;
      config.steps_n = 64;
      break;
    case Command::kDiagnostics:
      config.paths = 10000;
      break;
  }

  auto take = [&](const std::string& key) -> Entry* {
    auto entry = section.find(key);
    if (entry == section.end()) return nullptr;
    entry->second.used = true;
    return &entry->second;
  };

  if (auto* e = take("model")) config.model = e->value;
  if (auto* e = take("hurst")) config.hurst = parse_double(origin, *e, "hurst");
  if (auto* e = take("horizon")) config.horizon = parse_double(origin, *e, "horizon");
  if (auto* e = take("seed")) config.seed = parse_uint(origin, *e, "seed");
  if (auto* e = take("workers")) config.workers = static_cast<int>(parse_int(origin, *e, "workers"));
  if (auto* e = take("output_dir")) config.output_dir = e->value;
  if (auto* e = take("degenerate_brownian")) {
    config.degenerate_brownian = parse_bool(origin, *e, "degenerate_brownian");
  }
  if (auto* e = take("sampler")) {
    try {
      config.sampler = parse_sampler_kind(e->value);
    } catch (const ConfigError& err) {
      fail(origin, e->line, err.what());
    }
  }
  if (command == Command::kConvergence) {
    if (auto* e = take("fine_n")) config.fine_n = parse_int(origin, *e, "fine_n");
    if (auto* e = take("factors")) config.factors = parse_int_list(origin, *e, "factors");
    if (auto* e = take("paths")) config.paths = parse_int(origin, *e, "paths");
  }
  if (command == Command::kSimulate || command == Command::kNoiseTest) {
    if (auto* e = take("n")) config.steps_n = parse_int(origin, *e, "n");
  }
  if (command == Command::kNoiseTest) {
    if (auto* e = take("paths")) config.paths = parse_int(origin, *e, "paths");
  }
  if (command == Command::kDiagnostics) {
    if (auto* e = take("paths")) config.paths = parse_int(origin, *e, "paths");
    if (auto* e = take("moment_n_min")) config.moment_n_min = parse_int(origin, *e, "moment_n_min");
    if (auto* e = take("moment_n_max")) config.moment_n_max = parse_int(origin, *e, "moment_n_max");
    if (auto* e = take("continuity_n_min")) {
      config.continuity_n_min = parse_int(origin, *e, "continuity_n_min");
    }
    if (auto* e = take("continuity_n_max")) {
      config.continuity_n_max = parse_int(origin, *e, "continuity_n_max");
    }
    if (auto* e = take("exp_m")) config.exp_m = parse_double(origin, *e, "exp_m");
    if (auto* e = take("exp_n")) config.exp_n = parse_int(origin, *e, "exp_n");
    if (auto* e = take("exp_paths")) config.exp_paths = parse_int(origin, *e, "exp_paths");
  }

  for (const auto& [key, entry] : section) {
    if (!entry.used) {
      fail(origin, entry.line, "unknown field '" + key + "' in section [" + wanted + "]");
    }
  }

  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.workers) config.workers = *overrides.workers;
  if (overrides.output_dir) config.output_dir = *overrides.output_dir;
  if (overrides.sampler) config.sampler = *overrides.sampler;
  if (overrides.degenerate_brownian) config.degenerate_brownian = true;

  // Cross-field validation.
  if (!(config.horizon > 0.0)) throw ConfigError(origin + ": horizon must be positive");
  if (config.workers < 0) throw ConfigError(origin + ": workers must be nonnegative");
  if (config.paths <= 0) throw ConfigError(origin + ": paths must be positive");
  const bool hurst_in_range = config.hurst > 0.5 && config.hurst < 1.0;
  if (!hurst_in_range && !(config.degenerate_brownian && config.hurst == 0.5)) {
    throw ConfigError(origin + ": hurst must lie in (1/2, 1)" +
                      std::string(config.hurst == 0.5
                                      ? "; pass --degenerate-brownian to unlock h = 0.5"
                                      : ""));
  }
  if (command == Command::kConvergence) {
    if (config.fine_n <= 0) throw ConfigError(origin + ": fine_n must be positive");
    for (const std::int64_t m : config.factors) {
      if (m < 2 || config.fine_n % m != 0) {
        throw ConfigError(origin + ": factor " + std::to_string(m) +
                          " does not divide fine_n " + std::to_string(config.fine_n));
      }
    }
  }
  if (command == Command::kSimulate || command == Command::kNoiseTest) {
    if (config.steps_n <= 0) throw ConfigError(origin + ": n must be positive");
  }
  if (command == Command::kDiagnostics) {
    if (config.moment_n_min < 2 || config.moment_n_min > config.moment_n_max) {
      throw ConfigError(origin + ": moment sweep bounds must satisfy 2 <= min <= max");
    }
    if (config.continuity_n_min < 2 || config.continuity_n_min > config.continuity_n_max) {
      throw ConfigError(origin + ": continuity sweep bounds must satisfy 2 <= min <= max");
    }
    if (!(config.exp_m > 0.0)) throw ConfigError(origin + ": exp_m must be positive");
    if (config.exp_n <= 0 || config.exp_paths <= 0) {
      throw ConfigError(origin + ": exp_n and exp_paths must be positive");
    }
  }
  return config;
}

void write_resolved_config(const ExperimentConfig& config, std::ostream& out) {
  const char* sampler = config.sampler == SamplerKind::kAuto        ? "auto"
                        : config.sampler == SamplerKind::kCholesky ? "cholesky"
                                                                   : "circulant";
  out << '[' << command_name(config.command) << "]\n";
  out << "model = " << config.model << '\n';
  out << "hurst = " << format_float(config.hurst) << '\n';
  out << "horizon = " << format_float(config.horizon) << '\n';
  out << "seed = " << config.seed << '\n';
  out << "workers = " << config.workers << '\n';
  out << "sampler = " << sampler << '\n';
  out << "output_dir = " << config.output_dir << '\n';
  out << "degenerate_brownian = " << (config.degenerate_brownian ? "true" : "false") << '\n';
  switch (config.command) {
    case Command::kConvergence: {
      out << "fine_n = " << config.fine_n << '\n';
      out << "factors = ";
      for (std::size_t i = 0; i < config.factors.size(); ++i) {
        if (i) out << ',';
        out << config.factors[i];
      }
      out << '\n';
      out << "paths = " << config.paths << '\n';
      break;
    }
    case Command::kSimulate:
      out << "n = " << config.steps_n << '\n';
      break;
    case Command::kNoiseTest:
      out << "n = " << config.steps_n << '\n';
      out << "paths = " << config.paths << '\n';
      break;
    case Command::kDiagnostics:
      out << "paths = " << config.paths << '\n';
      out << "moment_n_min = " << config.moment_n_min << '\n';
      out << "moment_n_max = " << config.moment_n_max << '\n';
      out << "continuity_n_min = " << config.continuity_n_min << '\n';
      out << "continuity_n_max = " << config.continuity_n_max << '\n';
      out << "exp_m = " << format_float(config.exp_m) << '\n';
      out << "exp_n = " << config.exp_n << '\n';
      out << "exp_paths = " << config.exp_paths << '\n';
      break;
  }
}

}  // namespace mixedsde
