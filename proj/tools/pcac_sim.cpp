// Command-line front end. Talks to the simulator only through the C API.
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pcac/pcac.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFault = 1;
constexpr int kExitConfig = 2;

struct RunOptions {
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  bool no_plots = false;
};

// Keeps file names portable whatever the scenario is called.
std::string file_stem(std::string name) {
  for (char& c : name) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    if (!keep) c = '_';
  }
  return name.empty() ? "scenario" : name;
}

int report(pcac_status status, const char* what) {
  std::fprintf(stderr, "error: %s: %s\n", what, pcac_last_error());
  return status == PCAC_ERR_CONFIG || status == PCAC_ERR_INVALID_ARGUMENT ? kExitConfig : kExitFault;
}

void print_summary(const pcac_run* run) {
  const std::size_t n = pcac_run_length(run);
  const std::size_t width = pcac_trace_column_count();
  std::vector<double> row(width);
  // Tracking error columns are the last three; summarize the second half of the run.
  double sq[3] = {0.0, 0.0, 0.0};
  std::size_t count = 0;
  for (std::size_t i = n / 2; i < n; ++i) {
    pcac_run_record(run, i, row.data(), width);
    for (int j = 0; j < 3; ++j) sq[j] += row[width - 3 + j] * row[width - 3 + j];
    ++count;
  }
  std::printf("records: %zu\n", n);
  if (count > 0) {
    std::printf("rms tracking error, second half [m]: %.4f %.4f %.4f\n", std::sqrt(sq[0] / count),
                std::sqrt(sq[1] / count), std::sqrt(sq[2] / count));
  }
}

// Simulates one prepared scenario and writes its outputs into `dir`.
int simulate_into(pcac_scenario* scenario, const fs::path& dir, bool plots) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::fprintf(stderr, "error: cannot create '%s': %s\n", dir.string().c_str(), ec.message().c_str());
    return kExitFault;
  }
  pcac_run* run = nullptr;
  if (pcac_status s = pcac_simulate(scenario, &run); s != PCAC_OK) return report(s, "simulation");

  const std::string stem = file_stem(pcac_scenario_name(scenario));
  const fs::path csv = dir / (stem + ".csv");
  int code = kExitOk;
  if (pcac_status s = pcac_run_write_csv(run, csv.string().c_str()); s != PCAC_OK) {
    code = report(s, "writing trace");
  } else {
    std::printf("trace: %s\n", csv.string().c_str());
  }
  if (code == kExitOk && plots) {
    std::size_t written = 0;
    if (pcac_status s = pcac_run_write_plots(run, dir.string().c_str(), stem.c_str(), &written); s != PCAC_OK) {
      code = report(s, "writing plots");
    } else {
      std::printf("plots: %zu files in %s\n", written, dir.string().c_str());
    }
  }
  print_summary(run);
  if (pcac_run_faulted(run)) {
    std::fprintf(stderr, "simulation fault at t = %.3f s (%s): %s\n", pcac_run_fault_time(run), pcac_run_fault_kind(run),
                 pcac_run_fault_message(run));
    code = kExitFault;
  }
  pcac_run_free(run);
  return code;
}

pcac_scenario* load(const std::string& path, const RunOptions& options, int& code) {
  pcac_scenario* scenario = nullptr;
  if (pcac_status s = pcac_scenario_load(path.c_str(), &scenario); s != PCAC_OK) {
    code = report(s, "loading scenario");
    return nullptr;
  }
  if (options.seed) {
    if (pcac_status s = pcac_scenario_set_seed(scenario, *options.seed); s != PCAC_OK) {
      code = report(s, "setting seed");
      pcac_scenario_free(scenario);
      return nullptr;
    }
  }
  return scenario;
}

int command_run(const std::string& path, const RunOptions& options) {
  int code = kExitOk;
  pcac_scenario* scenario = load(path, options, code);
  if (!scenario) return code;
  code = simulate_into(scenario, options.out, !options.no_plots);
  pcac_scenario_free(scenario);
  return code;
}

int command_sweep(const std::string& path, const std::string& param, const std::vector<std::string>& values,
                  const RunOptions& options) {
  int code = kExitOk;
  pcac_scenario* base = load(path, options, code);
  if (!base) return code;
  const std::string base_yaml = pcac_scenario_yaml(base);
  const std::string base_name = pcac_scenario_name(base);
  pcac_scenario_free(base);

  // Validate every override before running anything.
  std::vector<pcac_scenario*> prepared;
  auto release = [&] {
    for (auto* s : prepared) pcac_scenario_free(s);
  };
  for (const auto& value : values) {
    pcac_scenario* s = nullptr;
    pcac_status st = pcac_scenario_parse(base_yaml.c_str(), &s);
    if (st == PCAC_OK) st = pcac_scenario_override(s, param.c_str(), value.c_str());
    if (st == PCAC_OK) st = pcac_scenario_override(s, "name", ("\"" + base_name + "_" + param + "=" + value + "\"").c_str());
    if (st != PCAC_OK) {
      code = report(st, (param + " = " + value).c_str());
      pcac_scenario_free(s);
      release();
      return code;
    }
    prepared.push_back(s);
  }
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    std::printf("== %s = %s\n", param.c_str(), values[i].c_str());
    const fs::path dir = fs::path(options.out) / file_stem(param + "=" + values[i]);
    const int c = simulate_into(prepared[i], dir, !options.no_plots);
    if (c != kExitOk && code == kExitOk) code = c;
  }
  release();
  return code;
}

void print_check(const char* name, int passed, double max_error, double tolerance, const char* detail, void*) {
  std::printf("%s %s: max error %.3g (tolerance %.1g); %s\n", passed ? "PASS" : "FAIL", name, max_error, tolerance, detail);
}

int command_verify() {
  int all_passed = 0;
  if (pcac_status s = pcac_verify(print_check, nullptr, &all_passed); s != PCAC_OK) return report(s, "verify");
  return all_passed ? kExitOk : kExitFault;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive predictive quadrotor control simulator"};
  app.require_subcommand(1);

  RunOptions options;
  std::string scenario_path;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "Simulate one scenario and write its trace and plots");
  run->add_option("scenario", scenario_path, "Scenario file")->required();
  run->add_option("--out", options.out, "Output directory")->capture_default_str();
  auto* run_seed = run->add_option("--seed", seed, "Noise seed, overriding the scenario");
  run->add_flag("--no-plots", options.no_plots, "Skip plot images");

  std::string param;
  std::vector<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "Simulate a scenario once per value of one parameter");
  sweep->add_option("scenario", scenario_path, "Scenario file")->required();
  sweep->add_option("--param", param, "Dotted key path, e.g. identification.vrf.eta")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
  sweep->add_option("--out", options.out, "Output directory")->capture_default_str();
  auto* sweep_seed = sweep->add_option("--seed", seed, "Noise seed, overriding the scenario");
  sweep->add_flag("--no-plots", options.no_plots, "Skip plot images");

  auto* verify = app.add_subcommand("verify", "Run the built-in reference checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (run->parsed()) {
    if (*run_seed) options.seed = seed;
    return command_run(scenario_path, options);
  }
  if (sweep->parsed()) {
    if (*sweep_seed) options.seed = seed;
    return command_sweep(scenario_path, param, values, options);
  }
  if (verify->parsed()) return command_verify();
  return kExitConfig;
}
