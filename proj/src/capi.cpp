#include "pcac/pcac.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "pcac/error.hpp"
#include "pcac/linear_model.hpp"
#include "pcac/oracles.hpp"
#include "pcac/scenario.hpp"
#include "pcac/simulation.hpp"
#include "pcac/svg_plot.hpp"
#include "pcac/trace_io.hpp"

struct pcac_scenario {
  std::string yaml;
  pcac::Scenario scenario;
  std::string normalized;
};

struct pcac_run {
  pcac::Scenario scenario;
  pcac::RunResult result;
};

namespace {

thread_local std::string g_last_error;

pcac_status fail(pcac_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Maps exceptions escaping the core onto status codes.
template <typename F>
pcac_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const pcac::ConfigError& e) {
    return fail(PCAC_ERR_CONFIG, e.what());
  } catch (const pcac::IoError& e) {
    return fail(PCAC_ERR_IO, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(PCAC_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PCAC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PCAC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PCAC_ERR_INTERNAL, "unknown error");
  }
}

pcac::VehicleParams vehicle(double mass, const double inertia[3], double gravity) {
  pcac::VehicleParams p;
  p.mass = mass;
  p.inertia = pcac::Vec3(inertia[0], inertia[1], inertia[2]);
  p.gravity = gravity;
  return p;
}

pcac_status new_scenario(std::string yaml, pcac_scenario** out) {
  auto handle = std::make_unique<pcac_scenario>();
  handle->scenario = pcac::parse_scenario(yaml);
  handle->yaml = std::move(yaml);
  *out = handle.release();
  return PCAC_OK;
}

}  // namespace

extern "C" {

const char* pcac_version(void) { return "0.1.0"; }

const char* pcac_status_string(pcac_status status) {
  switch (status) {
    case PCAC_OK: return "ok";
    case PCAC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PCAC_ERR_CONFIG: return "configuration error";
    case PCAC_ERR_IO: return "i/o error";
    case PCAC_ERR_OUT_OF_RANGE: return "index out of range";
    case PCAC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* pcac_last_error(void) { return g_last_error.c_str(); }

pcac_status pcac_scenario_load(const char* path, pcac_scenario** out) {
  if (!path || !out) return fail(PCAC_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    std::ifstream in(path);
    if (!in) return fail(PCAC_ERR_CONFIG, std::string("cannot open scenario file '") + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return new_scenario(buf.str(), out);
  });
}

pcac_status pcac_scenario_parse(const char* yaml_text, pcac_scenario** out) {
  if (!yaml_text || !out) return fail(PCAC_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { return new_scenario(yaml_text, out); });
}

pcac_status pcac_scenario_preset(const char* name, double parameter, pcac_scenario** out) {
  if (!name || !out) return fail(PCAC_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    pcac::Scenario s;
    if (std::strcmp(name, "example1") == 0) {
      s = pcac::example1_scenario(parameter);
    } else if (std::strcmp(name, "example2") == 0) {
      s = pcac::example2_scenario(parameter);
    } else {
      return fail(PCAC_ERR_CONFIG, std::string("unknown preset '") + name + "'");
    }
    return new_scenario(pcac::scenario_to_yaml(s), out);
  });
}

pcac_status pcac_scenario_override(pcac_scenario* scenario, const char* key_path, const char* value) {
  if (!scenario || !key_path || !value) return fail(PCAC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    std::string yaml = pcac::override_scenario_text(scenario->yaml, key_path, value);
    scenario->scenario = pcac::parse_scenario(yaml);
    scenario->yaml = std::move(yaml);
    return PCAC_OK;
  });
}

pcac_status pcac_scenario_set_seed(pcac_scenario* scenario, uint64_t seed) {
  if (!scenario) return fail(PCAC_ERR_INVALID_ARGUMENT, "null argument");
  return pcac_scenario_override(scenario, "seed", std::to_string(seed).c_str());
}

const char* pcac_scenario_name(const pcac_scenario* scenario) {
  return scenario ? scenario->scenario.name.c_str() : "";
}

const char* pcac_scenario_yaml(const pcac_scenario* scenario) {
  if (!scenario) return "";
  auto* mutable_handle = const_cast<pcac_scenario*>(scenario);
  mutable_handle->normalized = pcac::scenario_to_yaml(scenario->scenario);
  return mutable_handle->normalized.c_str();
}

void pcac_scenario_free(pcac_scenario* scenario) { delete scenario; }

pcac_status pcac_simulate(const pcac_scenario* scenario, pcac_run** out) {
  if (!scenario || !out) return fail(PCAC_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto run = std::make_unique<pcac_run>();
    run->scenario = scenario->scenario;
    run->result = pcac::run_scenario(run->scenario);
    *out = run.release();
    return PCAC_OK;
  });
}

int pcac_run_faulted(const pcac_run* run) { return run && run->result.fault ? 1 : 0; }

const char* pcac_run_fault_kind(const pcac_run* run) {
  return run && run->result.fault ? pcac::to_string(run->result.fault->kind) : "";
}

const char* pcac_run_fault_message(const pcac_run* run) {
  return run && run->result.fault ? run->result.fault->message.c_str() : "";
}

double pcac_run_fault_time(const pcac_run* run) {
  return run && run->result.fault ? run->result.fault->time : 0.0;
}

double pcac_run_min_covariance_eigenvalue(const pcac_run* run) {
  return run ? run->result.min_covariance_eigenvalue : 0.0;
}

size_t pcac_run_length(const pcac_run* run) { return run ? run->result.trace.size() : 0; }

size_t pcac_trace_column_count(void) { return pcac::trace_columns().size(); }

const char* pcac_trace_column_name(size_t index) {
  const auto& columns = pcac::trace_columns();
  return index < columns.size() ? columns[index].c_str() : nullptr;
}

pcac_status pcac_run_record(const pcac_run* run, size_t index, double* row, size_t row_length) {
  if (!run || !row) return fail(PCAC_ERR_INVALID_ARGUMENT, "null argument");
  if (index >= run->result.trace.size()) return fail(PCAC_ERR_OUT_OF_RANGE, "record index out of range");
  const auto values = pcac::trace_row(run->result.trace[index]);
  if (row_length < values.size()) return fail(PCAC_ERR_INVALID_ARGUMENT, "row buffer too short");
  std::copy(values.begin(), values.end(), row);
  return PCAC_OK;
}

pcac_status pcac_run_true_theta(const pcac_run* run, size_t index, double* theta, size_t length) {
  if (!run || !theta) return fail(PCAC_ERR_INVALID_ARGUMENT, "null argument");
  if (index >= run->result.trace.size()) return fail(PCAC_ERR_OUT_OF_RANGE, "record index out of range");
  if (length < static_cast<size_t>(pcac::kThetaDim)) return fail(PCAC_ERR_INVALID_ARGUMENT, "buffer too short");
  return guarded([&] {
    const auto truth = pcac::true_theta_history(run->scenario, {run->result.trace[index]});
    for (int i = 0; i < pcac::kThetaDim; ++i) theta[i] = truth.front()[i];
    return PCAC_OK;
  });
}

pcac_status pcac_run_write_csv(const pcac_run* run, const char* path) {
  if (!run || !path) return fail(PCAC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    pcac::write_trace_csv(run->result.trace, path);
    return PCAC_OK;
  });
}

pcac_status pcac_run_write_plots(const pcac_run* run, const char* directory, const char* stem, size_t* written) {
  if (!run || !directory || !stem) return fail(PCAC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto files = pcac::write_trace_plots(run->scenario, run->result.trace, directory, stem);
    if (written) *written = files.size();
    return PCAC_OK;
  });
}

void pcac_run_free(pcac_run* run) { delete run; }

pcac_status pcac_hover_model(double mass, const double inertia[3], double gravity, double sample_time, double ad[144],
                             double bd[48]) {
  if (!inertia || !ad || !bd) return fail(PCAC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto model = pcac::make_hover_model(vehicle(mass, inertia, gravity), sample_time);
    for (int r = 0; r < 12; ++r) {
      for (int c = 0; c < 12; ++c) ad[r * 12 + c] = model.ad(r, c);
      for (int c = 0; c < 4; ++c) bd[r * 4 + c] = model.bd(r, c);
    }
    return PCAC_OK;
  });
}

pcac_status pcac_true_theta(double mass, const double inertia[3], double gravity, double sample_time,
                            double theta[12]) {
  if (!inertia || !theta) return fail(PCAC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto t = pcac::true_theta(pcac::make_hover_model(vehicle(mass, inertia, gravity), sample_time).bd);
    for (int i = 0; i < 12; ++i) theta[i] = t[i];
    return PCAC_OK;
  });
}

pcac_status pcac_verify(pcac_verify_callback callback, void* user_data, int* all_passed) {
  return guarded([&] {
    bool ok = true;
    for (const auto& check : pcac::oracle::run_verify_suite()) {
      ok = ok && check.passed;
      if (callback) {
        callback(check.name.c_str(), check.passed ? 1 : 0, check.max_error, check.tolerance, check.detail.c_str(),
                 user_data);
      }
    }
    if (all_passed) *all_passed = ok ? 1 : 0;
    return PCAC_OK;
  });
}

}  // extern "C"
