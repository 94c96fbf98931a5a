#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pcac/controller.hpp"
#include "pcac/dynamics.hpp"
#include "pcac/rls.hpp"
#include "pcac/types.hpp"

namespace pcac {

enum class CommandKind { kPeriodic, kHover, kSetpoint };

struct CommandSpec {
  CommandKind kind = CommandKind::kPeriodic;
  Vec3 setpoint = Vec3::Zero();  // used by kSetpoint
};

/// Periodic state command: p_d(t) = [cos 2t - 1, sin 2t, sin t] with matching
/// velocity rows and zero attitude and rate rows.
Vec12 command_trajectory(double t);

Vec12 evaluate_command(const CommandSpec& command, double t);

/// Scales the plant mass to `mass_scale` times the nominal mass from `time` on.
struct MassEvent {
  double time = 0.0;
  double mass_scale = 1.0;
};

/// Which mass the thrust feedforward m*g uses.
enum class FeedforwardMass {
  kNominal,  // the configured vehicle mass throughout
  kPlant,    // the plant mass in effect for the current sample
};

struct Scenario {
  std::string name = "scenario";
  VehicleParams vehicle;
  double sample_time = 0.1;
  double duration = 30.0;
  StateVector initial_state = StateVector::Zero();

  ThetaVector theta0 = ThetaVector::Constant(1e-2);
  double p0_scale = 1e6;
  VrfConfig vrf;

  // gravity_feedforward is derived from the vehicle when the run starts.
  PcacConfig pcac;
  FeedforwardMass feedforward_mass = FeedforwardMass::kNominal;
  // The move computed at step k is applied over [k+1, k+2) when true,
  // over [k, k+1) otherwise.
  bool one_step_delay = true;

  CommandSpec command;
  std::vector<MassEvent> events;
  Vec12 noise_sigma = Vec12::Zero();
  std::uint64_t seed = 1;
  IntegratorOptions integrator;

  void validate() const;

  int num_steps() const;

  /// Plant mass used over [t, t + Ts): post-event iff the event time is <= t.
  double plant_mass_at(double t) const;
};

/// The tracking study: periodic command, theta0 = theta0_bar * ones, eta = 1e-3.
Scenario example1_scenario(double theta0_bar);

/// The abrupt mass-change study: mass scaled by gamma at t = 10 s, eta = 0.99.
Scenario example2_scenario(double gamma);

/// Parses the YAML scenario format. Throws ConfigError with the offending key.
Scenario parse_scenario(std::string_view yaml_text);

Scenario load_scenario(const std::filesystem::path& path);

/// Replaces the value at a dotted key path (`identification.vrf.eta`,
/// `events.0.mass_scale`) with `value` parsed as YAML, returning the new document.
std::string override_scenario_text(std::string_view yaml_text, std::string_view key_path, std::string_view value);

/// Serializes a scenario to the YAML format accepted by parse_scenario.
std::string scenario_to_yaml(const Scenario& scenario);

}  // namespace pcac
