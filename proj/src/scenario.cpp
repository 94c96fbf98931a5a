#include "pcac/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "pcac/error.hpp"

namespace pcac {

Vec12 command_trajectory(double t) {
  Vec12 r = Vec12::Zero();
  r[0] = std::cos(2.0 * t) - 1.0;
  r[1] = std::sin(2.0 * t);
  r[2] = std::sin(t);
  r[6] = -2.0 * std::sin(2.0 * t);
  r[7] = 2.0 * std::cos(2.0 * t);
  r[8] = std::cos(t);
  return r;
}

Vec12 evaluate_command(const CommandSpec& command, double t) {
  switch (command.kind) {
    case CommandKind::kPeriodic:
      return command_trajectory(t);
    case CommandKind::kHover:
      return Vec12::Zero();
    case CommandKind::kSetpoint: {
      Vec12 r = Vec12::Zero();
      r.head<3>() = command.setpoint;
      return r;
    }
  }
  return Vec12::Zero();
}

void Scenario::validate() const {
  vehicle.validate();
  if (!(sample_time > 0.0) || !std::isfinite(sample_time)) throw ConfigError("sample_time must be positive");
  if (!(duration > 0.0) || !std::isfinite(duration)) throw ConfigError("duration must be positive");
  if (!initial_state.allFinite()) throw ConfigError("initial_state must be finite");
  if (!theta0.allFinite()) throw ConfigError("theta0 must be finite");
  if (!(p0_scale > 0.0)) throw ConfigError("p0_scale must be positive");
  vrf.validate();
  pcac.validate();
  for (const auto& e : events) {
    if (!(e.time >= 0.0 && e.time <= duration)) throw ConfigError("event time outside [0, duration]");
    if (!(e.mass_scale > 0.0)) throw ConfigError("event mass_scale must be positive");
  }
  if ((noise_sigma.array() < 0.0).any() || !noise_sigma.allFinite()) {
    throw ConfigError("noise sigma must be nonnegative");
  }
  if (!(integrator.rel_tol > 0.0 && integrator.abs_tol > 0.0)) throw ConfigError("integrator tolerances must be positive");
}

int Scenario::num_steps() const {
  return static_cast<int>(std::llround(duration / sample_time));
}

double Scenario::plant_mass_at(double t) const {
  double scale = 1.0;
  double latest = -1.0;
  // Absorb round-off in k * Ts so an event at exactly k * Ts applies to step k.
  const double slack = 1e-9 * sample_time;
  for (const auto& e : events) {
    if (e.time <= t + slack && e.time >= latest) {
      latest = e.time;
      scale = e.mass_scale;
    }
  }
  return vehicle.mass * scale;
}

namespace {

Scenario paper_baseline() {
  Scenario s;
  s.vehicle.mass = 4.34;
  s.vehicle.inertia = Vec3(0.082, 0.0845, 0.1377);
  s.vehicle.gravity = 9.81;
  s.sample_time = 0.1;
  s.p0_scale = 1e6;
  s.vrf.tau_n = 5;
  s.vrf.tau_d = 25;
  s.vrf.lambda_min = 0.01;

  PcacConfig& c = s.pcac;
  c.horizon = 10;
  Vec12 q;
  q << 50, 50, 50, 10, 10, 10, 50, 50, 50, 10, 10, 10;
  c.stage_weight = q.asDiagonal();
  c.terminal_weight = 10.0 * c.stage_weight;
  c.move_weight = Vec4::Constant(0.1).asDiagonal();
  c.slack_weight = 1e6 * Eigen::MatrixXd::Identity(3, 3);
  c.set_angle_limits(Vec3::Constant(std::numbers::pi / 4.0));
  c.u_max = Vec4(20.0, 2.0, 2.0, 2.0);
  c.u_min = -c.u_max;
  c.du_max = Vec4(5.0, 0.3, 0.3, 0.3);
  c.du_min = -c.du_max;
  s.command.kind = CommandKind::kPeriodic;
  return s;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

Scenario example1_scenario(double theta0_bar) {
  Scenario s = paper_baseline();
  s.name = "example1_theta0_" + format_number(theta0_bar);
  s.duration = 30.0;
  s.theta0 = ThetaVector::Constant(theta0_bar);
  s.vrf.eta = 1e-3;
  return s;
}

Scenario example2_scenario(double gamma) {
  Scenario s = paper_baseline();
  s.name = "example2_gamma_" + format_number(gamma);
  s.duration = 25.0;
  s.theta0 = ThetaVector::Constant(1e-2);
  s.vrf.eta = 0.99;
  s.events.push_back(MassEvent{10.0, gamma});
  s.feedforward_mass = FeedforwardMass::kPlant;
  return s;
}

// ---------------------------------------------------------------------------
// YAML parsing

namespace {

class Reader {
 public:
  Reader(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.IsMap()) throw ConfigError(where() + "expected a mapping");
  }

  ~Reader() = default;

  // Every key in the mapping must have been consumed.
  void finish() const {
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw ConfigError("unknown key '" + join(key) + "'");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_[key].IsDefined() && !node_[key].IsNull();
  }

  YAML::Node child(const std::string& key) {
    seen_.insert(key);
    return node_[key];
  }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return scalar(node_[key], join(key));
  }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    try {
      return node_[key].as<int>();
    } catch (const YAML::Exception&) {
      throw ConfigError("'" + join(key) + "' must be an integer");
    }
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    try {
      return node_[key].as<std::string>();
    } catch (const YAML::Exception&) {
      throw ConfigError("'" + join(key) + "' must be a string");
    }
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    try {
      return node_[key].as<bool>();
    } catch (const YAML::Exception&) {
      throw ConfigError("'" + join(key) + "' must be true or false");
    }
  }

  // A list of exactly `n` numbers, or a single number broadcast to all entries.
  Eigen::VectorXd vector(const std::string& key, int n, bool allow_scalar) {
    const YAML::Node v = child(key);
    Eigen::VectorXd out(n);
    if (v.IsScalar() && allow_scalar) {
      out.setConstant(scalar(v, join(key)));
      return out;
    }
    if (!v.IsSequence() || static_cast<int>(v.size()) != n) {
      throw ConfigError("'" + join(key) + "' must be a list of " + std::to_string(n) + " numbers" +
                        (allow_scalar ? " or a single number" : ""));
    }
    for (int i = 0; i < n; ++i) out[i] = scalar(v[static_cast<std::size_t>(i)], join(key));
    return out;
  }

  static double scalar(const YAML::Node& v, const std::string& where) {
    try {
      const double d = v.as<double>();
      if (!std::isfinite(d)) throw ConfigError("'" + where + "' must be finite");
      return d;
    } catch (const YAML::Exception&) {
      throw ConfigError("'" + where + "' must be a number");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "" : "'" + path_ + "': "; }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_vehicle(Reader r, VehicleParams& v) {
  v.mass = r.number("mass", v.mass);
  if (r.has("inertia")) v.inertia = r.vector("inertia", 3, false);
  v.gravity = r.number("gravity", v.gravity);
  r.finish();
}

void read_identification(Reader r, Scenario& s) {
  if (r.has("theta0")) s.theta0 = r.vector("theta0", kThetaDim, true);
  s.p0_scale = r.number("p0_scale", s.p0_scale);
  if (r.has("vrf")) {
    Reader v(r.child("vrf"), r.join("vrf"));
    s.vrf.eta = v.number("eta", s.vrf.eta);
    s.vrf.tau_n = v.integer("tau_n", s.vrf.tau_n);
    s.vrf.tau_d = v.integer("tau_d", s.vrf.tau_d);
    s.vrf.lambda_min = v.number("lambda_min", s.vrf.lambda_min);
    v.finish();
  }
  r.finish();
}

void read_controller(Reader r, Scenario& s) {
  PcacConfig& c = s.pcac;
  c.horizon = r.integer("horizon", c.horizon);
  if (r.has("stage_weight")) c.stage_weight = Vec12(r.vector("stage_weight", 12, true)).asDiagonal();
  if (r.has("terminal_weight") && r.has("terminal_weight_scale")) {
    throw ConfigError("give either terminal_weight or terminal_weight_scale, not both");
  }
  if (r.has("terminal_weight")) {
    c.terminal_weight = Vec12(r.vector("terminal_weight", 12, true)).asDiagonal();
  } else {
    c.terminal_weight = r.number("terminal_weight_scale", 10.0) * c.stage_weight;
  }
  if (r.has("move_weight")) c.move_weight = Vec4(r.vector("move_weight", 4, true)).asDiagonal();
  if (r.has("slack_weight")) c.slack_weight = r.vector("slack_weight", 3, true).asDiagonal();
  if (r.has("angle_limit")) c.set_angle_limits(r.vector("angle_limit", 3, true));
  if (r.has("u_max")) {
    c.u_max = r.vector("u_max", 4, false);
    c.u_min = -c.u_max;
  }
  if (r.has("u_min")) c.u_min = r.vector("u_min", 4, false);
  if (r.has("du_max")) {
    c.du_max = r.vector("du_max", 4, false);
    c.du_min = -c.du_max;
  }
  if (r.has("du_min")) c.du_min = r.vector("du_min", 4, false);
  const std::string ff = r.text("gravity_feedforward", s.feedforward_mass == FeedforwardMass::kPlant ? "plant" : "nominal");
  if (ff == "nominal") {
    s.feedforward_mass = FeedforwardMass::kNominal;
  } else if (ff == "plant") {
    s.feedforward_mass = FeedforwardMass::kPlant;
  } else {
    throw ConfigError("'" + r.join("gravity_feedforward") + "' must be 'nominal' or 'plant'");
  }
  s.one_step_delay = r.boolean("one_step_delay", s.one_step_delay);
  r.finish();
}

void read_command(Reader r, CommandSpec& c) {
  const std::string type = r.text("type", "periodic");
  if (type == "periodic") {
    c.kind = CommandKind::kPeriodic;
  } else if (type == "hover") {
    c.kind = CommandKind::kHover;
  } else if (type == "setpoint") {
    c.kind = CommandKind::kSetpoint;
  } else {
    throw ConfigError("'" + r.join("type") + "' must be periodic, hover or setpoint");
  }
  if (r.has("setpoint")) c.setpoint = r.vector("setpoint", 3, false);
  r.finish();
}

Scenario parse_node(const YAML::Node& root) {
  Scenario s = paper_baseline();
  s.theta0 = ThetaVector::Constant(1e-2);
  Reader r(root, "");
  s.name = r.text("name", s.name);
  if (r.has("vehicle")) read_vehicle(Reader(r.child("vehicle"), "vehicle"), s.vehicle);
  s.sample_time = r.number("sample_time", s.sample_time);
  s.duration = r.number("duration", s.duration);
  if (r.has("initial_state")) s.initial_state = r.vector("initial_state", 12, false);
  if (r.has("identification")) read_identification(Reader(r.child("identification"), "identification"), s);
  if (r.has("controller")) read_controller(Reader(r.child("controller"), "controller"), s);
  if (r.has("command")) read_command(Reader(r.child("command"), "command"), s.command);
  if (r.has("events")) {
    const YAML::Node events = r.child("events");
    if (!events.IsSequence()) throw ConfigError("'events' must be a list");
    for (std::size_t i = 0; i < events.size(); ++i) {
      Reader e(events[i], "events." + std::to_string(i));
      MassEvent ev;
      ev.time = e.number("time", 0.0);
      ev.mass_scale = e.number("mass_scale", 1.0);
      e.finish();
      s.events.push_back(ev);
    }
  }
  if (r.has("noise")) {
    Reader n(r.child("noise"), "noise");
    if (n.has("sigma")) s.noise_sigma = n.vector("sigma", 12, true);
    n.finish();
  }
  if (r.has("seed")) {
    try {
      s.seed = r.child("seed").as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      throw ConfigError("'seed' must be a nonnegative integer");
    }
  }
  if (r.has("integrator")) {
    Reader in(r.child("integrator"), "integrator");
    s.integrator.rel_tol = in.number("rel_tol", s.integrator.rel_tol);
    s.integrator.abs_tol = in.number("abs_tol", s.integrator.abs_tol);
    in.finish();
  }
  r.finish();
  s.validate();
  return s;
}

YAML::Node load_yaml(std::string_view text) {
  try {
    return YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }
}

}  // namespace

Scenario parse_scenario(std::string_view yaml_text) {
  const YAML::Node root = load_yaml(yaml_text);
  if (!root.IsMap()) throw ConfigError("scenario document must be a mapping");
  return parse_node(root);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string override_scenario_text(std::string_view yaml_text, std::string_view key_path, std::string_view value) {
  YAML::Node root = load_yaml(yaml_text);
  if (!root.IsMap()) throw ConfigError("scenario document must be a mapping");
  if (key_path.empty()) throw ConfigError("empty parameter path");

  std::vector<std::string> parts;
  std::string current;
  for (char ch : key_path) {
    if (ch == '.') {
      parts.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  parts.push_back(current);

  const YAML::Node parsed = load_yaml(value);
  // yaml-cpp nodes are handles, so walking with reset() would rebind; use recursion instead.
  auto assign = [&](auto&& self, YAML::Node node, std::size_t depth) -> void {
    const std::string& part = parts[depth];
    if (part.empty()) throw ConfigError("malformed parameter path '" + std::string(key_path) + "'");
    const bool last = depth + 1 == parts.size();
    if (node.IsSequence()) {
      std::size_t index = 0;
      try {
        index = std::stoul(part);
      } catch (const std::exception&) {
        throw ConfigError("'" + part + "' is not a list index in '" + std::string(key_path) + "'");
      }
      if (index >= node.size()) throw ConfigError("list index " + part + " out of range");
      if (last) {
        node[index] = parsed;
      } else {
        self(self, node[index], depth + 1);
      }
      return;
    }
    if (!node.IsMap() && !node.IsNull()) {
      throw ConfigError("cannot descend into scalar at '" + part + "' in '" + std::string(key_path) + "'");
    }
    if (last) {
      node[part] = parsed;
    } else {
      YAML::Node next = node[part];
      if (!next.IsDefined() || next.IsNull()) {
        node[part] = YAML::Node(YAML::NodeType::Map);
      }
      self(self, node[part], depth + 1);
    }
  };
  assign(assign, root, 0);

  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << root;
  return out.c_str();
}

std::string scenario_to_yaml(const Scenario& s) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  auto seq = [&](const auto& v) {
    out << YAML::Flow << YAML::BeginSeq;
    for (Eigen::Index i = 0; i < v.size(); ++i) out << v[i];
    out << YAML::EndSeq;
  };
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << s.name;
  out << YAML::Key << "vehicle" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mass" << YAML::Value << s.vehicle.mass;
  out << YAML::Key << "inertia" << YAML::Value;
  seq(s.vehicle.inertia);
  out << YAML::Key << "gravity" << YAML::Value << s.vehicle.gravity;
  out << YAML::EndMap;
  out << YAML::Key << "sample_time" << YAML::Value << s.sample_time;
  out << YAML::Key << "duration" << YAML::Value << s.duration;
  out << YAML::Key << "initial_state" << YAML::Value;
  seq(s.initial_state);

  out << YAML::Key << "identification" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "theta0" << YAML::Value;
  seq(s.theta0);
  out << YAML::Key << "p0_scale" << YAML::Value << s.p0_scale;
  out << YAML::Key << "vrf" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "eta" << YAML::Value << s.vrf.eta;
  out << YAML::Key << "tau_n" << YAML::Value << s.vrf.tau_n;
  out << YAML::Key << "tau_d" << YAML::Value << s.vrf.tau_d;
  out << YAML::Key << "lambda_min" << YAML::Value << s.vrf.lambda_min;
  out << YAML::EndMap << YAML::EndMap;

  const PcacConfig& c = s.pcac;
  out << YAML::Key << "controller" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "horizon" << YAML::Value << c.horizon;
  out << YAML::Key << "stage_weight" << YAML::Value;
  seq(Vec12(c.stage_weight.diagonal()));
  out << YAML::Key << "terminal_weight" << YAML::Value;
  seq(Vec12(c.terminal_weight.diagonal()));
  out << YAML::Key << "move_weight" << YAML::Value;
  seq(Vec4(c.move_weight.diagonal()));
  out << YAML::Key << "slack_weight" << YAML::Value;
  seq(Eigen::VectorXd(c.slack_weight.diagonal()));
  // Angle limits are recovered from the upper rows of the constraint set.
  Vec3 limit;
  for (int j = 0; j < 3; ++j) limit[j] = -c.constraint_offset[2 * j];
  out << YAML::Key << "angle_limit" << YAML::Value;
  seq(limit);
  out << YAML::Key << "u_min" << YAML::Value;
  seq(c.u_min);
  out << YAML::Key << "u_max" << YAML::Value;
  seq(c.u_max);
  out << YAML::Key << "du_min" << YAML::Value;
  seq(c.du_min);
  out << YAML::Key << "du_max" << YAML::Value;
  seq(c.du_max);
  out << YAML::Key << "gravity_feedforward" << YAML::Value
      << (s.feedforward_mass == FeedforwardMass::kPlant ? "plant" : "nominal");
  out << YAML::Key << "one_step_delay" << YAML::Value << s.one_step_delay;
  out << YAML::EndMap;

  out << YAML::Key << "command" << YAML::Value << YAML::BeginMap;
  switch (s.command.kind) {
    case CommandKind::kPeriodic:
      out << YAML::Key << "type" << YAML::Value << "periodic";
      break;
    case CommandKind::kHover:
      out << YAML::Key << "type" << YAML::Value << "hover";
      break;
    case CommandKind::kSetpoint:
      out << YAML::Key << "type" << YAML::Value << "setpoint";
      out << YAML::Key << "setpoint" << YAML::Value;
      seq(s.command.setpoint);
      break;
  }
  out << YAML::EndMap;

  out << YAML::Key << "events" << YAML::Value << YAML::BeginSeq;
  for (const auto& e : s.events) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "time" << YAML::Value << e.time << YAML::Key
        << "mass_scale" << YAML::Value << e.mass_scale << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "noise" << YAML::Value << YAML::BeginMap << YAML::Key << "sigma" << YAML::Value;
  seq(s.noise_sigma);
  out << YAML::EndMap;
  out << YAML::Key << "seed" << YAML::Value << s.seed;
  out << YAML::Key << "integrator" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "rel_tol" << YAML::Value << s.integrator.rel_tol;
  out << YAML::Key << "abs_tol" << YAML::Value << s.integrator.abs_tol;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return out.c_str();
}

}  // namespace pcac
