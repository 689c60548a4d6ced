#include "fallpred/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fallpred/error.hpp"
#include "fallpred/format.hpp"

namespace fallpred::cli {

namespace {

using Setter = std::function<void(RunConfig&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Key {
  std::string section;
  std::string name;
  Setter set;
  Getter get;
};

[[noreturn]] void bad_value(const std::string& what, const std::string& text) {
  throw ConfigError("invalid value for " + what + ": '" + text + "'");
}

double to_double(const std::string& what, const std::string& text) {
  try {
    const double v = parse_double(text);
    if (!std::isfinite(v)) bad_value(what, text);
    return v;
  } catch (const DataError&) {
    bad_value(what, text);
  }
}

std::uint64_t to_u64(const std::string& what, const std::string& text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) bad_value(what, text);
  return v;
}

bool to_bool(const std::string& what, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  bad_value(what, text);
}

template <typename Access>
Key real(std::string section, std::string name, Access access) {
  const std::string what = section + "." + name;
  return {section, name, [=](RunConfig& c, const std::string& t) { access(c) = to_double(what, t); },
          [=](const RunConfig& c) { RunConfig copy = c; return format_double(access(copy)); }};
}

template <typename Access>
Key count(std::string section, std::string name, Access access) {
  const std::string what = section + "." + name;
  return {section, name,
          [=](RunConfig& c, const std::string& t) {
            access(c) = static_cast<std::remove_reference_t<decltype(access(c))>>(to_u64(what, t));
          },
          [=](const RunConfig& c) { RunConfig copy = c; return std::to_string(access(copy)); }};
}

template <typename Access>
Key flag(std::string section, std::string name, Access access) {
  const std::string what = section + "." + name;
  return {section, name, [=](RunConfig& c, const std::string& t) { access(c) = to_bool(what, t); },
          [=](const RunConfig& c) { RunConfig copy = c; return std::string(access(copy) ? "true" : "false"); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back(count("run", "seed", [](RunConfig& c) -> std::uint64_t& { return c.seed; }));
    k.push_back({"run", "output", [](RunConfig& c, const std::string& t) { c.output = t; },
                 [](const RunConfig& c) { return c.output.string(); }});

    k.push_back(real("robot", "leg_mass", [](RunConfig& c) -> double& { return c.robot.leg_mass; }));
    k.push_back(real("robot", "leg_length", [](RunConfig& c) -> double& { return c.robot.leg_length; }));
    k.push_back(real("robot", "leg_com", [](RunConfig& c) -> double& { return c.robot.leg_com; }));
    k.push_back(real("robot", "torso_mass", [](RunConfig& c) -> double& { return c.robot.torso_mass; }));
    k.push_back(real("robot", "torso_length", [](RunConfig& c) -> double& { return c.robot.torso_length; }));
    k.push_back(real("robot", "torso_com", [](RunConfig& c) -> double& { return c.robot.torso_com; }));
    k.push_back(real("robot", "push_height", [](RunConfig& c) -> double& { return c.robot.push_height; }));
    k.push_back(real("robot", "foot_half_length", [](RunConfig& c) -> double& { return c.robot.foot_half_length; }));
    k.push_back(real("robot", "gravity", [](RunConfig& c) -> double& { return c.robot.gravity; }));
    k.push_back(real("robot", "ankle_torque_limit", [](RunConfig& c) -> double& { return c.robot.ankle_torque_limit; }));
    k.push_back(real("robot", "hip_torque_limit", [](RunConfig& c) -> double& { return c.robot.hip_torque_limit; }));
    k.push_back(real("robot", "com_kp", [](RunConfig& c) -> double& { return c.robot.gains.com_kp; }));
    k.push_back(real("robot", "com_kd", [](RunConfig& c) -> double& { return c.robot.gains.com_kd; }));
    k.push_back(real("robot", "hip_kp", [](RunConfig& c) -> double& { return c.robot.gains.hip_kp; }));
    k.push_back(real("robot", "hip_kd", [](RunConfig& c) -> double& { return c.robot.gains.hip_kd; }));
    k.push_back(real("robot", "dt", [](RunConfig& c) -> double& { return c.robot.dt; }));
    k.push_back(real("robot", "sample_period", [](RunConfig& c) -> double& { return c.robot.sample_period; }));

    k.push_back(real("sim", "fall_height", [](RunConfig& c) -> double& { return c.sim.fall_height; }));
    k.push_back({"sim", "fall_height_fraction",
                 [](RunConfig& c, const std::string& t) {
                   if (t.empty() || t == "none") c.sim.fall_height_fraction.reset();
                   else c.sim.fall_height_fraction = to_double("sim.fall_height_fraction", t);
                 },
                 [](const RunConfig& c) {
                   return c.sim.fall_height_fraction ? format_double(*c.sim.fall_height_fraction) : std::string("none");
                 }});
    k.push_back(real("sim", "duration", [](RunConfig& c) -> double& { return c.sim.duration; }));
    k.push_back(real("sim", "retention_delay", [](RunConfig& c) -> double& { return c.sim.retention_delay; }));

    k.push_back(count("faults", "abrupt", [](RunConfig& c) -> std::size_t& { return c.abrupt_count; }));
    k.push_back(count("faults", "incipient", [](RunConfig& c) -> std::size_t& { return c.incipient_count; }));
    k.push_back(count("faults", "intermittent", [](RunConfig& c) -> std::size_t& { return c.intermittent_count; }));
    k.push_back(real("faults", "onset_min", [](RunConfig& c) -> double& { return c.timing.onset_min; }));
    k.push_back(real("faults", "onset_max", [](RunConfig& c) -> double& { return c.timing.onset_max; }));
    k.push_back(real("faults", "gap_min", [](RunConfig& c) -> double& { return c.timing.gap_min; }));
    k.push_back(real("faults", "gap_max", [](RunConfig& c) -> double& { return c.timing.gap_max; }));

    k.push_back(count("split", "test_reserve", [](RunConfig& c) -> std::size_t& { return c.split.test_reserve; }));
    k.push_back(real("split", "train_fraction", [](RunConfig& c) -> double& { return c.split.train_fraction; }));

    k.push_back(count("windows", "length", [](RunConfig& c) -> std::size_t& { return c.window.length; }));
    k.push_back(count("windows", "stride", [](RunConfig& c) -> std::size_t& { return c.window.stride; }));
    k.push_back(real("windows", "horizon", [](RunConfig& c) -> double& { return c.window.horizon; }));
    k.push_back(flag("windows", "drift_correction", [](RunConfig& c) -> bool& { return c.drift_correction; }));
    k.push_back(real("windows", "histogram_bin", [](RunConfig& c) -> double& { return c.histogram_bin; }));

    k.push_back(count("network", "filters", [](RunConfig& c) -> std::size_t& { return c.network.filters; }));
    k.push_back(count("network", "kernel", [](RunConfig& c) -> std::size_t& { return c.network.kernel; }));
    k.push_back(count("network", "stride", [](RunConfig& c) -> std::size_t& { return c.network.stride; }));
    k.push_back(count("network", "pool", [](RunConfig& c) -> std::size_t& { return c.network.pool; }));
    k.push_back(count("network", "hidden", [](RunConfig& c) -> std::size_t& { return c.network.hidden; }));

    k.push_back(count("training", "fault_epochs", [](RunConfig& c) -> std::size_t& { return c.fault_epochs; }));
    k.push_back(count("training", "interval_epochs", [](RunConfig& c) -> std::size_t& { return c.interval_epochs; }));
    k.push_back(count("training", "lead_epochs", [](RunConfig& c) -> std::size_t& { return c.lead_epochs; }));
    k.push_back(count("training", "batch_size", [](RunConfig& c) -> std::size_t& { return c.network.batch_size; }));
    k.push_back(real("training", "learning_rate", [](RunConfig& c) -> double& { return c.network.adam.learning_rate; }));
    k.push_back(real("training", "max_fpr", [](RunConfig& c) -> double& { return c.max_fpr; }));
    k.push_back(real("training", "target_fpr", [](RunConfig& c) -> double& { return c.target_fpr; }));
    return k;
  }();
  return table;
}

}  // namespace

void RunConfig::validate() const {
  try {
    robot.validate();
    sim.validate(robot);
    split.validate();
    window.validate();
    network.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (abrupt_count == 0) throw ConfigError("faults.abrupt must be at least 1");
  if (incipient_count == 0) throw ConfigError("faults.incipient must be at least 1");
  if (intermittent_count == 0) throw ConfigError("faults.intermittent must be at least 1");
  if (!(timing.onset_min >= 0.0 && timing.onset_min <= timing.onset_max))
    throw ConfigError("faults.onset_min must be non-negative and at most faults.onset_max");
  if (!(timing.gap_min > 0.0 && timing.gap_min <= timing.gap_max))
    throw ConfigError("faults.gap_min must be positive and at most faults.gap_max");
  if (!(histogram_bin > 0.0)) throw ConfigError("windows.histogram_bin must be positive");
  if (fault_epochs == 0) throw ConfigError("training.fault_epochs must be at least 1");
  if (interval_epochs == 0) throw ConfigError("training.interval_epochs must be at least 1");
  if (lead_epochs == 0) throw ConfigError("training.lead_epochs must be at least 1");
  if (!(max_fpr >= 0.0 && max_fpr <= 1.0)) throw ConfigError("training.max_fpr must lie in [0,1]");
  if (!(target_fpr >= 0.0 && target_fpr <= 1.0)) throw ConfigError("training.target_fpr must lie in [0,1]");
  if (output.empty()) throw ConfigError("run.output must not be empty");
}

RunConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  std::map<std::string, const Key*> index;
  for (const Key& k : keys()) index[k.section + "." + k.name] = &k;

  RunConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config: key '" + section + "' is outside any section");
    for (const auto& [name, value] : body) {
      const std::string full = section + "." + name;
      const auto it = index.find(full);
      if (it == index.end()) throw ConfigError("config: unknown key " + full);
      it->second->set(config, value.get_value<std::string>());
    }
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  return parse_config(in);
}

std::string to_ini(const RunConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const Key& k : keys()) {
    if (k.section != section) {
      if (!section.empty()) out << '\n';
      section = k.section;
      out << '[' << section << "]\n";
    }
    out << k.name << " = " << k.get(config) << '\n';
  }
  return out.str();
}

void write_config_snapshot(const std::filesystem::path& dir, const RunConfig& config) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "config.ini");
  out << to_ini(config);
  if (!out) throw DataError("cannot write config snapshot in " + dir.string());
}

}  // namespace fallpred::cli
