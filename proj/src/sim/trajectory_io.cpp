#include "fallpred/sim/trajectory_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fallpred/format.hpp"

namespace fallpred::sim {

using nlohmann::json;
using forces::FaultKind;

const std::vector<std::string>& trajectory_columns() {
  static const std::vector<std::string> columns = {
      "t",     "q_ankle", "q_hip",    "qd_ankle", "qd_hip",   "tau_ankle", "tau_hip", "com_x",
      "com_z", "com_vx",  "com_vz",   "midtoe_x", "midtoe_z", "contact",   "fallen"};
  return columns;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const auto& cols = trajectory_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const RobotState& s : traj.samples) {
    const double row[] = {s.t,        s.q[0],     s.q[1],     s.qd[0],    s.qd[1],   s.tau[0],
                          s.tau[1],   s.com.x,    s.com.z,    s.com_vel.x, s.com_vel.z, s.midtoe.x,
                          s.midtoe.z, s.contact};
    for (double v : row) out << format_double(v) << ',';
    out << (s.fallen ? 1 : 0) << '\n';
  }
}

std::vector<RobotState> read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("trajectory CSV is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header != trajectory_columns()) throw DataError("trajectory CSV header does not match the expected columns");

  std::vector<RobotState> samples;
  std::vector<double> v(header.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t col = 0, pos = 0;
    while (col < v.size()) {
      const std::size_t next = line.find(',', pos);
      const std::string_view cell(line.data() + pos, (next == std::string::npos ? line.size() : next) - pos);
      v[col++] = parse_double(cell);
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    if (col != v.size()) throw DataError("trajectory CSV row has " + std::to_string(col) + " columns");
    RobotState s;
    s.t = v[0];
    s.q = {v[1], v[2]};
    s.qd = {v[3], v[4]};
    s.tau = {v[5], v[6]};
    s.com = {v[7], v[8]};
    s.com_vel = {v[9], v[10]};
    s.midtoe = {v[11], v[12]};
    s.contact = v[13];
    s.fallen = v[14] != 0.0;
    samples.push_back(s);
  }
  return samples;
}

json profile_to_json(const forces::ForceProfile& p) {
  json j = {{"kind", forces::to_string(p.kind)},
            {"perturbation_start", p.perturbation_start},
            {"perturbation_amplitude", p.perturbation_amplitude},
            {"perturbation_duration", p.perturbation_duration},
            {"first_kind", forces::to_string(p.first_kind)},
            {"fault_start", p.fault_start},
            {"amplitude", p.amplitude},
            {"impulse_duration", p.impulse_duration},
            {"slope", p.slope},
            {"hold", p.hold}};
  if (p.kind == FaultKind::intermittent) {
    j["gap"] = p.gap;
    j["second_kind"] = forces::to_string(p.second_kind);
    j["second_amplitude"] = p.second_amplitude;
  }
  return j;
}

forces::ForceProfile profile_from_json(const json& j) {
  try {
    forces::ForceProfile p;
    p.kind = forces::parse_fault_kind(j.at("kind").get<std::string>());
    p.perturbation_start = j.at("perturbation_start").get<double>();
    p.perturbation_amplitude = j.at("perturbation_amplitude").get<double>();
    p.perturbation_duration = j.at("perturbation_duration").get<double>();
    p.first_kind = forces::parse_fault_kind(j.at("first_kind").get<std::string>());
    p.fault_start = j.at("fault_start").get<double>();
    p.amplitude = j.at("amplitude").get<double>();
    p.impulse_duration = j.at("impulse_duration").get<double>();
    p.slope = j.at("slope").get<double>();
    p.hold = j.at("hold").get<double>();
    if (p.kind == FaultKind::intermittent) {
      p.gap = j.at("gap").get<double>();
      p.second_kind = forces::parse_fault_kind(j.at("second_kind").get<std::string>());
      p.second_amplitude = j.at("second_amplitude").get<double>();
    }
    return p;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed force profile: ") + e.what());
  }
}

namespace {

json optional_micros(const std::optional<Micros>& t) { return t ? json(t->count()) : json(nullptr); }
json optional_seconds(const std::optional<Micros>& t) { return t ? json(to_seconds(*t)) : json(nullptr); }

std::optional<Micros> read_optional_micros(const json& j) {
  if (j.is_null()) return std::nullopt;
  return Micros{j.get<std::int64_t>()};
}

json fault_events(const forces::ForceProfile& p) {
  json events = json::array();
  if (!p.has_fault()) return events;
  events.push_back({{"kind", forces::to_string(p.first_kind)}, {"start", p.fault_start}, {"amplitude", p.amplitude}});
  if (p.kind == FaultKind::intermittent) {
    events.push_back({{"kind", forces::to_string(p.second_kind)},
                      {"start", p.second_fault_start()},
                      {"amplitude", p.second_amplitude}});
  }
  return events;
}

}  // namespace

json trajectory_meta(const Trajectory& t, const std::string& file) {
  return {{"id", t.id},
          {"file", file},
          {"kind", forces::to_string(t.kind())},
          {"seed", t.seed},
          {"label", t.unsafe() ? "unsafe" : "safe"},
          {"t_ft", optional_seconds(t.fault_time)},
          {"t_fall", optional_seconds(t.fall_time)},
          {"fault_time_us", optional_micros(t.fault_time)},
          {"fall_time_us", optional_micros(t.fall_time)},
          {"start_time_us", t.start_time.count()},
          {"sample_period_us", t.sample_period.count()},
          {"samples", t.samples.size()},
          {"faults", fault_events(t.profile)},
          {"profile", profile_to_json(t.profile)}};
}

Trajectory trajectory_from_meta(const json& meta, std::vector<RobotState> samples) {
  try {
    Trajectory t;
    t.id = meta.at("id").get<std::uint64_t>();
    t.seed = meta.at("seed").get<std::uint64_t>();
    t.profile = profile_from_json(meta.at("profile"));
    t.start_time = Micros{meta.at("start_time_us").get<std::int64_t>()};
    t.sample_period = Micros{meta.at("sample_period_us").get<std::int64_t>()};
    t.fault_time = read_optional_micros(meta.at("fault_time_us"));
    t.fall_time = read_optional_micros(meta.at("fall_time_us"));
    t.samples = std::move(samples);
    if (t.samples.size() != meta.at("samples").get<std::size_t>()) {
      throw DataError("trajectory " + std::to_string(t.id) + ": sample count does not match manifest");
    }
    return t;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed trajectory manifest entry: ") + e.what());
  }
}

std::string trajectory_file_name(const Trajectory& traj) {
  char name[64];
  std::snprintf(name, sizeof name, "traj_%05llu_%s.csv", static_cast<unsigned long long>(traj.id),
                std::string(forces::to_string(traj.kind())).c_str());
  return name;
}

void write_trajectory_set(const std::filesystem::path& dir, const std::vector<Trajectory>& trajectories,
                          const json& extra_manifest) {
  std::filesystem::create_directories(dir);
  json manifest = extra_manifest;
  manifest["format"] = "fallpred-trajectories";
  manifest["version"] = 1;
  manifest["columns"] = trajectory_columns();
  json entries = json::array();
  for (const Trajectory& t : trajectories) {
    const std::string file = trajectory_file_name(t);
    std::ofstream out(dir / file);
    if (!out) throw DataError("cannot write " + (dir / file).string());
    write_trajectory_csv(out, t);
    entries.push_back(trajectory_meta(t, file));
  }
  manifest["trajectories"] = std::move(entries);
  std::ofstream out(dir / "manifest.json");
  if (!out) throw DataError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

json read_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw DataError("missing manifest.json in " + dir.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw DataError("unreadable manifest in " + dir.string() + ": " + e.what());
  }
  if (manifest.value("format", "") != "fallpred-trajectories") {
    throw DataError(dir.string() + " does not hold a trajectory set");
  }
  return manifest;
}

std::vector<Trajectory> read_trajectory_set(const std::filesystem::path& dir) {
  const json manifest = read_manifest(dir);
  std::vector<Trajectory> out;
  for (const json& meta : manifest.at("trajectories")) {
    const auto file = dir / meta.at("file").get<std::string>();
    std::ifstream in(file);
    if (!in) throw DataError("missing trajectory file " + file.string());
    out.push_back(trajectory_from_meta(meta, read_trajectory_csv(in)));
  }
  return out;
}

Trajectory read_trajectory_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open trajectory file " + file.string());
  std::vector<RobotState> samples = read_trajectory_csv(in);

  const auto dir = file.parent_path().empty() ? std::filesystem::path(".") : file.parent_path();
  if (std::filesystem::exists(dir / "manifest.json")) {
    const json manifest = read_manifest(dir);
    for (const json& meta : manifest.at("trajectories")) {
      if (meta.at("file").get<std::string>() == file.filename().string()) {
        return trajectory_from_meta(meta, std::move(samples));
      }
    }
  }
  // Bare CSV: timing is inferred from the sample clock; labels are unknown.
  Trajectory t;
  if (!samples.empty()) {
    t.start_time = to_micros(samples.front().t);
    if (samples.size() > 1) t.sample_period = to_micros(samples[1].t - samples[0].t);
  }
  t.samples = std::move(samples);
  return t;
}

}  // namespace fallpred::sim
