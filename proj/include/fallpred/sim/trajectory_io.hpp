#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "fallpred/sim/episode.hpp"

namespace fallpred::sim {

/// Column names of the per-trajectory CSV, in order.
const std::vector<std::string>& trajectory_columns();

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
/// Reads samples only; metadata comes from the manifest entry.
std::vector<RobotState> read_trajectory_csv(std::istream& in);

nlohmann::json profile_to_json(const forces::ForceProfile& profile);
forces::ForceProfile profile_from_json(const nlohmann::json& j);

/// Manifest entry: everything about the trajectory except the samples.
nlohmann::json trajectory_meta(const Trajectory& traj, const std::string& file);
/// Rebuilds a trajectory from its manifest entry and sample rows.
Trajectory trajectory_from_meta(const nlohmann::json& meta, std::vector<RobotState> samples);

std::string trajectory_file_name(const Trajectory& traj);

/// One CSV per trajectory plus manifest.json in `dir`.
void write_trajectory_set(const std::filesystem::path& dir, const std::vector<Trajectory>& trajectories,
                          const nlohmann::json& extra_manifest = nlohmann::json::object());
std::vector<Trajectory> read_trajectory_set(const std::filesystem::path& dir);
nlohmann::json read_manifest(const std::filesystem::path& dir);

/// Loads a single trajectory CSV; if a manifest.json sits next to it the
/// matching entry supplies the metadata.
Trajectory read_trajectory_file(const std::filesystem::path& file);

}  // namespace fallpred::sim
