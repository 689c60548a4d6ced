#include "fallpred/data/dataset.hpp"

#include <fstream>

#include "fallpred/binary_io.hpp"
#include "fallpred/format.hpp"

namespace fallpred::data {

namespace {
constexpr char kTensorMagic[8] = {'F', 'P', 'W', 'I', 'N', 'D', 'O', 'W'};
constexpr std::uint32_t kTensorVersion = 1;
}  // namespace

void Dataset::materialize(std::size_t i, std::span<double> out) const {
  const WindowRef& ref = windows[i];
  data::materialize(series[ref.series], ref.end, params.length, out);
}

void Dataset::materialize(std::size_t i, const ScalerParams& scaler, std::span<double> out) const {
  materialize(i, out);
  apply_scaler(scaler, out);
}

Dataset build_dataset(std::span<const sim::Trajectory* const> trajectories, const WindowParams& params,
                      FeatureVariant variant, const WindowFilter& keep) {
  params.validate();
  Dataset ds;
  ds.variant = variant;
  ds.params = params;
  for (const sim::Trajectory* traj : trajectories) {
    const auto index = static_cast<std::uint32_t>(ds.series.size());
    ds.series.push_back(extract_series(*traj, variant));
    ds.info.push_back({traj->id, traj->kind(), traj->fault_time, traj->fall_time});
    for (const WindowRef& ref : index_windows(*traj, index, params)) {
      if (!keep || keep(ref.label)) ds.windows.push_back(ref);
    }
  }
  return ds;
}

ScalerParams fit_scaler(const Dataset& train) {
  if (train.windows.empty()) throw DataError("cannot fit a scaler on an empty training set");
  ScalerAccumulator acc(feature_dim(train.variant));
  std::vector<double> buf(train.window_size());
  for (std::size_t i = 0; i < train.windows.size(); ++i) {
    train.materialize(i, buf);
    acc.add_rows(buf);
  }
  return acc.finish();
}

nlohmann::json scaler_to_json(const ScalerParams& scaler) { return {{"min", scaler.min}, {"max", scaler.max}}; }

ScalerParams scaler_from_json(const nlohmann::json& j) {
  ScalerParams s;
  try {
    s.min = j.at("min").get<std::vector<double>>();
    s.max = j.at("max").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed scaler block: ") + e.what());
  }
  s.validate();
  return s;
}

void write_dataset_bundle(const std::filesystem::path& dir, const Dataset& ds, const ScalerParams& scaler,
                          const nlohmann::json& manifest_extra) {
  std::filesystem::create_directories(dir);
  const std::size_t m = ds.params.length;
  const std::size_t d = feature_dim(ds.variant);
  {
    std::ofstream out(dir / "windows.bin", std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / "windows.bin").string());
    out.write(kTensorMagic, sizeof kTensorMagic);
    binary::put_u32(out, kTensorVersion);
    binary::put_u64(out, ds.windows.size());
    binary::put_u64(out, m);
    binary::put_u64(out, d);
    std::vector<double> buf(ds.window_size());
    for (std::size_t i = 0; i < ds.windows.size(); ++i) {
      ds.materialize(i, scaler, buf);
      binary::put_f64s(out, buf);
    }
  }
  {
    std::ofstream out(dir / "labels.csv");
    out << "window,trajectory_id,end_index,t_end,fault,lead,interval\n";
    for (std::size_t i = 0; i < ds.windows.size(); ++i) {
      const WindowRef& w = ds.windows[i];
      out << i << ',' << ds.info[w.series].id << ',' << w.end << ',' << format_double(to_seconds(w.label.end_time))
          << ',' << (w.label.fault ? 1 : 0) << ',' << format_double(w.label.lead_seconds()) << ','
          << w.label.interval << '\n';
    }
  }
  nlohmann::json manifest = manifest_extra;
  manifest["format"] = "fallpred-windows";
  manifest["version"] = kTensorVersion;
  manifest["feature_variant"] = to_string(ds.variant);
  manifest["features"] = feature_names(ds.variant);
  manifest["window_length"] = m;
  manifest["stride"] = ds.params.stride;
  manifest["horizon"] = ds.params.horizon;
  manifest["windows"] = ds.windows.size();
  std::vector<std::uint64_t> ids;
  for (const SeriesInfo& info : ds.info) ids.push_back(info.id);
  manifest["trajectory_ids"] = ids;
  manifest["scaler"] = scaler_to_json(scaler);
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

WindowTensor read_window_tensor(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open " + file.string());
  char magic[8];
  binary::read_exact(in, magic, sizeof magic);
  if (!std::equal(magic, magic + 8, kTensorMagic)) throw DataError(file.string() + " is not a window tensor");
  if (binary::get_u32(in) != kTensorVersion) throw DataError(file.string() + ": unsupported tensor version");
  WindowTensor t;
  t.count = binary::get_u64(in);
  t.rows = binary::get_u64(in);
  t.cols = binary::get_u64(in);
  t.values = binary::get_f64s(in, t.count * t.rows * t.cols);
  return t;
}

}  // namespace fallpred::data
