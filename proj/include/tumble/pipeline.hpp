#ifndef TUMBLE_PIPELINE_HPP
#define TUMBLE_PIPELINE_HPP

#include <chrono>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "tumble/config.hpp"
#include "tumble/evaluation.hpp"
#include "tumble/filters.hpp"
#include "tumble/motion.hpp"
#include "tumble/plane.hpp"
#include "tumble/ply.hpp"
#include "tumble/reconstruction.hpp"
#include "tumble/rigid_body.hpp"
#include "tumble/shape_completion.hpp"

namespace tumble {

/// Runs `fn`, re-raising any Error as a StageError naming `stage`.
template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) -> decltype(fn())
{
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

/// Independent seed for a named sub-task, so adding a consumer never shifts another's draws.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt)
{
  return detail::splitmix64(seed ^ detail::splitmix64(salt));
}

/**
 * @brief Surface samples of an axis-aligned cube centered at the origin.
 *
 * Each face carries a grid x grid lattice at cell centers, so no two faces
 * share a point. Optional Gaussian jitter of `noise` metres per axis.
 */
inline PointCloud make_cube_model(double edge, std::size_t grid, double noise = 0.0, std::uint64_t seed = 0)
{
  require(edge > 0.0 && grid >= 1, ErrorKind::InvalidArgument, "cube needs a positive edge and grid");
  PointCloud cloud;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double h = 0.5 * edge;
  for (int axis = 0; axis < 3; ++axis) {
    for (double side : {-1.0, 1.0}) {
      for (std::size_t i = 0; i < grid; ++i) {
        for (std::size_t j = 0; j < grid; ++j) {
          Vec3 p;
          p[axis] = side * h;
          p[(axis + 1) % 3] = -h + edge * (static_cast<double>(i) + 0.5) / static_cast<double>(grid);
          p[(axis + 2) % 3] = -h + edge * (static_cast<double>(j) + 0.5) / static_cast<double>(grid);
          if (noise > 0.0) p += noise * Vec3(gauss(rng), gauss(rng), gauss(rng));
          cloud.points.push_back(p);
        }
      }
    }
  }
  return cloud;
}

inline SimConfig to_sim_config(const SimulateSettings& s)
{
  SimConfig c;
  c.inertia = InertiaModel(s.inertia.x(), s.inertia.y(), s.inertia.z(), s.torque);
  c.initial.attitude = s.attitude0;
  c.initial.omega = s.omega0_deg_s * kDegToRad;
  c.initial.position = s.position0;
  c.initial.velocity = s.velocity0;
  c.duration = s.duration_s;
  c.frames = s.frames;
  c.sample_interval = s.sample_interval_s;
  c.integrator_dt = s.integrator_dt_s;
  c.camera_position_inertial = s.camera_position;
  return c;
}

struct SimulationOutput
{
  SimConfig config;
  std::vector<RigidBodyState> states;
  PoseTrajectory trajectory;  ///< noise applied when configured
  PointCloud model;           ///< body-frame point cloud standing in for the SfM reconstruction
};

inline SimulationOutput run_simulation(const SimulateSettings& settings, std::uint64_t seed)
{
  SimulationOutput out;
  out.config = to_sim_config(settings);
  out.states = simulate(out.config);
  out.trajectory = to_camera_trajectory(out.states, out.config.camera_position_inertial);
  out.trajectory = inject_pose_noise(out.trajectory, settings.noise_rot_deg, settings.noise_trans, derive_seed(seed, 1));
  if (settings.model == "cube") {
    out.model = make_cube_model(settings.model_edge_m, settings.model_grid, settings.model_noise_m, derive_seed(seed, 2));
  }
  return out;
}

inline Reconstruction run_ingest(const ReconstructionSettings& s)
{
  TimingOptions timing;
  timing.frame_rate_hz = s.frame_rate_hz;
  if (!s.timing.empty()) timing.timing = parse_timing_csv(text::read_file(s.timing));
  if (s.format == "colmap") {
    return parse_colmap_text(text::read_file(s.images), text::read_file(s.points3d), timing);
  }
  return parse_reconstruction_json(text::read_file(s.path), timing);
}

struct ConditionOutput
{
  PointCloud cloud;
  std::vector<Plane> planes;
  std::size_t input_points = 0;
  std::size_t after_outlier_removal = 0;
  std::size_t after_downsample = 0;
  std::size_t synthesized = 0;
  Vec3 centroid = Vec3::Zero();
};

/// Outlier removal, downsampling, plane detection and optional shape completion.
inline ConditionOutput run_conditioning(const PointCloud& input, const ConditioningSettings& s, std::uint64_t seed)
{
  ConditionOutput out;
  out.input_points = input.size();
  out.cloud = s.radius > 0.0 ? radius_outlier_removal(input, s.radius, s.min_neighbors) : input;
  out.after_outlier_removal = out.cloud.size();
  if (s.voxel_size > 0.0) out.cloud = voxel_downsample(out.cloud, s.voxel_size);
  out.after_downsample = out.cloud.size();
  require(!out.cloud.empty(), ErrorKind::EmptyInput, "no points left after conditioning");
  if (s.max_planes > 0) {
    out.planes = detect_planes(out.cloud, s.max_planes, s.ransac_threshold, s.min_inlier_fraction, seed,
                               s.ransac_iterations);
  }
  if (s.completion != "none") {
    const auto result =
        complete_shape(out.cloud, s.completion == "cube" ? Primitive::Cube : Primitive::Cylinder, out.planes);
    out.cloud = result.cloud;
    out.synthesized = result.synthesized;
  }
  out.centroid = centroid(out.cloud);
  return out;
}

inline TargetFrame run_frame(const ConditionOutput& condition, const FrameSettings& s)
{
  const Vec3 origin = s.origin ? *s.origin : condition.centroid;
  if (!s.axes_from_planes) return TargetFrame{origin, Rotation::identity()};
  return define_target_frame(condition.planes, origin);
}

inline ScaleReference resolve_scale(const ScaleSettings& s)
{
  if (s.known_length_m) return scale_from_known_length(s.point_a, s.point_b, *s.known_length_m);
  ScaleReference scale{s.c, "direct value"};
  validate(scale);
  return scale;
}

inline nlohmann::json plane_report_json(const ConditionOutput& condition, const TargetFrame& frame)
{
  nlohmann::json j;
  j["planes"] = nlohmann::json::array();
  for (const auto& p : condition.planes) j["planes"].push_back(plane_to_json(p));
  j["frame"] = frame_to_json(frame);
  j["centroid"] = {condition.centroid.x(), condition.centroid.y(), condition.centroid.z()};
  j["points"] = {{"input", condition.input_points},
                 {"after_outlier_removal", condition.after_outlier_removal},
                 {"after_downsample", condition.after_downsample},
                 {"synthesized", condition.synthesized},
                 {"output", condition.cloud.size()}};
  return j;
}

/// Target frame from a plane report written by the pipeline.
inline TargetFrame read_frame_file(const std::string& path)
{
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, "'" + path + "': " + e.what());
  }
  return frame_from_json(j.contains("frame") ? j["frame"] : j);
}

inline std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

struct PipelineResult
{
  MotionEstimate estimate;
  std::optional<EvalReport> report;
  std::vector<std::string> written;  ///< artifact file names, in write order
};

inline void ensure_directory(const std::filesystem::path& dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + dir.string() + "': " + ec.message());
}

/**
 * @brief simulate|ingest -> condition -> frame -> estimate -> evaluate.
 *
 * Artifacts land in cfg.output_dir. Evaluation runs only for simulated
 * input, the only source with ground truth. Failures surface as StageError.
 */
inline PipelineResult run_pipeline(const PipelineConfig& cfg)
{
  const auto start = std::chrono::steady_clock::now();
  run_stage("config", [&] { require(cfg.has_source(), ErrorKind::Config, "no input source configured"); });
  const std::filesystem::path dir(cfg.output_dir);
  PipelineResult result;
  const auto emit = [&](const std::string& name, std::string_view content) {
    run_stage("write", [&] { text::write_file(dir / name, content); });
    result.written.push_back(name);
  };
  run_stage("write", [&] { ensure_directory(dir); });
  emit("effective_config.ini", write_ini(cfg.effective));

  PoseTrajectory trajectory;
  PointCloud cloud;
  std::optional<SimulationOutput> sim;
  if (cfg.simulated()) {
    sim = run_stage("simulate", [&] { return run_simulation(std::get<SimulateSettings>(cfg.source), cfg.seed); });
    trajectory = sim->trajectory;
    cloud = sim->model;
    emit("truth.csv", write_truth_csv(sim->states));
  } else {
    const auto recon = run_stage("ingest", [&] { return run_ingest(std::get<ReconstructionSettings>(cfg.source)); });
    trajectory = recon.trajectory;
    cloud = recon.cloud;
    if (recon.features) emit("features.csv", write_feature_csv(*recon.features));
  }
  emit("trajectory.csv", write_trajectory_csv(trajectory));

  const auto condition = run_stage("condition", [&] {
    require(!cloud.empty(), ErrorKind::EmptyInput, "input point cloud is empty");
    return run_conditioning(cloud, cfg.conditioning, derive_seed(cfg.seed, 3));
  });
  emit("conditioned.ply", write_ply(condition.cloud));

  const auto frame = run_stage("frame", [&] { return run_frame(condition, cfg.frame); });
  emit("planes.json", dump_json(plane_report_json(condition, frame)));

  result.estimate = run_stage("estimate", [&] { return estimate_motion(trajectory, frame, resolve_scale(cfg.scale)); });
  emit("motion.csv", write_motion_csv(result.estimate));
  emit("motion_summary.json", dump_json(motion_summary_json(result.estimate)));

  if (sim) {
    result.report = run_stage("evaluate", [&] {
      const TruthModel truth(sim->states, sim->config.inertia, sim->config.integrator_dt,
                             sim->config.camera_position_inertial);
      return evaluate(result.estimate, truth);
    });
    result.report->runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    emit("eval.json", dump_json(eval_report_to_json(*result.report)));
  }
  return result;
}

}  // namespace tumble

#endif  // TUMBLE_PIPELINE_HPP
