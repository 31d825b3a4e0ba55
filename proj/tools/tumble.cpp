// Command-line front end: simulate, ingest, pcl, estimate, evaluate, pipeline.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tumble/tumble.hpp"

namespace {

using namespace tumble;

struct Common
{
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
};

/// Builds overrides in precedence order: --set first, then dedicated flags.
class Overrides
{
public:
  void add(const std::string& section_key, const std::string& value) { list_.push_back(section_key + "=" + value); }

  template <typename T>
  void add_if(const std::string& section_key, const std::optional<T>& value)
  {
    if (!value) return;
    if constexpr (std::is_same_v<T, std::string>) {
      add(section_key, *value);
    } else {
      add(section_key, text::fmt9(static_cast<double>(*value)));
    }
  }

  std::vector<std::string> list_;
};

PipelineConfig resolve(const Common& common, const Overrides& flags, bool require_source,
                       const char* implied_section = nullptr)
{
  IniData data;
  if (!common.config_path.empty()) data = parse_ini(text::read_file(common.config_path));
  if (implied_section && !data.count("simulate") && !data.count("reconstruction")) data[implied_section];
  std::vector<std::string> overrides = common.sets;
  overrides.insert(overrides.end(), flags.list_.begin(), flags.list_.end());
  if (common.seed) overrides.push_back("run.seed=" + std::to_string(*common.seed));
  if (common.output_dir) overrides.push_back("output.dir=" + *common.output_dir);
  return resolve_config(std::move(data), overrides, require_source);
}

class Output
{
public:
  Output(PipelineConfig& cfg, const std::string& command) : cfg_(cfg), dir_(cfg.output_dir)
  {
    ensure_directory(dir_);
    cfg_.effective["command"]["name"] = command;
  }

  void input(const std::string& key, const std::string& path) { cfg_.effective["command"][key] = path; }

  void write(const std::string& name, std::string_view content)
  {
    text::write_file(dir_ / name, content);
    std::cout << "wrote " << (dir_ / name).string() << "\n";
  }

  void finish() { write("effective_config.ini", write_ini(cfg_.effective)); }

private:
  PipelineConfig& cfg_;
  std::filesystem::path dir_;
};

void add_common(CLI::App* sub, Common& common)
{
  sub->add_option("-c,--config", common.config_path, "INI config file")->check(CLI::ExistingFile);
  sub->add_option("--set", common.sets, "Override a config key: section.key=value (repeatable)");
}

int exit_code_for(ErrorKind kind)
{
  switch (kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Io: return 3;
    default: return 1;
  }
}

/// Motion records from CSV with interval bounds taken from the trajectory they were estimated from.
MotionEstimate load_motion(const std::string& motion_path, const PoseTrajectory& traj, const TargetFrame& frame)
{
  MotionEstimate est;
  est.frame = frame;
  est.records = read_motion_csv(text::read_file(motion_path));
  require(est.records.size() + 1 == traj.size(), ErrorKind::InvalidArgument,
          "motion has " + std::to_string(est.records.size()) + " records but the trajectory has " +
              std::to_string(traj.size()) + " poses");
  for (std::size_t i = 0; i < est.records.size(); ++i) {
    auto& r = est.records[i];
    r.t_start = traj.poses[i].timestamp;
    r.t_end = traj.poses[i + 1].timestamp;
    require(std::abs(r.t_mid - 0.5 * (r.t_start + r.t_end)) <= 1e-6 * std::max(1.0, std::abs(r.t_mid)),
            ErrorKind::InvalidArgument, "motion record " + std::to_string(i) + " does not match the trajectory");
  }
  attach_sine_fits(est);
  return est;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Tumbling-target motion estimation from SfM trajectories"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--seed", common.seed, "Random seed (run.seed)");
  app.add_option("-o,--output-dir", common.output_dir, "Output directory (output.dir)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Integrate the rigid body and write trajectory + truth CSV");
  add_common(sim, common);
  std::optional<std::size_t> sim_frames;
  std::optional<double> sim_duration, sim_interval, sim_dt, sim_noise_rot, sim_noise_trans;
  std::optional<std::string> sim_inertia, sim_omega;
  sim->add_option("--frames", sim_frames, "Number of samples (overrides duration)");
  sim->add_option("--duration", sim_duration, "Duration [s]");
  sim->add_option("--sample-interval", sim_interval, "Sampling interval [s]");
  sim->add_option("--integrator-dt", sim_dt, "RK4 step [s]");
  sim->add_option("--inertia", sim_inertia, "Principal moments Ixx,Iyy,Izz");
  sim->add_option("--omega0", sim_omega, "Initial body rate wx,wy,wz [deg/s]");
  sim->add_option("--noise-rot", sim_noise_rot, "Pose rotation noise sigma [deg]");
  sim->add_option("--noise-trans", sim_noise_trans, "Camera center noise sigma [units]");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Read an SfM reconstruction into trajectory CSV and PLY");
  add_common(ingest, common);
  std::optional<std::string> in_format, in_path, in_images, in_points, in_timing;
  std::optional<double> in_rate;
  ingest->add_option("--format", in_format, "json or colmap");
  ingest->add_option("--input", in_path, "JSON reconstruction file");
  ingest->add_option("--images", in_images, "COLMAP images.txt");
  ingest->add_option("--points3d", in_points, "COLMAP points3D.txt");
  ingest->add_option("--timing", in_timing, "Sidecar CSV of image name,time_s");
  ingest->add_option("--frame-rate", in_rate, "Frame rate used when no sidecar is given [Hz]");

  // pcl
  auto* pcl = app.add_subcommand("pcl", "Condition a point cloud, detect planes, define the target frame");
  add_common(pcl, common);
  std::string pcl_cloud;
  std::optional<double> pcl_radius, pcl_voxel, pcl_thresh, pcl_fraction;
  std::optional<std::size_t> pcl_neighbors, pcl_iters, pcl_planes;
  std::optional<std::string> pcl_completion, pcl_axes;
  pcl->add_option("--cloud", pcl_cloud, "Input ASCII PLY")->required()->check(CLI::ExistingFile);
  pcl->add_option("--radius", pcl_radius, "Outlier removal radius (0 disables)");
  pcl->add_option("--min-neighbors", pcl_neighbors, "Outlier removal neighbour count");
  pcl->add_option("--voxel-size", pcl_voxel, "Voxel edge (0 disables)");
  pcl->add_option("--ransac-threshold", pcl_thresh, "Plane inlier distance");
  pcl->add_option("--ransac-iterations", pcl_iters, "RANSAC iterations per plane");
  pcl->add_option("--max-planes", pcl_planes, "Maximum planes to detect");
  pcl->add_option("--min-inlier-fraction", pcl_fraction, "Smallest plane as a fraction of the cloud");
  pcl->add_option("--completion", pcl_completion, "none, cube or cylinder");
  pcl->add_option("--axes", pcl_axes, "planes or world");

  // estimate
  auto* estimate = app.add_subcommand("estimate", "Estimate linear and angular velocity from a trajectory");
  add_common(estimate, common);
  std::string est_traj, est_planes;
  std::optional<double> est_scale, est_length;
  std::optional<std::string> est_pa, est_pb;
  estimate->add_option("--trajectory", est_traj, "Trajectory CSV")->required()->check(CLI::ExistingFile);
  estimate->add_option("--planes", est_planes, "Plane report JSON holding the target frame")->check(CLI::ExistingFile);
  estimate->add_option("--scale", est_scale, "Metres per reconstruction unit");
  estimate->add_option("--known-length", est_length, "Physical distance between --point-a and --point-b [m]");
  estimate->add_option("--point-a", est_pa, "Reference point x,y,z");
  estimate->add_option("--point-b", est_pb, "Reference point x,y,z");

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Compare a motion estimate against simulator truth");
  add_common(evaluate_cmd, common);
  std::string ev_motion, ev_traj, ev_truth, ev_planes;
  std::optional<std::string> ev_inertia, ev_camera;
  std::optional<double> ev_dt;
  evaluate_cmd->add_option("--motion", ev_motion, "Motion CSV")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--trajectory", ev_traj, "Trajectory CSV the motion was estimated from")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--truth", ev_truth, "Truth CSV from simulate")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--planes", ev_planes, "Plane report JSON holding the target frame")
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--inertia", ev_inertia, "Principal moments used by the simulation");
  evaluate_cmd->add_option("--integrator-dt", ev_dt, "RK4 step used by the simulation [s]");
  evaluate_cmd->add_option("--camera", ev_camera, "Inertial camera position x,y,z [m]");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage from a config file");
  add_common(pipeline, common);

  CLI11_PARSE(app, argc, argv);

  try {
    Overrides flags;
    if (*sim) {
      flags.add_if("simulate.frames", sim_frames);
      flags.add_if("simulate.duration_s", sim_duration);
      flags.add_if("simulate.sample_interval_s", sim_interval);
      flags.add_if("simulate.integrator_dt_s", sim_dt);
      flags.add_if("simulate.inertia", sim_inertia);
      flags.add_if("simulate.omega0_deg_s", sim_omega);
      flags.add_if("simulate.noise_rot_deg", sim_noise_rot);
      flags.add_if("simulate.noise_trans", sim_noise_trans);
      auto cfg = resolve(common, flags, true, "simulate");
      require(cfg.simulated(), ErrorKind::Config, "simulate needs a [simulate] section, not [reconstruction]");
      Output out(cfg, "simulate");
      const auto result = run_simulation(std::get<SimulateSettings>(cfg.source), cfg.seed);
      out.write("truth.csv", write_truth_csv(result.states));
      out.write("trajectory.csv", write_trajectory_csv(result.trajectory));
      if (!result.model.empty()) out.write("model.ply", write_ply(result.model));
      out.finish();
      std::cout << result.states.size() << " samples\n";
    } else if (*ingest) {
      flags.add_if("reconstruction.format", in_format);
      flags.add_if("reconstruction.path", in_path);
      flags.add_if("reconstruction.images", in_images);
      flags.add_if("reconstruction.points3d", in_points);
      flags.add_if("reconstruction.timing", in_timing);
      flags.add_if("reconstruction.frame_rate_hz", in_rate);
      auto cfg = resolve(common, flags, true, "reconstruction");
      require(!cfg.simulated(), ErrorKind::Config, "ingest needs a [reconstruction] section, not [simulate]");
      Output out(cfg, "ingest");
      const auto rec = run_ingest(std::get<ReconstructionSettings>(cfg.source));
      out.write("trajectory.csv", write_trajectory_csv(rec.trajectory));
      out.write("cloud.ply", write_ply(rec.cloud));
      if (rec.features) out.write("features.csv", write_feature_csv(*rec.features));
      out.finish();
      std::cout << rec.trajectory.size() << " poses, " << rec.cloud.size() << " points";
      if (rec.stats.dropped_nonfinite) std::cout << ", " << rec.stats.dropped_nonfinite << " non-finite dropped";
      std::cout << "\n";
    } else if (*pcl) {
      flags.add_if("conditioning.radius", pcl_radius);
      flags.add_if("conditioning.min_neighbors", pcl_neighbors);
      flags.add_if("conditioning.voxel_size", pcl_voxel);
      flags.add_if("conditioning.ransac_threshold", pcl_thresh);
      flags.add_if("conditioning.ransac_iterations", pcl_iters);
      flags.add_if("conditioning.max_planes", pcl_planes);
      flags.add_if("conditioning.min_inlier_fraction", pcl_fraction);
      flags.add_if("conditioning.completion", pcl_completion);
      flags.add_if("frame.axes", pcl_axes);
      auto cfg = resolve(common, flags, false);
      Output out(cfg, "pcl");
      out.input("cloud", pcl_cloud);
      LoadStats stats;
      const auto cloud = read_ply(text::read_file(pcl_cloud), &stats);
      const auto condition = run_stage("condition", [&] {
        return run_conditioning(cloud, cfg.conditioning, derive_seed(cfg.seed, 3));
      });
      const auto frame = run_stage("frame", [&] { return run_frame(condition, cfg.frame); });
      out.write("conditioned.ply", write_ply(condition.cloud));
      out.write("planes.json", dump_json(plane_report_json(condition, frame)));
      out.finish();
      std::cout << condition.planes.size() << " planes, " << condition.cloud.size() << " points\n";
    } else if (*estimate) {
      flags.add_if("scale.c", est_scale);
      flags.add_if("scale.known_length_m", est_length);
      flags.add_if("scale.point_a", est_pa);
      flags.add_if("scale.point_b", est_pb);
      auto cfg = resolve(common, flags, false);
      Output out(cfg, "estimate");
      out.input("trajectory", est_traj);
      const auto traj = read_trajectory_csv(text::read_file(est_traj), est_traj);
      TargetFrame frame;
      if (!est_planes.empty()) {
        out.input("planes", est_planes);
        frame = read_frame_file(est_planes);
      } else if (cfg.frame.origin) {
        frame.origin = *cfg.frame.origin;
      }
      const auto result = run_stage("estimate", [&] { return estimate_motion(traj, frame, resolve_scale(cfg.scale)); });
      out.write("motion.csv", write_motion_csv(result));
      out.write("motion_summary.json", dump_json(motion_summary_json(result)));
      out.finish();
      std::cout << result.records.size() << " intervals\n";
    } else if (*evaluate_cmd) {
      flags.add_if("simulate.inertia", ev_inertia);
      flags.add_if("simulate.integrator_dt_s", ev_dt);
      flags.add_if("simulate.camera_position_m", ev_camera);
      auto cfg = resolve(common, flags, true, "simulate");
      require(cfg.simulated(), ErrorKind::Config, "evaluate needs simulation parameters in [simulate]");
      Output out(cfg, "evaluate");
      out.input("motion", ev_motion);
      out.input("trajectory", ev_traj);
      out.input("truth", ev_truth);
      const auto traj = read_trajectory_csv(text::read_file(ev_traj), ev_traj);
      TargetFrame frame;
      if (!ev_planes.empty()) {
        out.input("planes", ev_planes);
        frame = read_frame_file(ev_planes);
      }
      const auto est = load_motion(ev_motion, traj, frame);
      const auto sim_cfg = to_sim_config(std::get<SimulateSettings>(cfg.source));
      const TruthModel truth(read_truth_csv(text::read_file(ev_truth)), sim_cfg.inertia, sim_cfg.integrator_dt,
                             sim_cfg.camera_position_inertial);
      const auto report = run_stage("evaluate", [&] { return evaluate(est, truth); });
      out.write("eval.json", dump_json(eval_report_to_json(report)));
      out.finish();
    } else if (*pipeline) {
      auto cfg = resolve(common, flags, true);
      const auto result = run_pipeline(cfg);
      for (const auto& name : result.written) {
        std::cout << "wrote " << (std::filesystem::path(cfg.output_dir) / name).string() << "\n";
      }
      if (result.report) {
        const auto& r = *result.report;
        std::printf("omega RMSE [deg/s]: x %.3g  y %.3g  z %.3g\n", r.omega_rmse_deg_s[0], r.omega_rmse_deg_s[1],
                    r.omega_rmse_deg_s[2]);
        std::printf("runtime: %.3f s\n", r.runtime_s);
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
