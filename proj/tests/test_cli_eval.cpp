#include <cstdlib>
#include <fstream>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tumble/pipeline.hpp"

using namespace tumble;
namespace fs = std::filesystem;

namespace {

std::string config_path(const std::string& name) { return std::string(TUMBLE_SOURCE_DIR) + "/configs/" + name; }

IniData minimal_sim()
{
  return parse_ini("[simulate]\nframes = 20\nsample_interval_s = 1\n[output]\ndir = x\n");
}

}  // namespace

TEST(Rmse, Examples)
{
  EXPECT_EQ(rmse({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(rmse({2, 3, 4}, {1, 2, 3}), 1.0);
  EXPECT_DOUBLE_EQ(rmse({1, 2, 3}, {1, 2, 5}), std::sqrt(4.0 / 3.0));
  EXPECT_THROW_KIND(rmse({}, {}), ErrorKind::EmptyInput);
  EXPECT_THROW_KIND(rmse({1}, {1, 2}), ErrorKind::InvalidArgument);
}

TEST(PeriodError, Examples)
{
  EXPECT_EQ(period_relative_error(376.0, 376.0), 0.0);
  EXPECT_NEAR(period_relative_error(376.16, 376.0), 0.0425531914893617, 1e-12);
  EXPECT_DOUBLE_EQ(period_relative_error(2.0, 1.0), 100.0);
  EXPECT_THROW_KIND(period_relative_error(1.0, 0.0), ErrorKind::InvalidArgument);
}

TEST(Ini, ParsesSectionsAndComments)
{
  const auto d = parse_ini("# top\n[a]\nx = 1\n; note\n  y=two words \n\n[b]\nz = 3,4\n");
  EXPECT_EQ(d.at("a").at("x"), "1");
  EXPECT_EQ(d.at("a").at("y"), "two words");
  EXPECT_EQ(d.at("b").at("z"), "3,4");
  EXPECT_EQ(parse_ini(write_ini(d)), d);
}

TEST(Ini, RejectsMalformedLines)
{
  EXPECT_THROW_KIND(parse_ini("x = 1\n"), ErrorKind::Config);
  EXPECT_THROW_KIND(parse_ini("[a\n"), ErrorKind::Config);
  EXPECT_THROW_KIND(parse_ini("[a]\nnovalue\n"), ErrorKind::Config);
  EXPECT_THROW_KIND(parse_ini("[a]\nx = 1\nx = 2\n"), ErrorKind::Config);
  EXPECT_THROW_KIND(parse_ini("[a]\n= 2\n"), ErrorKind::Config);
}

TEST(Config, DefaultsFileAndOverridePrecedence)
{
  const auto cfg = resolve_config(minimal_sim(), {"conditioning.max_planes=4", "output.dir=y"});
  ASSERT_TRUE(cfg.simulated());
  const auto& s = std::get<SimulateSettings>(cfg.source);
  EXPECT_EQ(*s.frames, 20u);                                  // file
  EXPECT_DOUBLE_EQ(s.integrator_dt_s, 0.1);                   // default
  EXPECT_VEC_NEAR(s.inertia, Vec3(0.47, 0.47, 0.02), 0.0);   // default
  EXPECT_EQ(cfg.conditioning.max_planes, 4u);                 // override
  EXPECT_EQ(cfg.output_dir, "y");                             // override beats file
  EXPECT_EQ(cfg.effective.at("simulate").at("duration_s"), "3000");
  EXPECT_EQ(cfg.effective.at("output").at("dir"), "y");
}

TEST(Config, ExactlyOneSource)
{
  auto both = minimal_sim();
  both["reconstruction"]["path"] = "r.json";
  EXPECT_THROW_KIND(resolve_config(both), ErrorKind::Config);
  EXPECT_THROW_KIND(resolve_config(parse_ini("[run]\nseed = 1\n")), ErrorKind::Config);
  EXPECT_NO_THROW(resolve_config(parse_ini("[run]\nseed = 1\n"), {}, false));
}

TEST(Config, RejectsUnknownAndInvalidValues)
{
  EXPECT_THROW_KIND(resolve_config(minimal_sim(), {"simulate.intertia=1,1,1"}), ErrorKind::Config);
  EXPECT_THROW_KIND(resolve_config(minimal_sim(), {"bogus.key=1"}), ErrorKind::Config);
  EXPECT_THROW_KIND(resolve_config(minimal_sim(), {"simulate.inertia=1,1"}), ErrorKind::Config);
  EXPECT_THROW_KIND(resolve_config(minimal_sim(), {"simulate.integrator_dt_s=0"}), ErrorKind::Config);
  EXPECT_THROW_KIND(resolve_config(minimal_sim(), {"conditioning.completion=sphere"}), ErrorKind::Config);
  EXPECT_THROW_KIND(resolve_config(minimal_sim(), {"run.seed=-3"}), ErrorKind::Config);
  EXPECT_THROW_KIND(resolve_config(minimal_sim(), {"frame.axes=diagonal"}), ErrorKind::Config);
  EXPECT_THROW_KIND(resolve_config(parse_ini("[reconstruction]\nformat = colmap\nimages = a\n")), ErrorKind::Config);
  IniData scratch;
  EXPECT_THROW_KIND(apply_override(scratch, "novalue"), ErrorKind::Config);
}

TEST(Config, BundledConfigsResolve)
{
  for (const char* name : {"symmetric_top.ini", "planar_cube.ini"}) {
    const auto cfg = load_config(config_path(name));
    EXPECT_TRUE(cfg.simulated()) << name;
  }
  EXPECT_THROW_KIND(load_config("/nonexistent/config.ini"), ErrorKind::Io);
}

TEST(Stage, WrapsErrorsWithStageName)
{
  try {
    run_stage("frame", [] { throw Error(ErrorKind::Degenerate, "flat"); });
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "frame");
    EXPECT_EQ(e.kind(), ErrorKind::Degenerate);
    EXPECT_NE(std::string(e.what()).find("stage 'frame'"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("flat"), std::string::npos);
  }
  // an inner stage name is kept
  try {
    run_stage("outer", [] { run_stage("inner", [] { throw Error(ErrorKind::Io, "x"); }); });
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "inner");
  }
  EXPECT_EQ(run_stage("ok", [] { return 5; }), 5);
}

TEST(Stage, DerivedSeedsDiffer)
{
  EXPECT_NE(derive_seed(7, 1), derive_seed(7, 2));
  EXPECT_NE(derive_seed(7, 1), derive_seed(8, 1));
  EXPECT_EQ(derive_seed(7, 1), derive_seed(7, 1));
}

TEST(TruthModel, ReproducesSamplesAndInterpolates)
{
  SimConfig cfg;
  cfg.inertia = InertiaModel(1, 2, 3);
  cfg.initial.omega = Vec3(0.3, 0.1, -0.2);
  cfg.initial.velocity = Vec3(0.1, 0, 0);
  cfg.sample_interval = 1.0;
  cfg.integrator_dt = 0.01;
  cfg.frames = 11;
  const auto states = simulate(cfg);
  const TruthModel truth(states, cfg.inertia, cfg.integrator_dt, Vec3(5, 0, 0));
  EXPECT_VEC_NEAR(truth.omega_at(3.0), states[3].omega, 0.0);

  SimConfig fine = cfg;
  fine.sample_interval = 0.5;
  fine.frames = 21;
  const auto dense = simulate(fine);
  EXPECT_VEC_NEAR(truth.omega_at(3.5), dense[7].omega, 1e-12);
  EXPECT_NEAR(truth.range_at(2.0), 5.0 - 0.2, 1e-12);
  EXPECT_NEAR(truth.range_rate_at(2.0), -0.1, 1e-12);
  EXPECT_THROW_KIND(truth.state_at(10.5), ErrorKind::InvalidArgument);
  EXPECT_THROW_KIND(TruthModel({}, cfg.inertia, 0.1, Vec3::Zero()), ErrorKind::EmptyInput);
}

TEST(Evaluate, ReportJsonOmitsRuntime)
{
  EvalReport r;
  r.intervals = 3;
  r.runtime_s = 12.5;
  r.mean_linear_speed_truth_m_s = 1.0;
  r.mean_linear_speed_estimate_m_s = 1.05;
  const auto j = eval_report_to_json(r);
  EXPECT_FALSE(j.contains("runtime_s"));
  EXPECT_NEAR(j["mean_linear_speed_m_s"]["relative_error_pct"].get<double>(), 5.0, 1e-9);
  EXPECT_TRUE(j["period"]["x"].is_null());
}

TEST(Pipeline, NoiselessSymmetricTop)
{
  const auto dir = test::scratch_dir("pipeline3d");
  const auto cfg = load_config(config_path("symmetric_top.ini"), {"output.dir=" + dir.string()});
  const auto result = run_pipeline(cfg);
  ASSERT_TRUE(result.report);
  const auto& r = *result.report;
  EXPECT_EQ(r.intervals, 300u);
  for (double e : r.omega_rmse_deg_s) EXPECT_LT(e, 1e-6);
  EXPECT_NEAR(r.mean_linear_speed_estimate_m_s, 0.0045, 1e-6);
  ASSERT_TRUE(r.period[0]);
  EXPECT_NEAR(r.period[0]->estimate_s, 376.0, 0.1);
  for (const char* name : {"effective_config.ini", "truth.csv", "trajectory.csv", "conditioned.ply", "planes.json",
                           "motion.csv", "motion_summary.json", "eval.json"}) {
    EXPECT_TRUE(fs::exists(dir / name)) << name;
  }
  const auto effective = parse_ini(text::read_file((dir / "effective_config.ini").string()));
  EXPECT_EQ(effective.at("conditioning").at("voxel_size"), "0");
}

TEST(Pipeline, MissingReconstructionIsIoErrorNamingPath)
{
  const auto dir = test::scratch_dir("pipeline_missing");
  const auto cfg = resolve_config(
      parse_ini("[reconstruction]\npath = /no/such/recon.json\n[output]\ndir = " + dir.string() + "\n"));
  try {
    run_pipeline(cfg);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
    EXPECT_EQ(e.stage(), "ingest");
    EXPECT_NE(std::string(e.what()).find("/no/such/recon.json"), std::string::npos) << e.what();
  }
}

TEST(Pipeline, IngestsBundledFixture)
{
  const auto dir = test::scratch_dir("pipeline_ingest");
  const auto cfg = resolve_config(parse_ini("[reconstruction]\nformat = colmap\nimages = " +
                                            test::data_path("images.txt") + "\npoints3d = " +
                                            test::data_path("points3D.txt") + "\n[conditioning]\nmax_planes = 0\n"
                                            "[frame]\naxes = world\n[output]\ndir = " + dir.string() + "\n"));
  const auto result = run_pipeline(cfg);
  EXPECT_FALSE(result.report);
  EXPECT_EQ(result.estimate.records.size(), 1u);
  EXPECT_TRUE(fs::exists(dir / "motion.csv"));
  EXPECT_FALSE(fs::exists(dir / "eval.json"));
}

#ifdef TUMBLE_CLI_PATH
namespace {

int run_cli(const std::string& args)
{
  const int status = std::system((std::string(TUMBLE_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, StagesChainThroughFiles)
{
  const auto dir = test::scratch_dir("cli");
  const std::string d = dir.string();
  const std::string cfg = config_path("symmetric_top.ini");
  ASSERT_EQ(run_cli("-o " + d + "/sim simulate -c " + cfg + " --duration 1000"), 0);
  EXPECT_TRUE(fs::exists(dir / "sim/truth.csv"));
  EXPECT_TRUE(fs::exists(dir / "sim/effective_config.ini"));
  ASSERT_EQ(run_cli("-o " + d + "/pcl pcl -c " + cfg + " --cloud " + d + "/sim/model.ply"), 0);
  ASSERT_EQ(run_cli("-o " + d + "/est estimate -c " + cfg + " --trajectory " + d + "/sim/trajectory.csv --planes " +
                    d + "/pcl/planes.json"),
            0);
  ASSERT_EQ(run_cli("-o " + d + "/eval evaluate -c " + cfg + " --motion " + d + "/est/motion.csv --trajectory " + d +
                    "/sim/trajectory.csv --truth " + d + "/sim/truth.csv --planes " + d + "/pcl/planes.json"),
            0);
  const auto report = nlohmann::json::parse(text::read_file((dir / "eval/eval.json").string()));
  EXPECT_LT(report["omega_rmse_deg_s"]["z"].get<double>(), 1e-6);
}

TEST(Cli, ExitCodes)
{
  const auto dir = test::scratch_dir("cli_codes");
  const std::string d = dir.string();
  {
    std::ofstream both(dir / "both.ini");
    both << "[simulate]\nframes = 3\n[reconstruction]\npath = x.json\n";
  }
  EXPECT_EQ(run_cli("-o " + d + " pipeline -c " + d + "/both.ini"), 2);
  EXPECT_EQ(run_cli("-o " + d + " pipeline --set reconstruction.path=/no/such/file.json"), 3);
  EXPECT_EQ(run_cli("-o " + d + " pipeline -c " + config_path("symmetric_top.ini") + " --set simulate.model=none"), 1);
}
#endif
