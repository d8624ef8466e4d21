#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "omnitilt/compare.hpp"
#include "omnitilt/runner.hpp"
#include "omnitilt/scenario.hpp"

namespace fs = std::filesystem;
using namespace omnitilt;

namespace {

constexpr int kExitDiverged = 2;
constexpr int kExitUncertified = 3;

fs::path output_root(const std::string& flag)
{
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("OMNITILT_OUT_DIR"); env && *env) return env;
  return "runs";
}

int cmd_run(const std::string& config, const std::string& controller, const std::string& out,
            std::optional<std::uint64_t> seed)
{
  Scenario s = load_scenario(config);
  if (!controller.empty()) s.controller = controller;
  if (seed) s.sim.seed = *seed;
  const fs::path dir = output_root(out) / run_directory_name(s);
  RunOptions opt;
  opt.out_dir = dir;
  opt.keep_records = false;
  const RunResult r = run_scenario(s, opt);
  const MetricsReport& m = r.metrics;
  std::printf("%s [%s, seed %llu] -> %s\n", m.scenario.c_str(), m.controller.c_str(),
              static_cast<unsigned long long>(m.seed), dir.c_str());
  std::printf("  position_rmse  %.6g m\n  rotation_rmse  %.6g rad\n  saturation     %.4f\n",
              m.position_rmse, m.rotation_rmse, m.saturation_duty);
  if (m.recovery_time) std::printf("  recovery_time  %.4f s\n", *m.recovery_time);
  if (m.diverged) {
    std::printf("  DIVERGED at t = %.4f s\n", m.divergence_time.value_or(m.duration));
    return kExitDiverged;
  }
  return 0;
}

int cmd_certify(const std::string& config, bool json, const std::string& out)
{
  const CertificationRequest req = load_certification(config);
  const VehicleModel model(req.vehicle);
  const CertificationReport rep =
      certify(req.gains, model, req.delta_p, req.delta_r, req.psi2, req.band, req.options);
  std::cout << (json ? rep.to_json() : rep.to_text()) << "\n";
  if (!out.empty()) {
    fs::create_directories(fs::path(out).parent_path().empty() ? "." : fs::path(out).parent_path());
    std::ofstream(out) << rep.to_json() << "\n";
  }
  return rep.ok() ? 0 : kExitUncertified;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& json_out)
{
  std::vector<fs::path> paths(dirs.begin(), dirs.end());
  const Comparison c = compare_controllers(collect_metrics(paths));
  std::cout << comparison_to_text(c);
  if (!json_out.empty()) std::ofstream(json_out) << comparison_to_json(c) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"omnitilt: closed-loop simulation of a variable-tilt multirotor"};
  app.require_subcommand(1);

  std::string run_config, run_controller, run_out;
  std::uint64_t run_seed = 0;
  auto* run = app.add_subcommand("run", "simulate a scenario and write telemetry.csv / metrics.json");
  run->add_option("scenario", run_config, "scenario TOML")->required()->check(CLI::ExistingFile);
  run->add_option("--controller", run_controller, "proposed | baseline")
      ->check(CLI::IsMember({"proposed", "baseline"}));
  run->add_option("--out", run_out, "output root (default $OMNITILT_OUT_DIR or ./runs)");
  auto* seed_opt = run->add_option("--seed", run_seed, "RNG seed");

  std::string cert_config, cert_out;
  bool cert_json = false;
  auto* cert = app.add_subcommand("certify", "check the gain conditions and robustness constants");
  cert->add_option("gains", cert_config, "gains TOML")->required()->check(CLI::ExistingFile);
  cert->add_flag("--json", cert_json, "print JSON instead of key: value text");
  cert->add_option("--out", cert_out, "also write the JSON report here");

  std::vector<std::string> cmp_dirs;
  std::string cmp_json;
  auto* cmp = app.add_subcommand("compare", "tabulate metrics.json from run directories");
  cmp->add_option("dirs", cmp_dirs, "run directories or output roots")->required();
  cmp->add_option("--json", cmp_json, "write the comparison as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      std::optional<std::uint64_t> seed;
      if (seed_opt->count() > 0) seed = run_seed;
      return cmd_run(run_config, run_controller, run_out, seed);
    }
    if (cert->parsed()) return cmd_certify(cert_config, cert_json, cert_out);
    if (cmp->parsed()) return cmd_compare(cmp_dirs, cmp_json);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
