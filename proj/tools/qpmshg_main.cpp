#include <cstdio>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "qpmshg/runner.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  double mesh_res = 0;
  bool no_cache = false;
  int threads = -1;
  long long seed = -1;
  bool verbose = false;
};

void attach(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config_path, "JSON configuration file");
  sub->add_option("--out", args.out_dir, "output directory");
  sub->add_option("--mesh-res", args.mesh_res, "mesh resolution override [um]");
  sub->add_flag("--no-cache", args.no_cache, "disable the solve cache");
  sub->add_option("--threads", args.threads, "worker threads (0 = auto)");
  sub->add_option("--seed", args.seed, "eigensolver start-vector seed");
  sub->add_flag("--verbose", args.verbose, "structured log records on stderr");
}

qpm::RunConfig build_config(const CommonArgs& args) {
  qpm::RunConfig cfg =
      args.config_path.empty() ? qpm::RunConfig{} : qpm::load_config_file(args.config_path);
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  if (args.mesh_res > 0) cfg.device.solver.resolution_um = args.mesh_res;
  if (args.no_cache) cfg.cache_enabled = false;
  if (args.threads >= 0) cfg.threads = args.threads;
  if (args.seed >= 0) cfg.device.solver.seed = static_cast<std::uint64_t>(args.seed);
  if (args.verbose) cfg.verbose = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulsed second-harmonic generation in periodically poled channel waveguides"};
  app.require_subcommand(1);

  CommonArgs args;
  const char* names[] = {"modes", "census", "match", "spectrum", "scan", "table", "oracle"};
  const char* descs[] = {"solve, label and export guided modes",
                         "count guided modes per wavelength and polarization",
                         "optimal poling periods and phase-matched wavelengths",
                         "synthesize the SH spectrum of the configured pump",
                         "phase-matched wavelength vs geometry or poling",
                         "individual SHG processes with relative powers",
                         "independent reference oracles for the configured device"};
  for (int i = 0; i < 7; ++i) attach(app.add_subcommand(names[i], descs[i]), args);

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string sub = app.get_subcommands().front()->get_name();
    const qpm::RunConfig cfg = build_config(args);
    return qpm::run_command(qpm::parse_command(sub), cfg);
  } catch (const qpm::ConfigError& e) {
    std::fprintf(stderr, "{\"error\":\"config\",\"detail\":\"%s\"}\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "{\"error\":\"numerical\",\"detail\":\"%s\"}\n", e.what());
    return 3;
  } catch (const qpm::NumericalError& e) {
    std::fprintf(stderr, "{\"error\":\"numerical\",\"detail\":\"%s\"}\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "{\"error\":\"internal\",\"detail\":\"%s\"}\n", e.what());
    return 1;
  }
}
