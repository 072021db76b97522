// levyhedge: LRM versus delta hedging under exponential Levy models.
//
//   levyhedge sweep     --config run.ini [--out gaps.csv] [--fft|--quadrature]
//   levyhedge verify    --config run.ini [--out check.csv] [--seed N]
//   levyhedge calibrate --quotes q.csv --family merton|vg [--config init.ini]
//
// Exit codes: 0 success, 1 failed check, 2 configuration error.

#include "levyhedge/commands.hpp"
#include "levyhedge/errors.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

using namespace levyhedge;

namespace {

struct Options {
  std::string config;
  std::string out;
  bool fft = false;
  bool quadrature = false;
  std::optional<std::uint64_t> seed;
  std::string quotes;
  std::string family;
};

void apply_overrides(RunConfig& cfg, const Options& o) {
  if (o.fft) cfg.fourier.mode = FourierMode::fft_batch;
  if (o.quadrature) cfg.fourier.mode = FourierMode::direct_quadrature;
  if (o.seed) cfg.mc.seed = *o.seed;
  if (!o.out.empty()) cfg.output = o.out;
}

// Writes to the configured path, or stdout when it is empty.
int with_output(const std::string& path, const std::function<int(std::ostream&)>& body) {
  if (path.empty()) return body(std::cout);
  std::ofstream file(path);
  if (!file) throw ConfigError("cannot open output file '" + path + "'");
  const int code = body(file);
  file.close();
  if (!file) throw Error("failed writing '" + path + "'");
  return code;
}

void add_mode_flags(CLI::App* cmd, Options& o) {
  auto* fft = cmd->add_flag("--fft", o.fft, "Batch FFT evaluation on the log-strike grid");
  auto* quad = cmd->add_flag("--quadrature", o.quadrature, "Adaptive quadrature per strike");
  fft->excludes(quad);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hedging gaps between LRM and delta strategies under exponential Levy models"};
  app.require_subcommand(1);
  Options o;

  auto* sweep = app.add_subcommand("sweep", "LRM, delta, their gap and both bounds per strike");
  sweep->add_option("--config", o.config, "INI run configuration")->required();
  sweep->add_option("--out", o.out, "CSV output path (default: [output] path or stdout)");
  add_mode_flags(sweep, o);

  auto* verify = app.add_subcommand("verify", "Fourier values against a Monte Carlo oracle");
  verify->add_option("--config", o.config, "INI run configuration")->required();
  verify->add_option("--out", o.out, "CSV output path (default: [output] path or stdout)");
  verify->add_option("--seed", o.seed, "Monte Carlo seed");
  add_mode_flags(verify, o);

  auto* calibrate = app.add_subcommand("calibrate", "Fit Merton or VG parameters to quotes");
  calibrate->add_option("--quotes", o.quotes, "Quote file (expiry,strike,mid)")->required();
  calibrate->add_option("--family", o.family, "merton or vg")->required();
  calibrate->add_option("--config", o.config, "INI file whose [model] is the initial guess");
  calibrate->add_option("--out", o.out, "Result record path (default: stdout)");
  add_mode_flags(calibrate, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code::kConfig;
  }

  return run_guarded(
      [&]() -> int {
        if (*sweep || *verify) {
          RunConfig cfg = load_config(o.config);
          apply_overrides(cfg, o);
          return with_output(cfg.output, [&](std::ostream& out) {
            return *sweep ? cmd_sweep(cfg, out, std::cerr) : cmd_verify(cfg, out, std::cerr);
          });
        }
        const Family family = parse_family(o.family);
        CalibrationConfig cal;
        std::optional<ModelParams> init;
        if (!o.config.empty()) {
          RunConfig cfg = load_config(o.config);
          apply_overrides(cfg, o);
          init = cfg.params();
          if (!init || family_of(*init) != family) {
            throw ConfigError("config [model] family does not match --family " + o.family);
          }
          cal.fourier = cfg.fourier;
        } else if (o.fft) {
          cal.fourier.mode = FourierMode::fft_batch;
        }
        return with_output(o.out, [&](std::ostream& out) {
          return cmd_calibrate(o.quotes, family, init, cal, out, std::cerr);
        });
      },
      std::cerr);
}
