#pragma once

// The sweep, verify and calibrate commands behind the command-line tool.
// Each writes its primary output to `out` and diagnostics to `diag`, and
// returns a process exit code.

#include "levyhedge/calibration.hpp"
#include "levyhedge/config.hpp"
#include "levyhedge/hedging.hpp"
#include "levyhedge/oracle_mc.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace levyhedge {

namespace exit_code {
inline constexpr int kOk = 0;
// An invariant or verification check failed.
inline constexpr int kFailure = 1;
// Bad configuration, input file or model constraint.
inline constexpr int kConfig = 2;
}  // namespace exit_code

// Runs body and maps exceptions to exit codes, printing the message to diag.
int run_guarded(const std::function<int()>& body, std::ostream& diag);

// CSV: "# config_sha256=<hex>", then chi,i1,i2,lrm,delta,diff,bound_t3,
// bound_t4,flags. bound_t4 is empty where the condition integral diverges.
void write_sweep_csv(std::ostream& out, std::span<const StrategyPoint> points,
                     const std::string& digest);

struct VerifyRow {
  std::string quantity;
  double chi = 0.0;  // NaN for the martingale rows
  double fourier = 0.0;
  double fourier_error = 0.0;
  double mc = 0.0;
  double mc_std_error = 0.0;
  double mc_quad_error = 0.0;
  bool pass = false;

  // (fourier - mc) / mc_std_error; 0 for exact references.
  double z() const;
};

struct VerifyReport {
  std::vector<VerifyRow> rows;
  std::string generator;
  std::string method;

  bool all_pass() const;
  std::size_t failures() const;
};

// Fourier values from phi against Monte Carlo paths of the model: the
// martingale condition on both sides, then I1, I2, both tails and the call
// price at every chi. A row passes when the gap is within 3 standard errors
// plus both quadrature error estimates. phi(-i) must equal 1 to 1e-10.
VerifyReport verify(const MmmModel& model, const CharFn& phi, std::span<const double> chis,
                    const FourierConfig& fourier, const McConfig& mc);

void write_verify_csv(std::ostream& out, const VerifyReport& report, const std::string& digest);

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& diag);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& diag);
// init defaults to the family's preset. Exit code 1 when the optimizer did
// not converge.
int cmd_calibrate(const std::string& quotes_path, Family family,
                  const std::optional<ModelParams>& init, const CalibrationConfig& cfg,
                  std::ostream& out, std::ostream& diag);

}  // namespace levyhedge
