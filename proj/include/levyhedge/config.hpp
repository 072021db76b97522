#pragma once

// Run configuration for the command-line tool: an INI file with sections
// [model], [market], [fourier], [mc] and [output].
//
//   [model]
//   family = merton          ; merton, vg or black_scholes
//   sigma = 0.0435
//   gamma = 0.0054           ; merton: gamma, m, delta
//   m = -0.0697              ; vg: C, G, M
//   delta = 0.0889
//   tilt = 0.5               ; or mu = <physical drift>, not both
//
//   [market]
//   T = 1
//   t = 0.95
//   spot = 2102.4
//   strike_min = 1900        ; or chi = 0.95, 1, 1.05
//   strike_max = 2500
//   strike_step = 50
//
//   [fourier]
//   mode = quadrature        ; or fft
//   n_grid = 16384
//   eta = 0.025
//   alpha = 1.75
//
//   [mc]
//   paths = 1000000
//   seed = 20160420
//   chi = 0.98, 1, 1.02      ; defaults to the market grid
//
//   [output]
//   path = sweep.csv
//
// Every key is optional except [model] family and its parameters; unknown
// keys are errors.

#include "levyhedge/calibration.hpp"
#include "levyhedge/fourier.hpp"
#include "levyhedge/oracle_mc.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace levyhedge {

enum class ModelFamily { black_scholes, merton, vg };

struct RunConfig {
  ModelFamily family = ModelFamily::black_scholes;
  // Exactly one of mu and tilt determines the drift.
  std::optional<double> mu;
  double tilt = kPresetTilt;
  double sigma = 0.0;
  MertonParams merton{};
  VgParams vg{};

  double maturity = 1.0;      // T
  double time = 0.95;         // t
  double spot = 2102.4;
  double strike_min = 1900.0;
  double strike_max = 2500.0;
  double strike_step = 50.0;
  // Explicit moneyness list; overrides the strike grid when non-empty.
  std::vector<double> chi_list;

  FourierConfig fourier{};
  McConfig mc{};
  std::vector<double> mc_chi_list;
  std::string output;

  double horizon() const { return maturity - time; }
  // Moneyness grid: chi_list, or strikes / spot.
  std::vector<double> chis() const;
  std::vector<double> mc_chis() const;

  // Physical model with the drift resolved.
  LevyModel model() const;
  // Parameter record for calibration; empty for black_scholes.
  std::optional<ModelParams> params() const;

  // Throws ConfigError.
  void validate() const;
  // Resolved settings as sorted "section.key=value" lines.
  std::string canonical() const;
  // SHA-256 of canonical(), lower-case hex.
  std::string digest() const;
};

std::string family_name(ModelFamily f);

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

std::string sha256_hex(const std::string& data);

}  // namespace levyhedge
