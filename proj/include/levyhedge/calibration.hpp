#pragma once

// Least-squares fit of Merton and VG parameters to call quotes. Model prices
// are MMM expectations at zero rates.
//
// Quote files are comma-separated text:
//   # spot=2102.4
//   # valuation_date=2016-04-20
//   # day_count=ACT/365
//   expiry,strike,mid
//   0.0821917808,2000,119.25
// with expiry a year fraction under the stated day count.

#include "levyhedge/fourier.hpp"
#include "levyhedge/models.hpp"

#include <chrono>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace levyhedge {

struct Quote {
  double expiry = 0.0;
  double strike = 0.0;
  double mid = 0.0;
};

struct QuoteSet {
  double spot = 0.0;
  std::chrono::year_month_day valuation_date{};
  std::string day_count = "ACT/365";
  std::vector<Quote> quotes;

  // Throws ConfigError on an empty set or non-positive entries.
  void validate() const;
};

QuoteSet parse_quotes(std::istream& in);
QuoteSet read_quotes(const std::string& path);
void write_quotes(std::ostream& out, const QuoteSet& q);

// Parses YYYY-MM-DD; throws ConfigError.
std::chrono::year_month_day parse_date(const std::string& text);
std::string format_date(std::chrono::year_month_day d);

enum class Family { merton, vg };
std::string family_name(Family f);
// "merton" or "vg"; throws ConfigError.
Family parse_family(const std::string& text);

using ModelParams = std::variant<MertonParams, VgParams>;
Family family_of(const ModelParams& p);
// Validates the parameters and returns the physical model.
LevyModel build_model(const ModelParams& p);

// E*[(S_T - K)^+] = spot * price(K / spot) over the horizon of phi, which
// must equal expiry.
double model_call_price(const MmmModel& model, const CharFn& phi, double spot, double strike,
                        double expiry, const FourierConfig& cfg);

// Model prices for every quote, in quote order; one characteristic function
// per distinct expiry. The parameters must be admissible.
std::vector<double> model_prices(const ModelParams& p, const QuoteSet& quotes,
                                 const FourierConfig& cfg);

struct ConstraintReport {
  double mu_s = 0.0;
  double variance_rate = 0.0;
  // -mu^S / (sigma^2 + C2); admissible in [0, 1).
  double tilt = 0.0;
  bool admissible = false;
  // VG only: M and whether M > 4.
  double vg_m = 0.0;
  bool vg_m_ok = true;
  // Sum of constraint violations; 0 when feasible.
  double violation = 0.0;

  bool feasible() const { return admissible && vg_m_ok; }
  std::string describe() const;
};

ConstraintReport check_constraints(const ModelParams& p);

// Penalty weight per unit price scale.
inline constexpr double kPenaltyWeight = 1e6;

// sqrt(mean (model - mid)^2). Infeasible parameters give
// spot + kPenaltyWeight * price_scale * violation^2 with price_scale the mean
// mid, which exceeds every feasible value.
double rmse(const ModelParams& p, const QuoteSet& quotes, const FourierConfig& cfg);

struct CalibrationConfig {
  FourierConfig fourier{};
  // Simplex runs: the first from the initial point, the rest restarted from
  // the best vertex found so far.
  int restarts = 3;
  int max_iterations = 1500;
  // Stop a run when the simplex characteristic size falls below this.
  double simplex_tol = 1e-7;
  // A run that ends on the size test and improves the objective by less
  // than this times the mean quote counts as convergence.
  double improvement_tol = 1e-8;

  void validate() const;
};

struct CalibrationResult {
  ModelParams params;
  double rmse = 0.0;
  double initial_rmse = 0.0;
  int iterations = 0;
  long evaluations = 0;
  bool converged = false;
  ConstraintReport constraints;
};

// Nelder-Mead with restarts over unconstrained coordinates:
//   Merton: log sigma, log gamma, m, log delta, tilt
//   VG:     log kappa, m, log delta, tilt  (sigma held at its initial value)
// The tilt fixes the physical drift through drift_for_tilt. An inadmissible
// initial point is projected onto the feasible set first. The result is
// always feasible and no worse than the (projected) initial point.
CalibrationResult calibrate(Family family, const QuoteSet& quotes, const ModelParams& init,
                            const CalibrationConfig& cfg);

// Inadmissible drifts move to the nearest tilt in [0.001, 0.99]; a VG M <= 4
// is raised to 4.5.
ModelParams project_feasible(const ModelParams& p);

// key=value lines.
void write_result(std::ostream& out, Family family, const CalibrationResult& r);

// Exact model quotes at the given expiries (in days, ACT/365) and strikes.
QuoteSet synthetic_quotes(const ModelParams& p, double spot,
                          std::chrono::year_month_day valuation_date,
                          std::span<const int> expiry_days,
                          std::span<const std::vector<double>> strikes, const FourierConfig& cfg);

// The 81-quote layout used for recovery experiments: spot 2102.4 on
// 2016-04-20, seven expiries from 30 to 331 days.
QuoteSet reference_synthetic_quotes(const ModelParams& p, const FourierConfig& cfg);

// Parameters used to generate synthetic Merton quotes. The Merton fit
// preset has jumps too rare to identify from 81 prices.
MertonParams merton_synthetic_truth();

}  // namespace levyhedge
