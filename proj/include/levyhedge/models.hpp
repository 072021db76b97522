#pragma once

// Merton jump-diffusion and variance-gamma (VG) models.

#include "levyhedge/levy_core.hpp"

namespace levyhedge {

struct MertonParams {
  double mu = 0.0;
  double sigma = 0.0;
  double gamma = 0.0;  // jump intensity
  double m = 0.0;      // mean jump size
  double delta = 0.0;  // jump size standard deviation

  // sigma, gamma, delta > 0
  void validate() const;
};

// nu(dx) = C (1{x<0} e^{-G|x|} + 1{x>0} e^{-Mx}) dx / |x|, optionally plus a
// Brownian part. mu is the physical log-price drift.
struct VgParams {
  double c_par = 0.0;
  double g_par = 0.0;
  double m_par = 0.0;
  double mu = 0.0;
  double sigma = 0.0;

  // C, G > 0, M > 4, sigma >= 0
  void validate() const;
};

// Time-changed Brownian parametrisation: gamma subordinator with variance
// rate kappa, Brownian drift m and volatility delta.
struct VgKappa {
  double kappa = 0.0;
  double m = 0.0;
  double delta = 0.0;
};

double normal_cdf(double x);

double merton_nu_density(const MertonParams& p, double x);
// Throws DomainError at x = 0.
double vg_nu_density(const VgParams& p, double x);

// C = 1/kappa, G,M = sqrt(m^2 + 2 delta^2/kappa)/delta^2 +- m/delta^2.
// The returned params carry mu = sigma = 0. Throws ConstraintError if M <= 4.
VgParams vg_from_kappa(double kappa, double m, double delta);
VgKappa vg_to_kappa(const VgParams& p);

class MertonMeasure final : public LevyMeasure {
 public:
  MertonMeasure(double gamma, double m, double delta);
  std::string name() const override { return "Merton"; }
  double density(double x) const override;
  MomentStrip strip() const override;
  std::vector<double> breakpoints() const override;
  cplx exp_moment(cplx u) const override;
  double exp_moment_slope() const override;
  C2Split c2_split() const override;
  double growth_moment() const override;

  double gamma() const { return gamma_; }
  double m() const { return m_; }
  double delta() const { return delta_; }
  // E[e^{uY}] for a jump size Y.
  cplx jump_mgf(cplx u) const;

 private:
  double gamma_;
  double m_;
  double delta_;
};

class VgMeasure final : public LevyMeasure {
 public:
  VgMeasure(double c, double g, double m);
  std::string name() const override { return "VG"; }
  double density(double x) const override;
  MomentStrip strip() const override;
  std::vector<double> breakpoints() const override;
  cplx exp_moment(cplx u) const override;
  double exp_moment_slope() const override;
  C2Split c2_split() const override;
  double growth_moment() const override;

  double c() const { return c_; }
  double g() const { return g_; }
  double m() const { return m_; }

 private:
  double c_;
  double g_;
  double m_;
};

LevyModel merton_model(const MertonParams& p);
LevyModel vg_model(const VgParams& p);

// Psi*(z) by an independent route: (1 - theta_x) nu = (1 + lambda) nu +
// (-lambda) e^x nu, and e^x nu is again Gaussian-mixture (Merton) or VG with
// (G, M) -> (G + 1, M - 1). Throws ConstraintError when the MMM is not
// admissible and DomainError outside the strip.
cplx merton_cumulant_mmm(const MertonParams& p, cplx z);
cplx vg_cumulant_mmm(const VgParams& p, cplx z);

// int_{-inf}^0 (e^x - 1)^2 nu(dx) for the Merton measure.
double merton_c2_minus(const MertonParams& p);

// Calibrated jump parameters of the S&P 500 fits used throughout the tests
// and examples. The drift is not part of those fits' usable output, so the
// presets set mu through drift_for_tilt with tilt 0.5.
inline constexpr double kPresetTilt = 0.5;
MertonParams merton_preset();
VgParams vg_preset();
// Drift reported alongside the Merton fit; it violates MMM admissibility.
inline constexpr double kMertonReportedMu = 4.0073;

}  // namespace levyhedge
