#pragma once

// Exponential Levy model under the physical measure and its image under the
// minimal martingale measure (MMM).
//
// Conventions. The log-price L_t = log(S_t / S_0) is
//   L_t = mu t + sigma W_t + int x Ntilde([0,t], dx),
// with Levy measure nu. For a complex exponent u the compensated Laplace
// exponent of nu is
//   h(u) = int (e^{ux} - 1 - ux) nu(dx),
// finite on a vertical strip lo < Re u < hi. Characteristic-function
// arguments z relate to exponents by u = iz.

#include "levyhedge/quadrature.hpp"

#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace levyhedge {

using cplx = std::complex<double>;

// e^w - 1 - w, accurate for small |w|.
cplx expm1_minus_linear(cplx w);
double expm1_minus_linear(double w);

// Open interval of Re(u) on which int_{|x|>1} e^{ux} nu(dx) is finite.
struct MomentStrip {
  double lo;
  double hi;
  bool contains(double re) const { return re > lo && re < hi; }
};

// Open interval of Im(z) on which a characteristic function is analytic.
struct ImagStrip {
  double lo;
  double hi;
  bool contains(double im) const { return im > lo && im < hi; }
};

struct C2Split {
  double plus = 0.0;   // int_0^inf (e^x - 1)^2 nu(dx)
  double minus = 0.0;  // int_{-inf}^0 (e^x - 1)^2 nu(dx)
  double total() const { return plus + minus; }
};

// Tolerance used by every nu-integral unless a caller asks otherwise.
inline constexpr quad::Tolerance kLevyTolerance{1e-12, 1e-10, 4000};

// A Levy measure on R \ {0}. Subclasses provide the density and may override
// the moment functionals with closed forms; the *_quadrature members always
// integrate the density and serve as the independent check.
class LevyMeasure {
 public:
  virtual ~LevyMeasure() = default;

  virtual std::string name() const = 0;
  virtual double density(double x) const = 0;
  virtual MomentStrip strip() const = 0;
  // Finite points where the density changes character; seeds quadrature.
  virtual std::vector<double> breakpoints() const { return {-1.0, 1.0}; }
  virtual bool is_null() const { return false; }

  // int_lo^hi f(x) nu(dx); the origin is always a split point.
  double nu_integral(const std::function<double(double)>& f, double lo, double hi,
                     const quad::Tolerance& tol = kLevyTolerance) const;
  cplx nu_integral_complex(const std::function<cplx(double)>& f, double lo, double hi,
                           const quad::Tolerance& tol = kLevyTolerance) const;

  // h(u); throws DomainError when Re u leaves the strip.
  virtual cplx exp_moment(cplx u) const;
  // h'(1) = int x (e^x - 1) nu(dx).
  virtual double exp_moment_slope() const;
  virtual C2Split c2_split() const;
  // int_0^inf e^{2x} (e^x - 1)^2 nu(dx).
  virtual double growth_moment() const;

  cplx exp_moment_quadrature(cplx u, const quad::Tolerance& tol = kLevyTolerance) const;
  double exp_moment_slope_quadrature(const quad::Tolerance& tol = kLevyTolerance) const;
  C2Split c2_split_quadrature(const quad::Tolerance& tol = kLevyTolerance) const;
  double growth_moment_quadrature(const quad::Tolerance& tol = kLevyTolerance) const;

  // Throws DomainError if Re u is outside the moment strip.
  void require_strip(double re_u, std::string_view what) const;
};

// nu = 0.
class NullMeasure final : public LevyMeasure {
 public:
  std::string name() const override { return "none"; }
  double density(double) const override { return 0.0; }
  MomentStrip strip() const override;
  bool is_null() const override { return true; }
  cplx exp_moment(cplx) const override { return 0.0; }
  double exp_moment_slope() const override { return 0.0; }
  C2Split c2_split() const override { return {}; }
  double growth_moment() const override { return 0.0; }
};

// A measure known only through its density; every functional is quadrature.
class DensityMeasure final : public LevyMeasure {
 public:
  DensityMeasure(std::string name, std::function<double(double)> density, MomentStrip strip,
                 std::vector<double> breakpoints = {-1.0, 1.0});
  std::string name() const override { return name_; }
  double density(double x) const override { return density_(x); }
  MomentStrip strip() const override { return strip_; }
  std::vector<double> breakpoints() const override { return breakpoints_; }

 private:
  std::string name_;
  std::function<double(double)> density_;
  MomentStrip strip_;
  std::vector<double> breakpoints_;
};

struct LevyModel {
  double mu = 0.0;
  double sigma = 0.0;
  std::shared_ptr<const LevyMeasure> measure = std::make_shared<NullMeasure>();
  double s0 = 1.0;

  // sigma >= 0, s0 > 0, and the integrability conditions
  // int (|x| v x^2) nu < inf, int (e^x - 1)^n nu < inf for n = 2, 4.
  void validate() const;
};

// mu^S = mu + sigma^2 / 2 + int (e^x - 1 - x) nu(dx).
double compute_mu_s(const LevyModel& model);

// Closed forms where the measure has them, quadrature otherwise.
C2Split c2_split(const LevyModel& model);

// The drift mu that places mu^S at -tilt * (sigma^2 + C2). Admissible MMM
// drifts correspond to tilt in [0, 1).
double drift_for_tilt(const LevyMeasure& measure, double sigma, double tilt);

class MmmModel {
 public:
  const LevyModel& base() const { return base_; }
  const LevyMeasure& measure() const { return *base_.measure; }
  double sigma() const { return base_.sigma; }
  double mu_s() const { return mu_s_; }
  double xi() const { return xi_; }
  double c2() const { return c2_; }
  double c2_plus() const { return c2_plus_; }
  double c2_minus() const { return c2_minus_; }
  double drift_star() const { return drift_star_; }
  // sigma^2 + C2
  double variance_rate() const { return denominator_; }
  // mu^S / (sigma^2 + C2); theta_x = tilt_ratio * (e^x - 1).
  double tilt_ratio() const { return lambda_; }

  double theta(double x) const;
  // (1 - theta_x) nu(dx) / dx
  double nu_star_density(double x) const;

  // Psi*(z) with phi_tau(z) = exp(tau Psi*(z)), from the measure's h(u).
  cplx cumulant(cplx z) const;
  // Same exponent with the tilted jump integral done by quadrature.
  cplx cumulant_quadrature(cplx z, const quad::Tolerance& tol = kLevyTolerance) const;
  // Sum of the magnitudes of the terms of Psi*(-i); the yardstick for
  // relative martingale errors.
  double cumulant_scale() const;
  ImagStrip strip() const;

 private:
  friend MmmModel to_mmm(const LevyModel& model);
  LevyModel base_;
  double mu_s_ = 0.0;
  double xi_ = 0.0;
  double c2_ = 0.0;
  double c2_plus_ = 0.0;
  double c2_minus_ = 0.0;
  double drift_star_ = 0.0;
  double denominator_ = 0.0;
  double lambda_ = 0.0;
  double h1_ = 0.0;
  double slope1_ = 0.0;
};

// Validates the model, enforces 0 >= mu^S > -sigma^2 - C2 and returns the
// model under the MMM: Brownian tilt -xi, jump compensator (1 - theta_x) nu,
// log-price drift b* = mu - sigma xi - int x theta_x nu(dx).
MmmModel to_mmm(const LevyModel& model);

inline cplx mmm_cumulant(const MmmModel& model, cplx z) { return model.cumulant(z); }

}  // namespace levyhedge
