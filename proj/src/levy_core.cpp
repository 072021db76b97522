#include "levyhedge/levy_core.hpp"

#include "levyhedge/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace levyhedge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class T>
T series_expm1_minus_linear(T w) {
  T term = w * w / 2.0;
  T sum = term;
  for (int n = 3; n < 30; ++n) {
    term *= w / static_cast<double>(n);
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

template <class T, class F>
T split_integral(const LevyMeasure& nu, const F& f, double lo, double hi,
                 const quad::Tolerance& tol, bool* converged) {
  auto integrand = [&](double x) -> T {
    const double d = nu.density(x);
    if (d == 0.0) return T{};
    return f(x) * d;
  };
  const auto bp = nu.breakpoints();
  T total{};
  if (lo < 0.0) {
    auto r = quad::integrate<T>(integrand, lo, std::min(hi, 0.0), bp, tol);
    total += r.value;
    if (converged) *converged = *converged && r.converged;
  }
  if (hi > 0.0) {
    auto r = quad::integrate<T>(integrand, std::max(lo, 0.0), hi, bp, tol);
    total += r.value;
    if (converged) *converged = *converged && r.converged;
  }
  return total;
}

}  // namespace

cplx expm1_minus_linear(cplx w) {
  if (std::abs(w) < 0.2) return series_expm1_minus_linear(w);
  return std::exp(w) - 1.0 - w;
}

double expm1_minus_linear(double w) {
  if (std::abs(w) < 0.2) return series_expm1_minus_linear(w);
  return std::expm1(w) - w;
}

// ---------------------------------------------------------------------------
// LevyMeasure

double LevyMeasure::nu_integral(const std::function<double(double)>& f, double lo, double hi,
                                const quad::Tolerance& tol) const {
  return split_integral<double>(*this, f, lo, hi, tol, nullptr);
}

cplx LevyMeasure::nu_integral_complex(const std::function<cplx(double)>& f, double lo,
                                      double hi, const quad::Tolerance& tol) const {
  return split_integral<cplx>(*this, f, lo, hi, tol, nullptr);
}

void LevyMeasure::require_strip(double re_u, std::string_view what) const {
  const auto s = strip();
  if (!s.contains(re_u)) {
    std::ostringstream msg;
    msg << what << ": Re(u) = " << re_u << " outside the exponential-moment strip (" << s.lo
        << ", " << s.hi << ") of the " << name() << " Levy measure";
    throw DomainError(msg.str());
  }
}

cplx LevyMeasure::exp_moment(cplx u) const { return exp_moment_quadrature(u); }
double LevyMeasure::exp_moment_slope() const { return exp_moment_slope_quadrature(); }
C2Split LevyMeasure::c2_split() const { return c2_split_quadrature(); }
double LevyMeasure::growth_moment() const { return growth_moment_quadrature(); }

cplx LevyMeasure::exp_moment_quadrature(cplx u, const quad::Tolerance& tol) const {
  require_strip(u.real(), "exp_moment");
  return nu_integral_complex([u](double x) { return expm1_minus_linear(u * x); }, -kInf, kInf,
                             tol);
}

double LevyMeasure::exp_moment_slope_quadrature(const quad::Tolerance& tol) const {
  require_strip(1.0, "exp_moment_slope");
  return nu_integral([](double x) { return x * std::expm1(x); }, -kInf, kInf, tol);
}

C2Split LevyMeasure::c2_split_quadrature(const quad::Tolerance& tol) const {
  require_strip(2.0, "c2_split");
  auto sq = [](double x) {
    const double e = std::expm1(x);
    return e * e;
  };
  return {nu_integral(sq, 0.0, kInf, tol), nu_integral(sq, -kInf, 0.0, tol)};
}

double LevyMeasure::growth_moment_quadrature(const quad::Tolerance& tol) const {
  require_strip(4.0, "growth_moment");
  return nu_integral(
      [](double x) {
        const double e = std::expm1(x);
        return std::exp(2.0 * x) * e * e;
      },
      0.0, kInf, tol);
}

MomentStrip NullMeasure::strip() const { return {-kInf, kInf}; }

DensityMeasure::DensityMeasure(std::string name, std::function<double(double)> density,
                               MomentStrip strip, std::vector<double> breakpoints)
    : name_(std::move(name)),
      density_(std::move(density)),
      strip_(strip),
      breakpoints_(std::move(breakpoints)) {}

// ---------------------------------------------------------------------------
// LevyModel

void LevyModel::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ConstraintError("sigma must be finite and >= 0, got " + std::to_string(sigma));
  }
  if (!(s0 > 0.0) || !std::isfinite(s0)) {
    throw ConstraintError("s0 must be finite and > 0, got " + std::to_string(s0));
  }
  if (!std::isfinite(mu)) throw ConstraintError("mu must be finite");
  if (!measure) throw ConstraintError("Levy measure missing");
  if (measure->is_null()) return;

  const auto s = measure->strip();
  if (!(s.hi > 4.0)) {
    throw IntegrabilityError("int (e^x - 1)^4 nu(dx) diverges for the " + measure->name() +
                             " Levy measure (exponential moments exist only below " +
                             std::to_string(s.hi) + ")");
  }
  if (!(s.lo < 0.0)) {
    throw IntegrabilityError("int_{x<-1} |x| nu(dx) diverges for the " + measure->name() +
                             " Levy measure");
  }
  bool ok = true;
  const double small = split_integral<double>(
      *measure, [](double x) { return std::abs(x); }, -1.0, 1.0, kLevyTolerance, &ok);
  if (!ok || !std::isfinite(small)) {
    throw IntegrabilityError("int_{|x|<=1} |x| nu(dx) diverges for the " + measure->name() +
                             " Levy measure");
  }
}

double compute_mu_s(const LevyModel& model) {
  model.validate();
  return model.mu + 0.5 * model.sigma * model.sigma + model.measure->exp_moment(1.0).real();
}

C2Split c2_split(const LevyModel& model) {
  model.validate();
  return model.measure->c2_split();
}

double drift_for_tilt(const LevyMeasure& measure, double sigma, double tilt) {
  const double h1 = measure.exp_moment(1.0).real();
  const double c2 = measure.exp_moment(2.0).real() - 2.0 * h1;
  return -tilt * (sigma * sigma + c2) - 0.5 * sigma * sigma - h1;
}

// ---------------------------------------------------------------------------
// MmmModel

MmmModel to_mmm(const LevyModel& model) {
  model.validate();
  const LevyMeasure& nu = *model.measure;
  MmmModel out;
  out.base_ = model;
  out.h1_ = nu.exp_moment(1.0).real();
  out.c2_ = nu.exp_moment(2.0).real() - 2.0 * out.h1_;
  const auto split = nu.c2_split();
  out.c2_plus_ = split.plus;
  out.c2_minus_ = split.minus;
  out.slope1_ = nu.exp_moment_slope();
  out.mu_s_ = model.mu + 0.5 * model.sigma * model.sigma + out.h1_;
  out.denominator_ = model.sigma * model.sigma + out.c2_;
  if (!(out.denominator_ > 0.0)) {
    throw ConstraintError("degenerate model: sigma^2 + C2 = 0");
  }
  if (!(out.mu_s_ <= 0.0 && out.mu_s_ > -out.denominator_)) {
    std::ostringstream msg;
    msg.precision(10);
    msg << "minimal martingale measure requires 0 >= mu^S > -sigma^2 - C2; got mu^S = "
        << out.mu_s_ << ", -sigma^2 - C2 = " << -out.denominator_
        << " (theta_x reaches 1 on the support of nu)";
    throw ConstraintError(msg.str());
  }
  out.lambda_ = out.mu_s_ / out.denominator_;
  out.xi_ = out.mu_s_ * model.sigma / out.denominator_;
  out.drift_star_ = model.mu - model.sigma * out.xi_ - out.lambda_ * out.slope1_;
  return out;
}

double MmmModel::theta(double x) const { return lambda_ * std::expm1(x); }

double MmmModel::nu_star_density(double x) const {
  return (1.0 - theta(x)) * base_.measure->density(x);
}

ImagStrip MmmModel::strip() const {
  const auto s = base_.measure->strip();
  const double hi = lambda_ != 0.0 ? s.hi - 1.0 : s.hi;
  return {-hi, -s.lo};
}

cplx MmmModel::cumulant(cplx z) const {
  if (!strip().contains(z.imag())) {
    const auto s = strip();
    std::ostringstream msg;
    msg << "cumulant: Im(z) = " << z.imag() << " outside the analyticity strip (" << s.lo << ", "
        << s.hi << ")";
    throw DomainError(msg.str());
  }
  const LevyMeasure& nu = *base_.measure;
  const cplx u = cplx(0.0, 1.0) * z;
  const double s2 = base_.sigma * base_.sigma;
  cplx psi = u * drift_star_ + 0.5 * s2 * u * u;
  if (nu.is_null()) return psi;
  const cplx hu = nu.exp_moment(u);
  psi += hu;
  if (lambda_ != 0.0) {
    psi -= lambda_ * (nu.exp_moment(u + 1.0) - hu - h1_ - u * slope1_);
  }
  return psi;
}

cplx MmmModel::cumulant_quadrature(cplx z, const quad::Tolerance& tol) const {
  const cplx u = cplx(0.0, 1.0) * z;
  const double s2 = base_.sigma * base_.sigma;
  cplx psi = u * drift_star_ + 0.5 * s2 * u * u;
  if (base_.measure->is_null()) return psi;
  base_.measure->require_strip(u.real(), "cumulant_quadrature");
  if (lambda_ != 0.0) base_.measure->require_strip(u.real() + 1.0, "cumulant_quadrature");
  psi += base_.measure->nu_integral_complex(
      [&](double x) { return expm1_minus_linear(u * x) * (1.0 - theta(x)); }, -kInf, kInf, tol);
  return psi;
}

double MmmModel::cumulant_scale() const {
  const double s2 = base_.sigma * base_.sigma;
  double scale = std::abs(drift_star_) + 0.5 * s2 + std::abs(h1_);
  if (!base_.measure->is_null() && lambda_ != 0.0) {
    const double h2 = base_.measure->exp_moment(2.0).real();
    scale += std::abs(lambda_) * (std::abs(h2) + 2.0 * std::abs(h1_) + std::abs(slope1_));
  }
  return scale;
}

}  // namespace levyhedge
