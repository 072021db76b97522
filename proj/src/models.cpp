#include "levyhedge/models.hpp"

#include "levyhedge/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace levyhedge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

// log(1 + w) without cancellation for small |w|.
cplx log1p_c(cplx w) {
  const double a = w.real();
  const double b = w.imag();
  return {0.5 * std::log1p(2.0 * a + a * a + b * b), std::atan2(b, 1.0 + a)};
}

// Compensated Laplace exponent of C e^{-G|x|}/|x| (x<0), C e^{-Mx}/x (x>0).
cplx vg_h(double c, double g, double m, cplx u) {
  return -c * (log1p_c(-u / m) + u / m + log1p_c(u / g) - u / g);
}

double vg_h_real(double c, double g, double m, double u) {
  return -c * (std::log1p(-u / m) + u / m + std::log1p(u / g) - u / g);
}

// gamma (E[e^{uY}] - 1 - u E[Y]) for Y ~ N(mean, delta^2).
cplx gaussian_h(double gamma, double mean, double delta, cplx u) {
  const cplx quad = 0.5 * delta * delta * u * u;
  return gamma * (expm1_minus_linear(u * mean + quad) + quad);
}

// Shared admissibility check for the closed-form routes.
double admissible_lambda(double mu_s, double d) {
  if (!(d > 0.0)) throw ConstraintError("degenerate model: sigma^2 + C2 = 0");
  if (!(mu_s <= 0.0 && mu_s > -d)) {
    throw ConstraintError("minimal martingale measure requires 0 >= mu^S > -sigma^2 - C2; got mu^S = " +
                          fmt(mu_s) + ", -sigma^2 - C2 = " + fmt(-d));
  }
  return mu_s / d;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

void MertonParams::validate() const {
  if (!(sigma > 0.0)) throw ConstraintError("Merton sigma must be > 0, got " + fmt(sigma));
  if (!(gamma > 0.0)) throw ConstraintError("Merton gamma must be > 0, got " + fmt(gamma));
  if (!(delta > 0.0)) throw ConstraintError("Merton delta must be > 0, got " + fmt(delta));
  if (!std::isfinite(mu) || !std::isfinite(m)) throw ConstraintError("Merton mu and m must be finite");
}

void VgParams::validate() const {
  if (!(c_par > 0.0) || !(g_par > 0.0)) {
    throw ConstraintError("VG requires C > 0 and G > 0, got C = " + fmt(c_par) + ", G = " + fmt(g_par));
  }
  if (!(m_par > 4.0)) throw ConstraintError("VG requires M > 4, got M = " + fmt(m_par));
  if (!(sigma >= 0.0)) throw ConstraintError("VG sigma must be >= 0, got " + fmt(sigma));
  if (!std::isfinite(mu)) throw ConstraintError("VG mu must be finite");
}

double merton_nu_density(const MertonParams& p, double x) {
  const double z = (x - p.m) / p.delta;
  return p.gamma * std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * p.delta);
}

double vg_nu_density(const VgParams& p, double x) {
  if (x == 0.0) throw DomainError("VG Levy density is singular at x = 0");
  return x > 0.0 ? p.c_par * std::exp(-p.m_par * x) / x : p.c_par * std::exp(p.g_par * x) / -x;
}

VgParams vg_from_kappa(double kappa, double m, double delta) {
  if (!(kappa > 0.0) || !(delta > 0.0)) {
    throw ConstraintError("VG conversion requires kappa > 0 and delta > 0");
  }
  const double d2 = delta * delta;
  const double root = std::sqrt(m * m + 2.0 * d2 / kappa) / d2;
  VgParams p;
  p.c_par = 1.0 / kappa;
  p.g_par = root + m / d2;
  p.m_par = root - m / d2;
  if (!(p.m_par > 4.0)) throw ConstraintError("VG requires M > 4, got M = " + fmt(p.m_par));
  return p;
}

VgKappa vg_to_kappa(const VgParams& p) {
  const double gm = p.g_par * p.m_par;
  return {1.0 / p.c_par, p.c_par * (p.g_par - p.m_par) / gm, std::sqrt(2.0 * p.c_par / gm)};
}

// ---------------------------------------------------------------------------

MertonMeasure::MertonMeasure(double gamma, double m, double delta)
    : gamma_(gamma), m_(m), delta_(delta) {
  if (!(gamma >= 0.0) || !(delta > 0.0)) {
    throw ConstraintError("Merton measure requires gamma >= 0 and delta > 0");
  }
}

double MertonMeasure::density(double x) const {
  const double z = (x - m_) / delta_;
  return gamma_ * std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * delta_);
}

MomentStrip MertonMeasure::strip() const { return {-kInf, kInf}; }

std::vector<double> MertonMeasure::breakpoints() const {
  std::vector<double> bp;
  for (int k = -8; k <= 8; k += 2) bp.push_back(m_ + k * delta_);
  return bp;
}

cplx MertonMeasure::jump_mgf(cplx u) const {
  return std::exp(u * m_ + 0.5 * delta_ * delta_ * u * u);
}

cplx MertonMeasure::exp_moment(cplx u) const { return gaussian_h(gamma_, m_, delta_, u); }

double MertonMeasure::exp_moment_slope() const {
  const double e1 = jump_mgf(1.0).real();
  return gamma_ * ((m_ + delta_ * delta_) * e1 - m_);
}

C2Split MertonMeasure::c2_split() const {
  const double d2 = delta_ * delta_;
  auto side = [&](double sign) {
    // int over {sign * x > 0} of e^{kx} N(m, delta^2)(dx) = E(k) Phi(sign (m + k delta^2)/delta)
    auto piece = [&](double k) {
      return jump_mgf(k).real() * normal_cdf(sign * (m_ + k * d2) / delta_);
    };
    return gamma_ * (piece(2.0) - 2.0 * piece(1.0) + piece(0.0));
  };
  return {side(1.0), side(-1.0)};
}

double MertonMeasure::growth_moment() const {
  const double d2 = delta_ * delta_;
  auto piece = [&](double k) { return jump_mgf(k).real() * normal_cdf((m_ + k * d2) / delta_); };
  return gamma_ * (piece(4.0) - 2.0 * piece(3.0) + piece(2.0));
}

VgMeasure::VgMeasure(double c, double g, double m) : c_(c), g_(g), m_(m) {
  if (!(c > 0.0) || !(g > 0.0) || !(m > 0.0)) {
    throw ConstraintError("VG measure requires C, G, M > 0");
  }
}

double VgMeasure::density(double x) const {
  if (x == 0.0) return 0.0;
  return x > 0.0 ? c_ * std::exp(-m_ * x) / x : c_ * std::exp(g_ * x) / -x;
}

MomentStrip VgMeasure::strip() const { return {-g_, m_}; }

std::vector<double> VgMeasure::breakpoints() const {
  return {-8.0 / g_, -1.0 / g_, 1.0 / m_, 8.0 / m_};
}

cplx VgMeasure::exp_moment(cplx u) const {
  require_strip(u.real(), "VG exp_moment");
  return vg_h(c_, g_, m_, u);
}

double VgMeasure::exp_moment_slope() const {
  return c_ * (1.0 / (m_ - 1.0) - 1.0 / m_ + 1.0 / g_ - 1.0 / (g_ + 1.0));
}

C2Split VgMeasure::c2_split() const {
  require_strip(2.0, "VG c2_split");
  return {c_ * std::log1p(1.0 / (m_ * (m_ - 2.0))), c_ * std::log1p(1.0 / (g_ * (g_ + 2.0)))};
}

double VgMeasure::growth_moment() const {
  require_strip(4.0, "VG growth_moment");
  return c_ * std::log1p(1.0 / ((m_ - 4.0) * (m_ - 2.0)));
}

// ---------------------------------------------------------------------------

LevyModel merton_model(const MertonParams& p) {
  p.validate();
  LevyModel model;
  model.mu = p.mu;
  model.sigma = p.sigma;
  model.measure = std::make_shared<MertonMeasure>(p.gamma, p.m, p.delta);
  return model;
}

LevyModel vg_model(const VgParams& p) {
  p.validate();
  LevyModel model;
  model.mu = p.mu;
  model.sigma = p.sigma;
  model.measure = std::make_shared<VgMeasure>(p.c_par, p.g_par, p.m_par);
  return model;
}

cplx merton_cumulant_mmm(const MertonParams& p, cplx z) {
  p.validate();
  const double d2 = p.delta * p.delta;
  const double e1 = std::exp(p.m + 0.5 * d2);
  const double h1 = p.gamma * (e1 - 1.0 - p.m);
  const double c2 = p.gamma * (std::exp(2.0 * p.m + 2.0 * d2) - 2.0 * e1 + 1.0);
  const double slope = p.gamma * ((p.m + d2) * e1 - p.m);
  const double s2 = p.sigma * p.sigma;
  const double mu_s = p.mu + 0.5 * s2 + h1;
  const double d = s2 + c2;
  const double lambda = admissible_lambda(mu_s, d);
  const double b_star = p.mu - s2 * mu_s / d - lambda * slope;

  const cplx u = cplx(0.0, 1.0) * z;
  // e^x nu is gamma e1 times N(m + delta^2, delta^2).
  return u * b_star + 0.5 * s2 * u * u + (1.0 + lambda) * gaussian_h(p.gamma, p.m, p.delta, u) -
         lambda * gaussian_h(p.gamma * e1, p.m + d2, p.delta, u);
}

cplx vg_cumulant_mmm(const VgParams& p, cplx z) {
  p.validate();
  const double c = p.c_par;
  const double g = p.g_par;
  const double m = p.m_par;
  const double h1 = vg_h_real(c, g, m, 1.0);
  const double c2 = vg_h_real(c, g, m, 2.0) - 2.0 * h1;
  const double slope = c * (1.0 / (m - 1.0) - 1.0 / m + 1.0 / g - 1.0 / (g + 1.0));
  const double s2 = p.sigma * p.sigma;
  const double mu_s = p.mu + 0.5 * s2 + h1;
  const double d = s2 + c2;
  const double lambda = admissible_lambda(mu_s, d);
  const double b_star = p.mu - s2 * mu_s / d - lambda * slope;

  const cplx u = cplx(0.0, 1.0) * z;
  const double hi = lambda != 0.0 ? m - 1.0 : m;
  if (!(u.real() > -g && u.real() < hi)) {
    throw DomainError("VG cumulant: Im(z) = " + fmt(z.imag()) + " outside (" + fmt(-hi) + ", " +
                      fmt(g) + ") set by G = " + fmt(g) + ", M = " + fmt(m));
  }
  cplx psi = u * b_star + 0.5 * s2 * u * u + (1.0 + lambda) * vg_h(c, g, m, u);
  if (lambda != 0.0) psi -= lambda * vg_h(c, g + 1.0, m - 1.0, u);
  return psi;
}

double merton_c2_minus(const MertonParams& p) {
  const double d2 = p.delta * p.delta;
  return p.gamma * (std::exp(2.0 * (d2 + p.m)) * normal_cdf(-(2.0 * d2 + p.m) / p.delta) -
                    2.0 * std::exp((d2 + 2.0 * p.m) / 2.0) * normal_cdf(-(d2 + p.m) / p.delta) +
                    normal_cdf(-p.m / p.delta));
}

MertonParams merton_preset() {
  MertonParams p;
  p.sigma = 0.0435;
  p.gamma = 0.0054;
  p.m = -0.0697;
  p.delta = 0.0889;
  p.mu = drift_for_tilt(MertonMeasure(p.gamma, p.m, p.delta), p.sigma, kPresetTilt);
  return p;
}

VgParams vg_preset() {
  VgParams p;
  p.c_par = 6.7910;
  p.g_par = 30.1807;
  p.m_par = 33.1507;
  p.sigma = 0.0;
  p.mu = drift_for_tilt(VgMeasure(p.c_par, p.g_par, p.m_par), p.sigma, kPresetTilt);
  return p;
}

}  // namespace levyhedge
