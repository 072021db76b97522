#include "levyhedge/fourier.hpp"

#include "levyhedge/errors.hpp"
#include "levyhedge/parallel.hpp"
#include "levyhedge/quadrature.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

namespace levyhedge {

namespace {

constexpr cplx kI{0.0, 1.0};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(8);
  os << v;
  return os.str();
}

// Transform F(v) and damping exponent beta of one functional.
struct Kernel {
  std::function<cplx(double)> transform;
  double beta;
  double shift;  // Im of the characteristic-function argument
};

Kernel make_kernel(Functional f, const MmmModel* model, const CharFn& phi, double alpha) {
  phi.require(-alpha, "damped transform");
  switch (f) {
    case Functional::i1:
      return {[&phi, alpha](double v) { return phi(cplx(v, -alpha)) / cplx(alpha - 1.0, v); },
              alpha - 1.0, -alpha};
    case Functional::price:
      return {[&phi, alpha](double v) {
                return phi(cplx(v, -alpha)) / (cplx(alpha - 1.0, v) * cplx(alpha, v));
              },
              alpha - 1.0, -alpha};
    case Functional::tail_upper:
      return {[&phi, alpha](double v) { return phi(cplx(v, -alpha)) / cplx(alpha, v); }, alpha,
              -alpha};
    case Functional::i2: {
      if (model == nullptr) throw std::invalid_argument("I2 needs the model");
      const LevyMeasure& nu = model->measure();
      nu.require_strip(alpha + 1.0, "I2 inner transform");
      const cplx h1 = nu.exp_moment(1.0);
      // int (e^{wx} - 1)(e^x - 1) nu(dx) = h(w + 1) - h(w) - h(1), w = alpha + iv
      return {[&phi, &nu, alpha, h1](double v) {
                const cplx w(alpha, v);
                const cplx inner = nu.exp_moment(w + 1.0) - nu.exp_moment(w) - h1;
                return phi(cplx(v, -alpha)) * inner / (cplx(alpha - 1.0, v) * w);
              },
              alpha - 1.0, -alpha};
    }
  }
  throw std::logic_error("unknown functional");
}

// e^{-beta k}/pi Re int_0^inf e^{-ivk} F(v) dv by adaptive quadrature on
// [0, head] and extrapolation beyond.
FourierValue direct_integral(const Kernel& kern, const CharFn& phi, double k,
                             const FourierConfig& cfg) {
  auto g = [&](double v) { return (std::exp(cplx(0.0, -v * k)) * kern.transform(v)).real(); };

  std::vector<double> pts{0.0};
  for (double p = 0.5; p < cfg.head_length; p *= 2.0) pts.push_back(p);
  pts.push_back(cfg.head_length);
  const quad::Tolerance tol{cfg.abs_tol, cfg.rel_tol, 20000};
  const auto head = quad::adaptive<double>(g, std::span<const double>(pts), tol);

  // Asymptotic angular frequency of the integrand from the exponent.
  const double probe = 4.0 * cfg.head_length;
  const double d = 0.25;
  const cplx l0 = phi.log(cplx(probe, kern.shift));
  const cplx l1 = phi.log(cplx(probe + d, kern.shift));
  double omega = std::abs((l1 - l0).imag() / d - k);
  if (!std::isfinite(omega)) omega = 0.0;

  // Fast (e.g. Gaussian) decay: integrate up to where |F| is negligible.
  // Extrapolation is reserved for slowly decaying transforms.
  double cut = 0.0;
  for (double v = 2.0 * cfg.head_length; v <= 4096.0 * cfg.head_length; v *= 2.0) {
    if (std::abs(kern.transform(v)) * v <= 1e-3 * cfg.abs_tol) {
      cut = v;
      break;
    }
  }
  // Power-law decay (e.g. VG) can reach the cut only very far out; the
  // extrapolating tail is far cheaper there. Faster-than-power decay shows
  // as a local log-slope that keeps growing from octave to octave.
  if (cut > 16.0 * cfg.head_length) {
    auto slope = [&](double v) {
      return std::log2(std::abs(kern.transform(v)) / std::abs(kern.transform(2.0 * v)));
    };
    const double near = slope(0.125 * cut);
    const double far = slope(0.5 * cut);
    if (!(far > 2.0 * near + 1.0)) cut = 0.0;
  }
  quad::Result<double> tail;
  if (cut > 0.0) {
    const double panel = omega > 0.0 ? std::min(8.0, std::numbers::pi / omega) : 8.0;
    std::vector<double> grid;
    for (double v = cfg.head_length; v < cut; v += panel) grid.push_back(v);
    grid.push_back(cut);
    tail = quad::adaptive<double>(g, std::span<const double>(grid),
                                  quad::Tolerance{cfg.abs_tol, cfg.rel_tol, 40000});
  } else {
    quad::TailOptions opt;
    opt.abs_tol = cfg.abs_tol;
    opt.rel_tol = cfg.rel_tol;
    opt.reference = std::abs(head.value);
    opt.segment = {0.01 * cfg.abs_tol, 0.01 * cfg.rel_tol, 4000};
    tail = quad::oscillatory_tail(g, cfg.head_length, omega, opt);
  }

  const double scale = std::exp(-kern.beta * k) / std::numbers::pi;
  FourierValue out;
  out.value = scale * (head.value + tail.value);
  out.error = scale * (head.error + tail.error);
  if (!head.converged || !tail.converged) out.error = std::max(out.error, cfg.accuracy_limit * 2.0);
  if (!std::isfinite(out.value)) {
    out.value = 0.0;
    out.error = std::numeric_limits<double>::infinity();
  }
  return out;
}

FourierValue checked(FourierValue v, const FourierConfig& cfg, std::string_view what, double chi) {
  if (!(v.error <= cfg.accuracy_limit)) {
    throw AccuracyError(std::string(what) + " at chi = " + fmt(chi) + ": error estimate " +
                            fmt(v.error) + " exceeds the accuracy limit " + fmt(cfg.accuracy_limit),
                        v.error);
  }
  return v;
}

const char* functional_name(Functional f) {
  switch (f) {
    case Functional::i1: return "I1";
    case Functional::i2: return "I2";
    case Functional::tail_upper: return "upper tail probability";
    case Functional::price: return "call price";
  }
  return "?";
}

void require_chi(double chi) {
  if (!(chi > 0.0) || !std::isfinite(chi)) {
    throw DomainError("moneyness chi must be finite and > 0, got " + fmt(chi));
  }
}

bool null_jumps(Functional f, const MmmModel* model) {
  return f == Functional::i2 && model != nullptr && model->measure().is_null();
}

FourierValue evaluate_unchecked(Functional f, const MmmModel* model, const CharFn& phi, double chi,
                                const FourierConfig& cfg) {
  require_chi(chi);
  if (null_jumps(f, model)) return {};
  const Kernel kern = make_kernel(f, model, phi, cfg.alpha);
  return direct_integral(kern, phi, std::log(chi), cfg);
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void FourierConfig::validate() const {
  if (n_grid < 4 || (n_grid & (n_grid - 1)) != 0) {
    throw ConfigError("n_grid must be a power of two >= 4, got " + std::to_string(n_grid));
  }
  if (!(eta > 0.0)) throw ConfigError("eta must be > 0, got " + fmt(eta));
  if (!(alpha > 1.0 && alpha <= 2.0)) throw ConfigError("alpha must lie in (1, 2], got " + fmt(alpha));
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(head_length > 0.0) || !(accuracy_limit > 0.0)) {
    throw ConfigError("Fourier tolerances must be positive");
  }
}

CharFn::CharFn(Exponent psi, ImagStrip strip, double horizon)
    : psi_(std::move(psi)), strip_(strip), horizon_(horizon) {
  if (!(horizon > 0.0)) throw DomainError("horizon T - t must be > 0, got " + fmt(horizon));
}

CharFn CharFn::from_model(const MmmModel& model, double horizon) {
  return CharFn([model](cplx z) { return model.cumulant(z); }, model.strip(), horizon);
}

void CharFn::require(double im, std::string_view what) const {
  if (!strip_.contains(im)) {
    throw DomainError(std::string(what) + ": Im(z) = " + fmt(im) +
                      " outside the analyticity strip (" + fmt(strip_.lo) + ", " + fmt(strip_.hi) +
                      ") of the characteristic function");
  }
}

FourierValue i1(const CharFn& phi, double chi, const FourierConfig& cfg) {
  return evaluate(Functional::i1, nullptr, phi, chi, cfg);
}

FourierValue i2(const MmmModel& model, const CharFn& phi, double chi, const FourierConfig& cfg) {
  return evaluate(Functional::i2, &model, phi, chi, cfg);
}

FourierValue tail_upper(const CharFn& phi, double chi, const FourierConfig& cfg) {
  return evaluate(Functional::tail_upper, nullptr, phi, chi, cfg);
}

FourierValue call_price(const CharFn& phi, double chi, const FourierConfig& cfg) {
  return evaluate(Functional::price, nullptr, phi, chi, cfg);
}

FourierValue lower_from_upper(const FourierValue& upper) {
  FourierValue out{1.0 - upper.value, upper.error, upper.clamped};
  if (out.value < 0.0 || out.value > 1.0) {
    const double excursion = out.value < 0.0 ? -out.value : out.value - 1.0;
    if (excursion > 1e-8) {
      throw AccuracyError("lower tail probability " + fmt(out.value) + " leaves [0, 1] by " +
                              fmt(excursion),
                          excursion);
    }
    out.value = std::clamp(out.value, 0.0, 1.0);
    out.clamped = true;
  }
  return out;
}

FourierValue tail_lower(const CharFn& phi, double chi, const FourierConfig& cfg) {
  return lower_from_upper(tail_upper(phi, chi, cfg));
}

FourierValue tail_lower_direct(const CharFn& phi, double chi, const FourierConfig& cfg) {
  require_chi(chi);
  const double a = std::min(1.0, 0.5 * phi.strip().hi);
  phi.require(a, "lower tail transform");
  // int e^{ivk} e^{-ak} P(L <= k) dk = phi(v + ia) / (a - iv)
  const Kernel kern{[&phi, a](double v) { return phi(cplx(v, a)) / cplx(a, -v); }, -a, a};
  return checked(direct_integral(kern, phi, std::log(chi), cfg), cfg, "lower tail probability",
                 chi);
}

FourierValue evaluate(Functional f, const MmmModel* model, const CharFn& phi, double chi,
                      const FourierConfig& cfg) {
  const double arr[1] = {chi};
  auto v = evaluate_batch(f, model, phi, std::span<const double>(arr, 1), cfg);
  return checked(v.front(), cfg, functional_name(f), chi);
}

std::vector<FourierValue> evaluate_batch(Functional f, const MmmModel* model, const CharFn& phi,
                                         std::span<const double> chis, const FourierConfig& cfg) {
  cfg.validate();
  for (double chi : chis) require_chi(chi);
  std::vector<FourierValue> out(chis.size());
  if (null_jumps(f, model)) return out;
  if (cfg.mode == FourierMode::fft_batch) {
    const auto slice = fft_slice(f, model, phi, cfg);
    for (std::size_t i = 0; i < chis.size(); ++i) out[i] = slice.at(chis[i]);
    return out;
  }
  parallel_for(chis.size(),
               [&](std::size_t i) { out[i] = evaluate_unchecked(f, model, phi, chis[i], cfg); });
  return out;
}

// ---------------------------------------------------------------------------
// FFT

FourierValue FftSlice::at(double chi) const {
  require_chi(chi);
  const double pos = (std::log(chi) - k0) / dk;
  if (!(pos >= 1.0) || !(pos <= static_cast<double>(values.size()) - 3.0)) {
    throw DomainError("chi = " + fmt(chi) + " outside the FFT log-strike grid");
  }
  const auto j = static_cast<std::size_t>(std::floor(pos));
  const double t = pos - static_cast<double>(j);
  auto second = [&](std::size_t i) { return values[i + 1] - 2.0 * values[i] + values[i - 1]; };
  FourierValue out;
  out.value = (1.0 - t) * values[j] + t * values[j + 1];
  const double curvature = std::max(std::abs(second(j)), std::abs(second(j + 1)));
  out.error = 0.5 * t * (1.0 - t) * curvature + std::max(truncation[j], truncation[j + 1]);
  return out;
}

FftSlice fft_slice(Functional f, const MmmModel* model, const CharFn& phi,
                   const FourierConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.n_grid;
  const double eta = cfg.eta;
  const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * eta);
  const double b = 0.5 * static_cast<double>(n) * dk;

  FftSlice slice;
  slice.k0 = -b;
  slice.dk = dk;
  slice.values.assign(n, 0.0);
  slice.truncation.assign(n, 0.0);
  if (null_jumps(f, model)) return slice;

  const Kernel kern = make_kernel(f, model, phi, cfg.alpha);
  auto* in = static_cast<cplx*>(fftw_malloc(sizeof(cplx) * n));
  auto* out = static_cast<cplx*>(fftw_malloc(sizeof(cplx) * n));
  if (in == nullptr || out == nullptr) {
    fftw_free(in);
    fftw_free(out);
    throw std::bad_alloc();
  }

  double s_quarter = 0.0;  // sum of |F| eta over [V/4, V/2)
  double s_half = 0.0;     // over [V/2, V)
  for (std::size_t j = 0; j < n; ++j) {
    const double v = eta * static_cast<double>(j);
    const cplx fv = kern.transform(v);
    const double w = j == 0 ? 1.0 / 3.0 : (j % 2 == 1 ? 4.0 / 3.0 : 2.0 / 3.0);
    in[j] = std::exp(cplx(0.0, b * v)) * fv * (eta * w);
    if (4 * j >= n && 2 * j < n) s_quarter += std::abs(fv) * eta;
    if (2 * j >= n) s_half += std::abs(fv) * eta;
  }

  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in),
                            reinterpret_cast<fftw_complex*>(out), FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }

  double tail = std::numeric_limits<double>::infinity();
  if (s_half == 0.0) {
    tail = 0.0;
  } else if (s_quarter > 0.0 && s_half < s_quarter) {
    const double r = s_half / s_quarter;
    tail = s_half * r / (1.0 - r);
  }
  for (std::size_t u = 0; u < n; ++u) {
    const double k = slice.log_strike(u);
    const double scale = std::exp(-kern.beta * k) / std::numbers::pi;
    slice.values[u] = scale * out[u].real();
    slice.truncation[u] = scale * tail;
  }
  fftw_free(in);
  fftw_free(out);
  return slice;
}

// ---------------------------------------------------------------------------

ConditionIntegral theorem4_condition_integral(const CharFn& phi, const FourierConfig& cfg) {
  cfg.validate();
  phi.require(-2.0, "condition integral");
  auto g = [&phi](double v) { return std::abs(phi(cplx(v, -2.0))) / (1.0 + v); };
  const double vt = static_cast<double>(cfg.n_grid) * cfg.eta;
  const quad::Tolerance tol{1e-14, 1e-11, 20000};

  std::vector<double> pts{0.0};
  for (double p = 1.0; p < vt; p *= 2.0) pts.push_back(p);
  pts.push_back(vt);
  const auto head = quad::adaptive<double>(g, std::span<const double>(pts), tol);

  ConditionIntegral out;
  out.truncation_point = vt;
  out.error = head.error;
  double sum = head.value;
  quad::WynnEpsilon eps;
  eps.push(sum);
  double a = vt;
  double prev = 0.0;
  int flat = 0;
  for (int i = 0; i < 60; ++i) {
    const auto seg = quad::adaptive<double>(g, a, 2.0 * a, tol);
    a *= 2.0;
    sum += seg.value;
    out.error += seg.error;
    eps.push(sum);
    const double ratio = prev > 0.0 ? seg.value / prev : 0.0;
    prev = seg.value;
    flat = ratio > 0.99 ? flat + 1 : 0;
    if (flat >= 3 || !std::isfinite(sum)) {
      throw DivergenceError("int |phi(v - 2i)| / (1 + v) dv does not converge: doubling segments "
                            "beyond v = " +
                            fmt(a / 2.0) + " keep contributing " + fmt(seg.value));
    }
    if (seg.value <= 1e-12 * sum) {
      out.value = sum;
      out.error += seg.value;
      return out;
    }
    if (ratio > 0.0 && ratio < 0.95) {
      if (auto e = eps.estimate(); e && e->error <= 1e-10 * std::abs(e->value)) {
        out.value = e->value;
        out.error += e->error;
        return out;
      }
    }
  }
  throw DivergenceError("int |phi(v - 2i)| / (1 + v) dv: no convergence after 60 doublings");
}

}  // namespace levyhedge
