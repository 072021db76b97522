#pragma once

// Damped Fourier representations of the hedging integrals. Everything is per
// unit spot: with k = log chi,
//   I1(chi)         = E*[e^L 1{e^L > chi}]
//   I2(chi)         = int E*[(e^{L+x} - chi)^+ - (e^L - chi)^+] (e^x - 1) nu(dx)
//   tail_upper(chi) = P*(L >= k),   tail_lower(chi) = P*(L <= k)
//   price(chi)      = E*[(e^L - chi)^+]
// where L is the MMM log-return over the horizon. Each is
//   e^{-beta k} / pi * Re int_0^inf e^{-ivk} F(v) dv
// for a damping beta and a transform F built from phi(v - i alpha).

#include "levyhedge/levy_core.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace levyhedge {

enum class FourierMode { fft_batch, direct_quadrature };

struct FourierConfig {
  std::size_t n_grid = std::size_t{1} << 14;
  double eta = 0.025;
  double alpha = 1.75;
  FourierMode mode = FourierMode::direct_quadrature;
  // Direct mode: tolerances of the v-integral and the split point between
  // the adaptive head and the extrapolated tail.
  double rel_tol = 1e-9;
  double abs_tol = 1e-14;
  double head_length = 64.0;
  // Any result whose error estimate exceeds this raises AccuracyError.
  double accuracy_limit = 1e-3;

  void validate() const;
};

// phi(z) = exp(horizon * Psi(z)) for an exponent Psi analytic on a strip.
class CharFn {
 public:
  using Exponent = std::function<cplx(cplx)>;

  CharFn(Exponent psi, ImagStrip strip, double horizon);
  static CharFn from_model(const MmmModel& model, double horizon);

  cplx operator()(cplx z) const { return std::exp(log(z)); }
  cplx log(cplx z) const { return horizon_ * psi_(z); }
  double horizon() const { return horizon_; }
  const ImagStrip& strip() const { return strip_; }
  // DomainError unless Im z = im lies in the strip.
  void require(double im, std::string_view what) const;

 private:
  Exponent psi_;
  ImagStrip strip_;
  double horizon_;
};

struct FourierValue {
  double value = 0.0;
  double error = 0.0;
  bool clamped = false;
};

enum class Functional { i1, i2, tail_upper, price };

// The model is needed only for I2 (inner transform over nu).
FourierValue i1(const CharFn& phi, double chi, const FourierConfig& cfg);
FourierValue i2(const MmmModel& model, const CharFn& phi, double chi, const FourierConfig& cfg);
FourierValue tail_upper(const CharFn& phi, double chi, const FourierConfig& cfg);
// 1 - tail_upper, clamped to [0, 1] when the excursion is below 1e-8.
FourierValue tail_lower(const CharFn& phi, double chi, const FourierConfig& cfg);
// Independent route for P*(L <= k) using damping on the other side of the
// real axis; always direct quadrature.
FourierValue tail_lower_direct(const CharFn& phi, double chi, const FourierConfig& cfg);
FourierValue call_price(const CharFn& phi, double chi, const FourierConfig& cfg);
// 1 - upper with the clamping rule above.
FourierValue lower_from_upper(const FourierValue& upper);

// Dispatches on cfg.mode. evaluate() raises AccuracyError past
// cfg.accuracy_limit; evaluate_batch() leaves that check to the caller. In
// batch mode every chi is read off one FFT.
FourierValue evaluate(Functional f, const MmmModel* model, const CharFn& phi, double chi,
                      const FourierConfig& cfg);
std::vector<FourierValue> evaluate_batch(Functional f, const MmmModel* model, const CharFn& phi,
                                         std::span<const double> chis, const FourierConfig& cfg);

// Values of one functional on the FFT log-strike grid k_j = k0 + j dk.
struct FftSlice {
  double k0 = 0.0;
  double dk = 0.0;
  std::vector<double> values;
  // Estimated contribution of |F| beyond n_grid * eta, per node (times the
  // damping factor at that node).
  std::vector<double> truncation;

  double log_strike(std::size_t j) const { return k0 + dk * static_cast<double>(j); }
  // Linear interpolation in log-strike; the error adds the interpolation
  // estimate from the local second difference.
  FourierValue at(double chi) const;
};

FftSlice fft_slice(Functional f, const MmmModel* model, const CharFn& phi,
                   const FourierConfig& cfg);

struct ConditionIntegral {
  double value = 0.0;
  double error = 0.0;
  // Point beyond which the integral was extrapolated.
  double truncation_point = 0.0;
};

// int_0^inf |phi(v - 2i)| / (1 + v) dv, integrated adaptively up to
// n_grid * eta and continued over doubling segments with extrapolation.
// Throws DivergenceError when the integrand does not decay.
ConditionIntegral theorem4_condition_integral(const CharFn& phi, const FourierConfig& cfg);

}  // namespace levyhedge
