#pragma once

// LRM and delta hedges of a call as functions of the moneyness chi = K/S,
// their gap, and the two model-independent bounds on it.

#include "levyhedge/fourier.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace levyhedge {

namespace flags {
inline constexpr unsigned kNone = 0;
// A bound is exceeded, but by less than the quadrature slack.
inline constexpr unsigned kWithinSlack = 1u << 0;
inline constexpr unsigned kT3Violated = 1u << 1;
inline constexpr unsigned kT4Violated = 1u << 2;
// Condition integral diverges; bound_t4 absent.
inline constexpr unsigned kT4Unavailable = 1u << 3;
// Some Fourier value exceeded the accuracy limit; bounds were not checked.
inline constexpr unsigned kInaccurate = 1u << 4;
inline constexpr unsigned kTailClamped = 1u << 5;
// Delta outside [0, 1] or negative LRM beyond slack.
inline constexpr unsigned kRangeViolated = 1u << 6;

inline constexpr unsigned kHardFailure = kT3Violated | kT4Violated | kInaccurate | kRangeViolated;
std::string describe(unsigned f);
}  // namespace flags

struct StrategyPoint {
  double chi = 0.0;
  double i1 = 0.0;
  double i2 = 0.0;
  double lrm = 0.0;
  double delta = 0.0;
  double diff = 0.0;
  double bound_t3 = 0.0;
  std::optional<double> bound_t4;
  // Propagated quadrature error estimates.
  double err_i1 = 0.0;
  double err_i2 = 0.0;
  double err_diff = 0.0;
  double err_t3 = 0.0;
  double err_t4 = 0.0;
  unsigned flags = flags::kNone;
  std::string note;

  bool ok() const { return (flags & flags::kHardFailure) == 0; }
};

// Tolerated excess over a bound, as a multiple of the error estimates.
inline constexpr double kSlackFactor = 10.0;

FourierValue lrm(const MmmModel& model, const CharFn& phi, double chi, const FourierConfig& cfg);
FourierValue delta(const CharFn& phi, double chi, const FourierConfig& cfg);
FourierValue bound_t3(const MmmModel& model, const CharFn& phi, double chi,
                      const FourierConfig& cfg);

// chi * bound_t4(chi): sqrt5 / (2 pi (sigma^2 + C2)) * condition integral *
// (C2- + int_0^inf e^{2x}(e^x - 1)^2 nu(dx)). Empty when the condition
// integral diverges.
std::optional<FourierValue> theorem4_constant(const MmmModel& model, const CharFn& phi,
                                              const FourierConfig& cfg);
std::optional<FourierValue> bound_t4(const MmmModel& model, const CharFn& phi, double chi,
                                     const FourierConfig& cfg);

// One point per chi, in input order; failures are recorded in the flags.
std::vector<StrategyPoint> sweep(const MmmModel& model, const CharFn& phi,
                                 std::span<const double> chis, const FourierConfig& cfg);

// The same record computed from a spot and a strike; depends on them only
// through K / S.
StrategyPoint strategy_at(const MmmModel& model, const CharFn& phi, double spot, double strike,
                          const FourierConfig& cfg);

}  // namespace levyhedge
