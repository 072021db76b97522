#include "levyhedge/hedging.hpp"

#include "levyhedge/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace levyhedge {

std::string flags::describe(unsigned f) {
  static constexpr std::pair<unsigned, const char*> names[] = {
      {kWithinSlack, "within_slack"},     {kT3Violated, "t3_violated"},
      {kT4Violated, "t4_violated"},       {kT4Unavailable, "t4_unavailable"},
      {kInaccurate, "inaccurate"},        {kTailClamped, "tail_clamped"},
      {kRangeViolated, "range_violated"},
  };
  std::string out;
  for (const auto& [bit, name] : names) {
    if ((f & bit) == 0) continue;
    if (!out.empty()) out += '|';
    out += name;
  }
  return out.empty() ? "ok" : out;
}

namespace {

void add_note(StrategyPoint& p, const std::string& text) {
  if (!p.note.empty()) p.note += "; ";
  p.note += text;
}

void require_chi(double chi) {
  if (!(chi > 0.0) || !std::isfinite(chi)) {
    throw DomainError("moneyness chi must be finite and > 0");
  }
}

// Compares value against [lo, hi] with the given slack and updates flags.
void check_range(StrategyPoint& p, double value, double lo, double hi, double slack,
                 const char* what) {
  const double excess = std::max(lo - value, value - hi);
  if (excess <= 0.0) return;
  if (excess <= slack) {
    p.flags |= flags::kWithinSlack;
  } else {
    p.flags |= flags::kRangeViolated;
    add_note(p, std::string(what) + " out of range");
  }
}

void check_bound(StrategyPoint& p, double bound, double err_bound, unsigned violation,
                 const char* what) {
  const double excess = p.diff - bound;
  if (excess <= 0.0) return;
  const double slack = kSlackFactor * (p.err_diff + err_bound);
  if (excess <= slack) {
    p.flags |= flags::kWithinSlack;
  } else {
    p.flags |= violation;
    add_note(p, std::string("|LRM - Delta| exceeds ") + what);
  }
}

StrategyPoint assemble(const MmmModel& model, double chi, const FourierValue& a,
                       const FourierValue& b, const FourierValue& upper,
                       const std::optional<FourierValue>& t4, const FourierConfig& cfg) {
  StrategyPoint p;
  p.chi = chi;
  const double d = model.variance_rate();
  const double s2 = model.sigma() * model.sigma();
  const double c2 = model.c2();
  p.i1 = a.value;
  p.i2 = b.value;
  p.err_i1 = a.error;
  p.err_i2 = b.error;
  p.delta = a.value;
  p.lrm = (s2 * a.value + b.value) / d;
  p.diff = std::abs(b.value - c2 * a.value) / d;
  p.err_diff = (b.error + c2 * a.error) / d;

  const double spread = model.c2_plus() - model.c2_minus();
  double lower = 0.0;
  try {
    const auto lo = lower_from_upper(upper);
    lower = lo.value;
    if (lo.clamped) p.flags |= flags::kTailClamped;
  } catch (const AccuracyError& e) {
    p.flags |= flags::kInaccurate;
    add_note(p, e.what());
    lower = std::clamp(1.0 - upper.value, 0.0, 1.0);
  }
  p.bound_t3 = chi * model.c2_minus() / d + chi * lower * spread / d;
  p.err_t3 = chi * upper.error * std::abs(spread) / d;

  if (t4) {
    p.bound_t4 = t4->value / chi;
    p.err_t4 = t4->error / chi;
  } else {
    p.flags |= flags::kT4Unavailable;
  }

  const double worst = std::max({a.error, b.error, upper.error});
  if (!(worst <= cfg.accuracy_limit)) {
    p.flags |= flags::kInaccurate;
    add_note(p, "Fourier error estimate above the accuracy limit");
    return p;
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  check_range(p, p.delta, 0.0, 1.0, kSlackFactor * p.err_i1 + 4.0 * eps, "Delta");
  check_range(p, p.lrm, 0.0, std::numeric_limits<double>::infinity(),
              kSlackFactor * (s2 * p.err_i1 + p.err_i2) / d + 4.0 * eps, "LRM");
  check_bound(p, p.bound_t3, p.err_t3, flags::kT3Violated, "bound_t3");
  if (p.bound_t4) check_bound(p, *p.bound_t4, p.err_t4, flags::kT4Violated, "bound_t4");
  return p;
}

}  // namespace

FourierValue lrm(const MmmModel& model, const CharFn& phi, double chi, const FourierConfig& cfg) {
  const auto a = i1(phi, chi, cfg);
  const auto b = i2(model, phi, chi, cfg);
  const double s2 = model.sigma() * model.sigma();
  const double d = model.variance_rate();
  return {(s2 * a.value + b.value) / d, (s2 * a.error + b.error) / d, false};
}

FourierValue delta(const CharFn& phi, double chi, const FourierConfig& cfg) {
  return i1(phi, chi, cfg);
}

FourierValue bound_t3(const MmmModel& model, const CharFn& phi, double chi,
                      const FourierConfig& cfg) {
  require_chi(chi);
  const auto upper = tail_upper(phi, chi, cfg);
  const auto lower = lower_from_upper(upper);
  const double d = model.variance_rate();
  const double spread = model.c2_plus() - model.c2_minus();
  return {chi * model.c2_minus() / d + chi * lower.value * spread / d,
          chi * lower.error * std::abs(spread) / d, lower.clamped};
}

std::optional<FourierValue> theorem4_constant(const MmmModel& model, const CharFn& phi,
                                              const FourierConfig& cfg) {
  ConditionIntegral cond;
  try {
    cond = theorem4_condition_integral(phi, cfg);
  } catch (const DivergenceError&) {
    return std::nullopt;
  }
  const double brace = model.c2_minus() + model.measure().growth_moment();
  const double factor = std::sqrt(5.0) / (2.0 * std::numbers::pi * model.variance_rate());
  return FourierValue{factor * cond.value * brace, factor * cond.error * brace, false};
}

std::optional<FourierValue> bound_t4(const MmmModel& model, const CharFn& phi, double chi,
                                     const FourierConfig& cfg) {
  require_chi(chi);
  auto c = theorem4_constant(model, phi, cfg);
  if (!c) return std::nullopt;
  return FourierValue{c->value / chi, c->error / chi, false};
}

std::vector<StrategyPoint> sweep(const MmmModel& model, const CharFn& phi,
                                 std::span<const double> chis, const FourierConfig& cfg) {
  cfg.validate();
  for (std::size_t j = 0; j < chis.size(); ++j) {
    require_chi(chis[j]);
    if (j > 0 && !(chis[j] > chis[j - 1])) {
      throw DomainError("sweep requires strictly ascending chi values");
    }
  }
  const auto a = evaluate_batch(Functional::i1, &model, phi, chis, cfg);
  const auto b = evaluate_batch(Functional::i2, &model, phi, chis, cfg);
  const auto t = evaluate_batch(Functional::tail_upper, &model, phi, chis, cfg);
  const auto t4 = theorem4_constant(model, phi, cfg);

  std::vector<StrategyPoint> out;
  out.reserve(chis.size());
  for (std::size_t j = 0; j < chis.size(); ++j) {
    out.push_back(assemble(model, chis[j], a[j], b[j], t[j], t4, cfg));
  }
  return out;
}

StrategyPoint strategy_at(const MmmModel& model, const CharFn& phi, double spot, double strike,
                          const FourierConfig& cfg) {
  if (!(spot > 0.0) || !(strike > 0.0)) throw DomainError("spot and strike must be > 0");
  const double chi = strike / spot;
  return sweep(model, phi, std::span<const double>(&chi, 1), cfg).front();
}

}  // namespace levyhedge
