#include "levyhedge/calibration.hpp"

#include "levyhedge/errors.hpp"
#include "levyhedge/text.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

namespace levyhedge {
namespace {

// Kept off the boundary: a tilt of exactly 0 can round to mu^S > 0.
constexpr double kMinProjectedTilt = 1e-3;
constexpr double kMaxProjectedTilt = 0.99;
constexpr double kProjectedVgM = 4.5;

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
  throw ConfigError("quote file line " + std::to_string(line_no) + ": " + what);
}

double price_scale(const QuoteSet& q) {
  double s = 0.0;
  for (const auto& x : q.quotes) s += x.mid;
  return s / static_cast<double>(q.quotes.size());
}

double penalty_value(const QuoteSet& q, double violation) {
  return q.spot + kPenaltyWeight * price_scale(q) * violation * violation;
}

// (C, G, M) from the time-changed parametrisation without the M > 4 check.
VgParams vg_unchecked(double kappa, double m, double delta, double sigma) {
  const double d2 = delta * delta;
  const double root = std::sqrt(m * m + 2.0 * d2 / kappa) / d2;
  VgParams p;
  p.c_par = 1.0 / kappa;
  p.g_par = root + m / d2;
  p.m_par = root - m / d2;
  p.sigma = sigma;
  return p;
}

std::vector<double> to_inner(const ModelParams& p) {
  const auto report = check_constraints(p);
  if (const auto* mp = std::get_if<MertonParams>(&p)) {
    return {std::log(mp->sigma), std::log(mp->gamma), mp->m, std::log(mp->delta), report.tilt};
  }
  const auto k = vg_to_kappa(std::get<VgParams>(p));
  return {std::log(k.kappa), k.m, std::log(k.delta), report.tilt};
}

ModelParams from_inner(Family family, const std::vector<double>& x, double vg_sigma) {
  if (family == Family::merton) {
    MertonParams p;
    p.sigma = std::exp(x[0]);
    p.gamma = std::exp(x[1]);
    p.m = x[2];
    p.delta = std::exp(x[3]);
    p.mu = drift_for_tilt(MertonMeasure(p.gamma, p.m, p.delta), p.sigma, x[4]);
    return p;
  }
  VgParams p = vg_unchecked(std::exp(x[0]), x[1], std::exp(x[2]), vg_sigma);
  // Outside M > 4 the drift is irrelevant: rmse() returns the penalty.
  if (p.m_par > 4.0) p.mu = drift_for_tilt(VgMeasure(p.c_par, p.g_par, p.m_par), p.sigma, x[3]);
  return p;
}

std::vector<double> initial_steps(Family family) {
  if (family == Family::merton) return {0.2, 0.3, 0.03, 0.2, 0.1};
  return {0.2, 0.02, 0.2, 0.1};
}

struct Objective {
  std::function<double(const std::vector<double>&)> f;
  std::size_t dim = 0;
  long evaluations = 0;
  std::exception_ptr failure;
};

double gsl_objective(const gsl_vector* v, void* data) {
  auto* obj = static_cast<Objective*>(data);
  std::vector<double> x(obj->dim);
  for (std::size_t i = 0; i < obj->dim; ++i) x[i] = gsl_vector_get(v, i);
  ++obj->evaluations;
  try {
    return obj->f(x);
  } catch (...) {
    if (!obj->failure) obj->failure = std::current_exception();
    return std::numeric_limits<double>::infinity();
  }
}

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

gsl_vector* make_vector(const std::vector<double>& x) {
  gsl_vector* v = gsl_vector_alloc(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) gsl_vector_set(v, i, x[i]);
  return v;
}

struct RunResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool size_converged = false;
};

RunResult nelder_mead(Objective& obj, const std::vector<double>& start,
                      const std::vector<double>& steps, const CalibrationConfig& cfg) {
  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> m(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, obj.dim));
  std::unique_ptr<gsl_vector, VectorDeleter> x0(make_vector(start));
  std::unique_ptr<gsl_vector, VectorDeleter> ss(make_vector(steps));
  gsl_multimin_function fn{&gsl_objective, obj.dim, &obj};
  gsl_multimin_fminimizer_set(m.get(), &fn, x0.get(), ss.get());
  if (obj.failure) std::rethrow_exception(obj.failure);

  RunResult r;
  for (r.iterations = 0; r.iterations < cfg.max_iterations;) {
    const int status = gsl_multimin_fminimizer_iterate(m.get());
    ++r.iterations;
    if (obj.failure) std::rethrow_exception(obj.failure);
    if (status != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()), cfg.simplex_tol) ==
        GSL_SUCCESS) {
      r.size_converged = true;
      break;
    }
  }
  const gsl_vector* best = gsl_multimin_fminimizer_x(m.get());
  r.x.resize(obj.dim);
  for (std::size_t i = 0; i < obj.dim; ++i) r.x[i] = gsl_vector_get(best, i);
  r.value = gsl_multimin_fminimizer_minimum(m.get());
  return r;
}

void put(std::ostream& out, const char* key, double v) {
  out << key << '=' << format_number(v) << '\n';
}

}  // namespace

// ---------------------------------------------------------------------------
// Quotes

void QuoteSet::validate() const {
  if (!(spot > 0.0)) throw ConfigError("quote set spot must be > 0");
  if (quotes.empty()) throw ConfigError("quote set contains no quotes");
  for (std::size_t i = 0; i < quotes.size(); ++i) {
    const auto& q = quotes[i];
    if (!(q.expiry > 0.0) || !(q.strike > 0.0) || !(q.mid > 0.0)) {
      throw ConfigError("quote " + std::to_string(i) +
                        ": expiry, strike and mid must all be > 0");
    }
  }
}

std::chrono::year_month_day parse_date(const std::string& text) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  char tail = 0;
  const std::string t(trim(text));
  if (t.size() != 10 || std::sscanf(t.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
    throw ConfigError("expected a date YYYY-MM-DD, got '" + text + "'");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) throw ConfigError("invalid calendar date '" + text + "'");
  return ymd;
}

std::string format_date(std::chrono::year_month_day d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

QuoteSet parse_quotes(std::istream& in) {
  QuoteSet out;
  bool have_spot = false;
  bool have_date = false;
  bool have_header = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = trim(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      s = trim(s.substr(1));
      const auto eq = s.find('=');
      if (eq == std::string_view::npos) continue;
      const std::string key(trim(s.substr(0, eq)));
      const std::string value(trim(s.substr(eq + 1)));
      if (key == "spot") {
        const auto v = parse_number(value);
        if (!v) parse_fail(line_no, "bad spot '" + value + "'");
        out.spot = *v;
        have_spot = true;
      } else if (key == "valuation_date") {
        out.valuation_date = parse_date(value);
        have_date = true;
      } else if (key == "day_count") {
        if (value != "ACT/365") parse_fail(line_no, "unsupported day count '" + value + "'");
        out.day_count = value;
      }
      continue;
    }
    const auto fields = split_csv(s);
    if (!have_header) {
      if (fields.size() != 3 || fields[0] != "expiry" || fields[1] != "strike" ||
          fields[2] != "mid") {
        parse_fail(line_no, "expected header 'expiry,strike,mid'");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != 3) parse_fail(line_no, "expected 3 fields");
    Quote q;
    double* targets[3] = {&q.expiry, &q.strike, &q.mid};
    for (int i = 0; i < 3; ++i) {
      const auto v = parse_number(fields[i]);
      if (!v) parse_fail(line_no, "bad number '" + std::string(fields[i]) + "'");
      *targets[i] = *v;
    }
    out.quotes.push_back(q);
  }
  if (!have_header && out.quotes.empty() && !have_spot) throw ConfigError("quote file is empty");
  if (!have_header) throw ConfigError("quote file has no 'expiry,strike,mid' header");
  if (!have_spot) throw ConfigError("quote file header lacks '# spot=...'");
  if (!have_date) throw ConfigError("quote file header lacks '# valuation_date=...'");
  out.validate();
  return out;
}

QuoteSet read_quotes(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open quote file '" + path + "'");
  return parse_quotes(in);
}

void write_quotes(std::ostream& out, const QuoteSet& q) {
  out << "# spot=" << format_number(q.spot) << '\n'
      << "# valuation_date=" << format_date(q.valuation_date) << '\n'
      << "# day_count=" << q.day_count << '\n'
      << "expiry,strike,mid\n";
  for (const auto& x : q.quotes) {
    out << format_number(x.expiry) << ',' << format_number(x.strike) << ','
        << format_number(x.mid) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Models and prices

std::string family_name(Family f) { return f == Family::merton ? "merton" : "vg"; }

Family parse_family(const std::string& text) {
  if (text == "merton") return Family::merton;
  if (text == "vg") return Family::vg;
  throw ConfigError("unknown model family '" + text + "' (expected merton or vg)");
}

Family family_of(const ModelParams& p) {
  return std::holds_alternative<MertonParams>(p) ? Family::merton : Family::vg;
}

LevyModel build_model(const ModelParams& p) {
  if (const auto* mp = std::get_if<MertonParams>(&p)) return merton_model(*mp);
  return vg_model(std::get<VgParams>(p));
}

double model_call_price(const MmmModel& /*model*/, const CharFn& phi, double spot, double strike,
                        double expiry, const FourierConfig& cfg) {
  if (!(expiry > 0.0)) throw DomainError("expiry must be > 0");
  if (!(strike > 0.0)) throw DomainError("strike must be > 0");
  if (!(spot > 0.0)) throw DomainError("spot must be > 0");
  if (std::abs(phi.horizon() - expiry) > 1e-12 * expiry) {
    throw DomainError("characteristic function horizon " + format_number(phi.horizon()) +
                      " differs from the expiry " + format_number(expiry));
  }
  return spot * evaluate(Functional::price, nullptr, phi, strike / spot, cfg).value;
}

std::vector<double> model_prices(const ModelParams& p, const QuoteSet& quotes,
                                 const FourierConfig& cfg) {
  const MmmModel mmm = to_mmm(build_model(p));
  std::map<double, std::vector<std::size_t>> by_expiry;
  for (std::size_t i = 0; i < quotes.quotes.size(); ++i) {
    by_expiry[quotes.quotes[i].expiry].push_back(i);
  }
  std::vector<double> out(quotes.quotes.size());
  for (const auto& [expiry, idx] : by_expiry) {
    const auto phi = CharFn::from_model(mmm, expiry);
    std::vector<double> chis;
    chis.reserve(idx.size());
    for (std::size_t i : idx) chis.push_back(quotes.quotes[i].strike / quotes.spot);
    const auto values = evaluate_batch(Functional::price, &mmm, phi, chis, cfg);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (!(values[j].error <= cfg.accuracy_limit)) {
        throw AccuracyError("call price at expiry " + format_number(expiry) + ", strike " +
                                format_number(quotes.quotes[idx[j]].strike) +
                                " misses the accuracy limit",
                            values[j].error);
      }
      out[idx[j]] = quotes.spot * values[j].value;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Constraints and objective

std::string ConstraintReport::describe() const {
  std::ostringstream os;
  os << (admissible ? "MMM admissible" : "MMM not admissible") << " (mu^S = "
     << format_number(mu_s) << ", tilt = " << format_number(tilt) << ")";
  if (!vg_m_ok || vg_m != 0.0) {
    os << (vg_m_ok ? ", M > 4" : ", M <= 4") << " (M = " << format_number(vg_m) << ")";
  }
  return os.str();
}

ConstraintReport check_constraints(const ModelParams& p) {
  ConstraintReport r;
  if (const auto* vp = std::get_if<VgParams>(&p)) {
    r.vg_m = vp->m_par;
    r.vg_m_ok = vp->m_par > 4.0;
    if (!r.vg_m_ok) {
      r.admissible = false;
      r.tilt = std::numeric_limits<double>::quiet_NaN();
      r.violation = 4.0 - vp->m_par + 1e-12;
      return r;
    }
  }
  const LevyModel model = build_model(p);
  r.mu_s = compute_mu_s(model);
  r.variance_rate = model.sigma * model.sigma + c2_split(model).total();
  r.tilt = -r.mu_s / r.variance_rate;
  r.admissible = r.mu_s <= 0.0 && r.mu_s > -r.variance_rate;
  if (!r.admissible) r.violation = std::max({-r.tilt, r.tilt - 1.0, 0.0}) + 1e-12;
  return r;
}

double rmse(const ModelParams& p, const QuoteSet& quotes, const FourierConfig& cfg) {
  quotes.validate();
  const auto report = check_constraints(p);
  if (!report.feasible()) return penalty_value(quotes, report.violation);
  const auto prices = model_prices(p, quotes, cfg);
  double sum = 0.0;
  for (std::size_t i = 0; i < prices.size(); ++i) {
    const double e = prices[i] - quotes.quotes[i].mid;
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(prices.size()));
}

// ---------------------------------------------------------------------------
// Calibration

void CalibrationConfig::validate() const {
  fourier.validate();
  if (restarts < 0) throw ConfigError("restarts must be >= 0");
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(simplex_tol > 0.0) || !(improvement_tol > 0.0)) {
    throw ConfigError("calibration tolerances must be > 0");
  }
}

ModelParams project_feasible(const ModelParams& p) {
  ModelParams out = p;
  if (auto* vp = std::get_if<VgParams>(&out)) {
    if (!(vp->m_par > 4.0)) vp->m_par = kProjectedVgM;
  }
  const auto report = check_constraints(out);
  if (report.admissible && report.tilt <= kMaxProjectedTilt) return out;
  const double tilt = std::clamp(report.tilt, kMinProjectedTilt, kMaxProjectedTilt);
  if (auto* mp = std::get_if<MertonParams>(&out)) {
    mp->mu = drift_for_tilt(MertonMeasure(mp->gamma, mp->m, mp->delta), mp->sigma, tilt);
  } else {
    auto& vp = std::get<VgParams>(out);
    vp.mu = drift_for_tilt(VgMeasure(vp.c_par, vp.g_par, vp.m_par), vp.sigma, tilt);
  }
  return out;
}

CalibrationResult calibrate(Family family, const QuoteSet& quotes, const ModelParams& init,
                            const CalibrationConfig& cfg) {
  cfg.validate();
  quotes.validate();
  if (family_of(init) != family) {
    throw ConfigError("initial parameters are not of the " + family_name(family) + " family");
  }
  const ModelParams start = project_feasible(init);
  const double vg_sigma = family == Family::vg ? std::get<VgParams>(start).sigma : 0.0;
  const double scale = price_scale(quotes);

  Objective obj;
  obj.f = [&](const std::vector<double>& x) {
    try {
      return rmse(from_inner(family, x, vg_sigma), quotes, cfg.fourier);
    } catch (const ConstraintError&) {
      // Degenerate corners of the unconstrained space.
      return 2.0 * quotes.spot;
    } catch (const AccuracyError&) {
      return 2.0 * quotes.spot;
    }
  };
  std::vector<double> best_x = to_inner(start);
  obj.dim = best_x.size();

  CalibrationResult result;
  result.initial_rmse = rmse(start, quotes, cfg.fourier);
  double best = result.initial_rmse;
  ModelParams best_params = start;
  const auto steps = initial_steps(family);
  for (int run = 0; run <= cfg.restarts; ++run) {
    const RunResult r = nelder_mead(obj, best_x, steps, cfg);
    result.iterations += r.iterations;
    const double gain = best - r.value;
    if (r.value < best) {
      best = r.value;
      best_x = r.x;
      best_params = from_inner(family, best_x, vg_sigma);
    }
    if (r.size_converged && gain <= cfg.improvement_tol * scale) {
      result.converged = true;
      break;
    }
  }
  result.evaluations = obj.evaluations;
  result.params = best_params;
  result.constraints = check_constraints(result.params);
  if (!result.constraints.feasible()) {
    throw Error("calibration produced infeasible parameters: " + result.constraints.describe());
  }
  result.rmse = rmse(result.params, quotes, cfg.fourier);
  return result;
}

void write_result(std::ostream& out, Family family, const CalibrationResult& r) {
  out << "family=" << family_name(family) << '\n';
  if (const auto* mp = std::get_if<MertonParams>(&r.params)) {
    put(out, "mu", mp->mu);
    put(out, "sigma", mp->sigma);
    put(out, "gamma", mp->gamma);
    put(out, "m", mp->m);
    put(out, "delta", mp->delta);
  } else {
    const auto& vp = std::get<VgParams>(r.params);
    const auto k = vg_to_kappa(vp);
    put(out, "mu", vp.mu);
    put(out, "sigma", vp.sigma);
    put(out, "C", vp.c_par);
    put(out, "G", vp.g_par);
    put(out, "M", vp.m_par);
    put(out, "kappa", k.kappa);
    put(out, "theta", k.m);
    put(out, "vg_delta", k.delta);
  }
  put(out, "rmse", r.rmse);
  put(out, "initial_rmse", r.initial_rmse);
  out << "iterations=" << r.iterations << '\n'
      << "evaluations=" << r.evaluations << '\n'
      << "converged=" << (r.converged ? "true" : "false") << '\n';
  put(out, "mu_s", r.constraints.mu_s);
  put(out, "tilt", r.constraints.tilt);
  out << "admissible=" << (r.constraints.admissible ? "true" : "false") << '\n';
  if (family == Family::vg) out << "m_gt_4=" << (r.constraints.vg_m_ok ? "true" : "false") << '\n';
  out << "constraint_report=" << r.constraints.describe() << '\n';
}

// ---------------------------------------------------------------------------
// Synthetic quotes

QuoteSet synthetic_quotes(const ModelParams& p, double spot,
                          std::chrono::year_month_day valuation_date,
                          std::span<const int> expiry_days,
                          std::span<const std::vector<double>> strikes, const FourierConfig& cfg) {
  if (expiry_days.size() != strikes.size()) {
    throw ConfigError("one strike list per expiry required");
  }
  QuoteSet out;
  out.spot = spot;
  out.valuation_date = valuation_date;
  for (std::size_t e = 0; e < expiry_days.size(); ++e) {
    if (expiry_days[e] <= 0) throw ConfigError("expiry days must be > 0");
    const double t = expiry_days[e] / 365.0;
    for (double k : strikes[e]) out.quotes.push_back({t, k, 0.0});
  }
  const auto prices = model_prices(p, out, cfg);
  for (std::size_t i = 0; i < prices.size(); ++i) out.quotes[i].mid = prices[i];
  out.validate();
  return out;
}

QuoteSet reference_synthetic_quotes(const ModelParams& p, const FourierConfig& cfg) {
  constexpr double spot = 2102.4;
  const std::vector<int> days{30, 58, 86, 149, 240, 275, 331};
  const std::vector<int> counts{12, 12, 12, 12, 11, 11, 11};
  std::vector<std::vector<double>> strikes;
  for (int n : counts) {
    std::vector<double> ks;
    for (int j = 0; j < n; ++j) {
      const double moneyness = 0.90 + 0.18 * j / (n - 1);
      ks.push_back(5.0 * std::round(spot * moneyness / 5.0));
    }
    strikes.push_back(std::move(ks));
  }
  using namespace std::chrono;
  return synthetic_quotes(p, spot, year_month_day{year{2016}, month{4}, day{20}}, days, strikes,
                          cfg);
}

MertonParams merton_synthetic_truth() {
  MertonParams p;
  p.sigma = 0.12;
  p.gamma = 1.0;
  p.m = -0.08;
  p.delta = 0.10;
  p.mu = drift_for_tilt(MertonMeasure(p.gamma, p.m, p.delta), p.sigma, kPresetTilt);
  return p;
}

}  // namespace levyhedge
