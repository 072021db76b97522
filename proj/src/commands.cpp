#include "levyhedge/commands.hpp"

#include "levyhedge/errors.hpp"
#include "levyhedge/text.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <ostream>
#include <sstream>

namespace levyhedge {
namespace {

constexpr double kMartingaleTolerance = 1e-10;
constexpr double kBand = 3.0;

VerifyRow compare(std::string quantity, double chi, const FourierValue& f, const McEstimate& m,
                  const FourierConfig& cfg) {
  VerifyRow row;
  row.quantity = std::move(quantity);
  row.chi = chi;
  row.fourier = f.value;
  row.fourier_error = f.error;
  row.mc = m.value;
  row.mc_std_error = m.std_error;
  row.mc_quad_error = m.quad_error;
  row.pass = f.error <= cfg.accuracy_limit &&
             std::abs(f.value - m.value) <= kBand * m.std_error + m.quad_error + f.error;
  return row;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open quote file '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

}  // namespace

int run_guarded(const std::function<int()>& body, std::ostream& diag) {
  try {
    return body();
  } catch (const ConfigError& e) {
    diag << "configuration error: " << e.what() << '\n';
    return exit_code::kConfig;
  } catch (const ConstraintError& e) {
    diag << "model constraint violated: " << e.what() << '\n';
    return exit_code::kConfig;
  } catch (const IntegrabilityError& e) {
    diag << "model constraint violated: " << e.what() << '\n';
    return exit_code::kConfig;
  } catch (const std::exception& e) {
    diag << "error: " << e.what() << '\n';
    return exit_code::kFailure;
  }
}

// ---------------------------------------------------------------------------
// sweep

void write_sweep_csv(std::ostream& out, std::span<const StrategyPoint> points,
                     const std::string& digest) {
  out << "# config_sha256=" << digest << '\n';
  out << "chi,i1,i2,lrm,delta,diff,bound_t3,bound_t4,flags\n";
  for (const auto& p : points) {
    out << format_number(p.chi) << ',' << format_number(p.i1) << ',' << format_number(p.i2) << ','
        << format_number(p.lrm) << ',' << format_number(p.delta) << ',' << format_number(p.diff)
        << ',' << format_number(p.bound_t3) << ','
        << (p.bound_t4 ? format_number(*p.bound_t4) : std::string()) << ','
        << flags::describe(p.flags) << '\n';
  }
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& diag) {
  cfg.validate();
  const MmmModel mmm = to_mmm(cfg.model());
  const auto phi = CharFn::from_model(mmm, cfg.horizon());
  const auto chis = cfg.chis();
  const auto points = sweep(mmm, phi, chis, cfg.fourier);
  write_sweep_csv(out, points, cfg.digest());

  std::size_t failed = 0;
  for (const auto& p : points) {
    if (p.ok()) continue;
    ++failed;
    diag << "chi=" << format_number(p.chi) << ": " << flags::describe(p.flags);
    if (!p.note.empty()) diag << " (" << p.note << ")";
    diag << '\n';
  }
  diag << "sweep: " << points.size() << " points, " << failed << " failed\n";
  return failed == 0 ? exit_code::kOk : exit_code::kFailure;
}

// ---------------------------------------------------------------------------
// verify

double VerifyRow::z() const { return mc_std_error > 0.0 ? (fourier - mc) / mc_std_error : 0.0; }

bool VerifyReport::all_pass() const { return failures() == 0; }

std::size_t VerifyReport::failures() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.pass ? 0 : 1;
  return n;
}

VerifyReport verify(const MmmModel& model, const CharFn& phi, std::span<const double> chis,
                    const FourierConfig& fourier, const McConfig& mc) {
  McConfig mc_cfg = mc;
  mc_cfg.horizon = phi.horizon();
  const McSample sample = simulate_log_returns(model, mc_cfg);

  VerifyReport report;
  report.generator = sample.generator;
  report.method = sample.method;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();

  {
    VerifyRow row;
    row.quantity = "martingale_fourier";
    row.chi = nan;
    const cplx at = phi(cplx(0.0, -1.0));
    row.fourier = at.real();
    row.fourier_error = std::abs(at.imag());
    row.mc = 1.0;
    row.pass = std::abs(at - 1.0) <= kMartingaleTolerance;
    report.rows.push_back(row);
  }
  {
    const auto m = mc_martingale(sample);
    report.rows.push_back(compare("martingale_mc", nan, FourierValue{1.0, 0.0, false}, m, fourier));
  }

  const auto f_i1 = evaluate_batch(Functional::i1, &model, phi, chis, fourier);
  const auto f_i2 = evaluate_batch(Functional::i2, &model, phi, chis, fourier);
  const auto f_up = evaluate_batch(Functional::tail_upper, &model, phi, chis, fourier);
  const auto f_price = evaluate_batch(Functional::price, &model, phi, chis, fourier);
  for (std::size_t i = 0; i < chis.size(); ++i) {
    const double chi = chis[i];
    report.rows.push_back(compare("i1", chi, f_i1[i], mc_i1(sample, chi), fourier));
    report.rows.push_back(compare("i2", chi, f_i2[i], mc_i2(model, sample, chi), fourier));
    const auto up = mc_tail_upper(sample, chi);
    report.rows.push_back(compare("tail_upper", chi, f_up[i], up, fourier));
    FourierValue lower;
    try {
      lower = tail_lower_direct(phi, chi, fourier);
    } catch (const AccuracyError& e) {
      lower = {nan, e.estimate(), false};
    }
    report.rows.push_back(
        compare("tail_lower", chi, lower, McEstimate{1.0 - up.value, up.std_error, 0.0}, fourier));
    report.rows.push_back(compare("price", chi, f_price[i], mc_call_price(sample, chi), fourier));
  }
  return report;
}

void write_verify_csv(std::ostream& out, const VerifyReport& report, const std::string& digest) {
  out << "# config_sha256=" << digest << '\n'
      << "# mc_generator=" << report.generator << '\n'
      << "# mc_method=" << report.method << '\n'
      << "quantity,chi,fourier,fourier_error,mc,mc_std_error,mc_quad_error,z,pass\n";
  for (const auto& r : report.rows) {
    out << r.quantity << ',' << (std::isnan(r.chi) ? std::string() : format_number(r.chi)) << ','
        << format_number(r.fourier) << ',' << format_number(r.fourier_error) << ','
        << format_number(r.mc) << ',' << format_number(r.mc_std_error) << ','
        << format_number(r.mc_quad_error) << ',' << format_number(r.z()) << ','
        << (r.pass ? "pass" : "FAIL") << '\n';
  }
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& diag) {
  cfg.validate();
  const MmmModel mmm = to_mmm(cfg.model());
  const auto phi = CharFn::from_model(mmm, cfg.horizon());
  const auto chis = cfg.mc_chis();
  const auto report = verify(mmm, phi, chis, cfg.fourier, cfg.mc);
  write_verify_csv(out, report, cfg.digest());
  for (const auto& r : report.rows) {
    if (r.pass) continue;
    diag << r.quantity;
    if (!std::isnan(r.chi)) diag << " at chi=" << format_number(r.chi);
    diag << ": fourier " << format_number(r.fourier) << " vs mc " << format_number(r.mc)
         << " (z = " << format_number(r.z()) << ")\n";
  }
  diag << "verify: " << report.rows.size() << " checks, " << report.failures() << " failed\n";
  return report.all_pass() ? exit_code::kOk : exit_code::kFailure;
}

// ---------------------------------------------------------------------------
// calibrate

int cmd_calibrate(const std::string& quotes_path, Family family,
                  const std::optional<ModelParams>& init, const CalibrationConfig& cfg,
                  std::ostream& out, std::ostream& diag) {
  const QuoteSet quotes = read_quotes(quotes_path);
  ModelParams start;
  if (init) {
    start = *init;
  } else if (family == Family::merton) {
    start = merton_preset();
  } else {
    start = vg_preset();
  }
  const auto result = calibrate(family, quotes, start, cfg);
  if (!result.constraints.feasible()) {
    throw Error("calibration returned infeasible parameters");
  }
  out << "# quotes_sha256=" << file_digest(quotes_path) << '\n';
  out << "quotes=" << quotes.quotes.size() << '\n';
  write_result(out, family, result);
  diag << "constraint report: " << result.constraints.describe() << '\n'
       << "calibrate: rmse " << format_number(result.rmse) << " after " << result.iterations
       << " iterations, " << (result.converged ? "converged" : "not converged") << '\n';
  return result.converged ? exit_code::kOk : exit_code::kFailure;
}

}  // namespace levyhedge
