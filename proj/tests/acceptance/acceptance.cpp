// Acceptance run: one PASS/FAIL line per criterion AC1..AC9. Exit status is
// nonzero when any criterion fails.

#include "levyhedge/calibration.hpp"
#include "levyhedge/commands.hpp"
#include "levyhedge/hedging.hpp"
#include "levyhedge/models.hpp"
#include "levyhedge/text.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace levyhedge;

namespace {

constexpr double kTau = 0.05;  // T - t
constexpr double kSpot = 2102.4;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::vector<double> reference_chis() {
  std::vector<double> out;
  for (double k = 1900; k <= 2500; k += 50) out.push_back(k / kSpot);
  return out;
}

struct Models {
  MmmModel merton = to_mmm(merton_model(merton_preset()));
  MmmModel vg = to_mmm(vg_model(vg_preset()));
};

const Models& models() {
  static const Models m;
  return m;
}

double rel_err(cplx a, cplx b) {
  const double d = std::abs(a - b);
  return d == 0.0 ? 0.0 : d / std::abs(b);
}

// ---------------------------------------------------------------------------

Outcome ac1() {
  double worst = 0.0;
  const auto mp = merton_preset();
  const auto vp = vg_preset();
  for (const MmmModel* m : {&models().merton, &models().vg}) {
    const double scale = m->cumulant_scale();
    worst = std::max({worst, std::abs(m->cumulant(0.0)) / scale,
                      std::abs(m->cumulant(cplx(0.0, -1.0))) / scale});
  }
  worst = std::max({worst, std::abs(merton_cumulant_mmm(mp, 0.0)) / models().merton.cumulant_scale(),
                    std::abs(merton_cumulant_mmm(mp, cplx(0.0, -1.0))) /
                        models().merton.cumulant_scale(),
                    std::abs(vg_cumulant_mmm(vp, 0.0)) / models().vg.cumulant_scale(),
                    std::abs(vg_cumulant_mmm(vp, cplx(0.0, -1.0))) / models().vg.cumulant_scale()});
  return {worst <= 1e-10, "max |Psi*(0)|, |Psi*(-i)| relative to the exponent scale = " + sci(worst)};
}

Outcome ac2() {
  const auto mp = merton_preset();
  const auto vp = vg_preset();
  const auto& mm = models().merton;
  const auto& vm = models().vg;
  double worst = 0.0;
  int checks = 0;
  auto track = [&](cplx a, cplx b) {
    worst = std::max(worst, rel_err(a, b));
    ++checks;
  };

  std::mt19937_64 rng(20160420);
  std::uniform_real_distribution<double> re(-60.0, 60.0);
  std::uniform_real_distribution<double> im(-2.5, 0.5);
  for (int i = 0; i < 20; ++i) {
    const cplx z(re(rng), im(rng));
    track(mm.cumulant(z), mm.cumulant_quadrature(z));
    track(merton_cumulant_mmm(mp, z), mm.cumulant_quadrature(z));
    track(vm.cumulant(z), vm.cumulant_quadrature(z));
    track(vg_cumulant_mmm(vp, z), vm.cumulant_quadrature(z));
  }

  // Constants: C2 split, Merton C2-, the slope h'(1), the growth moment.
  for (const MmmModel* m : {&mm, &vm}) {
    const auto& nu = m->measure();
    const auto closed = nu.c2_split();
    const auto quad = nu.c2_split_quadrature();
    track(closed.plus, quad.plus);
    track(closed.minus, quad.minus);
    track(m->c2(), quad.total());
    track(nu.exp_moment_slope(), nu.exp_moment_slope_quadrature());
    track(nu.growth_moment(), nu.growth_moment_quadrature());
  }
  track(merton_c2_minus(mp), mm.measure().c2_split_quadrature().minus);

  // Random parameter sets for the constants. Some put only ~1e-12 of C2 on
  // one side, so the quadrature reference is asked for relative accuracy.
  constexpr quad::Tolerance kRelative{0.0, 1e-12, 4000};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const MertonMeasure mj(0.05 + 2.0 * unit(rng), -0.2 + 0.3 * unit(rng), 0.02 + 0.2 * unit(rng));
    const VgMeasure vj(0.5 + 10.0 * unit(rng), 5.0 + 40.0 * unit(rng), 5.0 + 40.0 * unit(rng));
    for (const LevyMeasure* nu : {static_cast<const LevyMeasure*>(&mj),
                                  static_cast<const LevyMeasure*>(&vj)}) {
      const auto closed = nu->c2_split();
      const auto quad = nu->c2_split_quadrature(kRelative);
      track(closed.plus, quad.plus);
      track(closed.minus, quad.minus);
      track(nu->growth_moment(), nu->growth_moment_quadrature(kRelative));
    }
  }
  return {worst <= 1e-8,
          std::to_string(checks) + " comparisons, max relative difference " + sci(worst)};
}

Outcome ac3() {
  const auto chis = reference_chis();
  double worst = 0.0;
  for (const MmmModel* m : {&models().merton, &models().vg}) {
    const auto phi = CharFn::from_model(*m, kTau);
    std::vector<std::vector<double>> runs;
    for (double alpha : {1.25, 1.5, 1.75, 2.0}) {
      FourierConfig cfg;
      cfg.alpha = alpha;
      std::vector<double> v;
      for (Functional f : {Functional::i1, Functional::i2}) {
        for (const auto& r : evaluate_batch(f, m, phi, chis, cfg)) v.push_back(r.value);
      }
      runs.push_back(v);
    }
    for (std::size_t p = 0; p < runs.size(); ++p) {
      for (std::size_t q = p + 1; q < runs.size(); ++q) {
        for (std::size_t j = 0; j < runs[p].size(); ++j) {
          worst = std::max(worst, rel_err(runs[p][j], runs[q][j]));
        }
      }
    }
  }
  return {worst <= 1e-6, "alpha in {1.25, 1.5, 1.75, 2}, 13 strikes, both models: max pairwise "
                         "relative difference " + sci(worst)};
}

Outcome ac4() {
  McConfig mc;
  mc.horizon = kTau;
  const std::vector<double> merton_grid{0.98, 0.99, 1.0, 1.01, 1.02};
  const std::vector<double> vg_grid{0.95, 0.975, 1.0, 1.025, 1.05};
  FourierConfig fc;
  std::size_t rows = 0;
  std::size_t failures = 0;
  double worst_z = 0.0;
  for (const MmmModel* m : {&models().merton, &models().vg}) {
    const auto& grid = m == &models().merton ? merton_grid : vg_grid;
    const auto phi = CharFn::from_model(*m, kTau);
    const auto report = verify(*m, phi, grid, fc, mc);
    rows += report.rows.size();
    failures += report.failures();
    for (const auto& r : report.rows) worst_z = std::max(worst_z, std::abs(r.z()));
  }
  return {failures == 0, std::to_string(rows) + " Fourier/MC comparisons at 1e6 paths, " +
                             std::to_string(failures) + " outside 3 SE, max |z| " + sci(worst_z)};
}

// True when r (ordered towards the limit) never rises by more than the
// error slack from one step to the next.
bool no_increasing_trend(const std::vector<double>& r, const std::vector<double>& err) {
  for (std::size_t j = 1; j < r.size(); ++j) {
    if (r[j] > r[j - 1] + kSlackFactor * (err[j] + err[j - 1])) return false;
  }
  return true;
}

Outcome ac5() {
  FourierConfig cfg;
  const auto chis = reference_chis();
  std::size_t within_slack = 0;
  std::ostringstream bad;
  bool ok = true;
  double worst_share = 0.0;
  for (const MmmModel* m : {&models().merton, &models().vg}) {
    const auto phi = CharFn::from_model(*m, kTau);
    for (const auto& p : sweep(*m, phi, chis, cfg)) {
      if (p.flags & (flags::kT3Violated | flags::kInaccurate)) {
        ok = false;
        bad << " " << m->measure().name() << "@" << sci(p.chi) << ":" << flags::describe(p.flags);
      }
      if (p.flags & flags::kWithinSlack) ++within_slack;
      worst_share = std::max(worst_share, p.diff / p.bound_t3);
    }
    // Orders towards chi -> 0: diff / chi bounded and not increasing.
    std::vector<double> small;
    for (int j = 1; j <= 8; ++j) small.push_back(std::ldexp(1.0, -j));
    std::reverse(small.begin(), small.end());  // sweep needs ascending chi
    auto pts = sweep(*m, phi, small, cfg);
    std::reverse(pts.begin(), pts.end());  // 2^-1 first
    std::vector<double> r, e;
    for (const auto& p : pts) {
      r.push_back(p.diff / p.chi);
      e.push_back(p.err_diff / p.chi);
      const double c3 = p.bound_t3 / p.chi;
      if (!p.ok() || r.back() > c3 + kSlackFactor * (e.back() + p.err_t3 / p.chi)) {
        ok = false;
        bad << " " << m->measure().name() << " ratio@" << sci(p.chi);
      }
    }
    if (!no_increasing_trend(r, e)) {
      ok = false;
      bad << " " << m->measure().name() << " |LRM-Delta|/chi increases as chi -> 0";
    }
  }
  return {ok, "26 grid points within bound_t3 (max diff/bound " + sci(worst_share) + ", " +
                  std::to_string(within_slack) + " only within slack); chi = 2^-1..2^-8 order "
                  "check" + (ok ? " holds" : " fails:" + bad.str())};
}

Outcome ac6() {
  FourierConfig cfg;
  std::vector<double> large;
  for (int j = 1; j <= 8; ++j) large.push_back(std::ldexp(1.0, j));
  bool ok = true;
  std::ostringstream detail;
  for (const MmmModel* m : {&models().merton, &models().vg}) {
    const auto phi = CharFn::from_model(*m, kTau);
    const auto c4 = theorem4_constant(*m, phi, cfg);
    if (!c4) {
      ok = false;
      detail << " " << m->measure().name() << ": condition integral diverges;";
      continue;
    }
    std::vector<double> r, e;
    for (const auto& p : sweep(*m, phi, large, cfg)) {
      if (!p.ok() || !p.bound_t4 || (p.flags & flags::kT4Violated)) {
        ok = false;
        detail << " " << m->measure().name() << "@" << sci(p.chi) << ":"
               << flags::describe(p.flags) << ";";
      }
      r.push_back(p.diff * p.chi);
      e.push_back(p.err_diff * p.chi);
      if (r.back() > c4->value + c4->error + kSlackFactor * e.back()) ok = false;
    }
    if (!no_increasing_trend(r, e)) {
      ok = false;
      detail << " " << m->measure().name() << ": chi |LRM-Delta| increases;";
    }
    detail << " " << m->measure().name() << " chi*bound_t4 = " << sci(c4->value)
           << ", max chi|LRM-Delta| = " << sci(*std::max_element(r.begin(), r.end())) << ";";
  }
  return {ok, "chi = 2^1..2^8:" + detail.str()};
}

Outcome ac7() {
  LevyModel bs;
  bs.sigma = 0.2;
  bs.mu = drift_for_tilt(*bs.measure, bs.sigma, 0.25);
  const auto m = to_mmm(bs);
  const auto phi = CharFn::from_model(m, kTau);
  FourierConfig cfg;
  double worst = 0.0;
  const auto chis = reference_chis();
  for (const auto& p : sweep(m, phi, chis, cfg)) {
    worst = std::max({worst, std::abs(p.lrm - p.delta), p.diff});
  }
  return {worst <= 1e-9, "nu = 0, sigma = 0.2: max |LRM - Delta| = " + sci(worst)};
}

Outcome ac8() {
  FourierConfig cfg;
  const auto chis = reference_chis();
  auto mean_gap = [&](const MmmModel& m) {
    const auto phi = CharFn::from_model(m, kTau);
    const auto pts = sweep(m, phi, chis, cfg);
    double s = 0.0;
    for (const auto& p : pts) s += p.diff;
    return s / static_cast<double>(pts.size());
  };
  const double merton = mean_gap(models().merton);
  const double vg = mean_gap(models().vg);
  return {vg > merton, "mean |LRM - Delta|: VG " + sci(vg) + " vs Merton " + sci(merton)};
}

Outcome ac9() {
  CalibrationConfig cfg;
  std::ostringstream detail;
  bool ok = true;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };

  const auto mt = merton_synthetic_truth();
  auto mi = mt;
  mi.sigma *= 1.2;
  mi.gamma *= 0.8;
  mi.m *= 1.2;
  mi.delta *= 0.8;
  mi.mu = drift_for_tilt(MertonMeasure(mi.gamma, mi.m, mi.delta), mi.sigma, 0.4);
  const auto mr = calibrate(Family::merton, reference_synthetic_quotes(mt, cfg.fourier), mi, cfg);
  const auto& mf = std::get<MertonParams>(mr.params);
  const double e_sigma = rel(mf.sigma, mt.sigma);
  const double e_delta = rel(mf.delta, mt.delta);
  const double e_gamma = rel(mf.gamma, mt.gamma);
  const double e_m = rel(mf.m, mt.m);
  ok = ok && e_sigma <= 0.05 && e_delta <= 0.05 && e_gamma <= 0.15 && e_m <= 0.15 &&
       mr.rmse < 0.1 && mr.constraints.feasible();
  detail << "Merton rel. errors sigma " << sci(e_sigma) << ", delta " << sci(e_delta)
         << ", gamma " << sci(e_gamma) << ", m " << sci(e_m) << ", rmse " << sci(mr.rmse);

  const auto vt = vg_preset();
  auto vi = vt;
  vi.c_par *= 1.2;
  vi.g_par *= 0.8;
  vi.m_par *= 1.2;
  vi.mu = drift_for_tilt(VgMeasure(vi.c_par, vi.g_par, vi.m_par), vi.sigma, 0.4);
  const auto vr = calibrate(Family::vg, reference_synthetic_quotes(vt, cfg.fourier), vi, cfg);
  const auto& vf = std::get<VgParams>(vr.params);
  const double e_c = rel(vf.c_par, vt.c_par);
  const double e_g = rel(vf.g_par, vt.g_par);
  const double e_mm = rel(vf.m_par, vt.m_par);
  ok = ok && e_c <= 0.10 && e_g <= 0.10 && e_mm <= 0.10 && vr.rmse < 0.1 &&
       vr.constraints.feasible();
  detail << "; VG rel. errors C " << sci(e_c) << ", G " << sci(e_g) << ", M " << sci(e_mm)
         << ", rmse " << sci(vr.rmse);
  return {ok, detail.str()};
}

struct Criterion {
  const char* id;
  const char* title;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"AC1", "martingale normalisation", 1.0, ac1},
      {"AC2", "closed forms vs quadrature", 10.0, ac2},
      {"AC3", "Fourier damping independence", 30.0, ac3},
      {"AC4", "Monte Carlo agreement", 300.0, ac4},
      {"AC5", "bound_t3 and small-chi order", 0.0, ac5},
      {"AC6", "bound_t4 and large-chi order", 0.0, ac6},
      {"AC7", "no-jump degeneration", 0.0, ac7},
      {"AC8", "VG gap exceeds Merton gap", 0.0, ac8},
      {"AC9", "synthetic calibration recovery", 600.0, ac9},
  };
  // Shared model setup is not charged to AC1.
  (void)models();

  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = format_number(std::round(secs * 100.0) / 100.0) + " s";
    if (c.limit_seconds > 0.0) {
      timing += ", limit " + format_number(c.limit_seconds) + " s";
      if (secs > c.limit_seconds) {
        o.pass = false;
        o.detail += "; runtime limit exceeded";
      }
    }
    if (!o.pass) ++failed;
    std::printf("%s %s  %s: %s [%s]\n", c.id, o.pass ? "PASS" : "FAIL", c.title,
                o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
