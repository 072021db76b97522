#include "doctest.h"

#include "levyhedge/calibration.hpp"
#include "levyhedge/errors.hpp"
#include "levyhedge/oracle_mc.hpp"

#include <cmath>
#include <sstream>

using namespace levyhedge;

namespace {

QuoteSet parse(const std::string& text) {
  std::istringstream in(text);
  return parse_quotes(in);
}

QuoteSet small_quotes(const ModelParams& p) {
  const std::vector<int> days{45, 120};
  const std::vector<std::vector<double>> strikes{{1950, 2100, 2250}, {1900, 2100, 2300}};
  using namespace std::chrono;
  return synthetic_quotes(p, 2102.4, year_month_day{year{2016}, month{4}, day{20}}, days,
                          strikes, FourierConfig{});
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("quote files") {
  const auto q = parse(
      "# spot=2102.4\n# valuation_date=2016-04-20\n# day_count=ACT/365\n"
      "expiry,strike,mid\n0.0821917808,2000,119.25\n 0.5 , 2100 , 80\n\n");
  CHECK(q.spot == 2102.4);
  CHECK(format_date(q.valuation_date) == "2016-04-20");
  REQUIRE(q.quotes.size() == 2);
  CHECK(q.quotes[0].expiry == 0.0821917808);
  CHECK(q.quotes[1].mid == 80.0);

  std::ostringstream out;
  write_quotes(out, q);
  const auto back = parse(out.str());
  REQUIRE(back.quotes.size() == 2);
  CHECK(back.quotes[0].expiry == q.quotes[0].expiry);
  CHECK(back.quotes[1].strike == q.quotes[1].strike);

  const std::string head = "# spot=100\n# valuation_date=2016-04-20\n";
  CHECK_THROWS_AS(parse(""), ConfigError);
  CHECK_THROWS_AS(parse(head), ConfigError);
  CHECK_THROWS_AS(parse(head + "expiry,strike,mid\n"), ConfigError);
  CHECK_THROWS_AS(parse(head + "strike,expiry,mid\n1,2,3\n"), ConfigError);
  CHECK_THROWS_AS(parse(head + "expiry,strike,mid\n0.5,abc,3\n"), ConfigError);
  CHECK_THROWS_AS(parse(head + "expiry,strike,mid\n0.5,100\n"), ConfigError);
  CHECK_THROWS_AS(parse(head + "expiry,strike,mid\n0.5,100,-1\n"), ConfigError);
  CHECK_THROWS_AS(parse(head + "expiry,strike,mid\n0,100,1\n"), ConfigError);
  CHECK_THROWS_AS(parse("# spot=100\nexpiry,strike,mid\n0.5,100,1\n"), ConfigError);
  CHECK_THROWS_AS(parse(head + "# day_count=30/360\nexpiry,strike,mid\n0.5,100,1\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_date("2016-02-30"), ConfigError);
  CHECK_THROWS_AS(parse_date("20160420"), ConfigError);
  CHECK_THROWS_AS(read_quotes("/nonexistent/quotes.csv"), ConfigError);
}

TEST_CASE("model call prices") {
  const auto p = merton_preset();
  const auto mmm = to_mmm(merton_model(p));
  const double spot = 2102.4;
  const double t = 0.05;
  const auto phi = CharFn::from_model(mmm, t);
  FourierConfig cfg;

  CHECK(model_call_price(mmm, phi, spot, 1e-6 * spot, t, cfg) ==
        doctest::Approx(spot).epsilon(1e-6));
  CHECK(model_call_price(mmm, phi, spot, 5.0 * spot, t, cfg) == doctest::Approx(0.0).epsilon(1e-9));
  double prev = spot;
  for (double k = 1800; k <= 2500; k += 50) {
    const double c = model_call_price(mmm, phi, spot, k, t, cfg);
    CHECK(c >= std::max(spot - k, 0.0) - 1e-9);
    CHECK(c <= spot);
    CHECK(c < prev);
    prev = c;
  }
  CHECK_THROWS_AS(model_call_price(mmm, phi, spot, 2100, 0.1, cfg), DomainError);
  CHECK_THROWS_AS(model_call_price(mmm, phi, spot, -1.0, t, cfg), DomainError);

  McConfig mc;
  mc.horizon = t;
  const auto sample = simulate_log_returns(mmm, mc);
  const auto est = mc_call_price(sample, 2100 / spot);
  const double fourier = model_call_price(mmm, phi, spot, 2100, t, cfg);
  CHECK(std::abs(fourier - spot * est.value) <= 3.0 * spot * est.std_error);
}

TEST_CASE("rmse objective") {
  const ModelParams truth = merton_synthetic_truth();
  const auto q = small_quotes(truth);
  FourierConfig cfg;
  CHECK(rmse(truth, q, cfg) <= 1e-6);

  QuoteSet one = q;
  one.quotes.resize(1);
  one.quotes[0].mid += 2.0;
  CHECK(rmse(truth, one, cfg) == doctest::Approx(2.0).epsilon(1e-9));

  auto perturbed = merton_synthetic_truth();
  perturbed.sigma *= 1.1;
  perturbed.gamma *= 0.9;
  const auto prices = model_prices(perturbed, q, cfg);
  double sum = 0.0;
  for (std::size_t i = 0; i < prices.size(); ++i) {
    sum += (prices[i] - q.quotes[i].mid) * (prices[i] - q.quotes[i].mid);
  }
  const double direct = std::sqrt(sum / static_cast<double>(prices.size()));
  const double r1 = rmse(perturbed, q, cfg);
  CHECK(r1 == doctest::Approx(direct).epsilon(1e-14));
  CHECK(r1 > 0.1);
  CHECK(rmse(perturbed, q, cfg) == r1);

  auto bad = merton_preset();
  bad.mu = kMertonReportedMu;
  const auto report = check_constraints(bad);
  CHECK_FALSE(report.admissible);
  CHECK(report.violation > 0.0);
  CHECK(rmse(bad, q, cfg) > q.spot);

  auto vg_bad = vg_preset();
  vg_bad.m_par = 3.5;
  const auto vg_report = check_constraints(vg_bad);
  CHECK_FALSE(vg_report.vg_m_ok);
  CHECK(vg_report.violation == doctest::Approx(0.5));
  CHECK(rmse(vg_bad, q, cfg) > q.spot);
}

TEST_CASE("projection and infeasible starts") {
  auto bad = merton_synthetic_truth();
  bad.mu = 1.0;  // mu^S > 0
  REQUIRE_FALSE(check_constraints(bad).feasible());
  const auto projected = project_feasible(bad);
  const auto report = check_constraints(projected);
  CHECK(report.feasible());
  CHECK(report.tilt == doctest::Approx(1e-3).epsilon(1e-9));

  auto vg_bad = vg_preset();
  vg_bad.m_par = 3.0;
  CHECK(check_constraints(project_feasible(vg_bad)).feasible());

  const auto q = small_quotes(merton_synthetic_truth());
  CalibrationConfig cfg;
  cfg.restarts = 0;
  cfg.max_iterations = 30;
  const auto r = calibrate(Family::merton, q, bad, cfg);
  CHECK(r.constraints.feasible());
  CHECK(r.rmse <= r.initial_rmse);
  CHECK(r.initial_rmse == rmse(projected, q, cfg.fourier));
  CHECK(r.iterations == 30);
  CHECK_FALSE(r.converged);

  std::ostringstream out;
  write_result(out, Family::merton, r);
  const auto text = out.str();
  for (const char* key : {"family=merton", "sigma=", "gamma=", "rmse=", "iterations=30",
                          "converged=false", "admissible=true", "constraint_report="}) {
    CHECK(text.find(key) != std::string::npos);
  }

  CHECK_THROWS_AS(calibrate(Family::vg, q, bad, cfg), ConfigError);
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(calibrate(Family::merton, q, bad, cfg), ConfigError);
}

TEST_CASE("synthetic Merton recovery") {
  const auto truth = merton_synthetic_truth();
  CalibrationConfig cfg;
  const auto q = reference_synthetic_quotes(truth, cfg.fourier);
  REQUIRE(q.quotes.size() == 81);

  auto init = truth;
  init.sigma *= 1.2;
  init.gamma *= 0.8;
  init.m *= 1.2;
  init.delta *= 0.8;
  init.mu = drift_for_tilt(MertonMeasure(init.gamma, init.m, init.delta), init.sigma, 0.4);
  const auto r = calibrate(Family::merton, q, init, cfg);
  const auto& fit = std::get<MertonParams>(r.params);
  CHECK(rel(fit.sigma, truth.sigma) <= 0.05);
  CHECK(rel(fit.delta, truth.delta) <= 0.05);
  CHECK(rel(fit.gamma, truth.gamma) <= 0.15);
  CHECK(rel(fit.m, truth.m) <= 0.15);
  CHECK(r.rmse < 0.1);
  CHECK(r.rmse <= r.initial_rmse);
  CHECK(r.constraints.feasible());
  CHECK(r.rmse == rmse(r.params, q, cfg.fourier));
}

TEST_CASE("synthetic VG recovery") {
  const auto truth = vg_preset();
  CalibrationConfig cfg;
  const auto q = reference_synthetic_quotes(truth, cfg.fourier);

  auto init = truth;
  init.c_par *= 1.2;
  init.g_par *= 0.8;
  init.m_par *= 1.2;
  init.mu = drift_for_tilt(VgMeasure(init.c_par, init.g_par, init.m_par), init.sigma, 0.4);
  const auto r = calibrate(Family::vg, q, init, cfg);
  const auto& fit = std::get<VgParams>(r.params);
  CHECK(rel(fit.c_par, truth.c_par) <= 0.10);
  CHECK(rel(fit.g_par, truth.g_par) <= 0.10);
  CHECK(rel(fit.m_par, truth.m_par) <= 0.10);
  CHECK(r.rmse < 0.1);
  CHECK(r.constraints.feasible());
  CHECK(r.constraints.vg_m_ok);
}
