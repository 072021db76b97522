#pragma once

// Adaptive Gauss-Kronrod integration for real and complex integrands, plus
// an extrapolating integrator for slowly decaying (possibly oscillatory)
// tails on [a, inf).

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <vector>

namespace levyhedge::quad {

struct Tolerance {
  double abs = 1e-12;
  double rel = 1e-10;
  std::size_t max_intervals = 4000;
};

template <class T>
struct Result {
  T value{};
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;
};

namespace detail {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;
using Gauss = boost::math::quadrature::gauss<double, 10>;

template <class T>
struct Panel {
  double a;
  double b;
  T value;
  double error;
  double resabs;  // integral of |f|
  bool operator<(const Panel& other) const { return error < other.error; }
};

// One 21-point Kronrod panel with the QUADPACK error heuristic.
template <class T, class F>
Panel<T> kronrod_panel(F& f, double a, double b) {
  using std::abs;
  const auto& xk = Kronrod::abscissa();
  const auto& wk = Kronrod::weights();
  const auto& wg = Gauss::weights();
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  std::array<T, 21> fv{};
  fv[0] = f(centre);
  for (std::size_t i = 1; i < xk.size(); ++i) {
    fv[2 * i - 1] = f(centre + half * xk[i]);
    fv[2 * i] = f(centre - half * xk[i]);
  }

  T kronrod = fv[0] * wk[0];
  T gauss{};
  double resabs = abs(fv[0]) * wk[0];
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const T pair = fv[2 * i - 1] + fv[2 * i];
    kronrod += pair * wk[i];
    resabs += (abs(fv[2 * i - 1]) + abs(fv[2 * i])) * wk[i];
    // Gauss-10 nodes sit at the odd Kronrod abscissae.
    if (i % 2 == 1) gauss += pair * wg[i / 2];
  }
  const T mean = kronrod * 0.5;
  double resasc = wk[0] * abs(fv[0] - mean);
  for (std::size_t i = 1; i < xk.size(); ++i) {
    resasc += wk[i] * (abs(fv[2 * i - 1] - mean) + abs(fv[2 * i] - mean));
  }
  resasc *= std::abs(half);
  resabs *= std::abs(half);

  double err = abs((kronrod - gauss) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * resabs, err);
  }
  return {a, b, kronrod * half, err, resabs};
}

}  // namespace detail

// Globally adaptive bisection over the initial partition `points` (sorted,
// finite, at least two entries).
template <class T, class F>
Result<T> adaptive(F&& f, std::span<const double> points, const Tolerance& tol) {
  using std::abs;
  std::priority_queue<detail::Panel<T>> heap;
  T total{};
  double total_err = 0.0;
  double total_abs = 0.0;
  std::size_t evals = 0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (!(points[i + 1] > points[i])) continue;
    auto p = detail::kronrod_panel<T>(f, points[i], points[i + 1]);
    evals += 21;
    total += p.value;
    total_err += p.error;
    total_abs += p.resabs;
    heap.push(p);
  }
  // Below this the error estimate is rounding noise and bisection cannot help.
  auto floor = [&] { return 64.0 * std::numeric_limits<double>::epsilon() * total_abs; };
  std::size_t intervals = heap.size();
  while (!heap.empty() && total_err > std::max({tol.abs, tol.rel * abs(total), floor()})) {
    if (intervals >= tol.max_intervals) {
      return {total, total_err, evals, false};
    }
    auto worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval no longer divisible in double precision.
      return {total, total_err, evals, false};
    }
    heap.pop();
    auto left = detail::kronrod_panel<T>(f, worst.a, mid);
    auto right = detail::kronrod_panel<T>(f, mid, worst.b);
    evals += 42;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    total_abs += left.resabs + right.resabs - worst.resabs;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }
  // Recompute the sum to shed accumulated cancellation in `total`.
  T sum{};
  double err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return {sum, err, evals, true};
}

template <class T, class F>
Result<T> adaptive(F&& f, double a, double b, const Tolerance& tol) {
  const double pts[2] = {a, b};
  return adaptive<T>(std::forward<F>(f), std::span<const double>(pts, 2), tol);
}

// Integral over [a, b] where either end may be infinite; finite interior
// breakpoints seed the partition. Infinite ends use x = c +/- t/(1-t).
template <class T, class F>
Result<T> integrate(F&& f, double a, double b, std::span<const double> breakpoints,
                    const Tolerance& tol) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> pts;
  for (double p : breakpoints) {
    if (std::isfinite(p) && p > a && p < b) pts.push_back(p);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  Result<T> out;
  auto accumulate = [&](const Result<T>& r) {
    out.value += r.value;
    out.error += r.error;
    out.evaluations += r.evaluations;
    out.converged = out.converged && r.converged;
  };

  double lo = a;
  double hi = b;
  if (a == -inf) {
    const double anchor = pts.empty() ? (b == inf ? 0.0 : b) : pts.front();
    auto g = [&](double t) -> T {
      const double s = 1.0 - t;
      return f(anchor - t / s) / (s * s);
    };
    accumulate(adaptive<T>(g, 0.0, 1.0, tol));
    lo = anchor;
  }
  if (b == inf) {
    const double anchor = pts.empty() ? lo : pts.back();
    auto g = [&](double t) -> T {
      const double s = 1.0 - t;
      return f(anchor + t / s) / (s * s);
    };
    accumulate(adaptive<T>(g, 0.0, 1.0, tol));
    hi = anchor;
  }
  std::vector<double> finite;
  finite.push_back(lo);
  for (double p : pts) {
    if (p > lo && p < hi) finite.push_back(p);
  }
  finite.push_back(hi);
  if (hi > lo) accumulate(adaptive<T>(f, std::span<const double>(finite), tol));
  return out;
}

// Wynn epsilon-algorithm over a sequence of partial sums.
class WynnEpsilon {
 public:
  void push(double partial_sum) { sums_.push_back(partial_sum); }
  std::size_t size() const { return sums_.size(); }

  struct Estimate {
    double value;
    double error;
  };
  // Extrapolated limit with an error estimate taken from the spread of the
  // last three even-column diagonal values. Empty until enough terms exist.
  std::optional<Estimate> estimate(std::size_t window = 24) const;

 private:
  std::vector<double> sums_;
};

struct TailOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-10;
  // Magnitude of the full integral, used for the relative criterion.
  double reference = 0.0;
  std::size_t max_doublings = 64;
  std::size_t max_cycles = 600;
  Tolerance segment{1e-15, 1e-11, 400};
};

// Integral of g over [start, inf) for integrands whose asymptotic behaviour
// is A(v) cos(omega v + c) with slowly varying, algebraically or faster
// decaying amplitude A. omega = 0 means non-oscillatory. Segments double in
// length until they reach half a period, then follow half periods; Wynn's
// epsilon-algorithm extrapolates the partial sums.
Result<double> oscillatory_tail(const std::function<double(double)>& g, double start,
                                double omega, const TailOptions& opt);

}  // namespace levyhedge::quad
