#include "levyhedge/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace levyhedge::quad {

namespace {

// Deepest even-column epsilon estimate for the given partial sums.
double epsilon_limit(std::span<const double> s) {
  const std::size_t n = s.size();
  std::vector<double> prev(n, 0.0);  // column k-1
  std::vector<double> cur(s.begin(), s.end());  // column k
  double best = s.back();
  for (std::size_t k = 0; cur.size() > 1; ++k) {
    std::vector<double> next(cur.size() - 1);
    for (std::size_t i = 0; i + 1 < cur.size(); ++i) {
      const double diff = cur[i + 1] - cur[i];
      const double scale = std::max(std::abs(cur[i + 1]), std::abs(cur[i]));
      if (diff == 0.0 || std::abs(diff) <= 1e-15 * scale) {
        // Column converged exactly; the current entries are the limit.
        return (k % 2 == 0) ? cur[i + 1] : best;
      }
      next[i] = prev[i + 1] + 1.0 / diff;
    }
    prev = std::move(cur);
    cur = std::move(next);
    if ((k + 1) % 2 == 0 && !cur.empty()) best = cur.back();
  }
  return best;
}

}  // namespace

std::optional<WynnEpsilon::Estimate> WynnEpsilon::estimate(std::size_t window) const {
  if (sums_.size() < 5) return std::nullopt;
  const std::size_t n = sums_.size();
  const std::size_t len = std::min(window, n);
  std::span<const double> all(sums_);
  const double e0 = epsilon_limit(all.subspan(n - len, len));
  const double e1 = epsilon_limit(all.subspan(n - len, len - 1));
  const double e2 = epsilon_limit(all.subspan(n - len, len - 2));
  if (!std::isfinite(e0)) return std::nullopt;
  return Estimate{e0, std::abs(e0 - e1) + std::abs(e0 - e2)};
}

Result<double> oscillatory_tail(const std::function<double(double)>& g, double start,
                                double omega, const TailOptions& opt) {
  Result<double> out;
  const double half_period =
      omega > 0.0 ? std::numbers::pi / omega : std::numeric_limits<double>::infinity();

  auto target = [&](double value) {
    return std::max(opt.abs_tol, opt.rel_tol * std::max(std::abs(opt.reference), std::abs(value)));
  };
  auto segment = [&](double a, double b) {
    auto r = adaptive<double>(g, a, b, opt.segment);
    out.evaluations += r.evaluations;
    out.error += r.error;
    return r.value;
  };

  double a = start;
  double sum = 0.0;
  int quiet = 0;
  WynnEpsilon doubling;
  doubling.push(0.0);
  for (std::size_t i = 0; i < opt.max_doublings && a < half_period; ++i) {
    const double s = segment(a, 2.0 * a);
    sum += s;
    a *= 2.0;
    doubling.push(sum);
    quiet = std::abs(s) <= 0.1 * target(sum) ? quiet + 1 : 0;
    if (quiet >= 2) {
      out.value = sum;
      out.error += std::abs(s);
      return out;
    }
    if (omega == 0.0) {
      if (auto e = doubling.estimate(); e && e->error <= target(e->value) &&
                                        std::abs(e->value - sum) <= 1e3 * std::abs(s)) {
        out.value = e->value;
        out.error += e->error;
        return out;
      }
    }
  }
  if (omega == 0.0 || !std::isfinite(half_period)) {
    auto e = doubling.estimate();
    out.value = e ? e->value : sum;
    out.error += e ? e->error : std::abs(sum);
    out.converged = false;
    return out;
  }

  WynnEpsilon cycles;
  cycles.push(sum);
  double last_estimate = sum;
  double last_error = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < opt.max_cycles; ++i) {
    const double s = segment(a, a + half_period);
    a += half_period;
    sum += s;
    cycles.push(sum);
    quiet = std::abs(s) <= 0.1 * target(sum) ? quiet + 1 : 0;
    if (quiet >= 3) {
      out.value = sum;
      out.error += std::abs(s);
      return out;
    }
    if (auto e = cycles.estimate()) {
      last_estimate = e->value;
      last_error = e->error;
      if (e->error <= target(e->value)) {
        out.value = e->value;
        out.error += e->error;
        return out;
      }
    }
  }
  out.value = last_estimate;
  out.error += std::isfinite(last_error) ? last_error : std::abs(sum);
  out.converged = false;
  return out;
}

}  // namespace levyhedge::quad
