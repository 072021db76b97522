#include "levyhedge/oracle_mc.hpp"

#include "levyhedge/errors.hpp"
#include "levyhedge/models.hpp"
#include "levyhedge/parallel.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/random/binomial_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/version.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace levyhedge {

namespace {

using Engine = boost::random::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::string generator_name() {
  return "boost::random::mt19937_64, per-block seed splitmix64(seed ^ splitmix64(block)), "
         "block " + std::to_string(kMcBlock) + ", Boost " + std::to_string(BOOST_VERSION / 100000) +
         "." + std::to_string(BOOST_VERSION / 100 % 1000);
}

// Fills one block of log-returns.
using BlockSampler = std::function<void(Engine&, double*, std::size_t)>;

BlockSampler brownian_sampler(double drift, double vol) {
  return [=](Engine& eng, double* out, std::size_t n) {
    boost::random::normal_distribution<double> z;
    for (std::size_t i = 0; i < n; ++i) out[i] = drift + vol * z(eng);
  };
}

// (1 + lambda) N(m, d^2) gamma + (-lambda) e^x N(m, d^2) gamma: Poisson
// count, binomial split between the two Gaussian components.
BlockSampler merton_sampler(const MmmModel& model, const MertonMeasure& nu, double tau) {
  const double lambda = model.tilt_ratio();
  const double d2 = nu.delta() * nu.delta();
  const double e1 = std::exp(nu.m() + 0.5 * d2);
  const double w1 = (1.0 + lambda) * nu.gamma();
  const double w2 = -lambda * nu.gamma() * e1;
  const double intensity = w1 + w2;
  const double mean_jump = intensity > 0.0 ? (w1 * nu.m() + w2 * (nu.m() + d2)) / intensity : 0.0;
  const double drift = (model.drift_star() - intensity * mean_jump) * tau;
  const double vol = model.sigma() * std::sqrt(tau);
  const double p1 = intensity > 0.0 ? w1 / intensity : 1.0;
  const double m = nu.m();
  const double delta = nu.delta();
  return [=](Engine& eng, double* out, std::size_t n) {
    boost::random::normal_distribution<double> z;
    boost::random::poisson_distribution<int, double> count(intensity * tau);
    for (std::size_t i = 0; i < n; ++i) {
      double x = drift + vol * z(eng);
      const int k = count(eng);
      if (k > 0) {
        boost::random::binomial_distribution<int, double> split(k, p1);
        const int k1 = split(eng);
        x += k1 * m + (k - k1) * (m + d2) + delta * std::sqrt(static_cast<double>(k)) * z(eng);
      }
      out[i] = x;
    }
  };
}

// The tilted VG measure is (1 + lambda) VG(C, G, M) + (-lambda) VG(C, G+1, M-1);
// each VG part is the difference of two independent gamma variables.
BlockSampler vg_sampler(const MmmModel& model, const VgMeasure& nu, double tau) {
  const double lambda = model.tilt_ratio();
  const double c = nu.c(), g = nu.g(), m = nu.m();
  const double a1 = (1.0 + lambda) * c * tau;
  const double a2 = -lambda * c * tau;
  // int x nu*(dx)
  const double mean_jump =
      (1.0 + lambda) * c * (1.0 / m - 1.0 / g) - lambda * c * (1.0 / (m - 1.0) - 1.0 / (g + 1.0));
  const double drift = (model.drift_star() - mean_jump) * tau;
  const double vol = model.sigma() * std::sqrt(tau);
  return [=](Engine& eng, double* out, std::size_t n) {
    boost::random::normal_distribution<double> z;
    boost::random::gamma_distribution<double> up1(a1, 1.0 / m), down1(a1, 1.0 / g);
    std::optional<boost::random::gamma_distribution<double>> up2, down2;
    if (a2 > 0.0) {
      up2.emplace(a2, 1.0 / (m - 1.0));
      down2.emplace(a2, 1.0 / (g + 1.0));
    }
    for (std::size_t i = 0; i < n; ++i) {
      double x = drift + up1(eng) - down1(eng);
      if (up2) x += (*up2)(eng) - (*down2)(eng);
      if (vol > 0.0) x += vol * z(eng);
      out[i] = x;
    }
  };
}

void require_chi(double chi) {
  if (!(chi >= 0.0) || !std::isfinite(chi)) throw DomainError("chi must be finite and >= 0");
}

// Mean and standard error of per-path values produced by f.
template <class F>
McEstimate average(const std::vector<double>& xs, F f) {
  long double sum = 0.0L, sq = 0.0L;
  for (double x : xs) {
    const long double y = f(x);
    sum += y;
    sq += y * y;
  }
  const auto n = static_cast<long double>(xs.size());
  const long double mean = sum / n;
  const long double var = n > 1 ? std::max(0.0L, (sq - n * mean * mean) / (n - 1)) : 0.0L;
  return {static_cast<double>(mean), static_cast<double>(std::sqrt(var / n)), 0.0};
}

struct XNodes {
  std::vector<double> x;
  std::vector<double> c;  // w (e^x - 1) nu(x)
};

// Composite 5-point Gauss-Legendre with panels no wider than h, breaking at
// 0 and +-1.
XNodes x_nodes(const LevyMeasure& nu, double lo, double hi, double h) {
  using GL = boost::math::quadrature::gauss<double, 5>;
  std::vector<double> breaks{lo, hi};
  for (double b : {-1.0, 0.0, 1.0}) {
    if (b > lo && b < hi) breaks.push_back(b);
  }
  std::sort(breaks.begin(), breaks.end());
  const auto& abs = GL::abscissa();
  const auto& wts = GL::weights();
  XNodes out;
  auto add = [&](double x, double w) {
    const double d = nu.density(x);
    if (d == 0.0) return;
    out.x.push_back(x);
    out.c.push_back(w * std::expm1(x) * d);
  };
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double a = breaks[s], b = breaks[s + 1];
    const auto panels = static_cast<std::size_t>(std::ceil((b - a) / h));
    const double width = (b - a) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double mid = a + (static_cast<double>(p) + 0.5) * width;
      const double half = 0.5 * width;
      for (std::size_t i = 0; i < abs.size(); ++i) {
        add(mid + half * abs[i], half * wts[i]);
        if (abs[i] != 0.0) add(mid - half * abs[i], half * wts[i]);
      }
    }
  }
  return out;
}

// Y(s) = sum_j c_j [(s e^{x_j} - chi)^+ - (s - chi)^+] for every sampled
// s = e^L, by a merge walk over thresholds chi e^{-x_j}.
McEstimate i2_from_nodes(const XNodes& nodes, const std::vector<double>& sorted_l, double chi) {
  std::vector<std::size_t> order(nodes.x.size());
  std::iota(order.begin(), order.end(), 0);
  // Threshold chi e^{-x} decreases in x: activate nodes from large x down.
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return nodes.x[a] > nodes.x[b]; });
  long double total_c = 0.0L;
  for (double c : nodes.c) total_c += c;
  long double p = 0.0L, q = 0.0L;  // sums of c e^x and c over active nodes
  std::size_t next = 0;
  long double sum = 0.0L, sq = 0.0L;
  for (double l : sorted_l) {
    const double s = std::exp(l);
    while (next < order.size() && s * std::exp(nodes.x[order[next]]) > chi) {
      const std::size_t j = order[next++];
      p += nodes.c[j] * std::exp(nodes.x[j]);
      q += nodes.c[j];
    }
    const long double y = s * p - chi * q - (s > chi ? (s - chi) * total_c : 0.0L);
    sum += y;
    sq += y * y;
  }
  const auto n = static_cast<long double>(sorted_l.size());
  const long double mean = sum / n;
  const long double var = std::max(0.0L, (sq - n * mean * mean) / (n - 1));
  return {static_cast<double>(mean), static_cast<double>(std::sqrt(var / n)), 0.0};
}

}  // namespace

void McConfig::validate() const {
  if (n_paths < 2) throw ConfigError("n_paths must be >= 2");
  if (!(horizon > 0.0)) throw ConfigError("Monte Carlo horizon must be > 0");
}

McSample simulate_log_returns(const MmmModel& model, const McConfig& cfg) {
  cfg.validate();
  const double tau = cfg.horizon;
  const LevyMeasure& nu = model.measure();
  McSample out;
  out.generator = generator_name();
  BlockSampler sampler;
  if (nu.is_null()) {
    sampler = brownian_sampler(model.drift_star() * tau, model.sigma() * std::sqrt(tau));
    out.method = "exact: Gaussian";
  } else if (const auto* mert = dynamic_cast<const MertonMeasure*>(&nu)) {
    sampler = merton_sampler(model, *mert, tau);
    out.method =
        "exact: Gaussian plus Poisson count of jumps drawn from the two-component Gaussian "
        "mixture (1 + lambda) nu + (-lambda) e^x nu";
  } else if (const auto* vg = dynamic_cast<const VgMeasure*>(&nu)) {
    sampler = vg_sampler(model, *vg, tau);
    out.method =
        "exact: differences of gamma variables for the VG mixture (1 + lambda) VG(C, G, M) + "
        "(-lambda) VG(C, G + 1, M - 1)";
  } else {
    throw SamplingError("no exact sampler for the " + nu.name() + " Levy measure");
  }

  out.log_returns.resize(cfg.n_paths);
  const std::size_t blocks = (cfg.n_paths + kMcBlock - 1) / kMcBlock;
  parallel_for(
      blocks,
      [&](std::size_t b) {
        Engine eng(splitmix64(cfg.seed ^ splitmix64(b)));
        const std::size_t begin = b * kMcBlock;
        const std::size_t n = std::min(kMcBlock, cfg.n_paths - begin);
        sampler(eng, out.log_returns.data() + begin, n);
      },
      cfg.threads);
  std::sort(out.log_returns.begin(), out.log_returns.end());
  return out;
}

McEstimate mc_martingale(const McSample& s) {
  return average(s.log_returns, [](double l) { return std::exp(l); });
}

McEstimate mc_i1(const McSample& s, double chi) {
  require_chi(chi);
  return average(s.log_returns, [chi](double l) {
    const double e = std::exp(l);
    return e > chi ? e : 0.0;
  });
}

McEstimate mc_tail_upper(const McSample& s, double chi) {
  require_chi(chi);
  return average(s.log_returns, [chi](double l) { return std::exp(l) >= chi ? 1.0 : 0.0; });
}

McEstimate mc_call_price(const McSample& s, double chi) {
  require_chi(chi);
  return average(s.log_returns, [chi](double l) { return std::max(std::exp(l) - chi, 0.0); });
}

McEstimate mc_i2(const MmmModel& model, const McSample& s, double chi) {
  require_chi(chi);
  const LevyMeasure& nu = model.measure();
  if (nu.is_null()) return {};
  double lo, hi;
  if (const auto* mert = dynamic_cast<const MertonMeasure*>(&nu)) {
    lo = mert->m() - 12.0 * mert->delta();
    hi = mert->m() + mert->delta() * mert->delta() + 12.0 * mert->delta();
  } else if (const auto* vg = dynamic_cast<const VgMeasure*>(&nu)) {
    lo = -50.0 / vg->g();
    hi = 50.0 / (vg->m() - 2.0);
  } else {
    throw SamplingError("no x-node layout for the " + nu.name() + " Levy measure");
  }
  constexpr double h = 0.0025;
  auto fine = i2_from_nodes(x_nodes(nu, lo, hi, h), s.log_returns, chi);
  const auto coarse = i2_from_nodes(x_nodes(nu, lo, hi, 2.0 * h), s.log_returns, chi);
  fine.quad_error = std::abs(fine.value - coarse.value);
  return fine;
}

McEstimate mc_i1(const MmmModel& model, double chi, const McConfig& cfg) {
  return mc_i1(simulate_log_returns(model, cfg), chi);
}

McEstimate mc_i2(const MmmModel& model, double chi, const McConfig& cfg) {
  return mc_i2(model, simulate_log_returns(model, cfg), chi);
}

}  // namespace levyhedge
