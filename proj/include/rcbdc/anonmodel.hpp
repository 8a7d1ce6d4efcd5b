#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "rcbdc/errors.hpp"

namespace rcbdc::anon {

// ---- regularized incomplete gamma ----
//
// P(a, x) by its power series for x < a + 1, Q(a, x) by Lentz's continued
// fraction otherwise; each computed directly in the regime where it does not
// suffer cancellation.

namespace detail {

inline double log_gamma_prefix(double a, double x) { return a * std::log(x) - x - std::lgamma(a); }

inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a, sum = term;
  for (int n = 1; n < 100000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-17) break;
  }
  return sum * std::exp(log_gamma_prefix(a, x));
}

inline double gamma_q_cf(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-17) break;
  }
  return std::exp(log_gamma_prefix(a, x)) * h;
}

}  // namespace detail

// Regularized lower incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
  enforce(a > 0 && x >= 0, Errc::invalid_argument, "gamma_p needs a > 0, x >= 0");
  if (x == 0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_cf(a, x);
}

// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
inline double gamma_q(double a, double x) {
  enforce(a > 0 && x >= 0, Errc::invalid_argument, "gamma_q needs a > 0, x >= 0");
  if (x == 0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_cf(a, x);
}

// ---- Poisson window counts ----

struct ArrivalModel {
  double lambda;
};

// (lambda T)^k e^{-lambda T} / k!, evaluated in log space.
inline double poisson_pmf(double lambda, double T, std::uint64_t k) {
  enforce(lambda >= 0 && T >= 0, Errc::invalid_argument, "rate and window must be non-negative");
  double mu = lambda * T;
  if (mu == 0) return k == 0 ? 1.0 : 0.0;
  double kd = static_cast<double>(k);
  return std::exp(kd * std::log(mu) - mu - std::lgamma(kd + 1.0));
}

// Pr[K >= k]: probability that a window of length T sees at least k arrivals.
inline double prob_at_least(double lambda, double T, std::uint64_t k) {
  enforce(lambda >= 0 && T >= 0, Errc::invalid_argument, "rate and window must be non-negative");
  if (k == 0) return 1.0;
  double mu = lambda * T;
  if (mu == 0) return 0.0;
  // Pr[K >= k] = P(k, mu)
  return gamma_p(static_cast<double>(k), mu);
}

// floor(max(lambda T - 2 sqrt(lambda T), 0))
inline std::uint64_t achieved_k(double lambda, double T) {
  enforce(lambda >= 0 && T >= 0, Errc::invalid_argument, "rate and window must be non-negative");
  double mu = lambda * T;
  double k = std::max(mu - 2.0 * std::sqrt(mu), 0.0);
  // guard against 100 - 2*10 landing a hair under 80
  return static_cast<std::uint64_t>(std::floor(k + 1e-9));
}

// ---- waiting time to k-anonymity: Gamma(shape k-1, rate lambda) ----

struct WaitingTimeModel {
  double lambda;
  std::uint64_t k;
  std::uint64_t k_prime() const { return k - 1; }
};

inline double waiting_pdf(double lambda, std::uint64_t k, double z) {
  enforce(lambda > 0 && k >= 2, Errc::invalid_argument, "waiting density needs lambda > 0, k >= 2");
  if (z < 0) return 0.0;
  double a = static_cast<double>(k - 1);
  if (z == 0) return a == 1.0 ? lambda : 0.0;
  return lambda * std::exp(-lambda * z + (a - 1.0) * std::log(lambda * z) - std::lgamma(a));
}

// k = 1 needs no further arrivals, so the wait is identically zero.
inline double waiting_cdf(double lambda, std::uint64_t k, double z) {
  enforce(lambda > 0 && k >= 1, Errc::invalid_argument, "waiting CDF needs lambda > 0, k >= 1");
  if (z < 0) return 0.0;
  if (k == 1) return 1.0;
  return gamma_p(static_cast<double>(k - 1), lambda * z);
}

// Inverse of waiting_cdf by bracketed Newton/bisection to relative 1e-9.
inline double waiting_quantile(double lambda, std::uint64_t k, double prob) {
  enforce(prob > 0 && prob < 1, Errc::invalid_probability, "quantile probability must lie in (0, 1)");
  enforce(lambda > 0 && k >= 1, Errc::invalid_argument, "waiting quantile needs lambda > 0, k >= 1");
  if (k == 1) return 0.0;
  double lo = 0.0, hi = std::max(1.0, static_cast<double>(k - 1)) / lambda;
  while (waiting_cdf(lambda, k, hi) < prob) hi *= 2.0;
  double z = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    double f = waiting_cdf(lambda, k, z) - prob;
    if (f < 0) lo = z; else hi = z;
    double d = waiting_pdf(lambda, k, z);
    double next = d > 0 ? z - f / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - z) <= 1e-12 * std::max(1.0, z) || hi - lo <= 1e-12 * hi) return next;
    z = next;
  }
  return z;
}

// ---- simulation ----
//
// Inter-arrival times use the inverse transform x = -ln(1 - U) / lambda.

using SimRng = std::mt19937_64;

inline double exponential_sample(SimRng& rng, double lambda) {
  double u = std::generate_canonical<double, 53>(rng);
  return -std::log1p(-u) / lambda;
}

// Sum of `shape` independent exponential inter-arrival times.
inline double gamma_sample(SimRng& rng, double lambda, std::uint64_t shape) {
  double s = 0;
  for (std::uint64_t i = 0; i < shape; ++i) s += exponential_sample(rng, lambda);
  return s;
}

// Number of arrivals in [0, T).
inline std::uint64_t window_count_sample(SimRng& rng, double lambda, double T) {
  std::uint64_t n = 0;
  for (double t = exponential_sample(rng, lambda); t < T; t += exponential_sample(rng, lambda)) ++n;
  return n;
}

inline std::vector<std::uint64_t> simulate_window_counts(double lambda, double T, std::size_t windows,
                                                         std::uint64_t seed) {
  enforce(lambda > 0 && T > 0, Errc::invalid_argument, "rate and window must be positive");
  SimRng rng(seed);
  std::vector<std::uint64_t> out(windows);
  for (auto& c : out) c = window_count_sample(rng, lambda, T);
  return out;
}

struct WaitingSummary {
  std::uint64_t k;
  double mean_wait;
  double p50;
  double p999;
};

struct WaitingSimulation {
  std::vector<WaitingSummary> per_k;  // k = 1..k_max
  std::map<std::uint64_t, std::vector<double>> samples;  // for requested k only
};

inline double empirical_quantile(std::vector<double> v, double prob) {
  enforce(!v.empty(), Errc::invalid_argument, "empty sample");
  std::size_t idx = static_cast<std::size_t>(std::ceil(prob * static_cast<double>(v.size())));
  idx = std::clamp<std::size_t>(idx, 1, v.size()) - 1;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(idx), v.end());
  return v[idx];
}

// Each trial draws k_max - 1 inter-arrival times; the wait for k-anonymity is
// the sum of the first k - 1 of them.
inline WaitingSimulation simulate_waiting(double lambda, std::uint64_t k_max, std::size_t trials, std::uint64_t seed,
                                          const std::vector<std::uint64_t>& keep_samples_for = {}) {
  enforce(trials >= 1, Errc::invalid_argument, "need at least one trial");
  enforce(lambda > 0 && k_max >= 1, Errc::invalid_argument, "need lambda > 0 and k_max >= 1");
  SimRng rng(seed);
  std::vector<std::vector<double>> waits(k_max, std::vector<double>(trials));
  for (std::size_t t = 0; t < trials; ++t) {
    double acc = 0;
    waits[0][t] = 0;
    for (std::uint64_t k = 2; k <= k_max; ++k) {
      acc += exponential_sample(rng, lambda);
      waits[k - 1][t] = acc;
    }
  }
  WaitingSimulation sim;
  for (std::uint64_t k = 1; k <= k_max; ++k) {
    auto& col = waits[k - 1];
    double mean = 0;
    for (double w : col) mean += w;
    mean /= static_cast<double>(trials);
    sim.per_k.push_back({k, mean, empirical_quantile(col, 0.5), empirical_quantile(col, 0.999)});
    if (std::find(keep_samples_for.begin(), keep_samples_for.end(), k) != keep_samples_for.end())
      sim.samples[k] = std::move(col);
  }
  return sim;
}

// sup |F_n(x) - F(x)| for a sample against a continuous CDF.
template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
  enforce(!sample.empty(), Errc::invalid_argument, "empty sample");
  std::sort(sample.begin(), sample.end());
  double n = static_cast<double>(sample.size()), d = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double f = cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

struct LinearFit {
  double slope, intercept, r_squared;
};

inline LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  enforce(x.size() == y.size() && x.size() >= 2, Errc::invalid_argument, "need two or more points");
  double n = static_cast<double>(x.size()), sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i];
  double mx = sx / n, my = sy / n, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  double slope = sxy / sxx;
  double r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return {slope, my - slope * mx, r2};
}

}  // namespace rcbdc::anon
