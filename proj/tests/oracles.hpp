#pragma once

// Reference computations written independently of the library code: brute
// force enumeration, textbook closed forms and direct products. Tests compare
// the library against these rather than against its own helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

// SRS expansion SE for a total with k positives out of n and population N.
inline double srs_total_se(double N, double n, double k) {
  const double p = k / n;
  const double s2 = n * p * (1 - p) / (n - 1);
  return N * std::sqrt((1 - n / N) * s2 / n);
}

// P(no positive) for n0 draws without replacement, as a running product.
inline double hypergeometric_zero(std::int64_t N0, std::int64_t M, std::int64_t n0) {
  double p = 1.0;
  for (std::int64_t i = 0; i < n0; ++i) {
    p *= static_cast<double>(N0 - M - i) / static_cast<double>(N0 - i);
    if (p <= 0.0) return 0.0;
  }
  return p;
}

// Design variance of the single-draw HH estimator: sum_i p_i (y_i/p_i - t)^2,
// divided by n for n independent draws.
inline double hh_variance_by_enumeration(const std::vector<double>& p_hat, const std::vector<int>& y, int n) {
  const double total_aux = std::accumulate(p_hat.begin(), p_hat.end(), 0.0);
  const double t = std::accumulate(y.begin(), y.end(), 0.0);
  double v = 0.0;
  for (std::size_t i = 0; i < p_hat.size(); ++i) {
    const double pi = p_hat[i] / total_aux;
    const double z = y[i] / pi;
    v += pi * (z - t) * (z - t);
  }
  return v / n;
}

// Stratified SRS variance of a total for fixed n_h.
inline double stratified_variance(const std::vector<double>& N, const std::vector<double>& S2,
                                  const std::vector<std::size_t>& n) {
  double v = 0.0;
  for (std::size_t h = 0; h < N.size(); ++h) {
    if (n[h] == 0) return std::numeric_limits<double>::infinity();
    v += N[h] * N[h] * (1 - n[h] / N[h]) * S2[h] / static_cast<double>(n[h]);
  }
  return v;
}

// Best two-stratum split of n by trying every n1.
inline std::size_t best_two_stratum_split(double N1, double S2_1, double N0, double S2_0, std::size_t n) {
  std::size_t best = 1;
  double best_v = std::numeric_limits<double>::infinity();
  for (std::size_t n1 = 1; n1 < n; ++n1) {
    if (n1 > N1 || n - n1 > N0) continue;
    const double v = stratified_variance({N1, N0}, {S2_1, S2_0}, {n1, n - n1});
    if (v < best_v) {
      best_v = v;
      best = n1;
    }
  }
  return best;
}

// (n-1)-divisor variance of a 0/1 population with k ones out of N.
inline double binary_s2(double N, double k) { return k * (N - k) / (N * (N - 1)); }

inline double f1(double tp, double fn, double c) { return 2 * tp / (tp + fn + c); }

// Central finite difference.
inline double derivative(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

// Parametric bootstrap SD of the two-stratum F1: stratum sample counts are
// redrawn as binomials at the observed proportions.
inline double bootstrap_f1_sd(double N1, int n1, int k1, double N0, int n0, int k0, double flagged_tp,
                              double flagged_fn, double c, int B, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::binomial_distribution<int> b1(n1, static_cast<double>(k1) / n1);
  std::binomial_distribution<int> b0(n0, static_cast<double>(k0) / n0);
  double sum = 0.0, sum2 = 0.0;
  for (int b = 0; b < B; ++b) {
    const double tp = flagged_tp + N1 * b1(rng) / n1;
    const double fn = flagged_fn + N0 * b0(rng) / n0;
    const double v = f1(tp, fn, c);
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / B;
  return std::sqrt((sum2 - B * mean * mean) / (B - 1));
}

// Regularized incomplete beta by Simpson integration of the density; good to
// ~1e-6 for shapes >= 1.
inline double beta_cdf(double x, double a, double b) {
  const int steps = 20000;
  const double h = x / steps;
  const double lnorm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  auto pdf = [&](double t) {
    if (t <= 0.0) return a == 1.0 ? std::exp(lnorm) : 0.0;
    if (t >= 1.0) return b == 1.0 ? std::exp(lnorm) : 0.0;
    return std::exp(lnorm + (a - 1) * std::log(t) + (b - 1) * std::log1p(-t));
  };
  double s = pdf(0.0) + pdf(x);
  for (int i = 1; i < steps; ++i) s += pdf(i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

// Pearson chi-square statistic for observed counts against expected ones.
inline double chi_square(const std::vector<double>& observed, const std::vector<double>& expected) {
  double x = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - expected[i];
    x += d * d / expected[i];
  }
  return x;
}

// Upper critical value of chi-square with k degrees of freedom at roughly
// alpha = 1e-4 (Wilson-Hilferty).
inline double chi_square_critical(double k) {
  const double z = 3.719;
  const double a = 2.0 / (9.0 * k);
  return k * std::pow(1 - a + z * std::sqrt(a), 3);
}

}  // namespace oracle
