#pragma once

// Test-only reference machinery: samplers drawn by inverse CDF, random
// matrix ensembles and quadrature. Nothing here calls into the library's
// statistics code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

/// Brody(beta) by inverting its CDF 1 - exp(-b s^{beta+1}).
inline double brody_b(double beta) {
  return std::pow(std::tgamma((beta + 2.0) / (beta + 1.0)), beta + 1.0);
}

inline std::vector<double> brody_samples(double beta, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const double b = brody_b(beta);
  std::vector<double> out(n);
  for (auto& s : out) s = std::pow(-std::log1p(-uniform(rng)) / b, 1.0 / (beta + 1.0));
  return out;
}

inline std::vector<double> exponential_samples(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& s : out) s = -std::log1p(-uniform(rng));
  return out;
}

/// Wigner surmise: CDF 1 - exp(-pi s^2 / 4).
inline std::vector<double> wigner_dyson_samples(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& s : out) s = std::sqrt(-4.0 * std::log1p(-uniform(rng)) / std::numbers::pi);
  return out;
}

/// Levels of a unit-rate Poisson process starting at `origin`.
inline std::vector<double> poisson_levels(std::size_t n, std::uint64_t seed, double origin = 0.0) {
  const auto gaps = exponential_samples(n, seed);
  std::vector<double> levels(n);
  double e = origin;
  for (std::size_t i = 0; i < n; ++i) {
    levels[i] = e;
    e += gaps[i];
  }
  return levels;
}

inline std::vector<double> gaussian_samples(std::size_t n, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  std::vector<double> out(n);
  for (auto& x : out) x = normal(rng);
  return out;
}

/// GOE: (A + A^T) / 2 with iid standard normal A.
inline Eigen::MatrixXd goe_matrix(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < n; ++r) a(r, c) = normal(rng);
  return (a + a.transpose()) / 2.0;
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(f - (i + 1.0) / n)});
  }
  return d;
}

/// Adaptive Gauss-Kronrod on [a, b]; b may be +infinity.
inline double integrate(const std::function<double(double)>& f, double a, double b) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14, &err);
}

/// tanh-sinh on a finite interval, robust to endpoint singularities.
inline double integrate_singular(const std::function<double(double)>& f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, a, b);
}

}  // namespace oracle
