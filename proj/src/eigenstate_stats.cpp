#include "edicke/eigenstate_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "edicke/error.hpp"

namespace edicke {

namespace {

// log P(Z > x) for a standard normal Z, x >= 0.
double log_upper_tail(double x) {
  if (x < 30.0) return std::log(0.5 * std::erfc(x / std::numbers::sqrt2));
  // Asymptotic (Mills ratio) series; relative error below 1e-10 at x >= 30.
  const double inv2 = 1.0 / (x * x);
  const double series = 1.0 - inv2 + 3.0 * inv2 * inv2 - 15.0 * inv2 * inv2 * inv2;
  return -0.5 * x * x - std::log(x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

}  // namespace

CoefficientSample collect_coefficients(const SpectralDataset& ds, const EnergyWindow& window) {
  if (!ds.coefficients) {
    throw Error(ErrorCode::MissingVectors, "coefficient statistics need eigenvectors");
  }
  const auto& c = *ds.coefficients;
  const double n_atoms = ds.params.n_atoms();
  CoefficientSample sample;
  sample.dim = c.rows();
  for (Eigen::Index k = 0; k < ds.size(); ++k) {
    if (!window.contains(ds.energies[k] / n_atoms)) continue;
    const auto col = c.col(k);
    const double norm = col.squaredNorm();
    if (std::abs(norm - 1.0) > 1e-10) {
      throw Error(ErrorCode::MalformedInput,
                  "eigenvector " + std::to_string(k) + " has squared norm " + std::to_string(norm));
    }
    sample.values.insert(sample.values.end(), col.data(), col.data() + col.size());
    ++sample.n_states;
  }
  if (sample.n_states == 0) {
    throw Error(ErrorCode::EmptyWindow, "no retained eigenstate with E/N in [" +
                                            std::to_string(window.lo) + ", " +
                                            std::to_string(window.hi) + "]");
  }
  const auto [lo, hi] = std::minmax_element(sample.values.begin(), sample.values.end());
  sample.c_min = *lo;
  sample.c_max = *hi;
  return sample;
}

double goe_coefficient_pdf(double c, double dim) noexcept {
  return std::sqrt(dim / (2.0 * std::numbers::pi)) * std::exp(-dim * c * c / 2.0);
}

double log_goe_coefficient_mass(double a, double b, double dim) noexcept {
  const double scale = std::sqrt(dim);
  double za = a * scale;
  double zb = b * scale;
  if (zb <= 0.0) {
    // Mirror onto the upper half line.
    std::swap(za, zb);
    za = -za;
    zb = -zb;
  }
  if (za >= 0.0) {
    const double la = log_upper_tail(za);
    const double lb = log_upper_tail(zb);
    return la + std::log1p(-std::exp(lb - la));
  }
  // Straddles zero: no cancellation problem.
  return std::log(1.0 - 0.5 * std::erfc(-za / std::numbers::sqrt2) -
                  0.5 * std::erfc(zb / std::numbers::sqrt2));
}

KlResult kl_divergence(const CoefficientSample& sample, int bins) {
  if (sample.values.empty()) throw Error(ErrorCode::EmptySample, "coefficient sample is empty");
  if (bins < 10) throw Error(ErrorCode::InvalidParams, "kl_divergence needs >= 10 bins");
  if (!(sample.c_max - sample.c_min >= 1e-12)) {
    throw Error(ErrorCode::DegenerateRange, "coefficient range below 1e-12");
  }
  KlResult out;
  out.histogram = make_histogram(sample.values, {sample.c_min, sample.c_max, bins});
  const auto& h = out.histogram;
  const double total = static_cast<double>(h.total());
  const double dim = static_cast<double>(sample.dim);
  double d_kl = 0.0;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    if (h.counts[i] == 0) continue;
    const double p = static_cast<double>(h.counts[i]) / total;
    d_kl += p * (std::log(p) - log_goe_coefficient_mass(h.edges[i], h.edges[i + 1], dim));
  }
  out.d_kl = d_kl;
  return out;
}

}  // namespace edicke
