#pragma once

#include <cstddef>
#include <vector>

#include "edicke/histogram.hpp"
#include "edicke/model.hpp"
#include "edicke/spectrum.hpp"

namespace edicke {

/// Basis-expansion coefficients c_k^nu pooled over a band of eigenstates.
struct CoefficientSample {
  std::vector<double> values;
  Eigen::Index dim = 0;  // Hilbert-space dimension of the sector
  std::size_t n_states = 0;
  double c_min = 0.0;
  double c_max = 0.0;
};

/// Pools every component of every retained eigenstate with E/N in `window`.
CoefficientSample collect_coefficients(const SpectralDataset& ds, const EnergyWindow& window);

/// Gaussian with zero mean and variance 1/dim.
double goe_coefficient_pdf(double c, double dim) noexcept;

/// Mass of the N(0, 1/dim) law on [a, b], returned as a logarithm so bins
/// deep in the tails stay finite.
double log_goe_coefficient_mass(double a, double b, double dim) noexcept;

inline constexpr int kDefaultCoefficientBins = 201;

struct KlResult {
  double d_kl = 0.0;
  Histogram histogram;
};

/// Histogram estimate of  integral P(c) ln[P(c) / P_GOE(c)] dc  over
/// [c_min, c_max]. The reference mass of each bin is integrated exactly
/// through the Gaussian CDF; empty bins contribute zero.
KlResult kl_divergence(const CoefficientSample& sample, int bins = kDefaultCoefficientBins);

}  // namespace edicke
