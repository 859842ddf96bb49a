#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace edicke {

/// Spacings (or spacing pairs) smaller than this fraction of the mean raw
/// spacing count as exact degeneracies and are dropped from all statistics.
inline constexpr double kDegeneracyRelTol = 1e-10;

inline constexpr int kDefaultFitDegree = 10;

struct UnfoldedSpectrum {
  std::vector<double> levels;    // ascending, unit mean density
  std::vector<double> spacings;  // levels[i + 1] - levels[i]
  int fit_degree = 0;
};

/// Maps levels through a least-squares polynomial fit of the staircase
/// N(E) = #{E_k <= E}. The fit runs in a Chebyshev basis on the levels
/// rescaled to [-1, 1], which makes the result invariant under E -> aE + b.
UnfoldedSpectrum unfold(std::span<const double> energies, int fit_degree = kDefaultFitDegree);

// Nearest-neighbour spacing references, all unit mean.
double poisson_pdf(double s) noexcept;
double wigner_dyson_pdf(double s) noexcept;
double brody_b(double beta) noexcept;
double brody_pdf(double s, double beta) noexcept;

/// Splits off spacings below kDegeneracyRelTol * mean(spacings).
struct SpacingSelection {
  std::vector<double> kept;
  std::size_t n_dropped = 0;
};
SpacingSelection drop_degenerate(std::span<const double> spacings);

struct BrodyFit {
  double beta = 0.0;
  std::size_t n_used = 0;
  std::size_t n_dropped = 0;
};

inline constexpr std::size_t kMinSpacings = 100;

/// Maximum-likelihood Brody exponent on [0, 1] by golden-section search.
BrodyFit fit_brody(std::span<const double> spacings, double tol = 1e-4);

/// First crossing of the Poisson and Wigner-Dyson densities (~0.4729),
/// refined to machine precision on first use.
double poisson_wd_crossing();

struct EtaResult {
  double eta = 0.0;      // clipped to [0, 1]
  double raw_eta = 0.0;  // before clipping
  std::size_t n_used = 0;
  std::size_t n_dropped = 0;
};

/// eta = |F(s0) - F_WD(s0)| / |F_P(s0) - F_WD(s0)| with F the empirical CDF.
EtaResult eta_indicator(std::span<const double> spacings);

struct RatioSet {
  std::vector<double> values;  // r in [0, 1]
  std::size_t n_dropped = 0;   // consecutive pairs touching a degeneracy
};

/// r = min(s_{i+1}/s_i, s_i/s_{i+1}) on raw (not unfolded) spacings.
RatioSet spacing_ratios(std::span<const double> energies);

double goe_ratio_pdf(double r) noexcept;
double poisson_ratio_pdf(double r) noexcept;

double mean_ratio(std::span<const double> ratios);

inline constexpr double kMeanRatioPoisson = 0.38629436111989061;  // 2 ln 2 - 1
inline constexpr double kMeanRatioGoe = 0.53589838486224541;      // 4 - 2 sqrt 3

struct ChaosIndicators {
  double eta = 0.0;
  double beta = 0.0;
  double mean_r = 0.0;
  double d_kl = 0.0;
  std::size_t n_levels = 0;
  double converged_fraction = 0.0;
};

enum class Indicator { Eta, Beta, MeanR };

/// Threshold test: eta <= t, beta >= t, mean_r >= t. NaN never satisfies.
bool satisfies(Indicator which, double value, double threshold) noexcept;

struct GridValue {
  double kappa = 0.0;
  double lambda = 0.0;
  double value = 0.0;
};

struct BoundaryPoint {
  double kappa = 0.0;
  double lambda_star = 0.0;  // NaN when not crossed
  bool crossed = false;
};

/// For each kappa, the smallest grid lambda from which the threshold holds
/// for every larger lambda on the grid. Points may arrive in any order but
/// must form a full rectangular grid.
std::vector<BoundaryPoint> chaos_boundary(std::span<const GridValue> grid, Indicator which,
                                          double threshold);

}  // namespace edicke
