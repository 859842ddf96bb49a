#include "edicke/spectral_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>

#include "edicke/error.hpp"

namespace edicke {

namespace {

constexpr double kPi = std::numbers::pi;

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

// --- unfolding --------------------------------------------------------------

UnfoldedSpectrum unfold(std::span<const double> energies, int fit_degree) {
  if (fit_degree < 1) throw Error(ErrorCode::InvalidParams, "fit_degree must be >= 1");
  const auto n = energies.size();
  if (n < static_cast<std::size_t>(fit_degree) + 10) {
    throw Error(ErrorCode::TooFewLevels, "unfolding with degree " + std::to_string(fit_degree) +
                                             " needs at least " +
                                             std::to_string(fit_degree + 10) + " levels");
  }
  std::vector<double> e(energies.begin(), energies.end());
  std::sort(e.begin(), e.end());
  const double lo = e.front();
  const double hi = e.back();
  if (!(hi > lo)) throw Error(ErrorCode::DegenerateFit, "all levels coincide");

  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(fit_degree + 1);
  Eigen::MatrixXd design(rows, cols);
  Eigen::VectorXd staircase(rows);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = (2.0 * e[i] - (hi + lo)) / (hi - lo);
  }
  for (std::size_t i = 0; i < n;) {
    // N(E) counts every level <= E, so tied levels share the count of the last one.
    std::size_t last = i;
    while (last + 1 < n && e[last + 1] == e[i]) ++last;
    for (std::size_t k = i; k <= last; ++k) staircase[static_cast<Eigen::Index>(k)] =
        static_cast<double>(last + 1);
    i = last + 1;
  }
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double xi = x[static_cast<std::size_t>(r)];
    design(r, 0) = 1.0;
    design(r, 1) = xi;
    for (Eigen::Index c = 2; c < cols; ++c) {
      design(r, c) = 2.0 * xi * design(r, c - 1) - design(r, c - 2);
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < cols) {
    throw Error(ErrorCode::DegenerateFit, "counting-function fit is rank deficient (rank " +
                                              std::to_string(qr.rank()) + " < " +
                                              std::to_string(cols) + ")");
  }
  const Eigen::VectorXd coef = qr.solve(staircase);
  const Eigen::VectorXd mapped = design * coef;

  UnfoldedSpectrum out;
  out.fit_degree = fit_degree;
  out.levels.assign(mapped.data(), mapped.data() + mapped.size());
  std::sort(out.levels.begin(), out.levels.end());
  out.spacings.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) out.spacings[i] = out.levels[i + 1] - out.levels[i];
  return out;
}

// --- reference densities ----------------------------------------------------

double poisson_pdf(double s) noexcept { return std::exp(-s); }

double wigner_dyson_pdf(double s) noexcept {
  return kPi * s / 2.0 * std::exp(-kPi * s * s / 4.0);
}

double brody_b(double beta) noexcept {
  return std::pow(std::tgamma((beta + 2.0) / (beta + 1.0)), beta + 1.0);
}

double brody_pdf(double s, double beta) noexcept {
  const double b = brody_b(beta);
  return b * (beta + 1.0) * std::pow(s, beta) * std::exp(-b * std::pow(s, beta + 1.0));
}

double goe_ratio_pdf(double r) noexcept {
  if (r < 0.0 || r > 1.0) return 0.0;
  const double q = 1.0 + r + r * r;
  return 27.0 / 8.0 * 2.0 * (r + r * r) / (q * q * std::sqrt(q));
}

double poisson_ratio_pdf(double r) noexcept {
  if (r < 0.0 || r > 1.0) return 0.0;
  return 2.0 / ((1.0 + r) * (1.0 + r));
}

// --- spacing statistics -----------------------------------------------------

SpacingSelection drop_degenerate(std::span<const double> spacings) {
  SpacingSelection sel;
  if (spacings.empty()) return sel;
  const double tol = kDegeneracyRelTol * mean_of(spacings);
  sel.kept.reserve(spacings.size());
  for (double s : spacings) {
    if (s < tol || s == 0.0) {
      ++sel.n_dropped;
    } else {
      sel.kept.push_back(s);
    }
  }
  return sel;
}

namespace {

SpacingSelection select_for_fit(std::span<const double> spacings) {
  if (spacings.size() < kMinSpacings) {
    throw Error(ErrorCode::TooFewSpacings, "need at least " + std::to_string(kMinSpacings) +
                                               " spacings, got " +
                                               std::to_string(spacings.size()));
  }
  for (double s : spacings) {
    if (!(s >= 0.0)) throw Error(ErrorCode::InvalidParams, "spacings must be non-negative");
  }
  auto sel = drop_degenerate(spacings);
  if (sel.kept.empty()) throw Error(ErrorCode::AllDegenerate, "every spacing is degenerate");
  if (sel.kept.size() < kMinSpacings) {
    throw Error(ErrorCode::TooFewSpacings,
                "only " + std::to_string(sel.kept.size()) + " non-degenerate spacings");
  }
  return sel;
}

}  // namespace

BrodyFit fit_brody(std::span<const double> spacings, double tol) {
  auto sel = select_for_fit(spacings);
  std::vector<double> log_s(sel.kept.size());
  std::transform(sel.kept.begin(), sel.kept.end(), log_s.begin(),
                 [](double s) { return std::log(s); });
  const double count = static_cast<double>(log_s.size());
  const double sum_log_s = std::accumulate(log_s.begin(), log_s.end(), 0.0);

  auto log_likelihood = [&](double beta) {
    const double b = brody_b(beta);
    double tail = 0.0;
    for (double ls : log_s) tail += std::exp((beta + 1.0) * ls);
    return count * (std::log(b) + std::log1p(beta)) + beta * sum_log_s - b * tail;
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = log_likelihood(c);
  double fd = log_likelihood(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = log_likelihood(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = log_likelihood(d);
    }
  }
  BrodyFit fit;
  fit.beta = std::clamp(0.5 * (a + b), 0.0, 1.0);
  fit.n_used = sel.kept.size();
  fit.n_dropped = sel.n_dropped;
  return fit;
}

double poisson_wd_crossing() {
  static const double s0 = [] {
    // e^{-s} - (pi s / 2) e^{-pi s^2 / 4} changes sign once on [0.3, 0.6].
    auto f = [](double s) { return poisson_pdf(s) - wigner_dyson_pdf(s); };
    double lo = 0.3, hi = 0.6;
    while (true) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return s0;
}

EtaResult eta_indicator(std::span<const double> spacings) {
  auto sel = select_for_fit(spacings);
  const double s0 = poisson_wd_crossing();
  const auto below =
      std::count_if(sel.kept.begin(), sel.kept.end(), [s0](double s) { return s <= s0; });
  const double empirical_cdf = static_cast<double>(below) / static_cast<double>(sel.kept.size());
  const double wd_cdf = 1.0 - std::exp(-kPi * s0 * s0 / 4.0);
  const double denominator = std::exp(-kPi * s0 * s0 / 4.0) - std::exp(-s0);

  EtaResult res;
  res.raw_eta = std::abs((empirical_cdf - wd_cdf) / denominator);
  res.eta = std::clamp(res.raw_eta, 0.0, 1.0);
  res.n_used = sel.kept.size();
  res.n_dropped = sel.n_dropped;
  return res;
}

RatioSet spacing_ratios(std::span<const double> energies) {
  if (energies.size() < 3) throw Error(ErrorCode::TooFewLevels, "ratios need at least 3 levels");
  std::vector<double> s(energies.size() - 1);
  for (std::size_t i = 0; i + 1 < energies.size(); ++i) s[i] = energies[i + 1] - energies[i];
  const double tol = kDegeneracyRelTol * mean_of(s);

  RatioSet out;
  out.values.reserve(s.size() - 1);
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s[i] < tol || s[i + 1] < tol || s[i] == 0.0 || s[i + 1] == 0.0) {
      ++out.n_dropped;
      continue;
    }
    const double delta = s[i + 1] / s[i];
    out.values.push_back(std::min(delta, 1.0 / delta));
  }
  return out;
}

double mean_ratio(std::span<const double> ratios) {
  if (ratios.empty()) throw Error(ErrorCode::EmptyInput, "no ratios to average");
  return mean_of(ratios);
}

// --- chaos boundary ---------------------------------------------------------

bool satisfies(Indicator which, double value, double threshold) noexcept {
  if (std::isnan(value)) return false;
  switch (which) {
    case Indicator::Eta:
      return value <= threshold;
    case Indicator::Beta:
    case Indicator::MeanR:
      return value >= threshold;
  }
  return false;
}

std::vector<BoundaryPoint> chaos_boundary(std::span<const GridValue> grid, Indicator which,
                                          double threshold) {
  std::map<double, std::vector<std::pair<double, double>>> columns;
  for (const auto& g : grid) columns[g.kappa].emplace_back(g.lambda, g.value);

  std::vector<double> lambdas;
  std::vector<BoundaryPoint> out;
  for (auto& [kappa, column] : columns) {
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<double> these(column.size());
    std::transform(column.begin(), column.end(), these.begin(),
                   [](const auto& p) { return p.first; });
    if (std::adjacent_find(these.begin(), these.end()) != these.end()) {
      throw Error(ErrorCode::NonRectangularGrid, "duplicate lambda at kappa=" +
                                                     std::to_string(kappa));
    }
    if (lambdas.empty()) {
      lambdas = these;
    } else if (these != lambdas) {
      throw Error(ErrorCode::NonRectangularGrid,
                  "lambda grid at kappa=" + std::to_string(kappa) + " differs from the first");
    }

    BoundaryPoint bp{kappa, std::numeric_limits<double>::quiet_NaN(), false};
    for (auto it = column.rbegin(); it != column.rend(); ++it) {
      if (!satisfies(which, it->second, threshold)) break;
      bp.lambda_star = it->first;
      bp.crossed = true;
    }
    out.push_back(bp);
  }
  return out;
}

}  // namespace edicke
