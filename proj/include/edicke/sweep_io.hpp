#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "edicke/histogram.hpp"
#include "edicke/model.hpp"
#include "edicke/spectral_stats.hpp"
#include "edicke/spectrum.hpp"

namespace edicke {

struct Thresholds {
  double eta_max = 0.3;
  double beta_min = 0.7;
  double mean_r_min = 0.48;
};

struct SweepConfig {
  ModelParams base;  // lambda and kappa are taken from the grids
  std::vector<double> kappa_grid;
  std::vector<double> lambda_grid;
  int fit_degree = kDefaultFitDegree;
  int bins = 201;
  Thresholds thresholds;
  int workers = 1;
  std::filesystem::path output_dir = "out";

  void validate() const;
};

// --- config documents -------------------------------------------------------
//
// A config is a JSON object with keys omega, omega0, j, n_cutoff,
// energy_window, mid_window, kappa_grid, lambda_grid, fit_degree, bins,
// thresholds{eta_max, beta_min, mean_r_min}, workers, output_dir, plus
// lambda and kappa for single-point commands. Missing keys take defaults.

nlohmann::json default_config_json();

/// Reads a config file and layers it over the defaults. Unknown keys are
/// rejected with MalformedInput.
nlohmann::json load_config_json(const std::filesystem::path& path);

/// Applies KEY=VALUE with a dotted key (thresholds.mean_r_min=0.5). VALUE is
/// parsed as JSON, falling back to a plain string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

SweepConfig sweep_config_from_json(const nlohmann::json& doc);
ModelParams point_params_from_json(const nlohmann::json& doc);

// --- single-point pipeline --------------------------------------------------

struct PointAnalysisOptions {
  int fit_degree = kDefaultFitDegree;
  int bins = 201;
  bool spacing_stats = true;  // unfolding, eta, Brody beta
  bool ratio_stats = true;    // <r>
  bool eigenstates = true;    // eigenvectors, D_KL and the convergence check
  Parity sector = Parity::Even;
  const SpectrumCache* cache = nullptr;
};

struct PointAnalysis {
  ModelParams params;
  Eigen::Index dim = 0;
  ChaosIndicators indicators;
  std::size_t n_degenerate_spacings = 0;
  std::size_t n_degenerate_ratios = 0;
  std::size_t n_mid_states = 0;
  UnfoldedSpectrum unfolded;
  std::vector<double> ratios;
  std::optional<Histogram> coefficient_histogram;
  SpectralDataset dataset;
  // Indicators that could not be computed on this spectrum (e.g. too few
  // non-degenerate spacings); the affected fields are NaN.
  std::vector<std::string> indicator_errors;
};

/// build -> diagonalize -> window -> eta, beta, <r> and, with eigenstates,
/// D_KL and the converged fraction. Disabled or failed indicators are NaN;
/// failures of the statistics themselves land in indicator_errors while
/// model or solver failures propagate.
PointAnalysis analyze_point(const ModelParams& params, const PointAnalysisOptions& options = {});

/// Plot-ready histograms for a finished analysis.
Histogram spacing_histogram(const PointAnalysis& a);
Histogram ratio_histogram(const PointAnalysis& a);

// --- sweeps -----------------------------------------------------------------

struct SweepResultRow {
  double kappa = 0.0;
  double lambda = 0.0;
  long long dim = 0;
  long long n_levels = 0;
  double eta = 0.0;
  double beta = 0.0;
  double mean_r = 0.0;
  double d_kl = 0.0;
  double converged_fraction = 0.0;
  long long n_degenerate_dropped = 0;

  bool operator==(const SweepResultRow&) const = default;
};

struct SweepPointError {
  double kappa = 0.0;
  double lambda = 0.0;
  std::string message;
};

struct PointHistograms {
  double kappa = 0.0;
  double lambda = 0.0;
  std::optional<Histogram> spacing;
  std::optional<Histogram> ratio;
  std::optional<Histogram> coefficient;
};

struct SweepResults {
  std::vector<SweepResultRow> rows;  // kappa asc, then lambda asc
  std::vector<SweepPointError> errors;
  std::vector<PointHistograms> histograms;  // same order as rows
};

/// Runs every grid point on `config.workers` threads. A failing point yields
/// a row with NaN indicators (and -1 counts) plus an entry in `errors`; a
/// point where only some indicators failed keeps the others and is also
/// listed in `errors`. Output never depends on the worker count.
SweepResults compute_sweep(const SweepConfig& config, const SpectrumCache* cache = nullptr);

/// compute_sweep plus sweep.csv, boundary_<indicator>.csv, the per-point
/// histogram files and, if any point failed, sweep_errors.csv.
SweepResults run_sweep(const SweepConfig& config, const SpectrumCache* cache = nullptr);

// --- files ------------------------------------------------------------------

inline constexpr const char* kSweepCsvHeader =
    "kappa,lambda,dim,n_levels,eta,beta,mean_r,d_kl,converged_fraction,n_degenerate_dropped";

std::string format_double(double v);  // 17 significant digits, round-trips

void write_csv(const std::vector<SweepResultRow>& rows, const std::filesystem::path& path);
std::vector<SweepResultRow> read_csv(const std::filesystem::path& path);

void write_errors_csv(const std::vector<SweepPointError>& errors,
                      const std::filesystem::path& path);

nlohmann::json histogram_to_json(const Histogram& h, const nlohmann::json& meta);
Histogram histogram_from_json(const nlohmann::json& doc);
void write_histogram(const Histogram& h, const nlohmann::json& meta,
                     const std::filesystem::path& path);
void write_histograms(const std::vector<std::pair<Histogram, nlohmann::json>>& histos,
                      const std::filesystem::path& path);

const char* indicator_name(Indicator which) noexcept;  // eta | beta | mean_r
double threshold_for(const Thresholds& t, Indicator which) noexcept;
double indicator_value(const SweepResultRow& row, Indicator which) noexcept;

std::vector<BoundaryPoint> boundary_from_rows(const std::vector<SweepResultRow>& rows,
                                              Indicator which, double threshold);
void write_boundary_csv(const std::vector<BoundaryPoint>& boundary,
                        const std::filesystem::path& path);

/// "hist_<kind>_<kappa>_<lambda>.json" with %g-formatted grid values.
std::string histogram_filename(const std::string& kind, double kappa, double lambda);

}  // namespace edicke
