#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "edicke/model.hpp"

namespace edicke {

struct Eigendecomposition {
  Eigen::VectorXd values;                // ascending
  std::optional<Eigen::MatrixXd> vectors;  // column k pairs with values[k]
};

/// Dense symmetric eigendecomposition (LAPACK dsyevd; the two-stage
/// reduction when only eigenvalues are requested). Eigenvector phases are
/// fixed with fix_phases(). Results are checked against the trace, the
/// Frobenius norm and a random-vector residual; ConvergenceFailure if any
/// is off.
Eigendecomposition diagonalize(const HamiltonianMatrix& h, bool want_vectors);
Eigendecomposition diagonalize(const Eigen::MatrixXd& symmetric, bool want_vectors);

/// Flips each column so its largest-magnitude entry is positive (first such
/// entry on ties).
void fix_phases(Eigen::MatrixXd& vectors);

/// Caps the thread count of the BLAS/LAPACK backend. Sweeps pin it to 1 so
/// results do not depend on how many workers share the machine.
void set_backend_threads(int threads);

/// OpenBLAS picks its kernels when it loads. On Cooper Lake hosts the
/// auto-selected DGEMM returns wrong products, so this restarts the process
/// (execv of /proc/self/exe) with OPENBLAS_CORETYPE=SkylakeX. Call first
/// thing in main(); it returns when no restart is needed or the variable is
/// already set.
void select_backend_kernels(char** argv);

struct SpectralDataset {
  ModelParams params;
  Parity sector = Parity::Even;
  Eigen::Index full_dim = 0;
  Eigen::VectorXd energies;                     // retained, ascending
  std::optional<Eigen::MatrixXd> coefficients;  // full_dim x energies.size()
  std::vector<Eigen::Index> window_indices;     // into the full spectrum
  std::vector<bool> converged;                  // empty until checked

  Eigen::Index size() const noexcept { return energies.size(); }
};

/// Keeps eigenpairs with E/N inside params.energy_window (closed).
SpectralDataset filter_energy_window(const Eigendecomposition& eig, const ModelParams& params,
                                     Parity sector = Parity::Even);

struct ConvergenceReport {
  std::vector<bool> flags;
  double converged_fraction = 0.0;
};

inline constexpr int kDefaultTailWidth = 20;
inline constexpr double kDefaultTailTolerance = 1e-6;

/// A retained state is converged when its weight on the top `tail_width`
/// Fock layers (n >= n_cutoff - tail_width) is below `tol`.
ConvergenceReport check_convergence(const SpectralDataset& ds, int tail_width = kDefaultTailWidth,
                                    double tol = kDefaultTailTolerance);

// ---------------------------------------------------------------------------
// On-disk spectrum cache.
//
// One file per (params, sector) key, named <hash>.edspec. Layout, all
// little-endian:
//   char[8]  magic "EDKSPEC\0"
//   u32      version (1)
//   u32      parity (0 even, 1 odd)
//   f64 x5   omega omega0 lambda kappa j
//   i64      n_cutoff
//   f64 x4   energy_window.lo/hi mid_window.lo/hi
//   u64      count
//   f64[count]                   full ascending spectrum
//   u64 rows, u64 cols
//   f64[rows*cols] (col-major)   phase-fixed eigenvectors of the windowed
//                                states, cols == 0 when not stored
// ---------------------------------------------------------------------------

struct CachedSpectrum {
  Eigen::VectorXd energies;
  std::optional<Eigen::MatrixXd> window_vectors;
};

std::uint64_t params_hash(const ModelParams& params, Parity sector);

void write_spectrum_file(const std::filesystem::path& path, const ModelParams& params,
                         Parity sector, const CachedSpectrum& spectrum);

/// Returns nullopt when the file is absent, malformed or keyed to other params.
std::optional<CachedSpectrum> read_spectrum_file(const std::filesystem::path& path,
                                                 const ModelParams& params, Parity sector);

class SpectrumCache {
 public:
  explicit SpectrumCache(std::filesystem::path dir);

  /// Hits only if the entry carries vectors whenever `need_vectors` is set.
  std::optional<CachedSpectrum> load(const ModelParams& params, Parity sector,
                                     bool need_vectors) const;
  /// Writes through a temporary file and rename, so concurrent writers of the
  /// same key leave one complete file behind.
  void store(const ModelParams& params, Parity sector, const CachedSpectrum& spectrum) const;

  std::filesystem::path path_for(const ModelParams& params, Parity sector) const;
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
};

/// Builds a dataset from a cached entry exactly as filter_energy_window
/// would from the decomposition that produced it.
SpectralDataset dataset_from_cache(const CachedSpectrum& cached, const ModelParams& params,
                                   Parity sector);

}  // namespace edicke
