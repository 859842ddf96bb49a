#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace edicke {

/// Closed interval on the energy-per-atom axis, E/N.
struct EnergyWindow {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double energy_per_atom) const noexcept {
    return energy_per_atom >= lo && energy_per_atom <= hi;
  }
  bool operator==(const EnergyWindow&) const = default;
};

/// Physical and truncation parameters of the extended Dicke Hamiltonian
///   H = w a^+a + w0 Jz + (2 lambda / sqrt(N)) Jx (a + a^+) + (kappa / N) Jz^2
/// restricted to the maximal spin sector j = N/2 and Fock states n <= n_cutoff.
struct ModelParams {
  double omega = 1.0;
  double omega0 = 1.0;
  double lambda = 0.0;
  double kappa = 0.0;
  double j = 16.0;
  int n_cutoff = 320;
  EnergyWindow energy_window{0.4, 4.0};
  EnergyWindow mid_window{1.75, 2.25};

  /// N = 2j. Only meaningful after validate().
  int n_atoms() const noexcept { return static_cast<int>(2.0 * j + 0.5); }

  /// Throws Error(InvalidParams) on any violated invariant.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

enum class Parity { Even, Odd };

struct BasisState {
  int n = 0;       // photon number
  double m = 0.0;  // Jz eigenvalue, -j..j in unit steps (exact half-integers)
  Parity parity = Parity::Even;

  bool operator==(const BasisState&) const = default;
};

/// Parity of |n, m> under exp(i pi (j + Jz + a^+a)).
Parity parity_of(double j, int n, double m) noexcept;

/// All |n, m> in the given sector, ordered by n then m (both ascending).
std::vector<BasisState> enumerate_basis(const ModelParams& params, Parity sector);

/// Both sectors interleaved in the same (n, m) order. Used to check that
/// assembly never couples opposite parities.
std::vector<BasisState> enumerate_full_basis(const ModelParams& params);

/// <bra|H|ket>. Exactly zero unless bra == ket or |dn| = |dm| = 1.
double hamiltonian_element(const ModelParams& params, const BasisState& bra,
                           const BasisState& ket) noexcept;

struct HamiltonianMatrix {
  std::vector<BasisState> basis;
  Eigen::MatrixXd entries;  // full square, column-major

  Eigen::Index dim() const noexcept { return entries.rows(); }
};

struct BuildOptions {
  // D above this aborts with AllocationTooLarge; D^2 doubles must fit in RAM.
  std::size_t max_dim = 16384;
};

/// Assembles H over one parity sector by visiting each state's <= 4 couplings.
/// Columns are filled in parallel; the result is independent of thread count.
HamiltonianMatrix build_hamiltonian(const ModelParams& params, Parity sector,
                                    const BuildOptions& options = {});

/// Same matrix over an arbitrary ordered basis (e.g. the unprojected one).
HamiltonianMatrix build_hamiltonian(const ModelParams& params, std::vector<BasisState> basis,
                                    const BuildOptions& options = {});

/// Serial reference: evaluates hamiltonian_element on all D^2 pairs.
/// O(D^2); kept for testing the parallel assembly.
HamiltonianMatrix build_hamiltonian_reference(const ModelParams& params,
                                              std::vector<BasisState> basis);

/// Index of (n, m) in a basis produced by enumerate_basis, if present.
std::optional<std::size_t> find_state(const std::vector<BasisState>& basis, double j, int n,
                                      double m) noexcept;

}  // namespace edicke
