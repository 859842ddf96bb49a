#include "edicke/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edicke/error.hpp"

namespace edicke {

namespace {

bool is_half_integer_multiple(double x) { return std::floor(2.0 * x) == 2.0 * x; }

// Coupling between |n, m> and |n + 1, m + dm> (dm = +-1), symmetric by
// construction: both matrix entries are produced from this one value.
double coupling(const ModelParams& p, int n_lower, double m_lower, double m_upper) {
  const double j = p.j;
  const double m_lo = std::min(m_lower, m_upper);
  const double spin = std::sqrt(j * (j + 1.0) - m_lo * (m_lo + 1.0));
  return p.lambda / std::sqrt(static_cast<double>(p.n_atoms())) *
         std::sqrt(static_cast<double>(n_lower + 1)) * spin;
}

double diagonal(const ModelParams& p, int n, double m) {
  return (n * p.omega + m * p.omega0) + p.kappa / p.n_atoms() * m * m;
}

void check_dim(std::size_t dim, const BuildOptions& options) {
  if (dim > options.max_dim) {
    throw Error(ErrorCode::AllocationTooLarge,
                "basis dimension " + std::to_string(dim) + " exceeds cap " +
                    std::to_string(options.max_dim) + "; reduce n_cutoff or j");
  }
}

}  // namespace

void ModelParams::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidParams, msg); };
  if (!(omega > 0.0)) fail("omega must be > 0");
  if (!(omega0 > 0.0)) fail("omega0 must be > 0");
  if (!(lambda >= 0.0)) fail("lambda must be >= 0");
  if (!(kappa >= 0.0)) fail("kappa must be >= 0");
  if (!(j > 0.0) || !is_half_integer_multiple(j)) fail("j must be a positive multiple of 1/2");
  if (n_cutoff < 1) fail("n_cutoff must be >= 1");
  if (!(energy_window.lo < energy_window.hi)) fail("energy_window needs lo < hi");
  if (!(mid_window.lo < mid_window.hi)) fail("mid_window needs lo < hi");
}

Parity parity_of(double j, int n, double m) noexcept {
  const long k = std::lround(j + m) + n;
  return (k % 2 == 0) ? Parity::Even : Parity::Odd;
}

std::vector<BasisState> enumerate_full_basis(const ModelParams& params) {
  const int two_j = params.n_atoms();
  std::vector<BasisState> basis;
  basis.reserve(static_cast<std::size_t>(params.n_cutoff + 1) * (two_j + 1));
  for (int n = 0; n <= params.n_cutoff; ++n) {
    for (int k = 0; k <= two_j; ++k) {
      const double m = -params.j + k;
      basis.push_back({n, m, parity_of(params.j, n, m)});
    }
  }
  return basis;
}

std::vector<BasisState> enumerate_basis(const ModelParams& params, Parity sector) {
  auto basis = enumerate_full_basis(params);
  std::erase_if(basis, [sector](const BasisState& s) { return s.parity != sector; });
  return basis;
}

double hamiltonian_element(const ModelParams& params, const BasisState& bra,
                           const BasisState& ket) noexcept {
  if (bra.n == ket.n && bra.m == ket.m) return diagonal(params, ket.n, ket.m);
  if (std::abs(bra.n - ket.n) != 1 || std::abs(bra.m - ket.m) != 1.0) return 0.0;
  const BasisState& lower = bra.n < ket.n ? bra : ket;
  const BasisState& upper = bra.n < ket.n ? ket : bra;
  return coupling(params, lower.n, lower.m, upper.m);
}

std::optional<std::size_t> find_state(const std::vector<BasisState>& basis, double j, int n,
                                      double m) noexcept {
  if (m < -j || m > j || n < 0) return std::nullopt;
  auto it = std::lower_bound(basis.begin(), basis.end(), std::pair{n, m},
                             [](const BasisState& s, const std::pair<int, double>& key) {
                               return s.n < key.first || (s.n == key.first && s.m < key.second);
                             });
  if (it == basis.end() || it->n != n || it->m != m) return std::nullopt;
  return static_cast<std::size_t>(it - basis.begin());
}

HamiltonianMatrix build_hamiltonian(const ModelParams& params, Parity sector,
                                    const BuildOptions& options) {
  return build_hamiltonian(params, enumerate_basis(params, sector), options);
}

HamiltonianMatrix build_hamiltonian(const ModelParams& params, std::vector<BasisState> basis,
                                    const BuildOptions& options) {
  params.validate();
  check_dim(basis.size(), options);
  const auto dim = static_cast<Eigen::Index>(basis.size());
  HamiltonianMatrix h{std::move(basis), Eigen::MatrixXd::Zero(dim, dim)};
  const auto& states = h.basis;

  // Each iteration owns column `col`; no two threads write the same entry.
#pragma omp parallel for schedule(static)
  for (Eigen::Index col = 0; col < dim; ++col) {
    const BasisState& ket = states[static_cast<std::size_t>(col)];
    h.entries(col, col) = diagonal(params, ket.n, ket.m);
    if (params.lambda == 0.0) continue;
    for (int dn : {-1, 1}) {
      for (double dm : {-1.0, 1.0}) {
        auto row = find_state(states, params.j, ket.n + dn, ket.m + dm);
        if (!row) continue;
        const BasisState& bra = states[*row];
        h.entries(static_cast<Eigen::Index>(*row), col) =
            dn > 0 ? coupling(params, ket.n, ket.m, bra.m) : coupling(params, bra.n, bra.m, ket.m);
      }
    }
  }
  return h;
}

HamiltonianMatrix build_hamiltonian_reference(const ModelParams& params,
                                              std::vector<BasisState> basis) {
  params.validate();
  const auto dim = static_cast<Eigen::Index>(basis.size());
  HamiltonianMatrix h{std::move(basis), Eigen::MatrixXd::Zero(dim, dim)};
  for (Eigen::Index col = 0; col < dim; ++col) {
    for (Eigen::Index row = 0; row < dim; ++row) {
      h.entries(row, col) = hamiltonian_element(params, h.basis[static_cast<std::size_t>(row)],
                                                h.basis[static_cast<std::size_t>(col)]);
    }
  }
  return h;
}

}  // namespace edicke
