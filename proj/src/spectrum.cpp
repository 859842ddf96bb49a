#include "edicke/spectrum.hpp"

#include <lapacke.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "edicke/error.hpp"

#include <unistd.h>

extern "C" void openblas_set_num_threads(int num_threads);
extern "C" char* openblas_get_corename(void);

namespace edicke {

static_assert(std::endian::native == std::endian::little,
              "spectrum cache I/O assumes a little-endian host");

void set_backend_threads(int threads) { openblas_set_num_threads(std::max(1, threads)); }

void select_backend_kernels(char** argv) {
  constexpr const char* kEnv = "OPENBLAS_CORETYPE";
  if (std::getenv(kEnv) != nullptr) return;
  std::string core = openblas_get_corename();
  std::transform(core.begin(), core.end(), core.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (core != "cooperlake") return;
  // Same AVX-512 kernels minus the broken DGEMM blocking.
  ::setenv(kEnv, "SkylakeX", 1);
  ::execv("/proc/self/exe", argv);
  // exec failed: carry on, diagonalize() will refuse bad results.
}

namespace {

// O(n^2) consistency checks on a finished decomposition. They catch a
// miscomputing backend, not ordinary rounding.
void verify(const Eigen::MatrixXd& a, const Eigen::VectorXd& values, const Eigen::MatrixXd* vectors) {
  const auto n = a.rows();
  const double fro2 = a.squaredNorm();
  const double scale = std::sqrt(fro2) + 1.0;
  const double tol = 1e-8 * static_cast<double>(n);
  const double trace_err = std::abs(values.sum() - a.trace());
  const double fro_err = std::abs(values.squaredNorm() - fro2);
  bool ok = trace_err <= tol * scale && fro_err <= tol * scale * scale;
  if (ok && vectors != nullptr) {
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> normal;
    Eigen::VectorXd x(n);
    for (auto& v : x) v = normal(rng);
    const Eigen::VectorXd vx = *vectors * x;
    const double resid = (a * vx - *vectors * values.cwiseProduct(x)).norm();
    const double ortho = (vectors->transpose() * vx - x).norm();
    ok = resid <= tol * scale * x.norm() && ortho <= tol * x.norm();
  }
  if (!ok) {
    throw Error(ErrorCode::ConvergenceFailure,
                std::string("eigensolver output fails consistency checks (BLAS backend core '") +
                    openblas_get_corename() + "'; try setting OPENBLAS_CORETYPE)");
  }
}

}  // namespace

void fix_phases(Eigen::MatrixXd& vectors) {
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    auto col = vectors.col(k);
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      const double a = std::abs(col[i]);
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (col[best] < 0.0) col = -col;
  }
}

Eigendecomposition diagonalize(const Eigen::MatrixXd& symmetric, bool want_vectors) {
  const auto n = symmetric.rows();
  if (n != symmetric.cols()) throw Error(ErrorCode::InvalidParams, "matrix is not square");
  Eigendecomposition out;
  out.values.resize(n);
  if (n == 0) {
    if (want_vectors) out.vectors = Eigen::MatrixXd(0, 0);
    return out;
  }
  Eigen::MatrixXd work = symmetric;
  const auto ld = static_cast<lapack_int>(n);
  lapack_int info = 0;
  if (want_vectors) {
    info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', ld, work.data(), ld, out.values.data());
  } else {
    info = LAPACKE_dsyevd_2stage(LAPACK_COL_MAJOR, 'N', 'L', ld, work.data(), ld,
                                 out.values.data());
  }
  if (info != 0) {
    throw Error(ErrorCode::ConvergenceFailure, "dsyevd returned info=" + std::to_string(info));
  }

  // LAPACK already returns ascending values; a stable sort keeps exact ties
  // in solver order and guards against backends that do not.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return out.values[a] < out.values[b]; });
  if (!std::is_sorted(order.begin(), order.end())) {
    Eigen::VectorXd sorted(n);
    Eigen::MatrixXd sorted_vecs(want_vectors ? n : 0, want_vectors ? n : 0);
    for (Eigen::Index k = 0; k < n; ++k) {
      sorted[k] = out.values[order[static_cast<std::size_t>(k)]];
      if (want_vectors) sorted_vecs.col(k) = work.col(order[static_cast<std::size_t>(k)]);
    }
    out.values = std::move(sorted);
    if (want_vectors) work = std::move(sorted_vecs);
  }
  verify(symmetric, out.values, want_vectors ? &work : nullptr);
  if (want_vectors) {
    fix_phases(work);
    out.vectors = std::move(work);
  }
  return out;
}

Eigendecomposition diagonalize(const HamiltonianMatrix& h, bool want_vectors) {
  return diagonalize(h.entries, want_vectors);
}

SpectralDataset filter_energy_window(const Eigendecomposition& eig, const ModelParams& params,
                                     Parity sector) {
  const double n_atoms = params.n_atoms();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    if (params.energy_window.contains(eig.values[k] / n_atoms)) keep.push_back(k);
  }
  if (keep.empty()) {
    throw Error(ErrorCode::EmptyWindow, "no eigenvalue with E/N in [" +
                                            std::to_string(params.energy_window.lo) + ", " +
                                            std::to_string(params.energy_window.hi) + "]");
  }
  SpectralDataset ds;
  ds.params = params;
  ds.sector = sector;
  ds.full_dim = eig.values.size();
  ds.energies.resize(static_cast<Eigen::Index>(keep.size()));
  if (eig.vectors) ds.coefficients = Eigen::MatrixXd(eig.vectors->rows(), ds.energies.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    ds.energies[col] = eig.values[keep[i]];
    if (eig.vectors) ds.coefficients->col(col) = eig.vectors->col(keep[i]);
  }
  ds.window_indices = std::move(keep);
  return ds;
}

ConvergenceReport check_convergence(const SpectralDataset& ds, int tail_width, double tol) {
  if (!ds.coefficients) {
    throw Error(ErrorCode::MissingVectors, "convergence check needs eigenvectors");
  }
  const auto basis = enumerate_basis(ds.params, ds.sector);
  const auto& c = *ds.coefficients;
  if (static_cast<Eigen::Index>(basis.size()) != c.rows()) {
    throw Error(ErrorCode::MalformedInput, "coefficient rows do not match the sector basis");
  }
  const int first_tail_layer = ds.params.n_cutoff - tail_width;
  std::vector<Eigen::Index> tail_rows;
  for (std::size_t r = 0; r < basis.size(); ++r) {
    if (basis[r].n >= first_tail_layer) tail_rows.push_back(static_cast<Eigen::Index>(r));
  }

  ConvergenceReport report;
  report.flags.resize(static_cast<std::size_t>(c.cols()));
  std::size_t ok = 0;
  for (Eigen::Index k = 0; k < c.cols(); ++k) {
    double weight = 0.0;
    for (Eigen::Index r : tail_rows) weight += c(r, k) * c(r, k);
    const bool converged = weight < tol;
    report.flags[static_cast<std::size_t>(k)] = converged;
    ok += converged ? 1 : 0;
  }
  report.converged_fraction =
      c.cols() > 0 ? static_cast<double>(ok) / static_cast<double>(c.cols()) : 0.0;
  return report;
}

// --- cache ------------------------------------------------------------------

namespace {

constexpr std::array<char, 8> kMagic{'E', 'D', 'K', 'S', 'P', 'E', 'C', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& buf, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  buf.append(bytes, sizeof(T));
}

template <typename T>
bool get(std::istream& in, T& value) {
  char bytes[sizeof(T)];
  if (!in.read(bytes, sizeof(T))) return false;
  std::memcpy(&value, bytes, sizeof(T));
  return true;
}

std::string key_bytes(const ModelParams& p, Parity sector) {
  std::string buf(kMagic.data(), kMagic.size());
  put<std::uint32_t>(buf, kVersion);
  put<std::uint32_t>(buf, sector == Parity::Even ? 0u : 1u);
  for (double v : {p.omega, p.omega0, p.lambda, p.kappa, p.j}) put<double>(buf, v);
  put<std::int64_t>(buf, p.n_cutoff);
  for (double v : {p.energy_window.lo, p.energy_window.hi, p.mid_window.lo, p.mid_window.hi}) {
    put<double>(buf, v);
  }
  return buf;
}

}  // namespace

std::uint64_t params_hash(const ModelParams& params, Parity sector) {
  // FNV-1a over the serialized key.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : key_bytes(params, sector)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_spectrum_file(const std::filesystem::path& path, const ModelParams& params,
                         Parity sector, const CachedSpectrum& spectrum) {
  std::string buf = key_bytes(params, sector);
  put<std::uint64_t>(buf, static_cast<std::uint64_t>(spectrum.energies.size()));
  buf.append(reinterpret_cast<const char*>(spectrum.energies.data()),
             static_cast<std::size_t>(spectrum.energies.size()) * sizeof(double));
  const auto rows = spectrum.window_vectors ? spectrum.window_vectors->rows() : 0;
  const auto cols = spectrum.window_vectors ? spectrum.window_vectors->cols() : 0;
  put<std::uint64_t>(buf, static_cast<std::uint64_t>(rows));
  put<std::uint64_t>(buf, static_cast<std::uint64_t>(cols));
  if (spectrum.window_vectors) {
    buf.append(reinterpret_cast<const char*>(spectrum.window_vectors->data()),
               static_cast<std::size_t>(rows * cols) * sizeof(double));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out.write(buf.data(), static_cast<std::streamsize>(buf.size())) || !out.flush()) {
    throw Error(ErrorCode::OutputUnwritable, "cannot write " + path.string());
  }
}

std::optional<CachedSpectrum> read_spectrum_file(const std::filesystem::path& path,
                                                 const ModelParams& params, Parity sector) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  const std::string key = key_bytes(params, sector);
  std::string header(key.size(), '\0');
  if (!in.read(header.data(), static_cast<std::streamsize>(header.size())) || header != key) {
    return std::nullopt;
  }
  std::uint64_t count = 0;
  if (!get(in, count) || count > (1ULL << 32)) return std::nullopt;
  CachedSpectrum cached;
  cached.energies.resize(static_cast<Eigen::Index>(count));
  if (!in.read(reinterpret_cast<char*>(cached.energies.data()),
               static_cast<std::streamsize>(count * sizeof(double)))) {
    return std::nullopt;
  }
  std::uint64_t rows = 0, cols = 0;
  if (!get(in, rows) || !get(in, cols) || rows > (1ULL << 32) || cols > (1ULL << 32)) {
    return std::nullopt;
  }
  if (cols > 0) {
    Eigen::MatrixXd vecs(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    if (!in.read(reinterpret_cast<char*>(vecs.data()),
                 static_cast<std::streamsize>(rows * cols * sizeof(double)))) {
      return std::nullopt;
    }
    cached.window_vectors = std::move(vecs);
  }
  return cached;
}

SpectrumCache::SpectrumCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path SpectrumCache::path_for(const ModelParams& params, Parity sector) const {
  char name[32];
  std::snprintf(name, sizeof(name), "%016llx.edspec",
                static_cast<unsigned long long>(params_hash(params, sector)));
  return dir_ / name;
}

std::optional<CachedSpectrum> SpectrumCache::load(const ModelParams& params, Parity sector,
                                                  bool need_vectors) const {
  auto cached = read_spectrum_file(path_for(params, sector), params, sector);
  if (cached && need_vectors && !cached->window_vectors) return std::nullopt;
  return cached;
}

void SpectrumCache::store(const ModelParams& params, Parity sector,
                          const CachedSpectrum& spectrum) const {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::OutputUnwritable, "cannot create " + dir_.string());
  const auto final_path = path_for(params, sector);
  std::random_device rd;
  auto tmp = final_path;
  tmp += ".tmp" + std::to_string(rd());
  write_spectrum_file(tmp, params, sector, spectrum);
  std::filesystem::rename(tmp, final_path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::OutputUnwritable, "cannot publish " + final_path.string());
  }
}

SpectralDataset dataset_from_cache(const CachedSpectrum& cached, const ModelParams& params,
                                   Parity sector) {
  Eigendecomposition eig{cached.energies, std::nullopt};
  SpectralDataset ds = filter_energy_window(eig, params, sector);
  if (cached.window_vectors) {
    if (cached.window_vectors->cols() != ds.size() ||
        cached.window_vectors->rows() != ds.full_dim) {
      throw Error(ErrorCode::MalformedInput, "cached vectors do not match the energy window");
    }
    ds.coefficients = *cached.window_vectors;
  }
  return ds;
}

}  // namespace edicke
