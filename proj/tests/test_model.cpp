#include <doctest.h>

#include <cmath>
#include <random>

#include "edicke/error.hpp"
#include "edicke/model.hpp"

using namespace edicke;

namespace {

ModelParams make(double j, int n_cutoff, double lambda = 0.0, double kappa = 0.0) {
  ModelParams p;
  p.j = j;
  p.n_cutoff = n_cutoff;
  p.lambda = lambda;
  p.kappa = kappa;
  return p;
}

// Independent count: walk every integer label k = j + m in [0, 2j].
std::size_t brute_force_count(int two_j, int n_cutoff, bool even) {
  std::size_t count = 0;
  for (int n = 0; n <= n_cutoff; ++n)
    for (int k = 0; k <= two_j; ++k)
      if (((n + k) % 2 == 0) == even) ++count;
  return count;
}

}  // namespace

TEST_CASE("sector dimensions at j=16, Nc=320") {
  const auto p = make(16, 320);
  const auto even = enumerate_basis(p, Parity::Even);
  const auto odd = enumerate_basis(p, Parity::Odd);
  CHECK(brute_force_count(32, 320, true) == 5297);
  CHECK(brute_force_count(32, 320, false) == 5296);
  CHECK(even.size() == 5297);
  CHECK(odd.size() == 5296);
  CHECK(enumerate_full_basis(p).size() == 10593);
}

TEST_CASE("basis ordering is n-major, m-minor and parity labels are consistent") {
  for (double j : {0.5, 1.0, 2.5, 4.0}) {
    const auto p = make(j, 7);
    const auto basis = enumerate_basis(p, Parity::Even);
    CHECK(basis.size() == brute_force_count(static_cast<int>(2 * j), 7, true));
    for (std::size_t i = 1; i < basis.size(); ++i) {
      const auto& a = basis[i - 1];
      const auto& b = basis[i];
      CHECK((a.n < b.n || (a.n == b.n && a.m < b.m)));
    }
    for (const auto& s : basis) {
      CHECK(s.parity == Parity::Even);
      CHECK(std::lround(j + s.m + s.n) % 2 == 0);
      CHECK(s.m >= -j);
      CHECK(s.m <= j);
    }
  }
}

TEST_CASE("spin one-half with no photons has a single even state") {
  // j + m + n = 0 for m = -1/2, n = 0.
  const auto basis = enumerate_basis(make(0.5, 0), Parity::Even);
  REQUIRE(basis.size() == 1);
  CHECK(basis[0].n == 0);
  CHECK(basis[0].m == -0.5);
  const auto odd = enumerate_basis(make(0.5, 0), Parity::Odd);
  REQUIRE(odd.size() == 1);
  CHECK(odd[0].m == 0.5);
}

TEST_CASE("hamiltonian_element hand-evaluated values") {
  auto p = make(16, 320, 0.1, 0.7);
  SUBCASE("diagonal") {
    const BasisState s{2, -16.0, Parity::Even};
    CHECK(hamiltonian_element(p, s, s) == doctest::Approx(-8.4).epsilon(1e-14));
  }
  SUBCASE("off-diagonal n 0->1, m -16->-15") {
    const BasisState bra{1, -15.0, Parity::Even};
    const BasisState ket{0, -16.0, Parity::Even};
    CHECK(hamiltonian_element(p, bra, ket) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(hamiltonian_element(p, ket, bra) == hamiltonian_element(p, bra, ket));
  }
  SUBCASE("lambda = 0 kills every n-changing element") {
    p.lambda = 0.0;
    for (int n = 0; n < 5; ++n)
      for (double m = -16; m < 16; m += 1.0) {
        CHECK(hamiltonian_element(p, {n + 1, m + 1, Parity::Even}, {n, m, Parity::Even}) == 0.0);
        CHECK(hamiltonian_element(p, {n + 1, m, Parity::Even}, {n, m, Parity::Even}) == 0.0);
      }
  }
  SUBCASE("selection rule") {
    CHECK(hamiltonian_element(p, {3, 0, Parity::Even}, {1, 0, Parity::Even}) == 0.0);
    CHECK(hamiltonian_element(p, {2, 1, Parity::Even}, {1, -1, Parity::Even}) == 0.0);
    CHECK(hamiltonian_element(p, {2, 0, Parity::Even}, {1, 0, Parity::Even}) == 0.0);
  }
}

TEST_CASE("uncoupled, non-interacting Hamiltonian is diag(n + m)") {
  const auto p = make(3, 12);
  const auto h = build_hamiltonian(p, Parity::Even);
  for (Eigen::Index c = 0; c < h.dim(); ++c) {
    const auto& s = h.basis[static_cast<std::size_t>(c)];
    for (Eigen::Index r = 0; r < h.dim(); ++r) {
      CHECK(h.entries(r, c) == (r == c ? s.n + s.m : 0.0));
    }
  }
}

TEST_CASE("parallel assembly matches the all-pairs serial reference bit for bit") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 12; ++trial) {
    ModelParams p = make(0.5 * static_cast<int>(1 + rng() % 12), static_cast<int>(1 + rng() % 15),
                         u(rng), u(rng));
    p.omega = 0.1 + u(rng);
    p.omega0 = 0.1 + u(rng);
    for (Parity sector : {Parity::Even, Parity::Odd}) {
      const auto fast = build_hamiltonian(p, sector);
      const auto ref = build_hamiltonian_reference(p, enumerate_basis(p, sector));
      CHECK(fast.basis == ref.basis);
      CHECK((fast.entries.array() == ref.entries.array()).all());
    }
  }
}

TEST_CASE("assembled matrices are exactly symmetric and obey the selection rule") {
  const auto p = make(5, 30, 0.8, 1.3);
  const auto h = build_hamiltonian(p, Parity::Even);
  CHECK((h.entries.array() == h.entries.transpose().array()).all());
  for (Eigen::Index c = 0; c < h.dim(); ++c)
    for (Eigen::Index r = 0; r < h.dim(); ++r) {
      if (r == c || h.entries(r, c) == 0.0) continue;
      const auto& a = h.basis[static_cast<std::size_t>(r)];
      const auto& b = h.basis[static_cast<std::size_t>(c)];
      CHECK(std::abs(a.n - b.n) == 1);
      CHECK(std::abs(a.m - b.m) == 1.0);
    }
}

TEST_CASE("full-size sector matrix is banded") {
  const auto p = make(16, 320, 1.0, 0.5);
  const auto h = build_hamiltonian(p, Parity::Even);
  REQUIRE(h.dim() == 5297);
  Eigen::Index bandwidth = 0;
  std::size_t nonzero_offdiag = 0;
  for (Eigen::Index c = 0; c < h.dim(); ++c)
    for (Eigen::Index r = 0; r < h.dim(); ++r)
      if (r != c && h.entries(r, c) != 0.0) {
        bandwidth = std::max(bandwidth, std::abs(r - c));
        ++nonzero_offdiag;
      }
  // A layer of fixed n holds at most 17 even states; (n+1, m+1) sits at most
  // one layer plus one slot away.
  CHECK(bandwidth <= 33);
  CHECK(bandwidth > 0);
  CHECK(nonzero_offdiag <= 4 * 5297);
}

TEST_CASE("unprojected basis: opposite parities never couple") {
  const auto p = make(4, 20, 0.9, 0.6);
  const auto h = build_hamiltonian(p, enumerate_full_basis(p));
  REQUIRE(h.dim() == 21 * 9);
  std::size_t cross = 0;
  for (Eigen::Index c = 0; c < h.dim(); ++c)
    for (Eigen::Index r = 0; r < h.dim(); ++r)
      if (h.basis[static_cast<std::size_t>(r)].parity != h.basis[static_cast<std::size_t>(c)].parity &&
          h.entries(r, c) != 0.0)
        ++cross;
  CHECK(cross == 0);
}

TEST_CASE("matrix elements scale linearly with a common energy factor") {
  const auto p = make(3.5, 9, 0.45, 0.8);
  auto q = p;
  const double c = 2.75;
  q.omega *= c;
  q.omega0 *= c;
  q.lambda *= c;
  q.kappa *= c;
  const auto hp = build_hamiltonian(p, Parity::Odd);
  const auto hq = build_hamiltonian(q, Parity::Odd);
  CHECK(((hq.entries - c * hp.entries).cwiseAbs().maxCoeff()) <= 1e-13);
}

TEST_CASE("dimension cap") {
  const auto p = make(16, 320);
  CHECK_THROWS_AS(build_hamiltonian(p, Parity::Even, BuildOptions{1000}), Error);
  try {
    build_hamiltonian(p, Parity::Even, BuildOptions{1000});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AllocationTooLarge);
  }
}

TEST_CASE("parameter validation") {
  auto expect_invalid = [](ModelParams p) {
    try {
      p.validate();
      FAIL("expected InvalidParams");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidParams);
    }
  };
  ModelParams p;
  CHECK_NOTHROW(p.validate());
  CHECK(p.n_atoms() == 32);
  auto q = p;
  q.omega = 0;
  expect_invalid(q);
  q = p;
  q.omega0 = -1;
  expect_invalid(q);
  q = p;
  q.lambda = -0.1;
  expect_invalid(q);
  q = p;
  q.kappa = -0.1;
  expect_invalid(q);
  q = p;
  q.j = 2.3;
  expect_invalid(q);
  q = p;
  q.n_cutoff = 0;
  expect_invalid(q);
  q = p;
  q.energy_window = {1.0, 1.0};
  expect_invalid(q);
  q = p;
  q.mid_window = {2.0, 1.0};
  expect_invalid(q);
  q = p;
  q.j = 7.5;
  CHECK_NOTHROW(q.validate());
  CHECK(q.n_atoms() == 15);
}
