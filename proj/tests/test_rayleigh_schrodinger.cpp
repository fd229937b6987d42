#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <random>

#include "superconv/models.hpp"
#include "superconv/rayleigh_schrodinger.hpp"
#include "test_support.hpp"

using namespace superconv;
using superconv::testing::random_hermitian;
using superconv::testing::random_linear_model;

namespace {

/// Coefficients a_0..a_8 of the interpolating polynomial through (x_i, y_i).
std::array<long double, 9> interpolate9(const std::array<long double, 9>& x,
                                         const std::array<long double, 9>& y) {
  std::array<std::array<long double, 10>, 9> m{};
  for (int i = 0; i < 9; ++i) {
    long double p = 1.0L;
    for (int j = 0; j < 9; ++j) {
      m[i][j] = p;
      p *= x[i];
    }
    m[i][9] = y[i];
  }
  for (int c = 0; c < 9; ++c) {
    int piv = c;
    for (int r = c + 1; r < 9; ++r)
      if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
    std::swap(m[c], m[piv]);
    for (int r = 0; r < 9; ++r) {
      if (r == c) continue;
      const long double f = m[r][c] / m[c][c];
      for (int k = c; k < 10; ++k) m[r][k] -= f * m[c][k];
    }
  }
  std::array<long double, 9> a{};
  for (int i = 0; i < 9; ++i) a[i] = m[i][9] / m[i][i];
  return a;
}

/// Exact eigenvalue of H0 + eps V for the level that is `level` in the unperturbed ordering.
double exact_level(const ModelSpec& m, double eps, std::size_t level) {
  return eigh(m.at(eps), 0.0).eigenvalues.at(level);
}

}  // namespace

TEST_CASE("diagonal perturbation has only a first-order correction") {
  const auto h0 = eigh(HermitianMatrix::diagonal(std::vector<double>{0, 1, 3, 4}), 1e-12);
  const auto v = HermitianMatrix::diagonal(std::vector<double>{0.5, -1, 2, 7});
  for (std::size_t j = 0; j < 4; ++j) {
    const auto rs = rs_corrections(h0, v, 4, j, 1e-9);
    CHECK(rs.c[1] == v(j, j).real());
    for (int l = 2; l <= 4; ++l) CHECK(rs.c[l] == 0.0);
  }
}

TEST_CASE("quartic oscillator ground-state coefficients") {
  const auto m = build_quartic_oscillator(30);
  const auto rs = rs_corrections(spectral_decomposition(m.term(0)), m.term(1), 4, 0);
  const std::array<double, 5> want{0.0, 3.0 / 4, -21.0 / 16, 333.0 / 64, -30885.0 / 1024};
  CHECK(rs.e0 == 1.0);
  for (int l = 1; l <= 4; ++l) {
    INFO("c" << l << " = " << rs.c[l]);
    CHECK(std::abs(rs.c[l] - want[l]) <= 1e-9 * std::abs(want[l]));
  }
  CHECK(rs.factorial_graded(2) == Catch::Approx(-21.0 / 8).epsilon(1e-12));
  CHECK(rs.energy(0.1, 2) == Catch::Approx(1 + 0.075 - 0.013125).epsilon(1e-14));
}

TEST_CASE("RS coefficients agree with a finite-eps fit of exact eigenvalues") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 4; ++trial) {
    const auto m = random_linear_model(rng, 8, 10.0, trial % 2 == 1);
    const auto sd = spectral_decomposition(m.term(0));
    for (std::size_t level : {0u, 3u, 7u}) {
      const auto rs = rs_corrections(sd, m.term(1), 4, level);
      std::array<long double, 9> x{}, y{};
      x[0] = 0.0L;
      y[0] = sd.eigenvalues[level];
      for (int i = 1; i <= 4; ++i) {
        x[2 * i - 1] = i * 1e-3L;
        x[2 * i] = -i * 1e-3L;
        y[2 * i - 1] = exact_level(m, static_cast<double>(x[2 * i - 1]), level);
        y[2 * i] = exact_level(m, static_cast<double>(x[2 * i]), level);
      }
      const auto a = interpolate9(x, y);
      for (int l = 1; l <= 4; ++l) {
        const double fit = static_cast<double>(a[l]);
        INFO("trial " << trial << " level " << level << " c" << l << " rs " << rs.c[l]
                      << " fit " << fit);
        CHECK(std::abs(fit - rs.c[l]) <= 1e-5 * std::abs(rs.c[l]));
      }
    }
  }
}

TEST_CASE("second and third order match explicit sums over states") {
  std::mt19937_64 rng(52);
  const std::size_t n = 6;
  const auto m = random_linear_model(rng, n, 0.5);
  const auto& v = m.term(1);
  std::vector<double> e(n);
  for (std::size_t k = 0; k < n; ++k) e[k] = m.term(0)(k, k).real();
  const auto sd = spectral_decomposition(m.term(0));
  for (std::size_t j = 0; j < n; ++j) {
    double e2 = 0.0, e3 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) continue;
      e2 += std::norm(v(j, k)) / (e[j] - e[k]);
      e3 -= std::norm(v(j, k)) * v(j, j).real() / ((e[j] - e[k]) * (e[j] - e[k]));
      for (std::size_t l = 0; l < n; ++l) {
        if (l == j) continue;
        e3 += (v(j, k) * v(k, l) * v(l, j)).real() / ((e[j] - e[k]) * (e[j] - e[l]));
      }
    }
    // sd columns follow the diagonal, ascending, so level index j is basis state j
    const auto rs = rs_corrections(sd, v, 3, j);
    CHECK(rs.c[2] == Catch::Approx(e2).epsilon(1e-12));
    CHECK(rs.c[3] == Catch::Approx(e3).epsilon(1e-12));
  }
}

TEST_CASE("coefficients scale as alpha^l") {
  std::mt19937_64 rng(53);
  const auto m = random_linear_model(rng, 7, 0.8, true);
  const auto sd = spectral_decomposition(m.term(0));
  const auto base = rs_corrections(sd, m.term(1), 4, 2);
  for (double alpha : {0.5, -3.0}) {
    const auto scaled = rs_corrections(sd, alpha * m.term(1), 4, 2);
    for (int l = 1; l <= 4; ++l)
      CHECK(scaled.c[l] == Catch::Approx(std::pow(alpha, l) * base.c[l]).epsilon(1e-12));
  }
}

TEST_CASE("corrections are real for Hermitian perturbations") {
  std::mt19937_64 rng(54);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = random_linear_model(rng, 9, 1.0, true);
    const auto sd = spectral_decomposition(m.term(0));
    for (std::size_t level = 0; level < 9; level += 4)
      CHECK(rs_corrections(sd, m.term(1), 4, level).imag_defect <= 1e-12);
  }
}

TEST_CASE("degenerate level is rejected") {
  const auto h0 = eigh(HermitianMatrix::diagonal(std::vector<double>{0, 1, 1, 2}), 1e-12);
  std::mt19937_64 rng(55);
  const auto v = random_hermitian(rng, 4);
  CHECK_THROWS_AS(rs_corrections(h0, v, 4, 1, 1e-6), ValidationError);
  CHECK_NOTHROW(rs_corrections(h0, v, 4, 0, 1e-6));
  CHECK_THROWS_AS(rs_corrections(h0, v, 5, 0, 1e-6), ValidationError);
  CHECK_THROWS_AS(rs_corrections(h0, v, 4, 4, 1e-6), StructuralError);
}
