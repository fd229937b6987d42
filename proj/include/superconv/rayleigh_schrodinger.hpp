#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "superconv/linalg.hpp"

namespace superconv {

inline constexpr int kMaxRsOrder = 4;

/// Nondegenerate Rayleigh-Schroedinger corrections for one level of
/// H(eps) = H0 + eps V, as plain power-series coefficients:
///   E(eps) = e0 + sum_l c_l eps^l.
struct RsCorrections {
  std::size_t level = 0;
  double e0 = 0.0;
  int max_order = 0;
  std::array<double, kMaxRsOrder + 1> c{};  // c[0] unused (== 0)

  /// Cumulative energy through `order` (<= max_order).
  double energy(double eps, int order) const {
    if (order < 0 || order > max_order)
      throw StructuralError("RS order " + std::to_string(order) + " not computed");
    double e = e0, w = 1.0;
    for (int l = 1; l <= order; ++l) {
      w *= eps;
      e += c[l] * w;
    }
    return e;
  }
  double energy(double eps) const { return energy(eps, max_order); }

  /// l! c_l, the coefficient in the factorial grading.
  double factorial_graded(int l) const {
    double f = 1.0;
    for (int i = 2; i <= l; ++i) f *= i;
    return f * c.at(l);
  }

  /// Largest |Im| seen while forming the coefficients.
  double imag_defect = 0.0;
};

/// Corrections for `level` (an index into h0's ascending eigenvalues) up to
/// `max_order` <= 4, from the intermediate-normalisation recursion
///   E_k = <n|V|psi_{k-1}>,
///   psi_k = R (V psi_{k-1} - sum_{l=1}^{k-1} E_l psi_{k-l}),
///   R = sum_{m != n} |m><m| / (E_n - E_m).
/// Throws ValidationError if the level is within gap_guard of another one.
inline RsCorrections rs_corrections(const SpectralData& h0, const HermitianMatrix& v,
                                    int max_order, std::size_t level, double gap_guard) {
  const std::size_t n = h0.dim();
  h0.eigenvectors.check_same(v.matrix(), "rs_corrections");
  if (max_order < 1 || max_order > kMaxRsOrder)
    throw ValidationError("RS order must lie in [1, " + std::to_string(kMaxRsOrder) + "]");
  if (level >= n)
    throw StructuralError("level " + std::to_string(level) + " outside dimension " +
                          std::to_string(n));

  const double en = h0.eigenvalues[level];
  std::vector<double> inv_gap(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    if (m == level) continue;
    const double g = en - h0.eigenvalues[m];
    if (std::abs(g) <= gap_guard)
      throw ValidationError("level " + std::to_string(level) + " is degenerate with level " +
                            std::to_string(m) + " (gap " + std::to_string(std::abs(g)) +
                            "); degenerate Rayleigh-Schroedinger is not supported");
    inv_gap[m] = 1.0 / g;
  }

  const Matrix vt = to_basis(v.matrix(), h0.eigenvectors);
  auto apply_v = [&](const std::vector<cplx>& x) {
    return matvec(vt, x);
  };

  RsCorrections out;
  out.level = level;
  out.e0 = en;
  out.max_order = max_order;

  std::vector<std::vector<cplx>> psi;
  psi.emplace_back(n);
  psi[0][level] = 1.0;
  std::vector<cplx> e(max_order + 1);
  for (int k = 1; k <= max_order; ++k) {
    const auto vpsi = apply_v(psi[k - 1]);
    e[k] = vpsi[level];
    out.c[k] = e[k].real();
    out.imag_defect = std::max(out.imag_defect, std::abs(e[k].imag()));
    if (k == max_order) break;
    std::vector<cplx> next(n);
    for (std::size_t m = 0; m < n; ++m) {
      if (m == level) continue;
      cplx s = vpsi[m];
      for (int l = 1; l < k; ++l) s -= e[l] * psi[k - l][m];
      next[m] = s * inv_gap[m];
    }
    psi.push_back(std::move(next));
  }
  return out;
}

/// rs_corrections with the guard relative to the spectrum's scale.
inline RsCorrections rs_corrections(const SpectralData& h0, const HermitianMatrix& v,
                                    int max_order, std::size_t level,
                                    const Tolerances& tol = {}) {
  return rs_corrections(h0, v, max_order, level, tol.gap_guard_rel * h0.scale());
}

}  // namespace superconv
