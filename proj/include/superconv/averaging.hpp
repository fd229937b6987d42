#pragma once

#include <limits>
#include <vector>

#include "superconv/linalg.hpp"

namespace superconv {

/// Average of B along the flow of A, and the primitive that solves the
/// homological equation:
///   (i/hbar)[b_bar, A] = 0,   (i/hbar)[s_of_b, A] = b_bar - B.
struct AveragingResult {
  HermitianMatrix b_bar;
  HermitianMatrix s_of_b;
  std::vector<std::vector<std::size_t>> blocks;
  /// Smallest |E_j - E_k| over pairs in different blocks (infinity if one block).
  double min_gap = std::numeric_limits<double>::infinity();
};

/// Smallest eigenvalue gap between distinct degeneracy blocks.
inline double min_block_gap(const SpectralData& a) {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t b = 1; b < a.blocks.size(); ++b) {
    // eigenvalues are sorted up to deg_tol inside blocks: compare extreme members
    double hi_prev = -std::numeric_limits<double>::infinity();
    for (std::size_t i : a.blocks[b - 1]) hi_prev = std::max(hi_prev, a.eigenvalues[i]);
    double lo_cur = std::numeric_limits<double>::infinity();
    for (std::size_t i : a.blocks[b]) lo_cur = std::min(lo_cur, a.eigenvalues[i]);
    g = std::min(g, lo_cur - hi_prev);
  }
  return g;
}

/// Closed-form time average for a finite Hermitian A given by its spectral data.
///
/// In A's eigenbasis b_bar keeps the entries of B inside each degeneracy
/// block and s_of_b has entries (hbar/i) B_jk / (E_j - E_k) between blocks.
/// Any pair in different blocks closer than `gap_guard` raises
/// SmallDenominatorError.
inline AveragingResult average(const SpectralData& a, const HermitianMatrix& b, double hbar,
                               double gap_guard) {
  const std::size_t n = a.dim();
  a.eigenvectors.check_same(b.matrix(), "average");
  if (!(hbar > 0.0)) throw ValidationError("hbar must be positive");

  AveragingResult r;
  r.blocks = a.blocks;
  r.min_gap = min_block_gap(a);

  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j + 1; k < n; ++k) {
      if (a.block_of[j] == a.block_of[k]) continue;
      const double gap = std::abs(a.eigenvalues[j] - a.eigenvalues[k]);
      if (gap <= gap_guard) throw SmallDenominatorError(j, k, gap, gap_guard);
    }

  const Matrix& v = a.eigenvectors;
  const Matrix bt = to_basis(b.matrix(), v);
  Matrix avg(n), prim(n);
  const cplx factor = hbar / I_UNIT;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      if (a.block_of[j] == a.block_of[k]) {
        avg(j, k) = bt(j, k);
      } else {
        prim(j, k) = factor * bt(j, k) / (a.eigenvalues[j] - a.eigenvalues[k]);
      }
    }
  r.b_bar = HermitianMatrix::trusted(from_basis(avg, v));
  r.s_of_b = HermitianMatrix::trusted(from_basis(prim, v));
  return r;
}

/// average() with the guard taken relative to the spectrum's scale.
inline AveragingResult average(const SpectralData& a, const HermitianMatrix& b, double hbar,
                               const Tolerances& tol = {}) {
  return average(a, b, hbar, tol.gap_guard_rel * a.scale());
}

}  // namespace superconv
