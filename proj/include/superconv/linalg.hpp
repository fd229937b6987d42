#pragma once

// Dense complex matrices, the Hermitian strong type and a cyclic Jacobi
// eigensolver. Everything else in the library is built on this header.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "superconv/errors.hpp"

namespace superconv {

using cplx = std::complex<double>;

inline constexpr cplx I_UNIT{0.0, 1.0};

/// Square dense complex matrix, row-major.
class Matrix {
public:
  Matrix() = default;
  explicit Matrix(std::size_t n) : n_(n), data_(n * n) {}
  Matrix(std::size_t n, std::vector<cplx> data) : n_(n), data_(std::move(data)) {
    if (data_.size() != n_ * n_) {
      throw StructuralError("matrix data length " + std::to_string(data_.size()) +
                            " does not match dimension " + std::to_string(n_));
    }
  }

  static Matrix zero(std::size_t n) { return Matrix(n); }

  static Matrix identity(std::size_t n) {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(std::span<const double> d) {
    Matrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t dim() const noexcept { return n_; }
  bool empty() const noexcept { return n_ == 0; }

  cplx& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const noexcept {
    return data_[i * n_ + j];
  }

  std::span<const cplx> data() const noexcept { return data_; }
  std::span<cplx> data() noexcept { return data_; }

  Matrix& operator+=(const Matrix& o) {
    check_same(o, "+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same(o, "-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Matrix& operator*=(cplx s) noexcept {
    for (auto& x : data_) x *= s;
    return *this;
  }

  /// this += s * o
  Matrix& axpy(cplx s, const Matrix& o) {
    check_same(o, "axpy");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
    return *this;
  }

  void check_same(const Matrix& o, const char* what) const {
    if (o.n_ != n_) {
      throw StructuralError(std::string("dimension mismatch in ") + what + ": " +
                            std::to_string(n_) + " vs " + std::to_string(o.n_));
    }
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  std::size_t n_ = 0;
  std::vector<cplx> data_;
};

inline Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
inline Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
inline Matrix operator*(cplx s, Matrix a) { return a *= s; }
inline Matrix operator*(Matrix a, cplx s) { return a *= s; }

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  a.check_same(b, "matmul");
  const std::size_t n = a.dim();
  Matrix c(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx{}) continue;
      for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

inline Matrix adjoint(const Matrix& a) {
  const std::size_t n = a.dim();
  Matrix r(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r(j, i) = std::conj(a(i, j));
  return r;
}

inline double max_norm(const Matrix& a) noexcept {
  double m = 0.0;
  for (const auto& x : a.data()) m = std::max(m, std::abs(x));
  return m;
}

inline cplx trace(const Matrix& a) noexcept {
  cplx t{};
  for (std::size_t i = 0; i < a.dim(); ++i) t += a(i, i);
  return t;
}

/// max |a_jk - conj(a_kj)|
inline double hermitian_defect(const Matrix& a) noexcept {
  double d = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = i; j < a.dim(); ++j)
      d = std::max(d, std::abs(a(i, j) - std::conj(a(j, i))));
  return d;
}

inline std::vector<cplx> column(const Matrix& a, std::size_t j) {
  std::vector<cplx> c(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) c[i] = a(i, j);
  return c;
}

inline std::vector<cplx> matvec(const Matrix& a, std::span<const cplx> v) {
  if (v.size() != a.dim()) throw StructuralError("matrix-vector dimension mismatch");
  std::vector<cplx> r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    cplx s{};
    for (std::size_t j = 0; j < a.dim(); ++j) s += a(i, j) * v[j];
    r[i] = s;
  }
  return r;
}

inline cplx inner(std::span<const cplx> u, std::span<const cplx> v) {
  cplx s{};
  for (std::size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * v[i];
  return s;
}

inline double norm2(std::span<const cplx> v) { return std::sqrt(std::real(inner(v, v))); }

/// Complex self-adjoint matrix. Stored exactly Hermitian: construction
/// validates the input and then replaces it by (M + M^H)/2.
class HermitianMatrix {
public:
  HermitianMatrix() = default;

  /// Throws ValidationError when the defect exceeds tol * max(1, |M|_max),
  /// naming the worst offending pair.
  explicit HermitianMatrix(Matrix m, double tol = 1e-10) : m_(std::move(m)) {
    const double scale = std::max(1.0, max_norm(m_));
    double worst = 0.0;
    std::size_t wj = 0, wk = 0;
    for (std::size_t j = 0; j < m_.dim(); ++j)
      for (std::size_t k = j; k < m_.dim(); ++k) {
        const double d = std::abs(m_(j, k) - std::conj(m_(k, j)));
        if (d > worst) worst = d, wj = j, wk = k;
      }
    if (worst > tol * scale) {
      std::ostringstream os;
      os.precision(17);
      os << "matrix is not Hermitian: entry (" << wj << "," << wk << ") differs from conj("
         << wk << "," << wj << ") by " << worst;
      throw ValidationError(os.str());
    }
    symmetrize();
  }

  static HermitianMatrix zero(std::size_t n) { return trusted(Matrix(n)); }
  static HermitianMatrix identity(std::size_t n) { return trusted(Matrix::identity(n)); }
  static HermitianMatrix diagonal(std::span<const double> d) {
    return trusted(Matrix::diagonal(d));
  }

  /// Hermitian part of a matrix known to be Hermitian up to rounding.
  static HermitianMatrix trusted(Matrix m) {
    HermitianMatrix h;
    h.m_ = std::move(m);
    h.symmetrize();
    return h;
  }

  std::size_t dim() const noexcept { return m_.dim(); }
  const Matrix& matrix() const noexcept { return m_; }
  const cplx& operator()(std::size_t i, std::size_t j) const noexcept { return m_(i, j); }

  bool is_zero() const noexcept {
    return std::all_of(m_.data().begin(), m_.data().end(),
                       [](const cplx& x) { return x == cplx{}; });
  }

  HermitianMatrix& operator+=(const HermitianMatrix& o) {
    m_ += o.m_;
    return *this;
  }
  HermitianMatrix& operator-=(const HermitianMatrix& o) {
    m_ -= o.m_;
    return *this;
  }
  HermitianMatrix& operator*=(double s) noexcept {
    m_ *= s;
    return *this;
  }
  HermitianMatrix& axpy(double s, const HermitianMatrix& o) {
    m_.axpy(s, o.m_);
    return *this;
  }

  friend bool operator==(const HermitianMatrix&, const HermitianMatrix&) = default;

private:
  void symmetrize() noexcept {
    const std::size_t n = m_.dim();
    for (std::size_t i = 0; i < n; ++i) {
      m_(i, i) = m_(i, i).real();
      for (std::size_t j = i + 1; j < n; ++j) {
        const cplx avg = 0.5 * (m_(i, j) + std::conj(m_(j, i)));
        m_(i, j) = avg;
        m_(j, i) = std::conj(avg);
      }
    }
  }

  Matrix m_;
};

inline HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
inline HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
inline HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }

inline HermitianMatrix adjoint(const HermitianMatrix& a) { return a; }
inline double max_norm(const HermitianMatrix& a) noexcept { return max_norm(a.matrix()); }

/// ad_W(A) = (i/hbar) [W, A]
inline HermitianMatrix commutator_ad(const HermitianMatrix& w, const HermitianMatrix& a,
                                     double hbar) {
  w.matrix().check_same(a.matrix(), "commutator_ad");
  if (!(hbar > 0.0)) throw ValidationError("hbar must be positive");
  Matrix c = w.matrix() * a.matrix();
  c -= a.matrix() * w.matrix();
  c *= I_UNIT / hbar;
  return HermitianMatrix::trusted(std::move(c));
}

/// V^H A V for unitary V (basis change into V's columns).
inline Matrix to_basis(const Matrix& a, const Matrix& v) { return adjoint(v) * (a * v); }
/// V A V^H, the inverse of to_basis.
inline Matrix from_basis(const Matrix& a, const Matrix& v) { return v * (a * adjoint(v)); }

// ---------------------------------------------------------------------------
// Eigensolver

/// Eigen-decomposition of a Hermitian matrix with its degeneracy partition.
struct SpectralData {
  std::vector<double> eigenvalues;  // ascending (within a block: see eigh)
  Matrix eigenvectors;              // columns
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<std::size_t> block_of;  // index -> block number
  double deg_tol = 0.0;
  int sweeps = 0;

  std::size_t dim() const noexcept { return eigenvalues.size(); }

  double spectral_range() const noexcept {
    return eigenvalues.empty() ? 0.0
                               : *std::max_element(eigenvalues.begin(), eigenvalues.end()) -
                                     *std::min_element(eigenvalues.begin(), eigenvalues.end());
  }

  /// max(range, max |lambda|); the scale relative tolerances refer to.
  double scale() const noexcept {
    double m = 0.0;
    for (double x : eigenvalues) m = std::max(m, std::abs(x));
    return std::max(spectral_range(), m);
  }
};

inline constexpr double kJacobiTolerance = 1e-13;
inline constexpr int kJacobiMaxSweeps = 100;

namespace detail {

/// Cyclic complex Jacobi on a full copy of `a`. Returns the sweep count.
/// On exit `a` is diagonal up to kJacobiTolerance * |A|_max and v holds the rotations.
inline int jacobi_diagonalize(Matrix& a, Matrix& v) {
  const std::size_t n = a.dim();
  v = Matrix::identity(n);
  const double scale = max_norm(a);
  if (scale == 0.0) return 0;
  const double target = kJacobiTolerance * scale;
  const double skip = 1e-3 * target;

  auto off_max = [&] {
    double m = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) m = std::max(m, std::abs(a(p, q)));
    return m;
  };

  for (int sweep = 0; sweep <= kJacobiMaxSweeps; ++sweep) {
    if (off_max() <= target) return sweep;
    if (sweep == kJacobiMaxSweeps) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx z = a(p, q);
        const double r = std::abs(z);
        if (r <= skip) continue;
        const cplx e = z / r;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * r);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const cplx ce = std::conj(e);

        // A <- A J, V <- V J with J = [[c, s], [-s conj(e), c conj(e)]]
        for (std::size_t k = 0; k < n; ++k) {
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * ce * akq;
          a(k, q) = s * akp + c * ce * akq;
          const cplx vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * ce * vkq;
          v(k, q) = s * vkp + c * ce * vkq;
        }
        // A <- J^H A
        for (std::size_t k = 0; k < n; ++k) {
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * e * aqk;
          a(q, k) = s * apk + c * e * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = app - t * r;
        a(q, q) = aqq + t * r;
      }
    }
  }
  throw NumericalError("Jacobi eigensolver did not converge in " +
                       std::to_string(kJacobiMaxSweeps) + " sweeps");
}

inline std::size_t dominant_index(const Matrix& v, std::size_t col) {
  double best = 0.0;
  for (std::size_t i = 0; i < v.dim(); ++i) best = std::max(best, std::abs(v(i, col)));
  for (std::size_t i = 0; i < v.dim(); ++i)
    if (std::abs(v(i, col)) >= best * (1.0 - 1e-12)) return i;
  return 0;
}

}  // namespace detail

/// Partition sorted eigenvalues into chains whose neighbouring gaps are <= tol.
inline void form_blocks(SpectralData& sd, double deg_tol) {
  sd.deg_tol = deg_tol;
  sd.blocks.clear();
  sd.block_of.assign(sd.eigenvalues.size(), 0);
  for (std::size_t i = 0; i < sd.eigenvalues.size(); ++i) {
    if (i == 0 || std::abs(sd.eigenvalues[i] - sd.eigenvalues[i - 1]) > deg_tol)
      sd.blocks.emplace_back();
    sd.blocks.back().push_back(i);
    sd.block_of[i] = sd.blocks.size() - 1;
  }
}

namespace detail {

/// Sort, block and phase the output of jacobi_diagonalize.
inline SpectralData assemble(const Matrix& work, const Matrix& v, double deg_tol, int sweeps) {
  const std::size_t n = work.dim();
  SpectralData sd;
  sd.sweeps = sweeps;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return work(x, x).real() < work(y, y).real();
  });
  sd.eigenvalues.resize(n);
  for (std::size_t i = 0; i < n; ++i) sd.eigenvalues[i] = work(order[i], order[i]).real();
  form_blocks(sd, deg_tol);

  // Tie-break inside blocks by dominant basis index.
  std::vector<std::size_t> dom(n);
  for (std::size_t i = 0; i < n; ++i) dom[i] = dominant_index(v, order[i]);
  std::vector<std::size_t> final_order;
  final_order.reserve(n);
  for (const auto& blk : sd.blocks) {
    std::vector<std::size_t> members(blk);
    std::stable_sort(members.begin(), members.end(),
                     [&](std::size_t x, std::size_t y) { return dom[x] < dom[y]; });
    for (std::size_t m : members) final_order.push_back(m);
  }

  std::vector<double> vals(n);
  sd.eigenvectors = Matrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = order[final_order[i]];
    vals[i] = work(src, src).real();
    const std::size_t d = dom[final_order[i]];
    const cplx ph = v(d, src) == cplx{} ? cplx{1.0} : std::conj(v(d, src)) / std::abs(v(d, src));
    for (std::size_t r = 0; r < n; ++r) sd.eigenvectors(r, i) = v(r, src) * ph;
    sd.eigenvectors(d, i) = std::abs(v(d, src));
  }
  sd.eigenvalues = std::move(vals);
  return sd;
}

}  // namespace detail

/// Eigen-decomposition of a Hermitian matrix.
///
/// Eigenvalues come out ascending. Inside a degeneracy block (chain of gaps
/// <= deg_tol) columns are ordered by the earliest basis index at which the
/// eigenvector is dominant, so values may be non-monotone there by at most
/// deg_tol. Each column is phased so its dominant component is real positive.
inline SpectralData eigh(const HermitianMatrix& a, double deg_tol) {
  if (!(deg_tol >= 0.0)) throw ValidationError("deg_tol must be nonnegative");
  Matrix work = a.matrix();
  Matrix v;
  const int sweeps = detail::jacobi_diagonalize(work, v);
  return detail::assemble(work, v, deg_tol, sweeps);
}

/// Tolerances scaled to the matrix at hand.
struct Tolerances {
  double deg_tol_rel = 1e-9;    // block formation, relative to SpectralData::scale()
  double gap_guard_rel = 1e-6;  // small-denominator guard, same scale
};

/// eigh with deg_tol = tol.deg_tol_rel * max(spectral range, max |lambda|).
inline SpectralData spectral_decomposition(const HermitianMatrix& a, const Tolerances& tol = {}) {
  Matrix work = a.matrix();
  Matrix v;
  const int sweeps = detail::jacobi_diagonalize(work, v);
  double lo = 0.0, hi = 0.0, mx = 0.0;
  for (std::size_t i = 0; i < work.dim(); ++i) {
    const double x = work(i, i).real();
    lo = i == 0 ? x : std::min(lo, x);
    hi = i == 0 ? x : std::max(hi, x);
    mx = std::max(mx, std::abs(x));
  }
  return detail::assemble(work, v, tol.deg_tol_rel * std::max(hi - lo, mx), sweeps);
}

}  // namespace superconv
