#pragma once

// Operator series in the factorial grading  sum_p eps^p/p! A_p,  the
// adjoint-flow expansion T_p of a generator series and the vector-level
// unitary expansion U_p.

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "superconv/linalg.hpp"

namespace superconv {

inline constexpr int kMaxOrder = 62;

namespace detail {

inline const std::array<std::array<double, kMaxOrder + 1>, kMaxOrder + 1>& binomial_table() {
  static const auto table = [] {
    std::array<std::array<std::uint64_t, kMaxOrder + 1>, kMaxOrder + 1> exact{};
    for (int n = 0; n <= kMaxOrder; ++n) {
      exact[n][0] = exact[n][n] = 1;
      for (int k = 1; k < n; ++k) exact[n][k] = exact[n - 1][k - 1] + exact[n - 1][k];
    }
    std::array<std::array<double, kMaxOrder + 1>, kMaxOrder + 1> out{};
    for (int n = 0; n <= kMaxOrder; ++n)
      for (int k = 0; k <= n; ++k) out[n][k] = static_cast<double>(exact[n][k]);
    return out;
  }();
  return table;
}

}  // namespace detail

/// C(n, k) for 0 <= k <= n <= 62, computed in exact integer arithmetic.
inline double binomial(int n, int k) {
  if (n < 0 || n > kMaxOrder || k < 0 || k > n)
    throw StructuralError("binomial(" + std::to_string(n) + "," + std::to_string(k) +
                          ") out of range");
  return detail::binomial_table()[n][k];
}

inline void check_order(int order) {
  if (order < 0 || order > kMaxOrder)
    throw ValidationError("series order " + std::to_string(order) + " outside [0, " +
                          std::to_string(kMaxOrder) + "]");
}

/// sum_{p<=P} eps^p/p! A_p  with Hermitian coefficients of one dimension.
class OperatorSeries {
public:
  OperatorSeries() = default;

  OperatorSeries(std::vector<HermitianMatrix> coeffs, double hbar)
      : coeffs_(std::move(coeffs)), hbar_(hbar) {
    if (coeffs_.empty()) throw StructuralError("operator series needs at least one coefficient");
    check_order(order());
    if (!(hbar_ > 0.0)) throw ValidationError("hbar must be positive");
    for (const auto& c : coeffs_) coeffs_.front().matrix().check_same(c.matrix(), "series");
  }

  static OperatorSeries zero(std::size_t dim, int order, double hbar) {
    check_order(order);
    return OperatorSeries(std::vector<HermitianMatrix>(order + 1, HermitianMatrix::zero(dim)),
                          hbar);
  }

  int order() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  std::size_t dim() const noexcept { return coeffs_.front().dim(); }
  double hbar() const noexcept { return hbar_; }

  const HermitianMatrix& operator[](int p) const { return coeffs_.at(p); }
  std::span<const HermitianMatrix> coeffs() const noexcept { return coeffs_; }

  /// Largest max-norm over the coefficients.
  double scale() const noexcept {
    double s = 0.0;
    for (const auto& c : coeffs_) s = std::max(s, max_norm(c));
    return s;
  }

private:
  std::vector<HermitianMatrix> coeffs_;
  double hbar_ = 1.0;
};

/// Generator series W(eps) = sum_p eps^p/p! W_{p+1} of one Kolmogorov stage,
/// stored by generator index: w(p) is W_p for 1 <= p <= order().
class TransformSeries {
public:
  TransformSeries() = default;

  /// `generators[p-1]` is W_p. Slots that are exactly zero are skipped in products.
  TransformSeries(std::vector<HermitianMatrix> generators, double hbar)
      : w_(std::move(generators)), hbar_(hbar) {
    if (w_.empty()) throw StructuralError("transform series needs order >= 1");
    check_order(order());
    if (!(hbar_ > 0.0)) throw ValidationError("hbar must be positive");
    for (const auto& g : w_) w_.front().matrix().check_same(g.matrix(), "transform series");
    active_.reserve(w_.size());
    for (const auto& g : w_) active_.push_back(!g.is_zero());
  }

  static TransformSeries identity(std::size_t dim, int order, double hbar) {
    return TransformSeries(std::vector<HermitianMatrix>(order, HermitianMatrix::zero(dim)), hbar);
  }

  int order() const noexcept { return static_cast<int>(w_.size()); }
  std::size_t dim() const noexcept { return w_.front().dim(); }
  double hbar() const noexcept { return hbar_; }

  const HermitianMatrix& w(int p) const {
    if (p < 1 || p > order())
      throw StructuralError("generator index " + std::to_string(p) + " outside [1, " +
                            std::to_string(order()) + "]");
    return w_[p - 1];
  }
  bool active(int p) const noexcept { return p >= 1 && p <= order() && active_[p - 1]; }

  /// The generator series as an OperatorSeries with slot p holding W_{p+1}.
  OperatorSeries as_series() const { return OperatorSeries(w_, hbar_); }

private:
  std::vector<HermitianMatrix> w_;
  std::vector<bool> active_;
  double hbar_ = 1.0;
};

/// T_0(A), ..., T_upto(A) through
///   T_{q+1} = sum_{l=0}^{q} C(q,l) ad W_{l+1} o T_{q-l},   T_0 = id.
inline std::vector<HermitianMatrix> t_images(const TransformSeries& ts, const HermitianMatrix& a,
                                             int upto) {
  if (upto < 0 || upto > ts.order())
    throw StructuralError("T index " + std::to_string(upto) + " outside [0, " +
                          std::to_string(ts.order()) + "]");
  ts.w(1).matrix().check_same(a.matrix(), "t_apply");
  std::vector<HermitianMatrix> img;
  img.reserve(upto + 1);
  img.push_back(a);
  for (int q = 0; q < upto; ++q) {
    HermitianMatrix next = HermitianMatrix::zero(a.dim());
    for (int l = 0; l <= q; ++l) {
      if (!ts.active(l + 1) || img[q - l].is_zero()) continue;
      next.axpy(binomial(q, l), commutator_ad(ts.w(l + 1), img[q - l], ts.hbar()));
    }
    img.push_back(std::move(next));
  }
  return img;
}

/// T_p(A).
inline HermitianMatrix t_apply(const TransformSeries& ts, int p, const HermitianMatrix& a) {
  return std::move(t_images(ts, a, p).back());
}

/// Cauchy product  K_p = sum_{j<=p} C(p,j) T_{p-j}(H_j):  the series of
/// Phi(eps)^*(H(eps)) truncated at the common order.
inline OperatorSeries conjugate_series(const TransformSeries& ts, const OperatorSeries& h) {
  if (ts.order() != h.order())
    throw StructuralError("conjugate_series: transform order " + std::to_string(ts.order()) +
                          " vs series order " + std::to_string(h.order()));
  ts.w(1).matrix().check_same(h[0].matrix(), "conjugate_series");
  const int order = h.order();
  std::vector<HermitianMatrix> k(order + 1, HermitianMatrix::zero(h.dim()));
  for (int j = 0; j <= order; ++j) {
    if (h[j].is_zero()) continue;
    const auto img = t_images(ts, h[j], order - j);
    for (int p = j; p <= order; ++p) k[p].axpy(binomial(p, j), img[p - j]);
  }
  return OperatorSeries(std::move(k), h.hbar());
}

/// Same series through the derivative recursion of the iteration table:
///   K_0 = H_0,
///   K_p = H_p + ad W_p(H_0) + sum_{j=1}^{p-1} C(p-1,j-1) (ad W_j(K_{p-j}) + T_{p-j}(H_j)).
/// Independent of conjugate_series apart from t_images; used as its cross-check.
inline OperatorSeries conjugate_series_recursive(const TransformSeries& ts,
                                                 const OperatorSeries& h) {
  if (ts.order() != h.order())
    throw StructuralError("conjugate_series_recursive: order mismatch");
  ts.w(1).matrix().check_same(h[0].matrix(), "conjugate_series_recursive");
  const int order = h.order();
  const double hbar = ts.hbar();

  std::vector<std::vector<HermitianMatrix>> images;
  images.reserve(order + 1);
  for (int j = 0; j <= order; ++j) images.push_back(t_images(ts, h[j], order - j));

  std::vector<HermitianMatrix> k;
  k.reserve(order + 1);
  k.push_back(h[0]);
  for (int p = 1; p <= order; ++p) {
    HermitianMatrix kp = h[p];
    if (ts.active(p)) kp += commutator_ad(ts.w(p), h[0], hbar);
    for (int j = 1; j < p; ++j) {
      const double c = binomial(p - 1, j - 1);
      if (ts.active(j)) kp.axpy(c, commutator_ad(ts.w(j), k[p - j], hbar));
      kp.axpy(c, images[j][p - j]);
    }
    k.push_back(std::move(kp));
  }
  return OperatorSeries(std::move(k), h.hbar());
}

/// U_0 = I,  U_{p+1} = -(i/hbar) sum_{l=0}^{p} C(p,l) U_{p-l} W_{l+1}.
/// sum_p eps^p/p! U_p is the truncated unitary Phi(eps), with
/// Phi^*(A) = Phi^{-1} A Phi.
inline std::vector<Matrix> u_coefficients(const TransformSeries& ts) {
  const int order = ts.order();
  const std::size_t n = ts.dim();
  std::vector<Matrix> u;
  u.reserve(order + 1);
  u.push_back(Matrix::identity(n));
  const cplx factor = -I_UNIT / ts.hbar();
  for (int p = 0; p < order; ++p) {
    Matrix next(n);
    for (int l = 0; l <= p; ++l) {
      if (!ts.active(l + 1)) continue;
      next.axpy(factor * binomial(p, l), u[p - l] * ts.w(l + 1).matrix());
    }
    u.push_back(std::move(next));
  }
  return u;
}

/// sum_p eps^p/p! S_p
inline HermitianMatrix eval_series(const OperatorSeries& s, double eps) {
  HermitianMatrix acc = s[0];
  double w = 1.0;
  for (int p = 1; p <= s.order(); ++p) {
    w *= eps / p;
    if (w == 0.0) break;
    acc.axpy(w, s[p]);
  }
  return acc;
}

inline Matrix eval_series(std::span<const Matrix> coeffs, double eps) {
  if (coeffs.empty()) throw StructuralError("empty matrix series");
  Matrix acc = coeffs[0];
  double w = 1.0;
  for (std::size_t p = 1; p < coeffs.size(); ++p) {
    w *= eps / static_cast<double>(p);
    if (w == 0.0) break;
    acc.axpy(w, coeffs[p]);
  }
  return acc;
}

}  // namespace superconv
