#pragma once

// Superconvergent (Kolmogorov) iteration for a finite Hermitian H(eps).
//
// Stage n removes the perturbation orders 2^{n-1} .. 2^n - 1 of H^{n-1}:
// each such H_p is split into its average along H^{n-1}_0 (folded into the
// new unperturbed part at the numeric eps) and a remainder cancelled by the
// generator W_p = S(H_p). Orders >= 2^n are carried by the conjugated series.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "superconv/averaging.hpp"
#include "superconv/linalg.hpp"
#include "superconv/models.hpp"
#include "superconv/series.hpp"

namespace superconv {

struct KolmogorovOptions {
  int order = 4;  // truncation order P, fixed for the run
  Tolerances tol{};
  /// Recompute every K series through the table recursion and compare.
  bool verify_conjugation = false;
  /// Allowed |K_p - bar(H_p)| for the eliminated orders, relative to the series scale.
  double residual_tol = 1e-8;
  double conjugation_tol = 1e-11;
};

/// Diagnostics for one stage.
struct StageReport {
  int stage = 0;
  int first_order = 0;  // 2^{n-1}
  int last_order = 0;   // min(2^n - 1, P); < first_order when the stage is empty
  double residual = 0.0;          // max_p |K_p - bar(H_p)| / scale
  double conjugation_defect = 0.0;  // only with verify_conjugation
  double min_gap = std::numeric_limits<double>::infinity();
};

/// Immutable state after `stage` Kolmogorov steps at a fixed eps.
struct KolmogorovState {
  int stage = 0;
  double eps = 0.0;
  KolmogorovOptions options;
  OperatorSeries series;                       // H^n, slot 0 holds the folded H^n_0
  std::vector<TransformSeries> generators;     // stage k -> W^k
  std::vector<std::vector<HermitianMatrix>> averages;  // stage k -> bar(H_p), p in its window
  std::vector<std::vector<Matrix>> u_products;  // stage k -> U^k_0..U^k_P
  SpectralData spectral0;                      // of series[0]
  std::vector<std::size_t> label_column;       // unperturbed label j -> column of spectral0
  std::vector<StageReport> reports;
  /// Scale the relative tolerances refer to, fixed at init from H^0_0 and H(eps).
  double tol_scale = 0.0;

  double deg_tol() const { return options.tol.deg_tol_rel * tol_scale; }
  double gap_guard() const { return options.tol.gap_guard_rel * tol_scale; }

  /// E^n_j for the unperturbed label j.
  double energy(std::size_t label) const { return spectral0.eigenvalues.at(label_column.at(label)); }

  std::vector<double> energies() const {
    std::vector<double> e(label_column.size());
    for (std::size_t j = 0; j < e.size(); ++j) e[j] = energy(j);
    return e;
  }
};

inline int default_stages(int order) {
  int n = 0;
  while ((1 << n) < order + 1) ++n;
  return std::max(n, 1);
}

/// Stage window [2^{n-1}, min(2^n - 1, P)].
inline std::pair<int, int> stage_window(int stage, int order) {
  if (stage < 1 || stage > 30) throw ValidationError("stage index out of range");
  const int lo = 1 << (stage - 1);
  const int hi = std::min((1 << stage) - 1, order);
  return {lo, hi};
}

namespace detail {

inline std::string format_sci(double x) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << x;
  return os.str();
}

/// Greedy maximal-overlap assignment of old label columns to new columns.
inline std::vector<std::size_t> match_labels(const Matrix& old_vecs,
                                             const std::vector<std::size_t>& old_cols,
                                             const Matrix& new_vecs) {
  const std::size_t n = new_vecs.dim();
  const Matrix ov = adjoint(old_vecs) * new_vecs;
  std::vector<std::tuple<double, std::size_t, std::size_t>> cand;
  cand.reserve(n * n);
  for (std::size_t label = 0; label < n; ++label)
    for (std::size_t c = 0; c < n; ++c) cand.emplace_back(std::abs(ov(old_cols[label], c)), label, c);
  std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
    return std::get<2>(a) < std::get<2>(b);
  });
  std::vector<std::size_t> out(n, n);
  std::vector<bool> used(n, false);
  std::size_t assigned = 0;
  for (const auto& [w, label, c] : cand) {
    if (out[label] != n || used[c]) continue;
    out[label] = c;
    used[c] = true;
    if (++assigned == n) break;
  }
  return out;
}

}  // namespace detail

/// Stage-0 state: H^0 zero-padded to the truncation order.
inline KolmogorovState init(const ModelSpec& model, double eps, const KolmogorovOptions& opts) {
  if (opts.order < 1) throw ValidationError("truncation order must be >= 1");
  if (!std::isfinite(eps)) throw ValidationError("eps must be finite");
  KolmogorovState s;
  s.eps = eps;
  s.options = opts;
  s.series = model.series(opts.order);
  s.spectral0 = spectral_decomposition(s.series[0], opts.tol);
  s.tol_scale = std::max(s.spectral0.scale(), max_norm(eval_series(s.series, eps)));
  if (s.tol_scale > 0.0) s.spectral0 = eigh(s.series[0], s.deg_tol());
  s.label_column.resize(model.dim);
  std::iota(s.label_column.begin(), s.label_column.end(), 0);
  return s;
}

/// One Kolmogorov stage. Returns the new state; `state` is left untouched.
inline KolmogorovState step(const KolmogorovState& state) {
  const int n = state.stage + 1;
  const int order = state.options.order;
  const std::size_t dim = state.series.dim();
  const double hbar = state.series.hbar();
  const auto [lo, hi] = stage_window(n, order);

  KolmogorovState next = state;
  next.stage = n;
  StageReport rep;
  rep.stage = n;
  rep.first_order = lo;
  rep.last_order = hi;

  if (lo > order) {
    // Nothing representable left to eliminate.
    next.generators.push_back(TransformSeries::identity(dim, order, hbar));
    next.averages.emplace_back();
    next.u_products.push_back(u_coefficients(next.generators.back()));
    next.reports.push_back(rep);
    return next;
  }

  const double guard = state.gap_guard();
  std::vector<HermitianMatrix> w(order, HermitianMatrix::zero(dim));
  std::vector<HermitianMatrix> bars;
  for (int p = lo; p <= hi; ++p) {
    try {
      AveragingResult r = average(state.spectral0, state.series[p], hbar, guard);
      rep.min_gap = std::min(rep.min_gap, r.min_gap);
      w[p - 1] = std::move(r.s_of_b);
      bars.push_back(std::move(r.b_bar));
    } catch (const SmallDenominatorError& e) {
      throw e.with_context(n, p);
    }
  }
  if (bars.empty()) rep.min_gap = min_block_gap(state.spectral0);

  TransformSeries ts(std::move(w), hbar);
  OperatorSeries k = conjugate_series(ts, state.series);
  const double scale = std::max(state.series.scale(), std::numeric_limits<double>::min());

  if (state.options.verify_conjugation) {
    const OperatorSeries k2 = conjugate_series_recursive(ts, state.series);
    double d = 0.0;
    for (int p = 0; p <= order; ++p) d = std::max(d, max_norm(k[p] - k2[p]));
    rep.conjugation_defect = d / std::max(k.scale(), scale);
    if (rep.conjugation_defect > state.options.conjugation_tol)
      throw ConsistencyError("stage " + std::to_string(n) +
                             ": Cauchy-product and recursive conjugation disagree by " +
                             detail::format_sci(rep.conjugation_defect));
  }

  for (int p = 1; p <= hi; ++p) {
    const double r = p < lo ? max_norm(k[p]) : max_norm(k[p] - bars[p - lo]);
    rep.residual = std::max(rep.residual, r / scale);
  }
  if (rep.residual > state.options.residual_tol)
    throw ConsistencyError("stage " + std::to_string(n) +
                           ": eliminated orders do not reduce to their averages (residual " +
                           detail::format_sci(rep.residual) + ")");

  std::vector<HermitianMatrix> coeffs;
  coeffs.reserve(order + 1);
  HermitianMatrix h0 = state.series[0];
  double weight = 1.0;
  for (int p = 1; p <= hi; ++p) {
    weight *= state.eps / p;
    if (p >= lo) h0.axpy(weight, bars[p - lo]);
  }
  coeffs.push_back(std::move(h0));
  for (int p = 1; p <= order; ++p)
    coeffs.push_back(p <= hi ? HermitianMatrix::zero(dim) : k[p]);
  next.series = OperatorSeries(std::move(coeffs), hbar);

  next.spectral0 = eigh(next.series[0], state.deg_tol());
  next.label_column = detail::match_labels(state.spectral0.eigenvectors, state.label_column,
                                           next.spectral0.eigenvectors);
  next.u_products.push_back(u_coefficients(ts));
  next.generators.push_back(std::move(ts));
  next.averages.push_back(std::move(bars));
  next.reports.push_back(rep);
  return next;
}

/// Outcome of a full run.
struct SuResult {
  double eps = 0.0;
  int order = 0;
  std::vector<std::vector<double>> stage_energies;  // [stage 0..n][label]
  Matrix eigenvectors;                               // column j approximates label j
  std::vector<StageReport> reports;
  double min_gap = std::numeric_limits<double>::infinity();
  std::vector<std::string> warnings;
  KolmogorovState final_state;

  int stages() const { return static_cast<int>(stage_energies.size()) - 1; }
  double energy(int stage, std::size_t label) const { return stage_energies.at(stage).at(label); }
};

/// Product U^1(eps) U^2(eps) ... U^n(eps) of the truncated stage unitaries.
inline Matrix accumulated_unitary(const KolmogorovState& s) {
  Matrix u = Matrix::identity(s.series.dim());
  for (const auto& coeffs : s.u_products) u = u * eval_series(coeffs, s.eps);
  return u;
}

inline SuResult run(const ModelSpec& model, double eps, const KolmogorovOptions& opts,
                    int n_stages) {
  if (n_stages < 1) throw ValidationError("number of stages must be >= 1");
  SuResult res;
  res.eps = eps;
  res.order = opts.order;
  if ((1 << (n_stages - 1)) > opts.order)
    res.warnings.push_back("stages beyond " + std::to_string(default_stages(opts.order)) +
                           " are no-ops at truncation order " + std::to_string(opts.order));

  KolmogorovState s = init(model, eps, opts);
  res.stage_energies.push_back(s.energies());
  for (int k = 1; k <= n_stages; ++k) {
    s = step(s);
    res.stage_energies.push_back(s.energies());
    res.min_gap = std::min(res.min_gap, s.reports.back().min_gap);
  }
  res.reports = s.reports;

  const Matrix u = accumulated_unitary(s);
  const std::size_t dim = model.dim;
  res.eigenvectors = Matrix(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    const auto v = matvec(u, column(s.spectral0.eigenvectors, s.label_column[j]));
    const double nv = norm2(v);
    for (std::size_t i = 0; i < dim; ++i) res.eigenvectors(i, j) = v[i] / nv;
  }
  res.final_state = std::move(s);
  return res;
}

inline SuResult run(const ModelSpec& model, double eps, const KolmogorovOptions& opts) {
  return run(model, eps, opts, default_stages(opts.order));
}

/// |H(eps) v_j - E_j v_j| for the reconstructed eigenvector of label j.
inline double eigenvector_residual(const ModelSpec& model, const SuResult& r, std::size_t label) {
  const HermitianMatrix h = model.at(r.eps);
  const auto v = column(r.eigenvectors, label);
  auto hv = matvec(h.matrix(), v);
  const double e = r.stage_energies.back().at(label);
  for (std::size_t i = 0; i < hv.size(); ++i) hv[i] -= e * v[i];
  return norm2(hv);
}

}  // namespace superconv
