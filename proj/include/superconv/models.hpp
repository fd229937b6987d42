#pragma once

// Builtin quartic anharmonic oscillator and loading of user-supplied models.
//
// Model file (JSON):
//   { "dimension": 2, "hbar": 1.0,
//     "terms": [ { "order": 0, "diagonal": [0, 1] },
//                { "order": 1, "matrix": [[0, [1, 0]], [[1, 0], 0]] } ] }
// or { "builtin": "quartic_oscillator", "dimension": 40 }.
// Matrix entries are plain reals or [re, im] pairs, rows in order.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "superconv/linalg.hpp"
#include "superconv/series.hpp"

namespace superconv {

inline constexpr const char* kQuarticOscillator = "quartic_oscillator";
inline constexpr std::size_t kQuarticMinDim = 8;

/// A finite model H(eps) = sum_p eps^p/p! H_p.
struct ModelSpec {
  std::size_t dim = 0;
  std::map<int, HermitianMatrix> terms;  // order -> H_p
  double hbar = 1.0;
  std::string name;
  std::string provenance;  // "builtin" or the file path

  /// Checks the structural invariants; throws ValidationError.
  void validate() const {
    if (dim == 0) throw ValidationError("model dimension must be positive");
    if (!terms.contains(0)) throw ValidationError("model has no order-0 term");
    if (!(hbar > 0.0)) throw ValidationError("hbar must be positive");
    for (const auto& [p, m] : terms) {
      if (p < 0) throw ValidationError("negative term order " + std::to_string(p));
      if (m.dim() != dim)
        throw ValidationError("term of order " + std::to_string(p) + " has dimension " +
                              std::to_string(m.dim()) + ", expected " + std::to_string(dim));
    }
  }

  int max_order() const { return terms.empty() ? 0 : terms.rbegin()->first; }

  /// Only orders 0 and 1 present.
  bool is_linear() const { return max_order() <= 1; }

  const HermitianMatrix& term(int p) const {
    auto it = terms.find(p);
    if (it == terms.end()) throw StructuralError("model has no term of order " + std::to_string(p));
    return it->second;
  }

  /// Zero-padded series of the given order. Terms above `order` are rejected.
  OperatorSeries series(int order) const {
    validate();
    check_order(order);
    if (max_order() > order)
      throw ValidationError("model has a term of order " + std::to_string(max_order()) +
                            " above the truncation order " + std::to_string(order));
    std::vector<HermitianMatrix> c(order + 1, HermitianMatrix::zero(dim));
    for (const auto& [p, m] : terms) c[p] = m;
    return OperatorSeries(std::move(c), hbar);
  }

  /// H(eps) = sum_p eps^p/p! H_p  (untruncated; all stored terms).
  HermitianMatrix at(double eps) const { return eval_series(series(max_order()), eps); }
};

/// Position operator X = (a + a^dag)/sqrt(2) on the first n oscillator states.
inline Matrix position_matrix(std::size_t n) {
  Matrix x(n);
  for (std::size_t k = 1; k < n; ++k) {
    const double e = std::sqrt(static_cast<double>(k) / 2.0);
    x(k - 1, k) = e;
    x(k, k - 1) = e;
  }
  return x;
}

/// H_0 = -d^2/dx^2 + x^2 (levels 2n+1), H_1 = x^4. X^4 is formed on a
/// (dim+4)-state workspace and then cut, so every retained entry is exact.
inline ModelSpec build_quartic_oscillator(std::size_t dim) {
  if (dim < kQuarticMinDim)
    throw ValidationError("quartic oscillator needs dimension >= " +
                          std::to_string(kQuarticMinDim) + ", got " + std::to_string(dim));
  const std::size_t work = dim + 4;
  const Matrix x = position_matrix(work);
  const Matrix x2 = x * x;
  const Matrix x4 = x2 * x2;
  Matrix v(dim);
  for (std::size_t j = 0; j < dim; ++j)
    for (std::size_t k = 0; k < dim; ++k) v(j, k) = x4(j, k).real();

  std::vector<double> levels(dim);
  for (std::size_t j = 0; j < dim; ++j) levels[j] = 2.0 * static_cast<double>(j) + 1.0;

  ModelSpec m;
  m.dim = dim;
  m.terms.emplace(0, HermitianMatrix::diagonal(levels));
  m.terms.emplace(1, HermitianMatrix::trusted(std::move(v)));
  m.hbar = 1.0;
  m.name = kQuarticOscillator;
  m.provenance = "builtin";
  return m;
}

/// Closed-form <j|x^4|k> in the X = (a + a^dag)/sqrt(2) convention.
inline double quartic_element(std::size_t j, std::size_t k) {
  if (j > k) std::swap(j, k);
  const double n = static_cast<double>(j);
  switch (k - j) {
    case 0:
      return 0.75 * (2.0 * n * n + 2.0 * n + 1.0);
    case 2:
      return 0.5 * (2.0 * n + 3.0) * std::sqrt((n + 1.0) * (n + 2.0));
    case 4:
      return 0.25 * std::sqrt((n + 1.0) * (n + 2.0) * (n + 3.0) * (n + 4.0));
    default:
      return 0.0;
  }
}

namespace detail {

using nlohmann::json;

inline cplx parse_entry(const json& e, const std::string& where) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return {e[0].get<double>(), e[1].get<double>()};
  throw ParseError(where + ": expected a real or an [re, im] pair");
}

inline const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

inline HermitianMatrix parse_term_matrix(const json& term, std::size_t dim,
                                         const std::string& where) {
  const bool has_matrix = term.contains("matrix");
  const bool has_diag = term.contains("diagonal");
  if (has_matrix == has_diag)
    throw ParseError(where + ": exactly one of 'matrix' or 'diagonal' is required");

  Matrix m(dim);
  if (has_diag) {
    const json& d = term["diagonal"];
    if (!d.is_array() || d.size() != dim)
      throw ParseError(where + ".diagonal: expected " + std::to_string(dim) + " entries");
    for (std::size_t i = 0; i < dim; ++i)
      m(i, i) = parse_entry(d[i], where + ".diagonal[" + std::to_string(i) + "]");
    return HermitianMatrix(std::move(m));
  }

  const json& rows = term["matrix"];
  if (!rows.is_array() || rows.size() != dim)
    throw ParseError(where + ".matrix: expected " + std::to_string(dim) + " rows, got " +
                     (rows.is_array() ? std::to_string(rows.size()) : std::string("non-array")));
  for (std::size_t i = 0; i < dim; ++i) {
    const json& row = rows[i];
    const std::string rw = where + ".matrix[" + std::to_string(i) + "]";
    if (!row.is_array() || row.size() != dim)
      throw ParseError(rw + ": expected " + std::to_string(dim) + " entries");
    for (std::size_t j = 0; j < dim; ++j)
      m(i, j) = parse_entry(row[j], rw + "[" + std::to_string(j) + "]");
  }
  try {
    return HermitianMatrix(std::move(m), 1e-10);
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

}  // namespace detail

/// Build a model from its JSON description.
inline ModelSpec parse_model(const nlohmann::json& doc, const std::string& provenance = "inline") {
  using detail::require;
  if (!doc.is_object()) throw ParseError("model: top level must be an object");

  if (doc.contains("builtin")) {
    const auto& b = doc["builtin"];
    if (!b.is_string() || b.get<std::string>() != kQuarticOscillator)
      throw ParseError("builtin: unknown model (only 'quartic_oscillator' is available)");
    const auto& d = require(doc, "dimension", "model");
    if (!d.is_number_integer() || d.get<long long>() <= 0)
      throw ParseError("dimension: expected a positive integer");
    auto m = build_quartic_oscillator(d.get<std::size_t>());
    m.provenance = provenance;
    return m;
  }

  const auto& d = require(doc, "dimension", "model");
  if (!d.is_number_integer() || d.get<long long>() <= 0)
    throw ParseError("dimension: expected a positive integer");
  ModelSpec m;
  m.dim = d.get<std::size_t>();
  if (doc.contains("hbar")) {
    if (!doc["hbar"].is_number()) throw ParseError("hbar: expected a number");
    m.hbar = doc["hbar"].get<double>();
  }
  m.name = doc.value("name", std::string("model"));
  m.provenance = provenance;

  const auto& terms = require(doc, "terms", "model");
  if (!terms.is_array() || terms.empty()) throw ParseError("terms: expected a nonempty array");
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const std::string where = "terms[" + std::to_string(t) + "]";
    const auto& term = terms[t];
    if (!term.is_object()) throw ParseError(where + ": expected an object");
    const auto& o = require(term, "order", where);
    if (!o.is_number_integer() || o.get<long long>() < 0)
      throw ParseError(where + ".order: expected an integer >= 0");
    const int p = o.get<int>();
    if (m.terms.contains(p)) throw ParseError(where + ": duplicate order " + std::to_string(p));
    m.terms.emplace(p, detail::parse_term_matrix(term, m.dim, where));
  }
  m.validate();
  return m;
}

inline ModelSpec parse_model_text(const std::string& text,
                                  const std::string& provenance = "inline") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(provenance + ": " + e.what());
  }
  return parse_model(doc, provenance);
}

inline ModelSpec load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model_text(ss.str(), path.string());
}

}  // namespace superconv
