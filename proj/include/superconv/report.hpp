#pragma once

// Batch driver behind the command-line tool: evaluates SU / RS / exact
// energies over an eps grid and renders the result as CSV or JSON.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "superconv/kolmogorov.hpp"
#include "superconv/models.hpp"
#include "superconv/rayleigh_schrodinger.hpp"

namespace superconv {

enum class Method { su, rs, exact, compare };
enum class Format { csv, json };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::su: return "su";
    case Method::rs: return "rs";
    case Method::exact: return "exact";
    case Method::compare: return "compare";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "su") return Method::su;
  if (s == "rs") return Method::rs;
  if (s == "exact") return Method::exact;
  if (s == "compare") return Method::compare;
  throw ValidationError("unknown method '" + s + "' (expected su, rs, exact or compare)");
}

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw ValidationError("unknown format '" + s + "' (expected csv or json)");
}

struct ModelSource {
  std::optional<std::string> path;
  std::string builtin = kQuarticOscillator;
  std::size_t dim = 40;
};

struct RunConfig {
  ModelSource model;
  Method method = Method::compare;
  std::vector<double> eps;
  int order = 4;
  std::optional<int> stages;
  std::vector<std::size_t> levels{0};
  Tolerances tol{};
  Format format = Format::csv;
  std::optional<std::string> out;
  std::optional<double> hbar;
  bool parallel = true;
  std::size_t drift_extra_dim = 20;

  int stage_count() const { return stages.value_or(default_stages(order)); }
};

/// One CSV row.
struct ReportRow {
  double eps = 0.0;
  std::size_t level = 0;
  std::string method;
  int stage_or_order = 0;
  double energy = 0.0;
  double abs_error = std::numeric_limits<double>::quiet_NaN();
};

/// Final-stage SU against fourth-order RS for one (eps, level).
struct LevelComparison {
  double eps = 0.0;
  std::size_t level = 0;
  double e_exact = 0.0;
  double e_rs = std::numeric_limits<double>::quiet_NaN();
  double e_su = std::numeric_limits<double>::quiet_NaN();
  double err_rs = std::numeric_limits<double>::quiet_NaN();
  double err_su = std::numeric_limits<double>::quiet_NaN();
  std::string winner;  // "su", "rs", "tie" or "n/a"
};

struct ExactDrift {
  double eps = 0.0;
  std::size_t level = 0;
  double drift = 0.0;
};

struct StageResiduals {
  double eps = 0.0;
  std::vector<double> residuals;
};

struct ComparisonReport {
  std::string model_name;
  std::string model_provenance;
  std::size_t dim = 0;
  double hbar = 1.0;
  Method method = Method::compare;
  int order = 0;
  int stages = 0;
  std::vector<ReportRow> rows;
  std::vector<LevelComparison> comparisons;
  double min_gap = std::numeric_limits<double>::infinity();
  std::vector<StageResiduals> stage_residuals;
  std::vector<ExactDrift> drift;
  std::vector<std::string> warnings;
};

inline ModelSpec load_config_model(const RunConfig& cfg) {
  ModelSpec m;
  if (cfg.model.path) {
    m = load_model(*cfg.model.path);
  } else {
    if (cfg.model.builtin != kQuarticOscillator)
      throw ValidationError("unknown builtin model '" + cfg.model.builtin + "'");
    m = build_quartic_oscillator(cfg.model.dim);
  }
  if (cfg.hbar) {
    if (!(*cfg.hbar > 0.0)) throw ValidationError("hbar must be positive");
    m.hbar = *cfg.hbar;
  }
  return m;
}

/// Ascending eigenvalues of H(eps).
inline std::vector<double> exact_energies(const ModelSpec& model, double eps) {
  return eigh(model.at(eps), 0.0).eigenvalues;
}

/// Exact-diagonalisation rows for the requested levels.
inline std::vector<ReportRow> cmd_exact(const ModelSpec& model, std::span<const double> eps_list,
                                        std::span<const std::size_t> levels) {
  std::vector<ReportRow> rows;
  for (double eps : eps_list) {
    const auto e = exact_energies(model, eps);
    for (std::size_t j : levels) {
      if (j >= e.size()) throw StructuralError("level " + std::to_string(j) + " out of range");
      rows.push_back({eps, j, "exact", 0, e[j], std::numeric_limits<double>::quiet_NaN()});
    }
  }
  return rows;
}

namespace detail {

struct PointResult {
  std::vector<ReportRow> rows;
  std::vector<LevelComparison> comparisons;
  std::vector<ExactDrift> drift;
  StageResiduals residuals;
  double min_gap = std::numeric_limits<double>::infinity();
  std::vector<std::string> warnings;
};

inline PointResult evaluate_point(const RunConfig& cfg, const ModelSpec& model, double eps) {
  PointResult out;
  out.residuals.eps = eps;
  const bool want_exact = cfg.method == Method::exact || cfg.method == Method::compare;
  const bool want_rs = cfg.method == Method::rs || cfg.method == Method::compare;
  const bool want_su = cfg.method == Method::su || cfg.method == Method::compare;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<double> exact;
  if (want_exact) {
    exact = exact_energies(model, eps);
    if (!cfg.model.path && cfg.drift_extra_dim > 0) {
      const auto bigger = build_quartic_oscillator(model.dim + cfg.drift_extra_dim);
      ModelSpec b = bigger;
      b.hbar = model.hbar;
      const auto eb = exact_energies(b, eps);
      for (std::size_t j : cfg.levels) out.drift.push_back({eps, j, std::abs(eb[j] - exact[j])});
    }
    for (std::size_t j : cfg.levels)
      out.rows.push_back({eps, j, "exact", 0, exact[j], cfg.method == Method::compare ? 0.0 : nan});
  }
  auto err = [&](std::size_t j, double e) {
    return cfg.method == Method::compare ? std::abs(e - exact[j]) : nan;
  };

  std::vector<double> rs_final(model.dim, nan);
  if (want_rs) {
    if (!model.is_linear()) {
      if (cfg.method == Method::rs)
        throw ValidationError("Rayleigh-Schroedinger baseline needs a perturbation linear in eps");
      out.warnings.push_back("model is not linear in eps; RS rows omitted");
    } else {
      const auto h0 = spectral_decomposition(model.term(0), cfg.tol);
      const HermitianMatrix v =
          model.terms.contains(1) ? model.term(1) : HermitianMatrix::zero(model.dim);
      const int rs_order = std::min(cfg.order, kMaxRsOrder);
      for (std::size_t j : cfg.levels) {
        const auto c = rs_corrections(h0, v, rs_order, j, cfg.tol);
        for (int l = 1; l <= rs_order; ++l) {
          const double e = c.energy(eps, l);
          out.rows.push_back({eps, j, "rs", l, e, err(j, e)});
        }
        rs_final[j] = c.energy(eps, rs_order);
      }
    }
  }

  std::vector<double> su_final(model.dim, nan);
  if (want_su) {
    KolmogorovOptions opts;
    opts.order = cfg.order;
    opts.tol = cfg.tol;
    const SuResult r = run(model, eps, opts, cfg.stage_count());
    for (const auto& w : r.warnings) out.warnings.push_back(w);
    out.min_gap = r.min_gap;
    for (const auto& rep : r.reports) out.residuals.residuals.push_back(rep.residual);
    for (std::size_t j : cfg.levels) {
      for (int k = 1; k <= r.stages(); ++k) {
        const double e = r.energy(k, j);
        out.rows.push_back({eps, j, "su", k, e, err(j, e)});
      }
      su_final[j] = r.energy(r.stages(), j);
    }
  }

  if (cfg.method == Method::compare) {
    for (std::size_t j : cfg.levels) {
      LevelComparison c;
      c.eps = eps;
      c.level = j;
      c.e_exact = exact[j];
      c.e_rs = rs_final[j];
      c.e_su = su_final[j];
      c.err_rs = std::abs(c.e_rs - c.e_exact);
      c.err_su = std::abs(c.e_su - c.e_exact);
      if (std::isnan(c.err_rs) || std::isnan(c.err_su)) c.winner = "n/a";
      else if (c.err_su < c.err_rs) c.winner = "su";
      else if (c.err_rs < c.err_su) c.winner = "rs";
      else c.winner = "tie";
      out.comparisons.push_back(c);
    }
  }
  return out;
}

}  // namespace detail

inline void validate_config(const RunConfig& cfg, const ModelSpec& model) {
  if (cfg.eps.empty()) throw ValidationError("eps list is empty");
  for (double e : cfg.eps)
    if (!std::isfinite(e)) throw ValidationError("eps values must be finite");
  if (cfg.levels.empty()) throw ValidationError("level list is empty");
  for (std::size_t j : cfg.levels)
    if (j >= model.dim)
      throw ValidationError("level " + std::to_string(j) + " outside model dimension " +
                            std::to_string(model.dim));
  if (cfg.order < 1) throw ValidationError("order must be >= 1");
  check_order(cfg.order);
  if (cfg.stages && *cfg.stages < 1) throw ValidationError("stages must be >= 1");
}

/// Evaluate every eps point (concurrently when cfg.parallel) and collect the
/// rows sorted by (eps, level).
inline ComparisonReport build_report(const RunConfig& cfg, const ModelSpec& model) {
  validate_config(cfg, model);
  ComparisonReport rep;
  rep.model_name = model.name;
  rep.model_provenance = model.provenance;
  rep.dim = model.dim;
  rep.hbar = model.hbar;
  rep.method = cfg.method;
  rep.order = cfg.order;
  rep.stages = cfg.stage_count();

  std::vector<detail::PointResult> points;
  if (cfg.parallel && cfg.eps.size() > 1) {
    std::vector<std::future<detail::PointResult>> futs;
    for (double e : cfg.eps)
      futs.push_back(std::async(std::launch::async, [&cfg, &model, e] {
        return detail::evaluate_point(cfg, model, e);
      }));
    for (auto& f : futs) points.push_back(f.get());
  } else {
    for (double e : cfg.eps) points.push_back(detail::evaluate_point(cfg, model, e));
  }

  bool warned_negative = false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto& pt = points[i];
    if (cfg.eps[i] < 0.0 && model.name == kQuarticOscillator && !warned_negative) {
      rep.warnings.push_back(
          "eps < 0: the untruncated quartic oscillator is unbounded below; results describe "
          "the finite matrix only");
      warned_negative = true;
    }
    for (auto& r : pt.rows) rep.rows.push_back(r);
    for (auto& c : pt.comparisons) rep.comparisons.push_back(c);
    for (auto& d : pt.drift) rep.drift.push_back(d);
    if (!pt.residuals.residuals.empty()) rep.stage_residuals.push_back(pt.residuals);
    rep.min_gap = std::min(rep.min_gap, pt.min_gap);
    for (auto& w : pt.warnings) {
      if (std::find(rep.warnings.begin(), rep.warnings.end(), w) == rep.warnings.end())
        rep.warnings.push_back(w);
    }
  }
  auto by_eps_level = [](const auto& a, const auto& b) {
    return a.eps != b.eps ? a.eps < b.eps : a.level < b.level;
  };
  std::stable_sort(rep.rows.begin(), rep.rows.end(), by_eps_level);
  std::stable_sort(rep.comparisons.begin(), rep.comparisons.end(), by_eps_level);
  std::stable_sort(rep.drift.begin(), rep.drift.end(), by_eps_level);
  std::stable_sort(rep.stage_residuals.begin(), rep.stage_residuals.end(),
                   [](const auto& a, const auto& b) { return a.eps < b.eps; });
  return rep;
}

// ---------------------------------------------------------------------------
// Rendering. Floats use 17 significant digits.

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline constexpr const char* kCsvHeader = "eps,level,method,stage_or_order,energy,abs_error_vs_exact";

inline std::string render_csv(const ComparisonReport& rep) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& r : rep.rows) {
    os << format_double(r.eps) << ',' << r.level << ',' << r.method << ',' << r.stage_or_order
       << ',' << format_double(r.energy) << ',';
    if (!std::isnan(r.abs_error)) os << format_double(r.abs_error);
    os << '\n';
  }
  return os.str();
}

namespace detail {

inline std::string json_number(double x) {
  return std::isfinite(x) ? format_double(x) : std::string("null");
}

inline std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  return out + "\"";
}

}  // namespace detail

inline std::string render_json(const ComparisonReport& rep) {
  using detail::json_number;
  using detail::json_string;
  std::ostringstream os;
  os << "{\n";
  os << "  \"model\": {\"name\": " << json_string(rep.model_name)
     << ", \"provenance\": " << json_string(rep.model_provenance) << ", \"dimension\": " << rep.dim
     << ", \"hbar\": " << json_number(rep.hbar) << "},\n";
  os << "  \"method\": " << json_string(to_string(rep.method)) << ",\n";
  os << "  \"order\": " << rep.order << ",\n";
  os << "  \"stages\": " << rep.stages << ",\n";
  os << "  \"rows\": [";
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    os << (i ? ",\n    " : "\n    ") << "{\"eps\": " << json_number(r.eps)
       << ", \"level\": " << r.level << ", \"method\": " << json_string(r.method)
       << ", \"stage_or_order\": " << r.stage_or_order << ", \"energy\": " << json_number(r.energy)
       << ", \"abs_error_vs_exact\": " << json_number(r.abs_error) << "}";
  }
  os << (rep.rows.empty() ? "],\n" : "\n  ],\n");
  os << "  \"comparisons\": [";
  for (std::size_t i = 0; i < rep.comparisons.size(); ++i) {
    const auto& c = rep.comparisons[i];
    os << (i ? ",\n    " : "\n    ") << "{\"eps\": " << json_number(c.eps)
       << ", \"level\": " << c.level << ", \"e_exact\": " << json_number(c.e_exact)
       << ", \"e_rs4\": " << json_number(c.e_rs) << ", \"e_su\": " << json_number(c.e_su)
       << ", \"err_rs4\": " << json_number(c.err_rs) << ", \"err_su\": " << json_number(c.err_su)
       << ", \"winner\": " << json_string(c.winner) << "}";
  }
  os << (rep.comparisons.empty() ? "],\n" : "\n  ],\n");
  os << "  \"diagnostics\": {\n";
  os << "    \"min_gap\": " << json_number(rep.min_gap) << ",\n";
  os << "    \"stage_residuals\": [";
  for (std::size_t i = 0; i < rep.stage_residuals.size(); ++i) {
    const auto& s = rep.stage_residuals[i];
    os << (i ? ", " : "") << "{\"eps\": " << json_number(s.eps) << ", \"residuals\": [";
    for (std::size_t k = 0; k < s.residuals.size(); ++k)
      os << (k ? ", " : "") << json_number(s.residuals[k]);
    os << "]}";
  }
  os << "],\n";
  os << "    \"exact_dimension_drift\": [";
  for (std::size_t i = 0; i < rep.drift.size(); ++i) {
    const auto& d = rep.drift[i];
    os << (i ? ", " : "") << "{\"eps\": " << json_number(d.eps) << ", \"level\": " << d.level
       << ", \"drift\": " << json_number(d.drift) << "}";
  }
  os << "],\n";
  os << "    \"warnings\": [";
  for (std::size_t i = 0; i < rep.warnings.size(); ++i)
    os << (i ? ", " : "") << json_string(rep.warnings[i]);
  os << "]\n  }\n}\n";
  return os.str();
}

inline std::string render(const ComparisonReport& rep, Format f) {
  return f == Format::csv ? render_csv(rep) : render_json(rep);
}

/// Human-readable diagnostics (stderr companion of the CSV output).
inline std::string render_notes(const ComparisonReport& rep) {
  std::ostringstream os;
  for (const auto& c : rep.comparisons)
    os << "# eps=" << format_double(c.eps) << " level=" << c.level
       << " err_su=" << format_double(c.err_su) << " err_rs4=" << format_double(c.err_rs)
       << " winner=" << c.winner << '\n';
  for (const auto& d : rep.drift)
    os << "# exact eps=" << format_double(d.eps) << " level=" << d.level
       << " dimension drift=" << format_double(d.drift) << '\n';
  if (std::isfinite(rep.min_gap)) os << "# min denominator gap " << format_double(rep.min_gap) << '\n';
  for (const auto& w : rep.warnings) os << "# warning: " << w << '\n';
  return os.str();
}

/// Load, evaluate and write. Returns the process exit code; all library
/// errors become one "error: ..." line on `err`.
inline int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const ModelSpec model = load_config_model(cfg);
    const ComparisonReport rep = build_report(cfg, model);
    out << render(rep, cfg.format);
    if (cfg.format == Format::csv) err << render_notes(rep);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace superconv
