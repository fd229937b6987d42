// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "superconv/superconv.hpp"
#include "test_support.hpp"

using namespace superconv;
using superconv::testing::max_diff;
using superconv::testing::random_hermitian;
using superconv::testing::random_linear_model;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

KolmogorovOptions with_order(int p) {
  KolmogorovOptions o;
  o.order = p;
  return o;
}

double su_closed_form(double e) {
  const double poly = 1.0 + 0.75 * e - 21.0 / 16 * e * e + 333.0 / 64 * e * e * e;
  const double num = 1317760.0 + 12935472.0 * e + 36433368.0 * e * e + 25183305.0 * e * e * e;
  const double den = 2048.0 * (4 + 9 * e) * (4 + 15 * e) * (4 + 21 * e);
  return poly - 3.0 * num / den * std::pow(e, 4);
}

double rel_diff(const HermitianMatrix& got, const HermitianMatrix& want) {
  return max_diff(got, want) / std::max(max_norm(want), 1e-300);
}

Outcome rs_coefficients() {
  const auto t0 = Clock::now();
  const auto m = build_quartic_oscillator(30);
  const auto rs = rs_corrections(spectral_decomposition(m.term(0)), m.term(1), 4, 0);
  const double secs = seconds_since(t0);
  const double want[5] = {0.0, 3.0 / 4, -21.0 / 16, 333.0 / 64, -30885.0 / 1024};
  double worst = 0.0;
  for (int l = 1; l <= 4; ++l) worst = std::max(worst, std::abs(rs.c[l] - want[l]) / std::abs(want[l]));
  return {worst <= 1e-9 && secs < 1.0,
          "max rel err " + sci(worst) + ", " + sci(secs) + " s (limit 1 s)"};
}

Outcome su_closed_form_energy() {
  const auto t0 = Clock::now();
  const auto m = build_quartic_oscillator(30);
  double worst = 0.0;
  for (double eps : {0.01, 0.05, 0.1}) {
    const auto r = run(m, eps, with_order(4), 3);
    worst = std::max(worst, std::abs(r.energy(3, 0) - su_closed_form(eps)));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-8 && secs < 5.0,
          "max abs err " + sci(worst) + ", " + sci(secs) + " s (limit 5 s)"};
}

Outcome su_equals_rs_order3() {
  double worst = 0.0;
  auto check = [&](const ModelSpec& m, std::size_t level) {
    const auto rs = rs_corrections(spectral_decomposition(m.term(0)), m.term(1), 3, level);
    for (double eps : {0.01, 0.1}) {
      const double want = rs.energy(eps, 3);
      const double got = run(m, eps, with_order(3), 2).energy(2, level);
      worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
    }
  };
  check(build_quartic_oscillator(30), 0);
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 10; ++k) {
    const auto m = random_linear_model(rng, 8, 0.3, k % 2 == 1);
    for (std::size_t level = 0; level < 8; ++level) check(m, level);
  }
  return {worst <= 1e-10, "max rel diff " + sci(worst) + " (quartic + 10 random 8x8)"};
}

Outcome improvement_over_rs() {
  const auto m = build_quartic_oscillator(150);
  const auto rs = rs_corrections(spectral_decomposition(m.term(0)), m.term(1), 4, 0);
  bool pass = true;
  std::string detail;
  for (double eps : {0.1, 0.2}) {
    const double exact = eigh(m.at(eps), 0.0).eigenvalues.front();
    const double err_su = std::abs(run(m, eps, with_order(4), 3).energy(3, 0) - exact);
    const double err_rs = std::abs(rs.energy(eps, 4) - exact);
    pass = pass && err_su < err_rs;
    detail += (detail.empty() ? "" : "; ") + std::string("eps=") + (eps == 0.1 ? "0.1" : "0.2") +
              " err_su " + sci(err_su) + " err_rs4 " + sci(err_rs);
  }
  return {pass, detail};
}

Outcome averaging_lemma() {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 2 + k % 9;
    const double hbar = 0.5 + 0.25 * (k % 4);
    const auto a = random_hermitian(rng, n, 2.0);
    const auto b = random_hermitian(rng, n);
    const auto r = average(spectral_decomposition(a), b, hbar);
    const double nb = max_norm(b);
    worst = std::max(worst, max_norm(commutator_ad(r.b_bar, a, hbar)) / nb);
    worst = std::max(worst, max_diff(commutator_ad(r.s_of_b, a, hbar), r.b_bar - b) / nb);
  }
  return {worst <= 1e-11, "max defect / |B| " + sci(worst) + " over 100 pairs"};
}

Outcome order_doubling() {
  const auto m = build_quartic_oscillator(30);
  auto s = init(m, 0.1, with_order(4));
  const double scale = s.series.scale();
  double slots = 0.0;
  for (int n = 1; n <= 3; ++n) {
    s = step(s);
    for (int p = 1; p < std::min(1 << n, 5); ++p)
      slots = std::max(slots, max_norm(s.series[p]) / scale);
  }
  bool pass = slots <= 1e-10;
  std::string detail = "max live slot " + sci(slots);
  for (int n : {1, 2}) {
    auto err = [&](double eps) {
      const double exact = eigh(m.at(eps), 0.0).eigenvalues.front();
      return std::abs(run(m, eps, with_order(4), n).energy(n, 0) - exact);
    };
    const double ratio = err(0.01) / err(0.005);
    const double need = std::pow(2.0, (1 << n) - 0.5);
    pass = pass && ratio >= need;
    detail += "; stage " + std::to_string(n) + " halving ratio " + sci(ratio) + " (>= " +
              sci(need) + ")";
  }
  return {pass, detail};
}

Outcome closed_form_slots() {
  const auto m = build_quartic_oscillator(30);
  double worst = 0.0;
  for (double eps : {0.05, 0.1, 0.2}) {
    const auto s1 = step(init(m, eps, with_order(4)));
    const auto s2 = step(s1);
    const auto& w1 = s1.generators[0].w(1);
    const auto& w22 = s2.generators[1].w(2);
    const auto& bar1 = s1.averages[0][0];
    const auto& bar2 = s2.averages[1][0];
    const auto& h1 = m.term(1);
    auto ad = [&](const HermitianMatrix& w, const HermitianMatrix& a) {
      return commutator_ad(w, a, m.hbar);
    };
    worst = std::max(worst, rel_diff(s1.series[2], ad(w1, bar1 + h1)));
    worst = std::max(worst, rel_diff(s1.series[3], ad(w1, ad(w1, bar1 + 2.0 * h1))));
    worst = std::max(worst, rel_diff(s2.series[4], ad(w1, ad(w1, ad(w1, bar1 + 3.0 * h1))) +
                                                       3.0 * ad(w22, bar2 + s1.series[2])));
  }
  return {worst <= 1e-10, "max rel diff " + sci(worst)};
}

Outcome conjugation_consistency() {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int order = 1; order <= 6; ++order)
    for (int k = 0; k < 5; ++k) {
      const std::size_t n = 3 + k;
      std::vector<HermitianMatrix> w, h;
      for (int p = 0; p < order; ++p) w.push_back(random_hermitian(rng, n, 0.7));
      for (int p = 0; p <= order; ++p) h.push_back(random_hermitian(rng, n));
      const TransformSeries ts(std::move(w), 1.0);
      const OperatorSeries hs(std::move(h), 1.0);
      const auto k1 = conjugate_series(ts, hs);
      const auto k2 = conjugate_series_recursive(ts, hs);
      const double scale = std::max(k1.scale(), 1.0);
      for (int p = 0; p <= order; ++p) worst = std::max(worst, max_diff(k1[p], k2[p]) / scale);
    }
  bool pass = worst <= 1e-11;
  std::string detail = "table vs Cauchy " + sci(worst);
  double min_margin = std::numeric_limits<double>::infinity();
  for (int order = 2; order <= 5; ++order) {
    std::vector<HermitianMatrix> w;
    for (int p = 0; p < order; ++p) w.push_back(random_hermitian(rng, 4, 0.5));
    const TransformSeries ts(std::move(w), 1.0);
    const auto a = random_hermitian(rng, 4);
    std::vector<HermitianMatrix> h(order + 1, HermitianMatrix::zero(4));
    h[0] = a;
    const auto k = conjugate_series(ts, OperatorSeries(std::move(h), 1.0));
    const auto u = u_coefficients(ts);
    auto err = [&](double eps) {
      const Matrix ue = eval_series(u, eps);
      return max_diff(adjoint(ue) * a.matrix() * ue, eval_series(k, eps).matrix());
    };
    const double ratio = err(0.1) / err(0.05);
    min_margin = std::min(min_margin, ratio / std::pow(2.0, order + 0.5));
  }
  pass = pass && min_margin >= 1.0;
  detail += "; unitary halving ratio / 2^(P+0.5) >= " + sci(min_margin);
  return {pass, detail};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {1, "RS coefficients of the quartic ground state", rs_coefficients},
      {2, "SU fourth-order closed form", su_closed_form_energy},
      {3, "SU equals RS through third order", su_equals_rs_order3},
      {4, "SU beats fourth-order RS at eps 0.1 and 0.2", improvement_over_rs},
      {5, "averaging lemma identities", averaging_lemma},
      {6, "order doubling", order_doubling},
      {7, "closed-form slot matrices", closed_form_slots},
      {8, "conjugation consistency", conjugation_consistency},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
