#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "oracles.hpp"
#include "robustbp/breakdown.hpp"
#include "robustbp/distributions.hpp"
#include "robustbp/errors.hpp"

using namespace rbp;

namespace {

// GPD(beta, xi) with xi != 0 in closed form
double gpd_cdf(double x, double xi) { return 1 - std::pow(1 + xi * x, -1 / xi); }
double gpd_q(double u, double xi) { return (std::pow(1 - u, -xi) - 1) / xi; }
double gevd_q(double u, double xi) { return (std::pow(-std::log(u), -xi) - 1) / xi; }

std::vector<double> grid(double (*q)(double, double), double xi, int n) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = q((i + 0.5) / n, xi);
  return x;
}

const Model kGpd{Family::GPD, 1, 0.7};

}  // namespace

TEST_CASE("asymptotic breakdown points") {
  const double tol = 1e-4;  // 0.01 percentage points
  CHECK(std::abs(abp(EstimatorKind::PE, Family::GPD, 0.7) - 0.0642) < tol);
  CHECK(std::abs(abp(EstimatorKind::PE, Family::GEVD, 0.7) - 0.1542) < tol);
  CHECK(std::abs(abp(EstimatorKind::PE, Family::GEVD, 0.7, 10, true) - 0.0613) < tol);
  CHECK(abp(EstimatorKind::PE, Family::Weibull, 0.7) == 0.25);
  CHECK(std::abs(abp(EstimatorKind::MedkMAD, Family::GPD, 0.7) - 0.4475) < tol);
  CHECK(std::abs(abp(EstimatorKind::MedkMAD, Family::GPD, 0.7, 10, true) - 0.1187) < tol);
  CHECK(std::abs(abp(EstimatorKind::MedkMAD, Family::Gamma, 0.7) - 0.4947) < tol);
  CHECK(std::abs(abp(EstimatorKind::MedkMAD, Family::Weibull, 0.7) - 0.4756) < tol);
  CHECK_THROWS_AS(abp(EstimatorKind::PE, Family::Gamma, 0.7), DomainError);
  CHECK_THROWS_AS(abp(EstimatorKind::MedSn, Family::GPD, 0.7), DomainError);
}

TEST_CASE("ABP against independent closed forms") {
  for (double xi : {0.1, 0.4, 0.7, 1.5, 2.5}) {
    // PE: mass of [2 Q2, Q3]
    double q2 = gpd_q(0.5, xi);
    CHECK(abp(EstimatorKind::PE, Family::GPD, xi) ==
          doctest::Approx(0.75 - gpd_cdf(2 * q2, xi)).epsilon(1e-10));
    CHECK(abp(EstimatorKind::MedkMAD, Family::GPD, xi, 3.0) ==
          doctest::Approx(gpd_cdf(4 * q2, xi) - 0.5).epsilon(1e-10));
  }
  // continuity through the exponential case
  CHECK(abp(EstimatorKind::PE, Family::GPD, 1e-6) == doctest::Approx(0).scale(1).epsilon(1e-5));
  CHECK(abp(EstimatorKind::PE, Family::GPD, 0.0) == 0.0);
  CHECK(abp(EstimatorKind::MedkMAD, Family::GPD, 1e-8) ==
        doctest::Approx(abp(EstimatorKind::MedkMAD, Family::GPD, 0.0)).epsilon(1e-6));
}

TEST_CASE("PE counts") {
  auto g = grid(gpd_q, 0.7, 1000);
  auto r = fsbp_pe(g, Family::GPD, false);
  CHECK(std::abs(r.fsbp - 0.0642) < 0.002);
  // oracle count of [2 Q2, Q3]
  auto s = oracle::sorted(g);
  double q2 = s[500], q3 = s[749];
  long c = std::count_if(s.begin(), s.end(), [&](double v) { return v >= 2 * q2 && v <= q3; });
  CHECK(r.count == c);

  auto ge = grid(gevd_q, 0.7, 1000);
  CHECK(std::abs(fsbp_pe(ge, Family::GEVD, false).fsbp - 0.1542) < 0.002);
  CHECK(std::abs(fsbp_pe(ge, Family::GEVD, true).fsbp - 0.0613) < 0.002);

  CHECK(fsbp_pe(std::vector<double>{1, 2, 3, 4, 5, 6, 7}, Family::Weibull, false).fsbp == 0.25);
  CHECK_THROWS_AS(fsbp_pe(g, Family::Gamma, false), DomainError);
  // Q3 < 2 Q2: empty window
  std::vector<double> flat{1, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7};
  CHECK(fsbp_pe(flat, Family::GPD, false).count == 0);
  CHECK(fsbp_pe(flat, Family::GPD, false).fsbp == 0);
}

TEST_CASE("MedkMAD counts on a large sample") {
  auto x = sample(kGpd, 1000000, 17);
  CHECK(std::abs(fsbp_medkmad(x, 10, Family::GPD, false).fsbp - 0.4475) < 0.003);
  CHECK(std::abs(fsbp_medkmad(x, 10, Family::GPD, true).fsbp - 0.1187) < 0.003);
  // no points in (m, 11 m]
  std::vector<double> y{0.5, 1, 1, 1, 50, 60, 70};
  CHECK(fsbp_medkmad(y, 10, Family::GPD, false).count == 0);
  CHECK_THROWS_AS(fsbp_medkmad(x, 10, Family::GEVD, false), DomainError);
}

TEST_CASE("equivariant upper bound") {
  std::vector<double> d{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(equivariant_upper_bound(d) == 0.4);
  std::vector<double> t(9, 2.0);
  t.push_back(5);
  CHECK(equivariant_upper_bound(t) == 0);

  oracle::Rand r(3);
  for (int rep = 0; rep < 300; ++rep) {
    int n = 4 + rep % 60;
    std::vector<double> x(n);
    for (auto& v : x) v = gpd_q(r.uniform(), 0.7);
    if (rep % 4 == 0)
      for (auto& v : x) v = std::round(v * 2) / 2 + 0.5;
    double b = equivariant_upper_bound(x);
    for (bool restricted : {false, true}) {
      CHECK(fsbp_pe(x, Family::GPD, restricted).fsbp <= b);
      CHECK(fsbp_medkmad(x, 10, Family::GPD, restricted).fsbp <= b + 1e-15);
      CHECK(fsbp_pe(x, Family::GEVD, restricted).fsbp <= b);
    }
    CHECK(fsbp_medkmad(x, 10, Family::Gamma, false).fsbp <= b);

    auto y = x;
    for (auto& v : y) v *= 4;
    CHECK(fsbp_pe(y, Family::GPD, false).count == fsbp_pe(x, Family::GPD, false).count);
    CHECK(fsbp_pe(y, Family::GEVD, true).count == fsbp_pe(x, Family::GEVD, true).count);
    auto a = fsbp_medkmad(x, 10, Family::GPD, true), c = fsbp_medkmad(y, 10, Family::GPD, true);
    CHECK(a.count == c.count);
    CHECK(a.count2 == c.count2);
  }
}

TEST_CASE("count pmfs are normalised") {
  const Model gev{Family::GEVD, 1, 0.7}, wei{Family::Weibull, 1, 0.7};
  for (int n : {10, 40, 100, 1000}) {
    CAPTURE(n);
    for (auto [kind, m] : {std::pair{CountKind::N0, kGpd}, std::pair{CountKind::N0Tilde, gev},
                           std::pair{CountKind::NPrime, kGpd}, std::pair{CountKind::NPrime, wei},
                           std::pair{CountKind::NDoublePrime, kGpd}}) {
      auto d = count_pmf(kind, n, m);
      double tot = 0;
      for (double p : d.pmf) {
        CHECK(p >= 0);
        tot += p;
      }
      CHECK(tot == doctest::Approx(1).epsilon(1e-6));
      CHECK(d.cdf(static_cast<int>(d.pmf.size()) - 1) == doctest::Approx(1).epsilon(1e-6));
    }
  }
}

TEST_CASE("count pmfs match Monte Carlo at n = 10") {
  const int n = 10, M = 200000;
  const double xi = 0.7, k = 10;
  const double qc = quotient_limits(Family::GPD, Dispersion::kmad(k)).first;
  const double c0t = 1 + q0_zero();
  std::map<CountKind, std::vector<double>> hist;
  for (auto kind : {CountKind::N0, CountKind::N0Tilde, CountKind::NPrime, CountKind::NDoublePrime})
    hist[kind].assign(n + 1, 0.0);
  oracle::Rand r(2024);
  std::vector<double> x(n), g(n);
  for (int rep = 0; rep < M; ++rep) {
    for (int i = 0; i < n; ++i) {
      double u = r.uniform();
      x[i] = gpd_q(u, xi);
      g[i] = gevd_q(u, xi);
    }
    std::sort(x.begin(), x.end());
    std::sort(g.begin(), g.end());
    double m = x[n / 2], q3 = x[(3 * n + 3) / 4 - 1];
    auto count = [](const std::vector<double>& s, auto pred) {
      return static_cast<int>(std::count_if(s.begin(), s.end(), pred));
    };
    hist[CountKind::N0][count(x, [&](double v) { return v >= 2 * m && v <= q3; })] += 1;
    double gm = g[n / 2], g3 = g[(3 * n + 3) / 4 - 1];
    int nt = gm > 0 ? count(g, [&](double v) { return v >= c0t * gm && v <= g3; }) : 0;
    hist[CountKind::N0Tilde][nt] += 1;
    hist[CountKind::NPrime][count(x, [&](double v) { return v > m && v <= (k + 1) * m; })] += 1;
    int inside = count(x, [&](double v) { return v > (1 - qc) * m && v < (k * qc + 1) * m; });
    hist[CountKind::NDoublePrime][std::max(0, n / 2 + 1 - inside)] += 1;
  }
  for (auto& [kind, h] : hist) {
    const Model m = kind == CountKind::N0Tilde ? Model{Family::GEVD, 1, xi} : kGpd;
    auto d = count_pmf(kind, n, m, k);
    double tv = 0;
    for (int l = 0; l <= n; ++l) {
      double p = l < static_cast<int>(d.pmf.size()) ? d.pmf[l] : 0.0;
      tv += std::abs(p - h[l] / M);
    }
    CAPTURE(static_cast<int>(kind));
    CHECK(0.5 * tv < 0.01);
  }
}

TEST_CASE("expected FSBP approaches the ABP") {
  AnalyticOptions o;
  double pe = efsbp_analytic(EstimatorKind::PE, 1000, kGpd, o);
  CHECK(std::abs(pe - abp(EstimatorKind::PE, Family::GPD, 0.7)) < 0.002);
  double kmad = efsbp_analytic(EstimatorKind::MedkMAD, 1000, kGpd, o);
  CHECK(std::abs(kmad - abp(EstimatorKind::MedkMAD, Family::GPD, 0.7)) < 0.002);
  CHECK(efsbp_analytic(EstimatorKind::PE, 40, Model{Family::Weibull, 1, 0.7}, o) == 0.25);
}

TEST_CASE("expected FSBP saw-tooth in n") {
  AnalyticOptions o;
  std::vector<double> e;
  for (int n = 20; n <= 60; ++n) e.push_back(efsbp_analytic(EstimatorKind::PE, n, kGpd, o));
  int changes = 0;
  for (std::size_t i = 2; i < e.size(); ++i)
    if ((e[i] - e[i - 1]) * (e[i - 1] - e[i - 2]) < 0) ++changes;
  CHECK(changes >= 4);
}

TEST_CASE("p0 and q1 spot values") {
  AnalyticOptions o;
  CHECK(p0(EstimatorKind::PE, 100, kGpd, o) == doctest::Approx(7.9e-2).epsilon(0.02));
  CHECK(p0(EstimatorKind::PE, 40, kGpd, o) == doctest::Approx(2.7e-1).epsilon(0.02));
  CHECK(p0(EstimatorKind::MedkMAD, 40, kGpd, o) == doctest::Approx(1.6e-15).epsilon(0.04));
  CHECK(p0(EstimatorKind::PE, 100, Model{Family::Weibull, 1, 0.7}, o) == 0);
  double lg = log_p0(EstimatorKind::MedkMAD, 100, Model{Family::Gamma, 1, 0.7}, o);
  CHECK(lg / std::log(10.0) == doctest::Approx(std::log10(4.8e-34)).epsilon(0.002));

  CHECK(q1(EstimatorKind::MedkMAD, 1000, kGpd, o) == doctest::Approx(0.4110).epsilon(1e-9));
  CHECK(q1(EstimatorKind::PE, 100, kGpd, o) == 0);
  CHECK(q1(EstimatorKind::MedkMAD, 100, Model{Family::Weibull, 1, 0.7}, o) ==
        doctest::Approx(0.32).epsilon(1e-9));
}

TEST_CASE("count plans") {
  CHECK(count_plan(EstimatorKind::PE, Family::Weibull, false).fixed_quarter);
  CHECK(count_plan(EstimatorKind::MedkMAD, Family::GPD, true).joint_min);
  CHECK(count_plan(EstimatorKind::PE, Family::GEVD, true).kind == CountKind::N0Tilde);
  CHECK_THROWS_AS(count_plan(EstimatorKind::MedSn, Family::GPD, false), DomainError);
  CHECK_THROWS_AS(count_plan(EstimatorKind::MedkMAD, Family::GEVD, false), DomainError);
  CHECK_THROWS_AS(count_plan(EstimatorKind::PE, Family::Gamma, false), DomainError);
}
