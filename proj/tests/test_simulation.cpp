#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "robustbp/breakdown.hpp"
#include "robustbp/errors.hpp"
#include "robustbp/simulation.hpp"

using namespace rbp;

namespace {

const Model kGpd{Family::GPD, 1, 0.7};
const EstimatorSpec kKmad{EstimatorKind::MedkMAD, 10};
const EstimatorSpec kPe{EstimatorKind::PE};

// N' by direct counting: #{m < x <= (k+1) m} with the hi-med m
long nprime(std::vector<double> x, double k) {
  auto s = oracle::sorted(x);
  double m = s[s.size() / 2];
  return std::count_if(s.begin(), s.end(), [&](double v) { return v > m && v <= (k + 1) * m; });
}

}  // namespace

TEST_CASE("kMAD explosion needs N' + 1 replacements") {
  for (int n : {10, 11, 40, 101}) {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      auto x = sample(kGpd, n, seed);
      CAPTURE(n);
      CAPTURE(seed);
      CHECK(min_alterations(x, kGpd, kKmad, Direction::Explosion) == nprime(x, 10) + 1);
    }
  }
}

TEST_CASE("constructive search agrees with brute force at n = 10") {
  // candidate replacement values: near zero, and far out in the tail
  const std::vector<double> values{1e-12, 1e3, 1e6, 1e9};
  int cheaper = 0;
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    auto x = sample(kGpd, 10, seed);
    CAPTURE(seed);
    int c = min_alterations(x, kGpd, kKmad, Direction::Explosion);
    REQUIRE(c == nprime(x, 10) + 1);
    // with the median held fixed nothing cheaper exists
    CHECK(exhaustive_min_alterations(x, kGpd, kKmad, Direction::Explosion, values, c, true) == c);
    // pulling the median down is cheaper, and the shift search finds the optimum
    int b = exhaustive_min_alterations(x, kGpd, kKmad, Direction::Explosion, values, c);
    int s = min_alterations(x, kGpd, kKmad, Direction::Explosion, AttackSet::ShiftMedian);
    CHECK(s == b);
    CHECK(b <= c);
    if (b < c) ++cheaper;
  }
  CHECK(cheaper > 0);
}

TEST_CASE("median shift attack") {
  // seed 100 of the GPD: three points near 0 make X_(4) the hi-med and leave
  // two points in (m, 11 m)
  auto x = sample(kGpd, 10, 100);
  CHECK(min_alterations(x, kGpd, kKmad, Direction::Explosion, AttackSet::ShiftMedian) == 3);
  // Sn and Qn are unaffected by the attack set
  for (auto kind : {EstimatorKind::MedSn, EstimatorKind::MedQn}) {
    EstimatorSpec s{kind};
    CHECK(min_alterations(x, kGpd, s, Direction::Explosion, AttackSet::ShiftMedian) ==
          min_alterations(x, kGpd, s, Direction::Explosion));
  }
  CHECK(parse_attack_set(attack_set_name(AttackSet::ShiftMedian)) == AttackSet::ShiftMedian);
  CHECK_THROWS_AS(parse_attack_set("all"), ParameterError);
}

TEST_CASE("PE search on small samples") {
  const std::vector<double> values{1e-12, 1e3, 1e9};
  int cheaper = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto x = sample(kGpd, 12, seed);
    int c = min_alterations(x, kGpd, kPe, Direction::Explosion);
    REQUIRE(c >= 0);
    if (c == 0) continue;
    // the original points serve as replacement values too
    std::vector<double> v = values;
    v.insert(v.end(), x.begin(), x.end());
    CAPTURE(seed);
    CHECK(exhaustive_min_alterations(x, kGpd, kPe, Direction::Explosion, v, c, true) == c);
    int b = exhaustive_min_alterations(x, kGpd, kPe, Direction::Explosion, v, c);
    int s = min_alterations(x, kGpd, kPe, Direction::Explosion, AttackSet::ShiftMedian);
    CHECK(b == s);
    if (b < c) ++cheaper;
  }
  CHECK(cheaper > 0);
}

TEST_CASE("already broken samples need no replacement") {
  // Q3 < 2 Q2: PE for the GPD is invalid as it stands
  std::vector<double> x{1, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7};
  CHECK(min_alterations(x, kGpd, kPe, Direction::Explosion) == 0);
  auto out = min_alterations_any(x, kGpd, kPe);
  CHECK(out.count == 0);
}

TEST_CASE("alteration counts respect the equivariant bound") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    int n = 10 + 2 * static_cast<int>(seed);
    auto x = sample(kGpd, n, seed);
    double b = equivariant_upper_bound(x);
    for (const auto& spec : {kKmad, kPe}) {
      auto out = min_alterations_any(x, kGpd, spec);
      REQUIRE(out.count >= 0);
      CHECK(static_cast<double>(std::max(out.count - 1, 0)) / n <= b + 1e-15);
    }
  }
}

TEST_CASE("simulation is reproducible across worker counts") {
  auto a = simulate_efsbp(kGpd, kKmad, 40, 60, 7, 1);
  auto b = simulate_efsbp(kGpd, kKmad, 40, 60, 7, 3);
  CHECK(a.counts == b.counts);
  CHECK(a.mean_efsbp == b.mean_efsbp);
  CHECK(a.ci_halfwidth == b.ci_halfwidth);
  auto c = simulate_efsbp(kGpd, kKmad, 40, 60, 8, 1);
  CHECK(c.counts != a.counts);
}

TEST_CASE("special cases") {
  auto w = simulate_efsbp(Model{Family::Weibull, 1, 0.7}, kPe, 40, 50, 1);
  CHECK(w.mean_efsbp == 0.25);
  CHECK(w.ci_halfwidth == 0);
  CHECK_THROWS_AS(simulate_efsbp(Model{Family::Gamma, 1, 0.7}, kPe, 40, 50, 1), DomainError);
  CHECK_THROWS_AS(simulate_efsbp(kGpd, kPe, 3, 50, 1), ParameterError);
  CHECK_THROWS_AS(simulate_efsbp(kGpd, kPe, 40, 1, 1), ParameterError);

  EstimatorSpec r = kKmad;
  r.restricted = true;
  auto s = simulate_efsbp(kGpd, r, 40, 100, 3);
  CHECK(s.implosions > s.explosions);
  CHECK(s.unbroken == 0);
}

TEST_CASE("simulated and analytic expected FSBP agree") {
  // PE breaks once the N0 points in [2 Q2, Q3] sit at Q2; MedkMAD needs the
  // N' points out of the window plus X_(1) at 0
  AnalyticOptions o;
  const int n = 40;
  auto pe = simulate_efsbp(kGpd, kPe, n, 1500, 11);
  CHECK(std::abs(pe.mean_efsbp - efsbp_analytic(EstimatorKind::PE, n, kGpd, o)) <
        1.5 * pe.ci_halfwidth);
  auto km = simulate_efsbp(kGpd, kKmad, n, 1500, 11);
  CHECK(std::abs(km.mean_efsbp - 1.0 / n - efsbp_analytic(EstimatorKind::MedkMAD, n, kGpd, o)) <
        1.5 * km.ci_halfwidth);
  const Model gam{Family::Gamma, 1, 0.7};
  auto sim = simulate_efsbp(gam, kKmad, 20, 1500, 12);
  double an = efsbp_analytic(EstimatorKind::MedkMAD, 20, gam, o);
  CHECK(std::abs(sim.mean_efsbp - 1.0 / 20 - an) < 1.5 * sim.ci_halfwidth);
  // the shift attack lowers the expectation well below the closed form
  auto sh = simulate_efsbp(kGpd, kKmad, n, 300, 11, 0, AttackSet::ShiftMedian);
  CHECK(sh.mean_efsbp < km.mean_efsbp - 0.1);
}
