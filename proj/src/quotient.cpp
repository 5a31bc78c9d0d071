#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "robustbp/errors.hpp"
#include "robustbp/functionals.hpp"
#include "robustbp/numeric.hpp"

namespace rbp {

namespace {

// Shape limits used for the unrestricted branches and bracket ends.
constexpr double kXiNeg = -3.0;
constexpr double kXiPos = 30.0;
constexpr double kXiTiny = 1e-6;

double xi_floor(Family f) {
  return (f == Family::Weibull || f == Family::Gamma) ? 0.05 : kXiNeg;
}

double xi_ceiling(Family f) {
  switch (f) {
    case Family::Weibull: return 50.0;
    case Family::Gamma: return 200.0;
    default: return kXiPos;
  }
}

using Key = std::tuple<int, int, double, bool>;

std::mutex cache_mu;
std::map<Key, QuotientBranch>& branch_cache() {
  static std::map<Key, QuotientBranch> c;
  return c;
}

QuotientBranch build_branch(Family f, const Dispersion& d, bool restricted) {
  QuotientBranch b;
  auto q = [&](double xi) { return quotient(f, d, xi); };
  if (f == Family::GEVD) {
    // single interior maximum; take the branch holding the reference 0.7
    double best_x = 0, best = -1;
    for (double x = -0.8; x <= 8.0; x += 0.1) {
      double y = q(std::abs(x) < 1e-9 ? kXiTiny : x);
      if (y > best) { best = y; best_x = x; }
    }
    auto mx = maximize(q, best_x - 0.1, best_x + 0.1);
    b.xi0 = mx.first;
    b.q_hi = mx.second;
    if (0.7 < b.xi0) {
      b.increasing = true;
      b.xi_lo = restricted ? kXiTiny : kXiNeg;
      b.xi_hi = b.xi0;
      b.q_lo = q(b.xi_lo);
    } else {
      b.increasing = false;
      b.xi_lo = b.xi0;
      b.xi_hi = kXiPos;
      b.q_lo = q(b.xi_hi);
    }
    return b;
  }
  if (f == Family::GPD) {
    b.increasing = true;
    b.xi_lo = restricted ? kXiTiny : kXiNeg;
    b.xi_hi = kXiPos;
    b.q_lo = q(b.xi_lo);
    b.q_hi = 1.0;
    return b;
  }
  // Weibull / Gamma: direction found numerically, range (0, 1)
  b.xi_lo = xi_floor(f);
  b.xi_hi = xi_ceiling(f);
  b.increasing = q(1.0) > q(0.5);
  b.q_lo = 0.0;
  b.q_hi = 1.0;
  return b;
}

}  // namespace

double quotient(Family f, const Dispersion& d, double xi) {
  Model m{f, 1.0, xi};
  return population_dispersion(m, d) / median(m);
}

QuotientBranch quotient_branch(Family f, const Dispersion& d, bool restricted) {
  // restriction only matters for GPD/GEVD
  if (f == Family::Weibull || f == Family::Gamma) restricted = false;
  Key key{static_cast<int>(f), static_cast<int>(d.type),
          d.type == Dispersion::Type::kMAD ? d.k : 0.0, restricted};
  {
    std::lock_guard<std::mutex> g(cache_mu);
    auto it = branch_cache().find(key);
    if (it != branch_cache().end()) return it->second;
  }
  // built outside the lock; a concurrent duplicate build gives equal values
  QuotientBranch b = build_branch(f, d, restricted);
  std::lock_guard<std::mutex> g(cache_mu);
  return branch_cache().emplace(key, b).first->second;
}

std::pair<double, double> quotient_limits(Family f, const Dispersion& d) {
  switch (f) {
    case Family::GPD: return {quotient(f, d, kXiTiny), 1.0};
    case Family::GEVD: {
      auto b = quotient_branch(f, d, true);
      return {quotient(f, d, kXiTiny), b.q_hi};
    }
    default: return {0.0, 1.0};
  }
}

double quotient_invert(Family f, const Dispersion& d, double qhat, bool restricted) {
  if (std::isnan(qhat)) throw NumericError("quotient_invert: NaN");
  QuotientBranch b = quotient_branch(f, d, restricted);
  using D = BreakdownSignal::Direction;
  if (qhat >= b.q_hi) throw BreakdownSignal(D::Explosion, "quotient at or above its upper limit");
  if (qhat <= b.q_lo) throw BreakdownSignal(D::Implosion, "quotient at or below its lower limit");
  auto g = [&](double xi) { return quotient(f, d, xi) - qhat; };
  double glo = g(b.xi_lo), ghi = g(b.xi_hi);
  if ((glo > 0) == (ghi > 0)) {
    // q-hat lies between the bracket end and the theoretical limit
    bool near_hi_end = std::abs(ghi) < std::abs(glo);
    bool toward_qhi = near_hi_end == b.increasing;
    throw BreakdownSignal(toward_qhi ? D::Explosion : D::Implosion,
                          "shape outside the numerically supported range");
  }
  return find_root(g, b.xi_lo, b.xi_hi, 1e-12);
}

}  // namespace rbp
