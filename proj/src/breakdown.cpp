#include "robustbp/breakdown.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "robustbp/errors.hpp"
#include "robustbp/numeric.hpp"
#include "robustbp/rng.hpp"

namespace rbp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> sorted_copy(std::span<const double> x) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  return s;
}

double gevd_factor(GevdThreshold th) {
  return th == GevdThreshold::OnePlusQ0 ? 1.0 + q0_zero() : q0_zero();
}

// Window factor c for the PE count [c Q2, Q3].
double pe_factor(Family f, bool restricted, GevdThreshold th) {
  return (f == Family::GEVD && restricted) ? gevd_factor(th) : 2.0;
}

double kmad_qcheck(double k) {
  return quotient_limits(Family::GPD, Dispersion::kmad(k)).first;
}

// The median's order statistic i1 = floor(n/2)+1 has u = F(X_(i1)) ~ Beta(i1, n-i1+1).
struct Layout {
  int n, i1, i2;
  double log_norm;

  explicit Layout(int n_) : n(n_), i1(n_ / 2 + 1), i2((3 * n_ + 3) / 4) {
    log_norm = std::lgamma(n + 1.0) - std::lgamma(i1) - std::lgamma(n - i1 + 1.0);
  }
  double log_beta(double u) const {
    return log_norm + (i1 - 1) * std::log(u) + (n - i1) * std::log1p(-u);
  }
  double mode() const { return (i1 - 1.0) / (n - 1.0); }
  double sd() const {
    double a = i1, b = n - i1 + 1.0;
    return std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1)));
  }
  // Panel edges around centre c at geometric distances of the beta sd.
  std::vector<double> breakpoints(double c) const {
    std::vector<double> bp{0.0, 1.0};
    double s = sd();
    for (double m = 0.25; m <= 256; m *= 2) {
      bp.push_back(c - m * s);
      bp.push_back(c + m * s);
    }
    bp.push_back(c);
    for (double& v : bp) v = std::clamp(v, 0.0, 1.0);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    return bp;
  }
};

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

// floor((n - n0 - 1)_+ / 2) for a sorted sample
long equivariant_cap(std::span<const double> s) {
  std::size_t n0 = 1, run = 1;
  for (std::size_t i = 1; i < s.size(); ++i) {
    run = (s[i] == s[i - 1]) ? run + 1 : 1;
    n0 = std::max(n0, run);
  }
  return std::max(0L, static_cast<long>(s.size()) - static_cast<long>(n0) - 1) / 2;
}

// P(upper point below t | u) for the n - i1 points above the median.
double p_above(const Model& m, double u, double t) {
  return clamp01((cdf(m, t) - u) / (1 - u));
}
// P(lower point above t | u) for the i1 - 1 points below the median.
double p_below_above(const Model& m, double u, double t) {
  return clamp01((u - cdf(m, t)) / u);
}

// log of the integral over (0,1) of exp(lf(u)).
double log_integrate(const Layout& L, const std::function<double(double)>& lf) {
  const int grid = 8000;
  double best = kNegInf, best_u = L.mode();
  for (int i = 1; i < grid; ++i) {
    double u = static_cast<double>(i) / grid;
    double v = lf(u);
    if (v > best) { best = v; best_u = u; }
  }
  if (best == kNegInf) return kNegInf;
  double h = 1.0 / grid;
  auto mx = maximize(lf, std::max(1e-15, best_u - h), std::min(1 - 1e-15, best_u + h));
  if (mx.second > best) { best = mx.second; best_u = mx.first; }
  auto f = [&](double u, std::vector<double>& out) {
    double v = lf(u);
    out[0] = v == kNegInf ? 0.0 : std::exp(v - best);
  };
  auto r = integrate_vector(f, 1, L.breakpoints(best_u), 1e-12);
  if (!(r[0] > 0)) return kNegInf;
  return best + std::log(r[0]);
}

// log P(Binomial(N,p) >= r)
double log_binom_tail(int r, int N, double p) {
  if (r <= 0) return 0.0;
  if (r > N) return kNegInf;
  if (p <= 0) return kNegInf;
  if (p >= 1) return 0.0;
  // P(X >= r) = I_p(r, N-r+1); for tiny values use the leading term bound
  double v = boost::math::ibeta(static_cast<double>(r), static_cast<double>(N - r + 1), p);
  if (v > 0) return std::log(v);
  // underflow: sum the pmf terms in log space
  double acc = kNegInf;
  for (int j = r; j <= N; ++j) {
    double t = log_binom_pmf(j, N, p);
    acc = log_add_exp(acc, t);
    if (t < acc - 40) break;
  }
  return acc;
}

}  // namespace

// ---------------------------------------------------------------------------
// sample-wise counts

BreakdownReport fsbp_pe(std::span<const double> x, Family f, bool restricted,
                        MedianConvention c, GevdThreshold th, NonPositiveMedian np) {
  auto s = sorted_copy(x);
  BreakdownReport r;
  r.n = s.size();
  r.restricted = restricted;
  if (f == Family::Gamma) throw DomainError("PE at the Gamma family has no FSBP count");
  if (f == Family::Weibull) {
    // the quartile matching is valid for any Q3 > Q2 > 0; only moving Q3 or
    // Q2 to the boundary breaks it, which takes a quarter of the sample
    r.count = static_cast<long>(r.n / 4);
    r.fsbp = 0.25;
    return r;
  }
  auto q = pe_quartiles(s, c);
  double lo = pe_factor(f, restricted, th) * q.q2;
  if (!(q.q2 > 0)) {
    if (np == NonPositiveMedian::ZeroCount) return r;  // already invalid
    lo = std::nextafter(q.q2, INFINITY);
  }
  auto a = std::lower_bound(s.begin(), s.end(), lo);
  auto b = std::upper_bound(s.begin(), s.end(), q.q3);
  r.count = b > a ? static_cast<long>(b - a) : 0;
  r.fsbp = static_cast<double>(std::min(r.count, equivariant_cap(s))) / r.n;
  return r;
}

BreakdownReport fsbp_medkmad(std::span<const double> x, double k, Family f, bool restricted,
                             MedianConvention c) {
  if (f == Family::GEVD) throw DomainError("MedkMAD at the GEVD has no FSBP count");
  auto s = sorted_copy(x);
  BreakdownReport r;
  r.n = s.size();
  r.restricted = restricted && f == Family::GPD;
  double m = median_sorted(s, c);
  if (!(m > 0)) return r;
  auto a = std::upper_bound(s.begin(), s.end(), m);
  auto b = std::upper_bound(s.begin(), s.end(), (k + 1) * m);
  r.count = static_cast<long>(b - a);
  long best = r.count;
  if (r.restricted) {
    double qc = kmad_qcheck(k);
    auto lo = std::upper_bound(s.begin(), s.end(), (1 - qc) * m);
    auto hi = std::lower_bound(s.begin(), s.end(), (k * qc + 1) * m);
    long inside = hi > lo ? static_cast<long>(hi - lo) : 0;
    r.count2 = std::max(0L, static_cast<long>(kmad_coverage(r.n)) - inside);
    best = std::min(best, r.count2);
  }
  // the count can pass the equivariant bound by one for odd n (and more
  // with ties); the bound holds for every equivariant estimator
  r.fsbp = static_cast<double>(std::min(best, equivariant_cap(s))) / r.n;
  return r;
}

double equivariant_upper_bound(std::span<const double> x) {
  if (x.empty()) throw DomainError("empty sample");
  auto s = sorted_copy(x);
  return static_cast<double>(equivariant_cap(s)) / s.size();
}

// ---------------------------------------------------------------------------
// asymptotic

double abp(EstimatorKind e, Family f, double xi, double k, bool restricted, GevdThreshold th) {
  Model m{f, 1.0, xi};
  validate(m);
  if (e == EstimatorKind::PE) {
    switch (f) {
      case Family::GPD:
        if (std::abs(xi) < 1e-12) return 0.0;  // exponential: 2 Q2 = Q3
        return std::pow(std::pow(2.0, xi + 1) - 1, -1.0 / xi) - 0.25;
      case Family::GEVD: {
        if (restricted) {
          double q2 = median(m), q3 = quantile(m, 0.75);
          double lo = gevd_factor(th) * q2;
          return lo < q3 ? 0.75 - cdf(m, lo) : 0.0;
        }
        double a = 2 * std::pow(std::log(2.0), -xi) - 1;
        return 0.75 - std::exp(-std::pow(a, -1.0 / xi));
      }
      case Family::Weibull: return 0.25;
      case Family::Gamma: throw DomainError("PE at the Gamma family has no ABP");
    }
  }
  if (e == EstimatorKind::MedkMAD) {
    if (f == Family::GEVD) throw DomainError("MedkMAD at the GEVD has no closed-form ABP");
    double med = median(m);
    double e1 = cdf(m, (k + 1) * med) - 0.5;
    if (!(restricted && f == Family::GPD)) return e1;
    double qc = kmad_qcheck(k);
    double e2 = 0.5 - cdf(m, (k * qc + 1) * med) + cdf(m, (1 - qc) * med);
    return std::min(e1, e2);
  }
  throw DomainError("no closed-form ABP for " + std::string(estimator_name(e)));
}

// ---------------------------------------------------------------------------
// finite-sample distributions

double CountDistribution::mean() const {
  double s = 0;
  for (std::size_t l = 0; l < pmf.size(); ++l) s += l * pmf[l];
  return s;
}

double CountDistribution::cdf(int l) const {
  double s = 0;
  for (int i = 0; i <= l && i < static_cast<int>(pmf.size()); ++i) s += pmf[i];
  return s;
}

CountDistribution count_pmf(CountKind kind, int n, const Model& m, double k,
                            GevdThreshold th, NonPositiveMedian np) {
  validate(m);
  if (n < 3) throw DomainError("count_pmf needs n >= 3");
  Layout L(n);
  const int up = n - L.i1;  // points above the median
  CountDistribution out;
  out.kind = kind;
  out.n = n;
  out.model = m;
  out.k = k;
  std::size_t dim = 0;
  std::function<void(double, std::vector<double>&)> cond;
  std::vector<double> b1, b2;

  switch (kind) {
    case CountKind::N0:
    case CountKind::N0Tilde: {
      if (n < 4) throw DomainError("PE counts need n >= 4");
      const double c = kind == CountKind::N0 ? 2.0 : gevd_factor(th);
      const int W = L.i2 - L.i1;
      dim = W + 1;
      cond = [&, c, W](double u, std::vector<double>& v) {
        std::fill(v.begin(), v.end(), 0.0);
        double q = quantile(m, u);
        if (!(q > 0)) {
          if (np == NonPositiveMedian::ZeroCount) { v[0] = 1; return; }
          v[W] = 1;  // every upper point up to Q3 lies above c Q2
          return;
        }
        binom_pmf(up, p_above(m, u, c * q), b1);
        for (int j = 0; j <= up; ++j) v[std::max(W - j, 0)] += b1[j];
      };
      break;
    }
    case CountKind::NPrime: {
      dim = up + 1;
      cond = [&](double u, std::vector<double>& v) {
        double q = quantile(m, u);
        binom_pmf(up, p_above(m, u, (k + 1) * q), b1);
        std::copy(b1.begin(), b1.end(), v.begin());
      };
      break;
    }
    case CountKind::NDoublePrime: {
      if (m.family != Family::GPD) throw DomainError("N'' is defined for the GPD only");
      const double qc = kmad_qcheck(k);
      const int low = L.i1 - 1, need = L.i1 - 1;  // N'' = (i1 - 1 - L - R)+
      dim = need + 1;
      cond = [&, qc, low, need](double u, std::vector<double>& v) {
        std::fill(v.begin(), v.end(), 0.0);
        double q = quantile(m, u);
        binom_pmf(low, p_below_above(m, u, (1 - qc) * q), b1);
        binom_pmf(up, p_above(m, u, (k * qc + 1) * q), b2);
        for (int a = 0; a <= low; ++a) {
          if (b1[a] == 0) continue;
          for (int r = 0; r <= up; ++r) v[std::max(need - a - r, 0)] += b1[a] * b2[r];
        }
      };
      break;
    }
  }
  auto f = [&](double u, std::vector<double>& v) {
    double w = std::exp(L.log_beta(u));
    if (w == 0) { std::fill(v.begin(), v.end(), 0.0); return; }
    cond(u, v);
    for (double& x : v) x *= w;
  };
  out.pmf = integrate_vector(f, dim, L.breakpoints(L.mode()), 1e-11);
  double tot = 0;
  for (double p : out.pmf) tot += p;
  if (std::abs(tot - 1) > 1e-6) throw NumericError("count_pmf: mass " + std::to_string(tot));
  return out;
}

CountPlan count_plan(EstimatorKind e, Family f, bool restricted) {
  CountPlan p;
  if (e == EstimatorKind::PE) {
    switch (f) {
      case Family::GPD: p.kind = CountKind::N0; return p;
      case Family::GEVD: p.kind = restricted ? CountKind::N0Tilde : CountKind::N0; return p;
      case Family::Weibull: p.fixed_quarter = true; return p;
      case Family::Gamma: throw DomainError("PE at the Gamma family: not applicable");
    }
  }
  if (e == EstimatorKind::MedkMAD && f != Family::GEVD) {
    p.kind = CountKind::NPrime;
    p.joint_min = restricted && f == Family::GPD;
    return p;
  }
  throw DomainError("no analytic breakdown count for " + std::string(estimator_name(e)) +
                    " at " + std::string(family_name(f)));
}

double mean_min_count_mc(int n, const Model& m, double k, std::size_t M, std::uint64_t seed,
                         unsigned threads) {
  std::vector<long> v(M);
  (void)kmad_qcheck(k);  // build the cache before the workers start
  parallel_for(
      M,
      [&](std::size_t r) {
        auto x = sample(m, n, derive_seed(seed, r));
        auto rep = fsbp_medkmad(x, k, Family::GPD, true);
        v[r] = std::lround(rep.fsbp * n);
      },
      threads);
  double s = 0;
  for (long c : v) s += c;
  return s / M;
}

double efsbp_analytic(EstimatorKind e, int n, const Model& m, const AnalyticOptions& o) {
  auto plan = count_plan(e, m.family, o.restricted);
  if (plan.fixed_quarter) return 0.25;
  if (plan.joint_min) return mean_min_count_mc(n, m, o.k, o.mc_replicates, o.seed, o.threads) / n;
  // continuous model: no ties, cap (n-2)/2
  auto d = count_pmf(plan.kind, n, m, o.k, o.threshold, o.nonpositive);
  const int cap = (n - 2) / 2;
  double s = 0;
  for (std::size_t l = 0; l < d.pmf.size(); ++l) s += std::min<int>(l, cap) * d.pmf[l];
  return s / n;
}

double log_p0(EstimatorKind e, int n, const Model& m, const AnalyticOptions& o) {
  validate(m);
  auto plan = count_plan(e, m.family, o.restricted);
  if (plan.fixed_quarter) return kNegInf;
  Layout L(n);
  const int up = n - L.i1, low = L.i1 - 1;
  const double k = o.k;
  std::function<double(double)> cond;  // log P(count = 0 | u)

  auto lp_prime = [&](double u, double q) {
    double p = p_above(m, u, (k + 1) * q);
    return p >= 1 ? kNegInf : up * std::log1p(-p);
  };
  double qc = (plan.kind == CountKind::NPrime && plan.joint_min) ? kmad_qcheck(k) : 0.0;
  // log P(N'' = 0 | u) = log P(L + R >= i1 - 1)
  auto lp_second = [&](double u, double q) {
    double pl = p_below_above(m, u, (1 - qc) * q);
    double pr = p_above(m, u, (k * qc + 1) * q);
    double acc = kNegInf;
    for (int a = low; a >= 0; --a) {
      double t = log_binom_pmf(a, low, pl) + log_binom_tail(low - a, up, pr);
      acc = log_add_exp(acc, t);
    }
    return acc;
  };

  switch (plan.kind) {
    case CountKind::N0:
    case CountKind::N0Tilde: {
      double c = plan.kind == CountKind::N0 ? 2.0 : gevd_factor(o.threshold);
      int W = L.i2 - L.i1;
      cond = [&, c, W](double u) {
        double q = quantile(m, u);
        if (!(q > 0)) return o.nonpositive == NonPositiveMedian::ZeroCount ? 0.0 : kNegInf;
        return log_binom_tail(W, up, p_above(m, u, c * q));
      };
      break;
    }
    case CountKind::NPrime:
      if (!plan.joint_min) {
        cond = [&](double u) { return lp_prime(u, quantile(m, u)); };
      } else {
        // P(N'=0) + P(N''=0) - P(both); both needs R = 0 and all lower points inside
        cond = [&](double u) {
          double q = quantile(m, u);
          double a = lp_prime(u, q), b = lp_second(u, q);
          double pl = p_below_above(m, u, (1 - qc) * q);
          double c = (pl > 0 ? low * std::log(pl) : (low == 0 ? 0.0 : kNegInf)) + a;
          double mx = std::max(a, b);
          if (mx == kNegInf) return kNegInf;
          double v = std::exp(a - mx) + std::exp(b - mx) - std::exp(c - mx);
          return v > 0 ? mx + std::log(v) : kNegInf;
        };
      }
      break;
    case CountKind::NDoublePrime:
      cond = [&](double u) { return lp_second(u, quantile(m, u)); };
      break;
  }
  auto lf = [&](double u) {
    if (!(u > 0 && u < 1)) return kNegInf;
    double c = cond(u);
    return c == kNegInf ? kNegInf : L.log_beta(u) + c;
  };
  return log_integrate(L, lf);
}

double p0(EstimatorKind e, int n, const Model& m, const AnalyticOptions& o) {
  return std::exp(log_p0(e, n, m, o));
}

double min_count_below(int l, int n, const Model& m, double k) {
  if (l <= 0) return 0.0;
  Layout L(n);
  const int up = n - L.i1, low = L.i1 - 1;
  const double qc = kmad_qcheck(k);
  std::vector<double> pa, pL;
  auto f = [&](double u, std::vector<double>& out) {
    double w = std::exp(L.log_beta(u));
    if (w == 0) { out[0] = 0; return; }
    double q = quantile(m, u);
    double pP = p_above(m, u, (k + 1) * q);           // in N' window
    double pA = p_above(m, u, (k * qc + 1) * q);      // in both windows
    double pl = p_below_above(m, u, (1 - qc) * q);    // lower point inside
    double pB = pA < 1 ? clamp01((pP - pA) / (1 - pA)) : 0.0;
    binom_pmf(up, pA, pa);
    binom_pmf(low, pl, pL);
    // tail of L: P(L >= t)
    std::vector<double> tail(low + 2, 0.0);
    for (int t = low; t >= 0; --t) tail[t] = tail[t + 1] + pL[t];
    auto Lge = [&](int t) { return t <= 0 ? 1.0 : (t > low ? 0.0 : tail[t]); };
    double first = binom_cdf(l - 1, up, pP);
    double second = 0, both = 0;
    for (int a = 0; a <= up; ++a) {
      if (pa[a] == 0) continue;
      double lt = Lge(L.i1 - l - a);
      second += pa[a] * lt;
      if (a <= l - 1) both += pa[a] * binom_cdf(l - 1 - a, up - a, pB) * lt;
    }
    out[0] = w * std::clamp(first + second - both, 0.0, 1.0);
  };
  return integrate_vector(f, 1, L.breakpoints(L.mode()), 1e-11)[0];
}

double q1(EstimatorKind e, int n, const Model& m, const AnalyticOptions& o, int runs,
          double conf) {
  auto plan = count_plan(e, m.family, o.restricted);
  if (plan.fixed_quarter) return 0.25;
  const double thr = -std::expm1(std::log(conf) / runs);
  int best = 0;
  if (plan.joint_min) {
    for (int l = 1; l <= n; ++l) {
      if (min_count_below(l + 1, n, m, o.k) <= thr) best = l;
      else break;
    }
    return static_cast<double>(best) / n;
  }
  auto d = count_pmf(plan.kind, n, m, o.k, o.threshold, o.nonpositive);
  double acc = 0;  // P(count <= l)
  for (int l = 0; l < static_cast<int>(d.pmf.size()); ++l) {
    acc += d.pmf[l];
    if (acc <= thr) best = l;
    else break;
  }
  return static_cast<double>(best) / n;
}

}  // namespace rbp
