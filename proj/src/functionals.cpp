#include "robustbp/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "robustbp/errors.hpp"
#include "robustbp/numeric.hpp"

namespace rbp {

std::string_view convention_name(MedianConvention c) {
  switch (c) {
    case MedianConvention::HiMed: return "himed";
    case MedianConvention::LoMed: return "lomed";
    case MedianConvention::Average: return "average";
  }
  return "?";
}

MedianConvention parse_convention(std::string_view s) {
  if (s == "himed" || s == "hi") return MedianConvention::HiMed;
  if (s == "lomed" || s == "lo") return MedianConvention::LoMed;
  if (s == "average" || s == "avg") return MedianConvention::Average;
  throw ParameterError("unknown median convention '" + std::string(s) + "'");
}

std::string dispersion_name(const Dispersion& d) {
  switch (d.type) {
    case Dispersion::Type::kMAD: {
      double r = std::round(d.k);
      if (std::abs(d.k - r) < 1e-12) return "kMAD" + std::to_string(static_cast<long>(r));
      return "kMAD" + std::to_string(d.k);
    }
    case Dispersion::Type::Sn: return "Sn";
    case Dispersion::Type::Qn: return "Qn";
  }
  return "?";
}

double median_sorted(std::span<const double> s, MedianConvention c) {
  const std::size_t n = s.size();
  if (n == 0) throw DomainError("median of an empty sample");
  double hi = s[n / 2];            // index floor(n/2)+1, 1-based
  double lo = s[(n + 1) / 2 - 1];  // index ceil(n/2)
  switch (c) {
    case MedianConvention::HiMed: return hi;
    case MedianConvention::LoMed: return lo;
    case MedianConvention::Average: return 0.5 * (lo + hi);
  }
  return hi;
}

double empirical_median(std::span<const double> x, MedianConvention c) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  return median_sorted(s, c);
}

std::size_t kmad_coverage(std::size_t n) { return n / 2 + 1; }

namespace {

double kmad_sorted(std::span<const double> s, double m, double k) {
  // coverage(t) = #{i : d_i <= t}, so kMAD is the order statistic of d with
  // rank kmad_coverage(n).  Comparing distances avoids m + k*t rounding past x.
  std::vector<double> d;
  d.reserve(s.size());
  for (double x : s) d.push_back(x < m ? m - x : x > m ? (x - m) / k : 0.0);
  auto it = d.begin() + static_cast<std::ptrdiff_t>(kmad_coverage(s.size()) - 1);
  std::nth_element(d.begin(), it, d.end());
  return *it;
}

// #{i : d_i <= B} (or < B), same distances as kmad_sorted
std::size_t kmad_within(std::span<const double> s, double m, double k, double B, bool strict) {
  std::size_t c = 0;
  for (double x : s) {
    double d = x < m ? m - x : x > m ? (x - m) / k : 0.0;
    if (strict ? d < B : d <= B) ++c;
  }
  return c;
}

// #{j : |s_j - s_i| <= B} (or < B), tested on the differences themselves
std::size_t near_count(std::span<const double> s, std::size_t i, double B, bool strict) {
  auto in = [&](double diff) { return strict ? diff < B : diff <= B; };
  auto r = std::partition_point(s.begin() + static_cast<std::ptrdiff_t>(i), s.end(),
                                [&](double x) { return in(x - s[i]); });
  auto l = std::partition_point(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(i),
                                [&](double x) { return !in(s[i] - x); });
  return static_cast<std::size_t>(r - l);
}

// k-th smallest (1-based) of the distances from s[i] to the other points.
double kth_distance(std::span<const double> s, std::size_t i, std::size_t k) {
  const std::size_t nl = i, nr = s.size() - 1 - i;
  auto L = [&](std::size_t r) { return s[i] - s[i - 1 - r]; };  // ascending in r
  auto R = [&](std::size_t r) { return s[i + 1 + r] - s[i]; };
  // take a from L and k-a from R
  std::size_t lo = k > nr ? k - nr : 0, hi = std::min(k, nl);
  while (lo < hi) {
    std::size_t a = (lo + hi) / 2;  // a < hi <= nl and k-a-1 < nr
    if (L(a) < R(k - a - 1)) lo = a + 1;
    else hi = a;
  }
  std::size_t a = lo;
  double v = -std::numeric_limits<double>::infinity();
  if (a > 0) v = std::max(v, L(a - 1));
  if (k - a > 0) v = std::max(v, R(k - a - 1));
  return v;
}

double sn_sorted(std::span<const double> s) {
  const std::size_t n = s.size();
  const std::size_t inner = n / 2 + 1;  // hi-med of n distances incl. self
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = inner == 1 ? 0.0 : kth_distance(s, i, inner - 1);
  std::size_t outer = (n + 1) / 2;  // lo-med
  std::nth_element(g.begin(), g.begin() + (outer - 1), g.end());
  return g[outer - 1];
}

std::size_t qn_rank(std::size_t n) {
  std::size_t h = n / 2 + 1;
  return h * (h - 1) / 2;
}

// #{i<j : s_j - s_i <= B} (or < B when strict)
std::size_t pairs_within(std::span<const double> s, double B, bool strict) {
  std::size_t c = 0, j = 0;
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (j < i + 1) j = i + 1;
    while (j < n && (strict ? s[j] - s[i] < B : s[j] - s[i] <= B)) ++j;
    c += j - i - 1;
  }
  return c;
}

double qn_sorted(std::span<const double> s) {
  const std::size_t r = qn_rank(s.size());
  double lo = -1.0, hi = s.back() - s.front();
  // invariant: count(<= lo) < r <= count(<= hi)
  for (int it = 0; it < 2000; ++it) {
    double mid = lo < 0 ? 0.5 * hi : lo + 0.5 * (hi - lo);
    if (!(mid > lo && mid < hi)) break;
    if (pairs_within(s, mid, false) >= r) hi = mid;
    else lo = mid;
  }
  return hi;
}

}  // namespace

double dispersion_sorted(std::span<const double> s, const Dispersion& d, MedianConvention c) {
  if (s.size() < 2) throw DomainError("dispersion needs at least 2 observations");
  switch (d.type) {
    case Dispersion::Type::kMAD:
      if (!(d.k > 0)) throw ParameterError("kMAD requires k > 0");
      return kmad_sorted(s, median_sorted(s, c), d.k);
    case Dispersion::Type::Sn: return sn_sorted(s);
    case Dispersion::Type::Qn: return qn_sorted(s);
  }
  return 0.0;
}

double empirical_dispersion(std::span<const double> x, const Dispersion& d,
                            MedianConvention c) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  return dispersion_sorted(s, d, c);
}

bool dispersion_at_least(std::span<const double> s, const Dispersion& d, double m, double B) {
  const std::size_t n = s.size();
  if (B <= 0) return true;
  switch (d.type) {
    case Dispersion::Type::kMAD:
      // every t < B covers at most the open window
      return kmad_within(s, m, d.k, B, true) < kmad_coverage(n);
    case Dispersion::Type::Sn: {
      // g_i < B  iff  #{j : |x_i - x_j| < B} >= inner
      const std::size_t inner = n / 2 + 1, outer = (n + 1) / 2;
      std::size_t small = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (near_count(s, i, B, true) >= inner) ++small;
      return small < outer;
    }
    case Dispersion::Type::Qn:
      return pairs_within(s, B, true) < qn_rank(n);
  }
  return false;
}

bool dispersion_at_most(std::span<const double> s, const Dispersion& d, double m, double B) {
  const std::size_t n = s.size();
  if (B < 0) return false;
  switch (d.type) {
    case Dispersion::Type::kMAD:
      return kmad_within(s, m, d.k, B, false) >= kmad_coverage(n);
    case Dispersion::Type::Sn: {
      const std::size_t inner = n / 2 + 1, outer = (n + 1) / 2;
      std::size_t small = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (near_count(s, i, B, false) >= inner) ++small;
      return small >= outer;
    }
    case Dispersion::Type::Qn:
      return pairs_within(s, B, false) >= qn_rank(n);
  }
  return false;
}

// ---------------------------------------------------------------------------
// population side

namespace {

double pop_kmad(const Model& mod, double k) {
  const double m = median(mod);
  auto f = [&](double t) { return cdf(mod, m + k * t) - cdf(mod, m - t) - 0.5; };
  double scale = std::max(std::abs(m), mod.beta);
  return find_root_expanding(f, 0.0, scale, 0.0, 1e300, 1e-13);
}

// P(g(X) <= t) where g(x) is the median of |X - x|.  The window mass
// w(x) = G(x+t) - G(x-t) is unimodal for unimodal G, so {g <= t} is an
// interval; work on the probability scale v = G(x).
double sn_mass(const Model& mod, double t) {
  auto w = [&](double v) {
    double x = quantile(mod, v);
    return cdf(mod, x + t) - cdf(mod, x - t);
  };
  const double vlo = 1e-14, vhi = 1 - 1e-14;
  // coarse scan to seed the maximiser, robust against flat tails
  double best_v = 0.5, best = -1;
  for (int i = 1; i < 200; ++i) {
    double v = i / 200.0;
    double y = w(v);
    if (y > best) { best = y; best_v = v; }
  }
  double a = std::max(vlo, best_v - 0.005), b = std::min(vhi, best_v + 0.005);
  if (w(vlo) > best) { best_v = vlo; best = w(vlo); a = vlo; b = vlo + 0.005; }
  auto mx = maximize(w, a, b);
  if (mx.second > best) { best = mx.second; best_v = mx.first; }
  if (best < 0.5) return 0.0;
  auto g = [&](double v) { return w(v) - 0.5; };
  double left = g(vlo) >= 0 ? 0.0 : find_root(g, vlo, best_v, 1e-15);
  double right = g(vhi) >= 0 ? 1.0 : find_root(g, best_v, vhi, 1e-15);
  return right - left;
}

double pop_sn(const Model& mod) {
  double scale = std::max(median(mod), mod.beta);
  auto f = [&](double t) { return sn_mass(mod, t) - 0.5; };
  return find_root_expanding(f, 1e-3 * scale, scale, 1e-12 * scale, 1e300, 1e-12);
}

double pop_qn(const Model& mod) {
  // with factor d = 1: smallest s with  int G(Q(u)+s) du >= 5/8.  tanh-sinh
  // copes with the unbounded Q near u = 1 in a few hundred evaluations.
  static thread_local boost::math::quadrature::tanh_sinh<double> ts;
  auto f = [&](double s) {
    auto inner = [&](double u) { return cdf(mod, quantile(mod, u) + s); };
    return ts.integrate(inner, 0.0, 1.0, 1e-12) - 0.625;
  };
  double scale = std::max(median(mod), mod.beta);
  return find_root_expanding(f, 1e-3 * scale, scale, 1e-12 * scale, 1e300, 1e-12);
}

}  // namespace

double population_dispersion(const Model& m, const Dispersion& d) {
  validate(m);
  switch (d.type) {
    case Dispersion::Type::kMAD:
      if (!(d.k > 0)) throw ParameterError("kMAD requires k > 0");
      return pop_kmad(m, d.k);
    case Dispersion::Type::Sn: return pop_sn(m);
    case Dispersion::Type::Qn: return pop_qn(m);
  }
  return 0.0;
}

}  // namespace rbp
