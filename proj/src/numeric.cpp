#include "robustbp/numeric.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "robustbp/errors.hpp"

namespace rbp {

double find_root(const Fn& f, double a, double b, double tol) {
  double fa = f(a), fb = f(b);
  if (fa == 0) return a;
  if (fb == 0) return b;
  if (std::isnan(fa) || std::isnan(fb) || (fa > 0) == (fb > 0))
    throw NumericError("find_root: root not bracketed");
  std::uintmax_t iters = 200;
  auto stop = [tol](double x, double y) {
    if (tol <= 0) return std::abs(x - y) <= 4 * std::numeric_limits<double>::epsilon() *
                                                  std::max(std::abs(x), std::abs(y));
    return std::abs(x - y) <= tol * std::max(1.0, std::max(std::abs(x), std::abs(y)));
  };
  try {
    auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, stop, iters);
    // pick the side with the smaller residual
    return std::abs(f(r.first)) <= std::abs(f(r.second)) ? r.first : r.second;
  } catch (const std::exception& e) {
    throw NumericError(std::string("find_root: ") + e.what());
  }
}

double find_root_expanding(const Fn& f, double a, double b, double lo_limit,
                           double hi_limit, double tol) {
  double fa = f(a), fb = f(b);
  for (int it = 0; it < 200 && (fa > 0) == (fb > 0); ++it) {
    double w = b - a;
    bool can_lo = a > lo_limit, can_hi = b < hi_limit;
    if (!can_lo && !can_hi) break;
    // expand toward the end with the smaller |f|
    if (can_hi && (!can_lo || std::abs(fb) <= std::abs(fa))) {
      b = std::min(hi_limit, b + 2 * w);
      fb = f(b);
    } else {
      a = std::max(lo_limit, a - 2 * w);
      fa = f(a);
    }
  }
  if ((fa > 0) == (fb > 0) && fa != 0 && fb != 0)
    throw NumericError("find_root_expanding: no sign change found");
  return find_root(f, a, b, tol);
}

std::pair<double, double> maximize(const Fn& f, double a, double b) {
  auto neg = [&](double x) { return -f(x); };
  std::uintmax_t iters = 500;
  auto r = boost::math::tools::brent_find_minima(neg, a, b, 52, iters);
  return {r.first, -r.second};
}

double integrate(const Fn& f, double a, double b, double tol) {
  double err = 0;
  double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 25, tol,
                                                                            &err);
  if (!std::isfinite(v)) throw NumericError("integrate: non-finite result");
  return v;
}

namespace {

struct Panel {
  double a, b;
  std::vector<double> val;
  double err;
};

void gk_panel(const std::function<void(double, std::vector<double>&)>& f, std::size_t dim,
              Panel& p, std::vector<double>& buf) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  const auto& x = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = boost::math::quadrature::gauss<double, 7>::weights();
  double c = 0.5 * (p.a + p.b), h = 0.5 * (p.b - p.a);
  std::vector<double> kr(dim, 0.0), ga(dim, 0.0);

  for (std::size_t i = 0; i < x.size(); ++i) {
    int signs = (x[i] == 0) ? 1 : 2;
    for (int s = 0; s < signs; ++s) {
      double u = c + (s == 0 ? 1 : -1) * h * x[i];
      f(u, buf);
      for (std::size_t d = 0; d < dim; ++d) {
        kr[d] += wk[i] * buf[d];
        if (i % 2 == 0) ga[d] += wg[i / 2] * buf[d];
      }
    }
  }
  p.err = 0;
  for (std::size_t d = 0; d < dim; ++d) {
    kr[d] *= h;
    ga[d] *= h;
    p.err += std::abs(kr[d] - ga[d]);
  }
  p.val = std::move(kr);
}

}  // namespace

std::vector<double> integrate_vector(
    const std::function<void(double, std::vector<double>&)>& f, std::size_t dim,
    const std::vector<double>& breakpoints, double tol, int max_depth) {
  // The 7-point Gauss nodes sit at the even Kronrod indices.
  {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    const auto& gx = boost::math::quadrature::gauss<double, 7>::abscissa();
    const auto& kx = GK::abscissa();
    for (std::size_t i = 0; i < gx.size(); ++i)
      if (std::abs(gx[i] - kx[2 * i]) > 1e-15)
        throw NumericError("integrate_vector: unexpected node layout");
  }
  std::vector<double> buf(dim);
  std::vector<Panel> todo, done;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i + 1] > breakpoints[i])) continue;
    Panel p{breakpoints[i], breakpoints[i + 1], {}, 0};
    gk_panel(f, dim, p, buf);
    todo.push_back(std::move(p));
  }
  auto mass = [&]() {
    double s = 0;
    for (auto* v : {&todo, &done})
      for (auto& p : *v)
        for (double x : p.val) s += std::abs(x);
    return s;
  };
  for (int depth = 0; depth < max_depth && !todo.empty(); ++depth) {
    double total = mass();
    double lim = tol * std::max(total, 1e-300);
    std::vector<Panel> next;
    for (auto& p : todo) {
      if (p.err <= lim || (p.b - p.a) < 1e-14) {
        done.push_back(std::move(p));
        continue;
      }
      double mid = 0.5 * (p.a + p.b);
      Panel l{p.a, mid, {}, 0}, r{mid, p.b, {}, 0};
      gk_panel(f, dim, l, buf);
      gk_panel(f, dim, r, buf);
      next.push_back(std::move(l));
      next.push_back(std::move(r));
    }
    todo = std::move(next);
  }
  for (auto& p : todo) done.push_back(std::move(p));
  std::sort(done.begin(), done.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  std::vector<double> out(dim, 0.0);
  for (auto& p : done)
    for (std::size_t d = 0; d < dim; ++d) out[d] += p.val[d];
  return out;
}

double log_add_exp(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double log_choose(double n, double k) {
  return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

double log_binom_pmf(int j, int N, double p) {
  if (j < 0 || j > N) return -INFINITY;
  if (p <= 0) return j == 0 ? 0.0 : -INFINITY;
  if (p >= 1) return j == N ? 0.0 : -INFINITY;
  return log_choose(N, j) + j * std::log(p) + (N - j) * std::log1p(-p);
}

void binom_pmf(int N, double p, std::vector<double>& out) {
  out.assign(N + 1, 0.0);
  if (p <= 0) { out[0] = 1; return; }
  if (p >= 1) { out[N] = 1; return; }
  double lp = std::log(p), lq = std::log1p(-p);
  double lgN = std::lgamma(N + 1.0);
  for (int j = 0; j <= N; ++j)
    out[j] = std::exp(lgN - std::lgamma(j + 1.0) - std::lgamma(N - j + 1.0) + j * lp +
                      (N - j) * lq);
}

double binom_cdf(int j, int N, double p) {
  if (j < 0) return 0.0;
  if (j >= N) return 1.0;
  if (p <= 0) return 1.0;
  if (p >= 1) return 0.0;
  return boost::math::ibetac(j + 1.0, static_cast<double>(N - j), p);
}

unsigned default_threads() {
  if (const char* s = std::getenv("ROBUSTBP_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end != s && v > 0) return static_cast<unsigned>(v);
  }
  unsigned h = std::thread::hardware_concurrency();
  return h == 0 ? 1 : h;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  unsigned threads) {
  if (threads == 0) threads = default_threads();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(err_mu);
        if (!err) err = std::current_exception();
        next = count;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace rbp
