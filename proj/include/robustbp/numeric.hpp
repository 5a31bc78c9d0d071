#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace rbp {

using Fn = std::function<double(double)>;

// Bracketed root of f on [a,b] (TOMS 748).  f(a), f(b) must differ in sign.
// Stops when the bracket is narrower than tol relative to its magnitude
// (tol <= 0 means full double precision).
double find_root(const Fn& f, double a, double b, double tol = 0);

// Grows [a,b] geometrically in the direction given by the sign pattern until
// f changes sign, then solves.  lo_limit/hi_limit cap the search.
double find_root_expanding(const Fn& f, double a, double b, double lo_limit,
                           double hi_limit, double tol = 0);

// Argmax of a unimodal function on [a,b] (Brent's minimiser).
std::pair<double, double> maximize(const Fn& f, double a, double b);

// Adaptive 15-point Gauss-Kronrod on [a,b], relative tolerance tol.
double integrate(const Fn& f, double a, double b, double tol = 1e-10);

// Vector-valued adaptive Gauss-Kronrod.  f(u, out) writes dim values; panels
// between the given breakpoints are bisected until the L1 error estimate of
// each panel is below tol times the L1 mass of the full integral.
std::vector<double> integrate_vector(
    const std::function<void(double, std::vector<double>&)>& f, std::size_t dim,
    const std::vector<double>& breakpoints, double tol = 1e-10, int max_depth = 30);

double log_add_exp(double a, double b);
double log_choose(double n, double k);

// log pmf of Binomial(N, p) at j; p may be 0 or 1.
double log_binom_pmf(int j, int N, double p);
// Full pmf vector of Binomial(N, p), length N+1.
void binom_pmf(int N, double p, std::vector<double>& out);
// P(Binomial(N,p) <= j)
double binom_cdf(int j, int N, double p);

// Worker count: ROBUSTBP_THREADS if set, else hardware concurrency.
unsigned default_threads();

// Runs fn(i) for i in [0,count) on up to `threads` workers.  Each index is
// handled exactly once; callers write results into per-index slots so the
// output does not depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  unsigned threads = 0);

}  // namespace rbp
