#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "robustbp/distributions.hpp"
#include "robustbp/estimators.hpp"
#include "robustbp/functionals.hpp"

namespace rbp {

// Threshold factor c in the restricted-GEVD window [c Q2, Q3].
enum class GevdThreshold { OnePlusQ0, Q0 };

// PE count when the empirical median is not positive (GEVD only): the
// estimator is already invalid, so the count is 0; UpperWindow keeps the
// count of upper points in the window instead.
enum class NonPositiveMedian { ZeroCount, UpperWindow };

struct BreakdownReport {
  std::size_t n = 0;
  long count = 0;         // N0, N0~ or N'
  long count2 = -1;       // N'' (restricted GPD MedkMAD), else -1
  double fsbp = 0;        // eps*_n
  bool restricted = false;
};

BreakdownReport fsbp_pe(std::span<const double> x, Family f, bool restricted,
                        MedianConvention c = MedianConvention::HiMed,
                        GevdThreshold th = GevdThreshold::OnePlusQ0,
                        NonPositiveMedian np = NonPositiveMedian::ZeroCount);

BreakdownReport fsbp_medkmad(std::span<const double> x, double k, Family f, bool restricted,
                             MedianConvention c = MedianConvention::HiMed);

// floor((n - n0 - 1)_+ / 2) / n with n0 the highest multiplicity.
double equivariant_upper_bound(std::span<const double> x);

// Closed-form asymptotic breakdown point.
double abp(EstimatorKind e, Family f, double xi, double k = 10.0, bool restricted = false,
           GevdThreshold th = GevdThreshold::OnePlusQ0);

enum class CountKind { N0, N0Tilde, NPrime, NDoublePrime };

struct CountDistribution {
  CountKind kind = CountKind::N0;
  int n = 0;
  Model model;
  double k = 10.0;
  std::vector<double> pmf;  // pmf[l] = P(count = l)

  double mean() const;
  double cdf(int l) const;  // P(count <= l)
};

// Exact finite-sample distribution of a breakdown count under the ideal
// model (hi-med conventions), by quadrature over u = F(median).
CountDistribution count_pmf(CountKind kind, int n, const Model& m, double k = 10.0,
                            GevdThreshold th = GevdThreshold::OnePlusQ0,
                            NonPositiveMedian np = NonPositiveMedian::ZeroCount);

// Which analytic count applies to an estimator setting.  Throws DomainError
// when none does (Sn/Qn, GEVD MedkMAD, Gamma PE).
struct CountPlan {
  bool fixed_quarter = false;  // Weibull PE: eps* = 1/4 for every sample
  bool joint_min = false;      // restricted GPD MedkMAD: min(N', N'')
  CountKind kind = CountKind::N0;
};
CountPlan count_plan(EstimatorKind e, Family f, bool restricted);

struct AnalyticOptions {
  double k = 10.0;
  bool restricted = false;
  GevdThreshold threshold = GevdThreshold::OnePlusQ0;
  NonPositiveMedian nonpositive = NonPositiveMedian::ZeroCount;
  std::size_t mc_replicates = 100000;  // E[min(N',N'')] only
  std::uint64_t seed = 20240607;
  unsigned threads = 0;
};

double efsbp_analytic(EstimatorKind e, int n, const Model& m, const AnalyticOptions& o);

// log P(count = 0), natural log; -inf when exactly 0.
double log_p0(EstimatorKind e, int n, const Model& m, const AnalyticOptions& o);
double p0(EstimatorKind e, int n, const Model& m, const AnalyticOptions& o);

// Largest l/n with P(count <= l) <= 1 - conf^(1/runs), 0 if none: the
// fraction below which no realisation is expected in `runs` draws.
double q1(EstimatorKind e, int n, const Model& m, const AnalyticOptions& o,
          int runs = 10000, double conf = 0.95);

// P(min(N',N'') < l) for restricted GPD MedkMAD, exact.
double min_count_below(int l, int n, const Model& m, double k);

// Monte-Carlo E[min(N',N'')] over ideal samples.
double mean_min_count_mc(int n, const Model& m, double k, std::size_t M, std::uint64_t seed,
                         unsigned threads = 0);

}  // namespace rbp
