#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "robustbp/distributions.hpp"

namespace rbp {

enum class MedianConvention { HiMed, LoMed, Average };

std::string_view convention_name(MedianConvention c);
MedianConvention parse_convention(std::string_view s);

struct Dispersion {
  enum class Type { kMAD, Sn, Qn };
  Type type = Type::kMAD;
  double k = 10.0;  // kMAD only

  static Dispersion kmad(double k) { return {Type::kMAD, k}; }
  static Dispersion sn() { return {Type::Sn, 0.0}; }
  static Dispersion qn() { return {Type::Qn, 0.0}; }
};

std::string dispersion_name(const Dispersion& d);

// Median of an already sorted sample.
double median_sorted(std::span<const double> s, MedianConvention c);
double empirical_median(std::span<const double> x, MedianConvention c);

// Dispersion of an already sorted sample.  The kMAD centre is the median
// under convention c; Sn and Qn do not use c (hi-med inner, lo-med outer).
double dispersion_sorted(std::span<const double> s, const Dispersion& d,
                         MedianConvention c);
double empirical_dispersion(std::span<const double> x, const Dispersion& d,
                            MedianConvention c);

// Fast O(n log n) comparisons against a threshold, for the alteration search.
// For kMAD, m is the centre in use.
bool dispersion_at_least(std::span<const double> s, const Dispersion& d, double m, double B);
bool dispersion_at_most(std::span<const double> s, const Dispersion& d, double m, double B);

// Coverage required by the empirical kMAD: floor(n/2)+1 points.
std::size_t kmad_coverage(std::size_t n);

// Population functionals (Qn with consistency factor 1).
double population_dispersion(const Model& m, const Dispersion& d);

// Scale-free quotient s/m at beta = 1.
double quotient(Family f, const Dispersion& d, double xi);

// Solvable range of the quotient on the branch used for inversion.
struct QuotientBranch {
  double xi_lo = 0, xi_hi = 0;  // shape interval of the branch
  double q_lo = 0, q_hi = 1;    // open range of solvable q
  bool increasing = true;       // q increasing in xi on the branch
  double xi0 = 0;               // GEVD maximiser (0 otherwise)
};

QuotientBranch quotient_branch(Family f, const Dispersion& d, bool restricted);

// (q-check, q-bar) as defined for the breakdown analysis: GPD/GEVD lower
// limit at xi -> 0+, Weibull/Gamma 0; upper 1 except GEVD q(xi0).
std::pair<double, double> quotient_limits(Family f, const Dispersion& d);

// Inverse of the quotient on its branch.  Throws BreakdownSignal when qhat is
// outside the solvable range.
double quotient_invert(Family f, const Dispersion& d, double qhat, bool restricted);

}  // namespace rbp
