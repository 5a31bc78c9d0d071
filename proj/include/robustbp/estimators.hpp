#pragma once

#include <limits>
#include <span>
#include <string>
#include <string_view>

#include "robustbp/distributions.hpp"
#include "robustbp/functionals.hpp"

namespace rbp {

enum class Status {
  Valid,
  InvalidNegScale,
  InvalidNegShape,
  BreakdownExplosion,
  BreakdownImplosion,
  Invalid,  // degenerate input (non-positive median, empty quantile gap, ...)
};

std::string_view status_name(Status s);

enum class EstimatorKind { PE, MedkMAD, MedSn, MedQn };

std::string_view estimator_name(EstimatorKind e);
EstimatorKind parse_estimator(std::string_view s);

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::MedkMAD;
  double k = 10.0;
  bool restricted = false;  // xi > 0 instead of xi in R (GPD/GEVD only)
  MedianConvention convention = MedianConvention::HiMed;

  Dispersion dispersion() const;
  std::string label() const;  // "PE", "MedkMAD10", "MedSn", "MedQn"
};

struct Estimate {
  double beta_hat = std::numeric_limits<double>::quiet_NaN();
  double xi_hat = std::numeric_limits<double>::quiet_NaN();
  Status status = Status::Invalid;
  EstimatorKind estimator = EstimatorKind::PE;
  bool restricted = false;
  // intermediates: Q2/Q3 for PE, median/dispersion/quotient for LD
  double q2 = std::numeric_limits<double>::quiet_NaN();
  double q3 = std::numeric_limits<double>::quiet_NaN();
  double median = std::numeric_limits<double>::quiet_NaN();
  double dispersion = std::numeric_limits<double>::quiet_NaN();
  double quotient = std::numeric_limits<double>::quiet_NaN();

  bool valid() const { return status == Status::Valid; }
};

// q0(xi) = (log(4/3)^-xi - log(2)^-xi) / (log(2)^-xi - 1)
double q0(double xi);
double q0_invert(double r);
// q0(0) = (ln ln(4/3) - ln ln 2) / ln ln 2
double q0_zero();

// Q2 (median under the convention; hi-med by default) and Q3 = X_(ceil(3n/4)).
struct QuartilePair {
  double q2, q3;
};
QuartilePair pe_quartiles(std::span<const double> sorted,
                          MedianConvention c = MedianConvention::HiMed);

// Quantile-based estimators evaluated from (Q2, Q3) directly.
Estimate pickands_from_quartiles(Family f, double q2, double q3, bool restricted);

Estimate pickands_gpd(std::span<const double> x, bool restricted,
                      MedianConvention c = MedianConvention::HiMed);
Estimate pickands_gevd(std::span<const double> x, bool restricted,
                       MedianConvention c = MedianConvention::HiMed);
Estimate pickands_weibull(std::span<const double> x,
                          MedianConvention c = MedianConvention::HiMed);
Estimate pickands_gamma(std::span<const double> x,
                        MedianConvention c = MedianConvention::HiMed);

Estimate ld_estimate(std::span<const double> x, const Dispersion& d, Family f,
                     bool restricted, MedianConvention c = MedianConvention::HiMed);

// Dispatch on the spec.  The sample need not be sorted.
Estimate estimate(std::span<const double> x, Family f, const EstimatorSpec& spec);

}  // namespace rbp
