#include "robustbp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "robustbp/errors.hpp"
#include "robustbp/numeric.hpp"

namespace rbp {

std::string_view status_name(Status s) {
  switch (s) {
    case Status::Valid: return "valid";
    case Status::InvalidNegScale: return "invalid_neg_scale";
    case Status::InvalidNegShape: return "invalid_neg_shape";
    case Status::BreakdownExplosion: return "breakdown_explosion";
    case Status::BreakdownImplosion: return "breakdown_implosion";
    case Status::Invalid: return "invalid";
  }
  return "?";
}

std::string_view estimator_name(EstimatorKind e) {
  switch (e) {
    case EstimatorKind::PE: return "PE";
    case EstimatorKind::MedkMAD: return "MedkMAD";
    case EstimatorKind::MedSn: return "MedSn";
    case EstimatorKind::MedQn: return "MedQn";
  }
  return "?";
}

EstimatorKind parse_estimator(std::string_view s) {
  std::string t;
  for (char c : s) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (t == "pe" || t == "pickands") return EstimatorKind::PE;
  if (t == "medkmad" || t == "kmad") return EstimatorKind::MedkMAD;
  if (t == "medsn" || t == "sn") return EstimatorKind::MedSn;
  if (t == "medqn" || t == "qn") return EstimatorKind::MedQn;
  throw ParameterError("unknown estimator '" + std::string(s) + "'");
}

Dispersion EstimatorSpec::dispersion() const {
  switch (kind) {
    case EstimatorKind::MedSn: return Dispersion::sn();
    case EstimatorKind::MedQn: return Dispersion::qn();
    default: return Dispersion::kmad(k);
  }
}

std::string EstimatorSpec::label() const {
  if (kind == EstimatorKind::PE) return "PE";
  return "Med" + dispersion_name(dispersion());
}

namespace {

const double kLog43 = std::log(std::log(4.0 / 3.0));  // ln ln(4/3)
const double kLog2 = std::log(std::log(2.0));         // ln ln 2

std::vector<double> sorted_copy(std::span<const double> x) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  return s;
}

Estimate pe_shell(double q2, double q3, bool restricted) {
  Estimate e;
  e.estimator = EstimatorKind::PE;
  e.restricted = restricted;
  e.q2 = q2;
  e.q3 = q3;
  return e;
}

}  // namespace

double q0_zero() { return (kLog43 - kLog2) / kLog2; }

double q0(double xi) {
  if (xi == 0) return q0_zero();
  // log(c)^-xi - 1 = expm1(-xi ln log c), stable for small |xi|
  double a = std::expm1(-xi * kLog43), b = std::expm1(-xi * kLog2);
  return (a - b) / b;
}

double q0_invert(double r) {
  if (!(r > 0) || !std::isfinite(r)) throw DomainError("q0_invert: ratio must be positive");
  auto f = [r](double xi) { return q0(xi) - r; };
  return find_root_expanding(f, -1.0, 3.0, -300.0, 300.0, 1e-14);
}

QuartilePair pe_quartiles(std::span<const double> s, MedianConvention c) {
  const std::size_t n = s.size();
  if (n < 4) throw DomainError("Pickands estimators need n >= 4");
  std::size_t i3 = (3 * n + 3) / 4;  // ceil(3n/4), 1-based
  return {median_sorted(s, c), s[i3 - 1]};
}

Estimate pickands_from_quartiles(Family f, double q2, double q3, bool restricted) {
  Estimate e = pe_shell(q2, q3, restricted);
  if (!(q2 > 0) || !std::isfinite(q3)) return e;  // Status::Invalid
  switch (f) {
    case Family::GPD: {
      if (q3 <= 2 * q2) { e.status = Status::InvalidNegScale; return e; }
      e.xi_hat = std::log2((q3 - q2) / q2);
      e.beta_hat = e.xi_hat * q2 * q2 / (q3 - 2 * q2);
      e.status = Status::Valid;
      return e;
    }
    case Family::GEVD: {
      if (q3 <= 2 * q2) { e.status = Status::InvalidNegScale; return e; }
      if (restricted && q3 <= (1 + q0_zero()) * q2) {
        e.status = Status::InvalidNegShape;
        return e;
      }
      double xi = q0_invert((q3 - q2) / q2);
      // median = beta (ln2^-xi - 1) / xi; the xi -> 0 limit is -beta ln ln 2
      double b = std::expm1(-xi * kLog2);
      e.xi_hat = xi;
      e.beta_hat = xi == 0 ? q2 / -kLog2 : q2 * xi / b;
      e.status = e.beta_hat > 0 ? Status::Valid : Status::InvalidNegScale;
      return e;
    }
    case Family::Weibull: {
      if (!(q3 > q2)) return e;
      const double num = std::log(std::log(4.0)) - std::log(std::log(2.0));
      e.xi_hat = num / (std::log(q3) - std::log(q2));
      e.beta_hat = q2 / std::pow(std::log(2.0), 1.0 / e.xi_hat);
      e.status = Status::Valid;
      return e;
    }
    case Family::Gamma: {
      double r = q3 / q2;
      if (!(r > 1)) return e;
      auto ratio = [](double xi) {
        Model m{Family::Gamma, 1.0, xi};
        return quantile(m, 0.75) / quantile(m, 0.5);
      };
      auto g = [&](double xi) { return std::log(ratio(xi)) - std::log(r); };
      double xi;
      try {
        xi = find_root_expanding(g, 1e-3, 50.0, 2e-3, 1e6, 1e-14);
      } catch (const NumericError&) {
        return e;  // ratio not attainable
      }
      e.xi_hat = xi;
      e.beta_hat = q2 / quantile(Model{Family::Gamma, 1.0, xi}, 0.5);
      e.status = Status::Valid;
      return e;
    }
  }
  return e;
}

Estimate pickands_gpd(std::span<const double> x, bool restricted, MedianConvention c) {
  auto s = sorted_copy(x);
  auto q = pe_quartiles(s, c);
  return pickands_from_quartiles(Family::GPD, q.q2, q.q3, restricted);
}

Estimate pickands_gevd(std::span<const double> x, bool restricted, MedianConvention c) {
  auto s = sorted_copy(x);
  auto q = pe_quartiles(s, c);
  return pickands_from_quartiles(Family::GEVD, q.q2, q.q3, restricted);
}

Estimate pickands_weibull(std::span<const double> x, MedianConvention c) {
  auto s = sorted_copy(x);
  auto q = pe_quartiles(s, c);
  return pickands_from_quartiles(Family::Weibull, q.q2, q.q3, false);
}

Estimate pickands_gamma(std::span<const double> x, MedianConvention c) {
  auto s = sorted_copy(x);
  auto q = pe_quartiles(s, c);
  return pickands_from_quartiles(Family::Gamma, q.q2, q.q3, false);
}

Estimate ld_estimate(std::span<const double> x, const Dispersion& d, Family f,
                     bool restricted, MedianConvention c) {
  auto s = sorted_copy(x);
  if (s.size() < 2) throw DomainError("LD estimators need n >= 2");
  Estimate e;
  e.estimator = d.type == Dispersion::Type::kMAD ? EstimatorKind::MedkMAD
                : d.type == Dispersion::Type::Sn ? EstimatorKind::MedSn
                                                 : EstimatorKind::MedQn;
  e.restricted = restricted;
  e.median = median_sorted(s, c);
  if (!(e.median > 0)) return e;
  e.dispersion = dispersion_sorted(s, d, c);
  e.quotient = e.dispersion / e.median;
  try {
    e.xi_hat = quotient_invert(f, d, e.quotient, restricted);
  } catch (const BreakdownSignal& b) {
    bool up = b.direction == BreakdownSignal::Direction::Explosion;
    e.status = up ? Status::BreakdownExplosion : Status::BreakdownImplosion;
    return e;
  }
  e.beta_hat = e.median / median(Model{f, 1.0, e.xi_hat});
  e.status = Status::Valid;
  return e;
}

Estimate estimate(std::span<const double> x, Family f, const EstimatorSpec& spec) {
  if (spec.kind == EstimatorKind::PE) {
    switch (f) {
      case Family::GPD: return pickands_gpd(x, spec.restricted, spec.convention);
      case Family::GEVD: return pickands_gevd(x, spec.restricted, spec.convention);
      case Family::Weibull: return pickands_weibull(x, spec.convention);
      case Family::Gamma: return pickands_gamma(x, spec.convention);
    }
  }
  return ld_estimate(x, spec.dispersion(), f, spec.restricted, spec.convention);
}

}  // namespace rbp
