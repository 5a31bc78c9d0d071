#include "robustbp/distributions.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>

#include "robustbp/errors.hpp"
#include "robustbp/rng.hpp"

namespace rbp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Below this |xi| the GPD/GEVD use the exponential/Gumbel limit.
constexpr double kXiZero = 1e-9;

}  // namespace

std::string_view family_name(Family f) {
  switch (f) {
    case Family::GPD: return "GPD";
    case Family::GEVD: return "GEVD";
    case Family::Weibull: return "Weibull";
    case Family::Gamma: return "Gamma";
  }
  return "?";
}

Family parse_family(std::string_view s) {
  std::string t;
  for (char c : s) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (t == "gpd") return Family::GPD;
  if (t == "gevd" || t == "gev") return Family::GEVD;
  if (t == "weibull") return Family::Weibull;
  if (t == "gamma") return Family::Gamma;
  throw ParameterError("unknown family '" + std::string(s) + "'");
}

void validate(const Model& m) {
  if (!std::isfinite(m.beta) || !(m.beta > 0))
    throw ParameterError("scale beta must be positive and finite");
  if (!std::isfinite(m.xi)) throw ParameterError("shape xi must be finite");
  if ((m.family == Family::Weibull || m.family == Family::Gamma) && !(m.xi > 0))
    throw ParameterError(std::string(family_name(m.family)) + " requires xi > 0");
}

double lower_endpoint(const Model& m) {
  switch (m.family) {
    case Family::GEVD:
      return m.xi > kXiZero ? -m.beta / m.xi : -kInf;
    default:
      return 0.0;
  }
}

double upper_endpoint(const Model& m) {
  if ((m.family == Family::GPD || m.family == Family::GEVD) && m.xi < -kXiZero)
    return -m.beta / m.xi;
  return kInf;
}

bool in_support(const Model& m, double x) {
  double lo = lower_endpoint(m), hi = upper_endpoint(m);
  // GEVD with xi>0 excludes its endpoint, the others include 0.
  if (m.family == Family::GEVD) return x > lo && x <= hi;
  return x >= lo && x <= hi;
}

double cdf(const Model& m, double x) {
  validate(m);
  if (std::isnan(x)) throw DomainError("cdf: x is NaN");
  const double z = x / m.beta, xi = m.xi;
  switch (m.family) {
    case Family::GPD: {
      if (z <= 0) return 0.0;
      if (std::abs(xi) < kXiZero) return -std::expm1(-z);
      double a = xi * z;
      if (a <= -1) return 1.0;
      return -std::expm1(-std::log1p(a) / xi);
    }
    case Family::GEVD: {
      if (std::abs(xi) < kXiZero) return std::exp(-std::exp(-z));
      double a = xi * z;
      if (a <= -1) return xi > 0 ? 0.0 : 1.0;
      return std::exp(-std::exp(-std::log1p(a) / xi));
    }
    case Family::Weibull:
      if (z <= 0) return 0.0;
      return -std::expm1(-std::pow(z, xi));
    case Family::Gamma:
      if (z <= 0) return 0.0;
      if (std::isinf(z)) return 1.0;
      return boost::math::gamma_p(xi, z);
  }
  return 0.0;
}

double pdf(const Model& m, double x) {
  validate(m);
  const double z = x / m.beta, xi = m.xi, b = m.beta;
  switch (m.family) {
    case Family::GPD: {
      if (z < 0) return 0.0;
      if (std::abs(xi) < kXiZero) return std::exp(-z) / b;
      double a = xi * z;
      if (a <= -1) return 0.0;
      return std::exp(-(1.0 / xi + 1.0) * std::log1p(a)) / b;
    }
    case Family::GEVD: {
      double lt;  // log of t(x) = (1+xi z)^(-1/xi)
      if (std::abs(xi) < kXiZero) {
        lt = -z;
      } else {
        double a = xi * z;
        if (a <= -1) return 0.0;
        lt = -std::log1p(a) / xi;
      }
      return std::exp((xi + 1.0) * lt - std::exp(lt)) / b;
    }
    case Family::Weibull:
      if (z <= 0) return (z == 0 && xi == 1) ? 1.0 / b : 0.0;
      return xi / b * std::pow(z, xi - 1) * std::exp(-std::pow(z, xi));
    case Family::Gamma:
      if (z <= 0) return (z == 0 && xi == 1) ? 1.0 / b : 0.0;
      return boost::math::gamma_p_derivative(xi, z) / b;
  }
  return 0.0;
}

double quantile(const Model& m, double p) {
  validate(m);
  if (!(p > 0 && p < 1)) throw DomainError("quantile: p must lie in (0,1)");
  const double xi = m.xi, b = m.beta;
  switch (m.family) {
    case Family::GPD: {
      double l = -std::log1p(-p);  // -log(1-p)
      if (std::abs(xi) < kXiZero) return b * l;
      return b * std::expm1(xi * l) / xi;
    }
    case Family::GEVD: {
      double l = std::log(-std::log(p));
      if (std::abs(xi) < kXiZero) return -b * l;
      return b * std::expm1(-xi * l) / xi;
    }
    case Family::Weibull:
      return b * std::pow(-std::log1p(-p), 1.0 / xi);
    case Family::Gamma:
      try {
        return b * boost::math::gamma_p_inv(xi, p);
      } catch (const std::exception& e) {
        throw NumericError(std::string("gamma quantile: ") + e.what());
      }
  }
  return 0.0;
}

double median(const Model& m) { return quantile(m, 0.5); }

std::vector<double> sample(const Model& m, std::size_t n, std::uint64_t seed) {
  validate(m);
  if (n == 0) throw DomainError("sample: n must be at least 1");
  UniformStream u(seed);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = quantile(m, u(i));
  return out;
}

}  // namespace rbp
