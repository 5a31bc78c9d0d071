#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rbp {

enum class Family { GPD, GEVD, Weibull, Gamma };

// Scale-shape model with location fixed at 0.
struct Model {
  Family family = Family::GPD;
  double beta = 1.0;
  double xi = 0.7;
};

std::string_view family_name(Family f);
Family parse_family(std::string_view s);

// Throws ParameterError on beta <= 0, non-finite values, or xi <= 0 for
// Weibull/Gamma.
void validate(const Model& m);

double cdf(const Model& m, double x);
double pdf(const Model& m, double x);
double quantile(const Model& m, double p);
double median(const Model& m);

// Support endpoints; +-infinity where unbounded.
double lower_endpoint(const Model& m);
double upper_endpoint(const Model& m);
bool in_support(const Model& m, double x);

// i.i.d. draws by quantile inversion, in draw order.  Identical
// (model, n, seed) give identical output.
std::vector<double> sample(const Model& m, std::size_t n, std::uint64_t seed);

}  // namespace rbp
