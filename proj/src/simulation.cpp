#include <algorithm>
#include <cmath>
#include <string>

#include "robustbp/errors.hpp"
#include "robustbp/functionals.hpp"
#include "robustbp/numeric.hpp"
#include "robustbp/rng.hpp"
#include "robustbp/simulation.hpp"

namespace rbp {

std::string_view attack_set_name(AttackSet a) {
  return a == AttackSet::FixedMedian ? "fixed-median" : "shift-median";
}

AttackSet parse_attack_set(std::string_view s) {
  if (s == "fixed-median" || s == "fixed") return AttackSet::FixedMedian;
  if (s == "shift-median" || s == "shift") return AttackSet::ShiftMedian;
  throw ParameterError("unknown attack set '" + std::string(s) + "'");
}

SimulationResult simulate_efsbp(const Model& model, const EstimatorSpec& spec, int n,
                                std::size_t M, std::uint64_t seed, unsigned threads,
                                AttackSet attacks) {
  validate(model);
  if (n < 4) throw ParameterError("n must be at least 4");
  if (M < 2) throw ParameterError("M must be at least 2");
  if (spec.kind == EstimatorKind::PE && model.family == Family::Gamma)
    throw DomainError("PE at the Gamma family: not applicable");

  SimulationResult r;
  r.M = M;
  r.n = n;
  r.seed = seed;
  r.spec = spec;
  r.model = model;
  r.attacks = attacks;

  if (spec.kind == EstimatorKind::PE && model.family == Family::Weibull) {
    // the estimate exists for every sample with Q3 > Q2 > 0; only the quarter
    // of points at or below Q2 can break it
    r.counts.assign(M, n / 4);
    r.mean_efsbp = 0.25;
    r.explosions = M;
    return r;
  }
  if (spec.kind != EstimatorKind::PE)
    (void)quotient_branch(model.family, spec.dispersion(), spec.restricted);  // warm cache

  std::vector<int> counts(M), dirs(M);
  parallel_for(
      M,
      [&](std::size_t i) {
        auto x = sample(model, n, derive_seed(seed, i));
        auto out = min_alterations_any(x, model, spec, attacks);
        counts[i] = out.count;
        dirs[i] = out.direction == Direction::Explosion ? 0 : 1;
      },
      threads ? threads : default_threads());

  double sum = 0, sum2 = 0;
  for (std::size_t i = 0; i < M; ++i) {
    double v;
    if (counts[i] < 0) {
      ++r.unbroken;
      v = static_cast<double>(n / 2) / n;
    } else {
      (dirs[i] == 0 ? r.explosions : r.implosions)++;
      v = static_cast<double>(counts[i]) / n;
    }
    sum += v;
    sum2 += v * v;
  }
  r.mean_efsbp = sum / M;
  double var = (sum2 - sum * sum / M) / (M - 1);
  r.ci_halfwidth = 1.96 * std::sqrt(std::max(var, 0.0) / M);
  r.counts = std::move(counts);
  return r;
}

}  // namespace rbp
