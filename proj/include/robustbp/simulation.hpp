#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "robustbp/distributions.hpp"
#include "robustbp/estimators.hpp"

namespace rbp {

enum class Direction { Explosion, Implosion };

// Relative offset used for "just above / just below" placements.
inline constexpr double kPlacementOffset = 1e-9;
// Families with left endpoint 0 never reach q = 1 exactly (the bound holds
// for every sample); explosion is declared within this distance of it.
inline constexpr double kEndpointSlack = 1e-6;

// Replacement strategies the adversary may use.  FixedMedian keeps the
// order statistics that define the median in place (the constructions behind
// the closed-form counts).  ShiftMedian also moves the median: for MedkMAD at
// families with left endpoint 0 it sends points to just above 0, for PE it
// lifts low points to Q3.
enum class AttackSet { FixedMedian, ShiftMedian };

std::string_view attack_set_name(AttackSet a);
AttackSet parse_attack_set(std::string_view s);

// True when the (sorted) sample breaks the estimator in the given direction.
bool is_broken(std::span<const double> sorted, const Model& model, const EstimatorSpec& spec,
               Direction dir);

// Directions that count as breakdown for this setting.
std::vector<Direction> breakdown_directions(const Model& model, const EstimatorSpec& spec);

// Smallest number of replaced observations that drives the estimator to
// breakdown in direction dir, over the constructive strategy set; -1 when no
// strategy succeeds.  0 when the sample is already broken.
int min_alterations(std::span<const double> x, const Model& model, const EstimatorSpec& spec,
                    Direction dir, AttackSet attacks = AttackSet::FixedMedian);

struct AlterationOutcome {
  int count = -1;  // -1: no strategy succeeded
  Direction direction = Direction::Explosion;
};

// Minimum over the applicable directions.
AlterationOutcome min_alterations_any(std::span<const double> x, const Model& model,
                                      const EstimatorSpec& spec,
                                      AttackSet attacks = AttackSet::FixedMedian);

// Brute force over all replacement subsets of size up to max_size with values
// drawn (with repetition) from `values`.  keep_median skips replacements that
// change the sample median.  Only for small n.
int exhaustive_min_alterations(std::span<const double> x, const Model& model,
                               const EstimatorSpec& spec, Direction dir,
                               std::span<const double> values, int max_size,
                               bool keep_median = false);

struct SimulationResult {
  double mean_efsbp = 0;    // mean of alterations/n
  double ci_halfwidth = 0;  // 1.96 sd / sqrt(M)
  std::size_t M = 0;
  int n = 0;
  std::uint64_t seed = 0;
  EstimatorSpec spec;
  Model model;
  AttackSet attacks = AttackSet::FixedMedian;
  std::size_t explosions = 0;  // runs where explosion was the cheaper route
  std::size_t implosions = 0;
  std::size_t unbroken = 0;    // runs where no strategy succeeded (counted as n/2)
  std::vector<int> counts;     // per replicate, in replicate order
};

// Per-replicate samples use derive_seed(seed, r), so the result does not
// depend on the worker count.
SimulationResult simulate_efsbp(const Model& model, const EstimatorSpec& spec, int n,
                                std::size_t M, std::uint64_t seed, unsigned threads = 0,
                                AttackSet attacks = AttackSet::FixedMedian);

}  // namespace rbp
