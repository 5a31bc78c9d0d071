#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "robustbp/distributions.hpp"
#include "robustbp/functionals.hpp"
#include "robustbp/simulation.hpp"

namespace rbp::report {

// 0.4475 -> "44.75"
std::string percent(double p);
// natural-log probability -> "2.7e-01"; "<1e-300" below that, "0" for -inf
std::string p0_text(double log_p);
// fixed 6 significant digits, for figure series
std::string number(double x);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::string csv_field(const std::string& s);
std::string to_csv(const Table& t);
// {"config": ..., "results": [{column: value}, ...]}; cells that parse as
// numbers are emitted as numbers.
std::string to_json(const Table& t, const nlohmann::json& config);

struct GridOptions {
  std::vector<int> ns{10, 40, 100, 1000};
  double beta = 1.0;
  double xi = 0.7;
  double k = 10.0;
  std::size_t M = 10000;                // simulated table
  std::size_t mc_replicates = 100000;   // E[min(N',N'')]
  std::uint64_t seed = 20240607;
  unsigned threads = 0;
  MedianConvention convention = MedianConvention::HiMed;  // simulated table
  AttackSet attacks = AttackSet::FixedMedian;              // simulated table
};

// p0, q1, mean EFSBP and ABP per family, estimator, shape domain and n.
Table table_p0q1e(const GridOptions& o);
// simulated mean EFSBP and CI per family, shape domain, n and estimator.
Table table_simulated(const GridOptions& o);

// Series tables have columns series, x, y.
Table figure_q0(int points = 101);
Table figure_abp_vs_xi(double k = 10.0);
Table figure_efsbp_vs_n(const Model& m, int n_min = 10, int n_max = 200, double k = 10.0);
Table figure_quotients(Family f, double k = 10.0);

std::string svg_plot(const Table& series, const std::string& title, bool log_y = false);

}  // namespace rbp::report
