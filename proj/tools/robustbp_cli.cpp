// robustbp command line front end.
//
// Exit codes: 0 ok, 2 usage, 3 input data, 4 numeric failure, 5 estimator
// not applicable to the family.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "robustbp/breakdown.hpp"
#include "robustbp/errors.hpp"
#include "robustbp/estimators.hpp"
#include "robustbp/numeric.hpp"
#include "robustbp/report.hpp"
#include "robustbp/simulation.hpp"

namespace {

using namespace rbp;
using report::Table;

enum Exit { kOk = 0, kUsage = 2, kInput = 3, kNumeric = 4, kDomain = 5 };

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string command;
  std::string family = "gpd";
  double beta = 1.0;
  double xi = 0.7;
  std::vector<std::string> estimators;
  double k = 10.0;
  std::vector<int> n;
  std::size_t M = 10000;
  std::uint64_t seed = 20240607;
  bool restricted = false;
  std::string convention = "himed";
  std::string attacks = "fixed-median";
  std::string format = "csv";
  std::string out;
  unsigned threads = 0;
  std::string input;
  std::string id;
  std::string svg;

  Model model() const {
    Model m{parse_family(family), beta, xi};
    validate(m);
    return m;
  }
  MedianConvention conv() const { return parse_convention(convention); }
  AttackSet attack_set() const { return parse_attack_set(attacks); }
  std::vector<EstimatorKind> kinds(std::vector<EstimatorKind> fallback) const {
    if (estimators.empty()) return fallback;
    std::vector<EstimatorKind> out;
    for (const auto& e : estimators) out.push_back(parse_estimator(e));
    return out;
  }
  EstimatorSpec spec(EstimatorKind e) const { return EstimatorSpec{e, k, restricted, conv()}; }
  std::vector<int> sizes(std::vector<int> fallback) const { return n.empty() ? fallback : n; }

  nlohmann::json echo() const {
    nlohmann::json j;
    j["command"] = command;
    if (!id.empty()) j["id"] = id;
    j["family"] = family;
    j["beta"] = beta;
    j["xi"] = xi;
    j["estimators"] = estimators;
    j["k"] = k;
    j["n"] = n;
    j["M"] = M;
    j["seed"] = seed;
    j["restricted"] = restricted;
    j["median_convention"] = convention;
    j["attacks"] = attacks;
    if (!input.empty()) j["input"] = input;
    return j;
  }
};

const std::vector<EstimatorKind> kAll = {EstimatorKind::PE, EstimatorKind::MedkMAD,
                                         EstimatorKind::MedSn, EstimatorKind::MedQn};

bool parse_double(std::string_view s, double& v) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return !s.empty() && ec == std::errc() && p == s.data() + s.size();
}

// One observation per line; for CSV input the first column is used and a
// non-numeric first line is taken as a header.
std::vector<double> read_data(const std::string& path, Family f) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::vector<double> x;
  std::vector<std::size_t> outside;
  std::string line;
  std::size_t lineno = 0;
  bool seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view cell(line);
    cell = cell.substr(0, cell.find(','));
    if (cell.find_first_not_of(" \t\r") == std::string_view::npos || cell.front() == '#') continue;
    double v;
    if (!parse_double(cell, v)) {
      if (!seen) {
        seen = true;
        continue;
      }
      throw InputError(path + ":" + std::to_string(lineno) + ": not a number: '" +
                       std::string(cell) + "'");
    }
    seen = true;
    if (!std::isfinite(v) || (f != Family::GEVD && v < 0)) outside.push_back(lineno);
    x.push_back(v);
  }
  if (!outside.empty()) {
    std::string msg = path + ": " + std::to_string(outside.size()) + " observation(s) outside the " +
                      std::string(family_name(f)) + " support, line(s)";
    for (std::size_t i = 0; i < outside.size() && i < 20; ++i)
      msg += (i ? ", " : " ") + std::to_string(outside[i]);
    if (outside.size() > 20) msg += ", ...";
    throw InputError(msg);
  }
  if (x.empty()) throw UsageError("no observations in '" + path + "'");
  return x;
}

std::string fmt(double v) { return report::number(v); }

Table cmd_estimate(const Config& c) {
  Model m = c.model();
  auto x = read_data(c.input, m.family);
  Table t{{"estimator", "xi_domain", "status", "beta_hat", "xi_hat", "q2", "q3", "median",
           "dispersion", "quotient"},
          {}};
  for (auto e : c.kinds(kAll)) {
    auto s = c.spec(e);
    std::vector<std::string> row{s.label(), c.restricted ? ">0" : "R"};
    try {
      Estimate r = estimate(x, m.family, s);
      row.insert(row.end(), {std::string(status_name(r.status)), fmt(r.beta_hat), fmt(r.xi_hat),
                             fmt(r.q2), fmt(r.q3), fmt(r.median), fmt(r.dispersion),
                             fmt(r.quotient)});
    } catch (const DomainError& err) {
      if (!c.estimators.empty()) throw;
      row.insert(row.end(), {"n.a.", "", "", "", "", "", "", ""});
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table cmd_fsbp(const Config& c) {
  Model m = c.model();
  auto x = read_data(c.input, m.family);
  Table t{{"estimator", "xi_domain", "n", "count", "count2", "fsbp", "method", "upper_bound"}, {}};
  const std::string bound = report::percent(equivariant_upper_bound(x));
  for (auto e : c.kinds({EstimatorKind::PE, EstimatorKind::MedkMAD})) {
    auto s = c.spec(e);
    std::vector<std::string> row{s.label(), c.restricted ? ">0" : "R", std::to_string(x.size())};
    bool analytic = (e == EstimatorKind::PE && m.family != Family::Gamma) ||
                    (e == EstimatorKind::MedkMAD && m.family != Family::GEVD &&
                     c.attack_set() == AttackSet::FixedMedian);
    if (analytic) {
      auto r = e == EstimatorKind::PE ? fsbp_pe(x, m.family, c.restricted, c.conv())
                                      : fsbp_medkmad(x, c.k, m.family, c.restricted, c.conv());
      row.insert(row.end(), {std::to_string(r.count), r.count2 < 0 ? "" : std::to_string(r.count2),
                             report::percent(r.fsbp), "count"});
    } else {
      auto a = min_alterations_any(x, m, s, c.attack_set());
      row.insert(row.end(), {std::to_string(a.count), "",
                             a.count < 0 ? "" : report::percent(double(a.count) / x.size()),
                             a.direction == Direction::Explosion ? "alterations_explosion"
                                                                 : "alterations_implosion"});
    }
    row.push_back(bound);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table cmd_abp(const Config& c) {
  Model m = c.model();
  Table t{{"family", "estimator", "xi_domain", "xi", "abp"}, {}};
  for (auto e : c.kinds({EstimatorKind::PE, EstimatorKind::MedkMAD})) {
    t.rows.push_back({std::string(family_name(m.family)), c.spec(e).label(),
                      c.restricted ? ">0" : "R", fmt(m.xi),
                      report::percent(abp(e, m.family, m.xi, c.k, c.restricted))});
  }
  return t;
}

AnalyticOptions analytic_options(const Config& c) {
  AnalyticOptions o;
  o.k = c.k;
  o.restricted = c.restricted;
  o.seed = c.seed;
  o.threads = c.threads;
  return o;
}

Table cmd_analytic(const Config& c) {
  Model m = c.model();
  auto o = analytic_options(c);
  const std::string col = c.command == "efsbp" ? "efsbp" : c.command;
  Table t{{"family", "estimator", "xi_domain", "n", col}, {}};
  for (auto e : c.kinds({EstimatorKind::PE, EstimatorKind::MedkMAD})) {
    for (int n : c.sizes({10, 40, 100, 1000})) {
      if (n < 4) throw UsageError("n must be at least 4");
      std::string v;
      if (c.command == "efsbp") v = report::percent(efsbp_analytic(e, n, m, o));
      else if (c.command == "p0") v = report::p0_text(log_p0(e, n, m, o));
      else v = report::percent(q1(e, n, m, o));
      t.rows.push_back({std::string(family_name(m.family)), c.spec(e).label(),
                        c.restricted ? ">0" : "R", std::to_string(n), v});
    }
  }
  return t;
}

Table cmd_simulate(const Config& c) {
  Model m = c.model();
  Table t{{"family", "estimator", "xi_domain", "convention", "n", "M", "seed", "efsbp", "ci",
           "explosions", "implosions", "unbroken"},
          {}};
  for (auto e : c.kinds({EstimatorKind::MedkMAD})) {
    auto s = c.spec(e);
    for (int n : c.sizes({40})) {
      auto r = simulate_efsbp(m, s, n, c.M, c.seed, c.threads, c.attack_set());
      t.rows.push_back({std::string(family_name(m.family)), s.label(), c.restricted ? ">0" : "R",
                        std::string(convention_name(s.convention)), std::to_string(n),
                        std::to_string(c.M), std::to_string(c.seed), report::percent(r.mean_efsbp),
                        report::percent(r.ci_halfwidth), std::to_string(r.explosions),
                        std::to_string(r.implosions), std::to_string(r.unbroken)});
    }
  }
  return t;
}

Table cmd_table(const Config& c) {
  report::GridOptions g;
  g.beta = c.beta;
  g.xi = c.xi;
  g.k = c.k;
  g.M = c.M;
  g.seed = c.seed;
  g.threads = c.threads;
  g.convention = c.conv();
  g.attacks = c.attack_set();
  if (c.id == "p0q1e") {
    g.ns = c.sizes({10, 40, 100, 1000});
    return report::table_p0q1e(g);
  }
  if (c.id == "simulated") {
    g.ns = c.sizes({40, 100, 1000});
    return report::table_simulated(g);
  }
  throw UsageError("unknown table '" + c.id + "' (p0q1e, simulated)");
}

Table cmd_figure(const Config& c, bool& log_y) {
  log_y = false;
  if (c.id == "q0") {
    log_y = true;
    return report::figure_q0();
  }
  if (c.id == "abp_vs_xi") return report::figure_abp_vs_xi(c.k);
  if (c.id == "efsbp_vs_n") {
    auto ns = c.sizes({10, 200});
    if (ns.size() != 2) throw UsageError("efsbp_vs_n takes --n MIN,MAX");
    return report::figure_efsbp_vs_n(c.model(), ns[0], ns[1], c.k);
  }
  if (c.id == "quotients") return report::figure_quotients(c.model().family, c.k);
  throw UsageError("unknown figure '" + c.id + "' (q0, abp_vs_xi, efsbp_vs_n, quotients)");
}

void emit(const Config& c, const Table& t) {
  std::string text;
  if (c.format == "csv") text = report::to_csv(t);
  else if (c.format == "json") text = report::to_json(t, c.echo());
  else throw UsageError("unknown format '" + c.format + "' (csv, json)");
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f || !(f << text)) throw InputError("cannot write '" + c.out + "'");
}

int run(int argc, char** argv) {
  Config c;
  CLI::App app{"Breakdown diagnostics for scale-shape estimators"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* s, bool with_data) {
    s->add_option("--family", c.family, "gpd, gevd, weibull, gamma")->capture_default_str();
    s->add_option("--beta", c.beta, "scale")->capture_default_str();
    s->add_option("--xi", c.xi, "shape")->capture_default_str();
    s->add_option("--estimator", c.estimators, "pe, medkmad, medsn, medqn (repeatable)");
    s->add_option("--k", c.k, "kMAD asymmetry")->capture_default_str();
    s->add_option("--n", c.n, "sample size(s)")->delimiter(',');
    s->add_option("--M", c.M, "simulation runs")->capture_default_str();
    s->add_option("--seed", c.seed, "base seed")->capture_default_str();
    s->add_flag("--restricted", c.restricted, "shape restricted to xi > 0");
    s->add_option("--median-convention", c.convention, "himed, lomed, average")
        ->capture_default_str();
    s->add_option("--attacks", c.attacks, "adversary: fixed-median or shift-median")
        ->capture_default_str();
    s->add_option("--format", c.format, "csv or json")->capture_default_str();
    s->add_option("--out", c.out, "output file (default stdout)");
    s->add_option("--threads", c.threads, "workers (default ROBUSTBP_THREADS or all cores)");
    if (with_data) s->add_option("data", c.input, "newline-delimited observations")->required();
  };
  struct Sub {
    const char* name;
    const char* help;
    bool data;
  };
  const Sub subs[] = {{"estimate", "estimate (beta, xi) from data", true},
                      {"fsbp", "finite sample breakdown point of a sample", true},
                      {"abp", "asymptotic breakdown point", false},
                      {"efsbp", "expected FSBP from the exact count distribution", false},
                      {"p0", "probability that the FSBP is zero", false},
                      {"q1", "lower FSBP quantile for 10^4 runs", false},
                      {"simulate", "Monte-Carlo expected FSBP", false},
                      {"table", "reproduce a table (p0q1e, simulated)", false},
                      {"figure", "figure data (q0, abp_vs_xi, efsbp_vs_n, quotients)", false}};
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    common(sub, s.data);
    if (std::string(s.name) == "table" || std::string(s.name) == "figure")
      sub->add_option("id", c.id, "which one")->required();
    if (std::string(s.name) == "figure") sub->add_option("--svg", c.svg, "also write an SVG plot");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  c.command = app.get_subcommands().front()->get_name();
  if (c.threads == 0) c.threads = default_threads();

  try {
    Table t;
    if (c.command == "estimate") t = cmd_estimate(c);
    else if (c.command == "fsbp") t = cmd_fsbp(c);
    else if (c.command == "abp") t = cmd_abp(c);
    else if (c.command == "efsbp" || c.command == "p0" || c.command == "q1") t = cmd_analytic(c);
    else if (c.command == "simulate") t = cmd_simulate(c);
    else if (c.command == "table") t = cmd_table(c);
    else {
      bool log_y = false;
      t = cmd_figure(c, log_y);
      if (!c.svg.empty()) {
        std::ofstream f(c.svg, std::ios::binary);
        if (!f || !(f << report::svg_plot(t, c.id, log_y)))
          throw InputError("cannot write '" + c.svg + "'");
      }
    }
    emit(c, t);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomain;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
