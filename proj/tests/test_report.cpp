#include <doctest.h>

#include <cmath>
#include <string>

#include <json.hpp>

#include "robustbp/estimators.hpp"
#include "robustbp/report.hpp"

using namespace rbp;
using namespace rbp::report;

namespace {

double cell(const Table& t, const std::string& series, double x) {
  for (const auto& r : t.rows)
    if (r[0] == series && std::abs(std::stod(r[1]) - x) < 1e-9) return std::stod(r[2]);
  FAIL("missing point");
  return NAN;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(percent(0.4475) == "44.75");
  CHECK(percent(0.25) == "25.00");
  CHECK(percent(0) == "0.00");
  CHECK(p0_text(std::log(0.27)) == "2.7e-01");
  CHECK(p0_text(-INFINITY) == "0");
  CHECK(p0_text(-800.0) == "<1e-300");
  CHECK(p0_text(std::log(1.6e-15)) == "1.6e-15");
  CHECK(number(2.399330) == "2.39933");
}

TEST_CASE("csv output") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  Table t{{"name", "value"}, {{"x,y", "1.5"}, {"z", ""}}};
  CHECK(to_csv(t) == "name,value\r\n\"x,y\",1.5\r\nz,\r\n");
}

TEST_CASE("json output") {
  Table t{{"family", "n", "efsbp", "p0"}, {{"GPD", "40", "5.26", "<1e-300"}, {"GPD", "100", "n.a.", "7.9e-02"}}};
  auto j = nlohmann::ordered_json::parse(to_json(t, {{"seed", 1}}));
  CHECK(j["config"]["seed"] == 1);
  REQUIRE(j["results"].size() == 2);
  CHECK(j["results"][0]["family"] == "GPD");
  CHECK(j["results"][0]["n"] == 40);
  CHECK(j["results"][0]["efsbp"].get<double>() == doctest::Approx(5.26));
  CHECK(j["results"][0]["p0"] == "<1e-300");
  CHECK(j["results"][1]["efsbp"] == "n.a.");
  CHECK(j["results"][1]["p0"].get<double>() == doctest::Approx(0.079));
  // key order follows the columns
  auto it = j["results"][0].begin();
  CHECK(it.key() == "family");
}

TEST_CASE("figure series") {
  auto q = figure_q0();
  CHECK(q.rows.size() == 101);
  CHECK(cell(q, "q0", 0.0) == doctest::Approx(2.39933).epsilon(1e-5));

  auto a = figure_abp_vs_xi();
  CHECK(a.rows.size() == 120);
  CHECK(cell(a, "MedkMAD10 GPD xi>0", 0.7) == doctest::Approx(0.118746).epsilon(1e-5));
  CHECK(cell(a, "MedkMAD10 GPD xiR", 0.7) == doctest::Approx(0.4475).epsilon(1e-4));

  auto e = figure_efsbp_vs_n(Model{Family::GPD, 1, 0.7}, 20, 30);
  CHECK(e.rows.size() == 22);
  // Gamma has no PE count: only the MedkMAD series
  auto g = figure_efsbp_vs_n(Model{Family::Gamma, 1, 0.7}, 20, 22);
  CHECK(g.rows.size() == 3);
  CHECK_THROWS(figure_efsbp_vs_n(Model{Family::GPD, 1, 0.7}, 3, 10));

  auto f = figure_quotients(Family::GPD);
  CHECK(cell(f, "kMAD10 q_hi", 3.0) == doctest::Approx(1.0));
  CHECK(cell(f, "kMAD10", 0.7) > 0);
}

TEST_CASE("analytic table") {
  GridOptions o;
  o.ns = {10, 40};
  o.mc_replicates = 2000;
  auto t = table_p0q1e(o);
  REQUIRE(t.columns.size() == 8);
  bool found = false;
  for (const auto& r : t.rows)
    if (r[0] == "GPD" && r[1] == "PE" && r[3] == "40") {
      CHECK(r[4] == "2.7e-01");
      CHECK(r[6] == "5.26");
      CHECK(r[7] == "6.42");
      found = true;
    }
  CHECK(found);
  CHECK(to_csv(t) == to_csv(table_p0q1e(o)));
}

TEST_CASE("simulated table is reproducible") {
  GridOptions o;
  o.ns = {12};
  o.M = 6;
  o.threads = 1;
  auto a = table_simulated(o);
  o.threads = 2;
  auto b = table_simulated(o);
  CHECK(to_csv(a) == to_csv(b));
  CHECK(a.rows.size() == 24);
  int na = 0;
  for (const auto& r : a.rows) na += r[5] == "n.a.";
  CHECK(na == 1);
}

TEST_CASE("svg rendering") {
  auto svg = svg_plot(figure_q0(11), "q0");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  Table empty{{"series", "x", "y"}, {}};
  CHECK_THROWS(svg_plot(empty, "none"));
  // non-positive values are dropped on a log scale
  Table t{{"series", "x", "y"}, {{"s", "1", "0"}, {"s", "2", "1e-3"}, {"s", "3", "1e-1"}}};
  CHECK(svg_plot(t, "log", true).find("1e-3") != std::string::npos);
}
