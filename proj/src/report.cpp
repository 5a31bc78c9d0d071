#include "robustbp/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "robustbp/breakdown.hpp"
#include "robustbp/errors.hpp"
#include "robustbp/estimators.hpp"
#include "robustbp/simulation.hpp"

namespace rbp::report {

namespace {

std::string printf_str(const char* fmt, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, x);
  return buf;
}

const char* domain(bool restricted) { return restricted ? ">0" : "R"; }

void add_series(Table& t, const std::string& name, double x, double y) {
  t.rows.push_back({name, number(x), number(y)});
}

Table series_table() { return Table{{"series", "x", "y"}, {}}; }

}  // namespace

std::string percent(double p) { return printf_str("%.2f", 100.0 * p); }

std::string p0_text(double log_p) {
  if (std::isinf(log_p) && log_p < 0) return "0";
  if (log_p / std::log(10.0) < -300) return "<1e-300";
  return printf_str("%.1e", std::exp(log_p));
}

std::string number(double x) { return printf_str("%.6g", x); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string to_csv(const Table& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cells[i]);
    }
    out += "\r\n";
  };
  line(t.columns);
  for (const auto& r : t.rows) line(r);
  return out;
}

std::string to_json(const Table& t, const nlohmann::json& config) {
  nlohmann::ordered_json results = nlohmann::ordered_json::array();
  for (const auto& r : t.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < t.columns.size() && i < r.size(); ++i) {
      const std::string& c = r[i];
      double v = 0;
      auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (!c.empty() && ec == std::errc() && p == c.data() + c.size() && std::isfinite(v))
        obj[t.columns[i]] = v;
      else
        obj[t.columns[i]] = c;
    }
    results.push_back(std::move(obj));
  }
  nlohmann::ordered_json doc;
  doc["config"] = config;
  doc["results"] = std::move(results);
  return doc.dump(2) + "\n";
}

Table table_p0q1e(const GridOptions& o) {
  struct Row {
    Family f;
    EstimatorKind e;
    bool restricted;
  };
  const Row layout[] = {
      {Family::GPD, EstimatorKind::PE, false},       {Family::GPD, EstimatorKind::MedkMAD, false},
      {Family::GPD, EstimatorKind::MedkMAD, true},   {Family::GEVD, EstimatorKind::PE, false},
      {Family::GEVD, EstimatorKind::PE, true},       {Family::Gamma, EstimatorKind::MedkMAD, false},
      {Family::Weibull, EstimatorKind::PE, false},   {Family::Weibull, EstimatorKind::MedkMAD, false},
  };
  Table t{{"family", "estimator", "xi_domain", "n", "p0", "q1", "efsbp", "abp"}, {}};
  for (const auto& row : layout) {
    Model m{row.f, o.beta, o.xi};
    AnalyticOptions ao;
    ao.k = o.k;
    ao.restricted = row.restricted;
    ao.mc_replicates = o.mc_replicates;
    ao.seed = o.seed;
    ao.threads = o.threads;
    std::string a = percent(abp(row.e, row.f, o.xi, o.k, row.restricted));
    std::string name = EstimatorSpec{row.e, o.k}.label();
    for (int n : o.ns) {
      t.rows.push_back({std::string(family_name(row.f)), name, domain(row.restricted),
                        std::to_string(n), p0_text(log_p0(row.e, n, m, ao)),
                        percent(q1(row.e, n, m, ao)), percent(efsbp_analytic(row.e, n, m, ao)), a});
    }
  }
  return t;
}

Table table_simulated(const GridOptions& o) {
  struct Row {
    Family f;
    bool restricted;
  };
  const Row layout[] = {{Family::GPD, false},  {Family::GPD, true},     {Family::GEVD, false},
                        {Family::GEVD, true},  {Family::Weibull, false}, {Family::Gamma, false}};
  const EstimatorKind kinds[] = {EstimatorKind::MedSn, EstimatorKind::MedQn,
                                 EstimatorKind::MedkMAD, EstimatorKind::PE};
  Table t{{"family", "xi_domain", "n", "estimator", "convention", "efsbp", "ci"}, {}};
  for (int n : o.ns) {
    for (const auto& row : layout) {
      Model m{row.f, o.beta, o.xi};
      for (auto e : kinds) {
        EstimatorSpec s;
        s.kind = e;
        s.k = o.k;
        s.restricted = row.restricted;
        s.convention = o.convention;
        std::vector<std::string> r{std::string(family_name(row.f)), domain(row.restricted),
                                   std::to_string(n), s.label(),
                                   std::string(convention_name(o.convention))};
        if (e == EstimatorKind::PE && row.f == Family::Gamma) {
          r.insert(r.end(), {"n.a.", ""});
        } else {
          auto res = simulate_efsbp(m, s, n, o.M, o.seed, o.threads, o.attacks);
          r.insert(r.end(), {percent(res.mean_efsbp), percent(res.ci_halfwidth)});
        }
        t.rows.push_back(std::move(r));
      }
    }
  }
  return t;
}

Table figure_q0(int points) {
  if (points < 2) throw ParameterError("points must be at least 2");
  Table t = series_table();
  for (int i = 0; i < points; ++i) {
    double xi = -2.0 + 5.0 * i / (points - 1);
    add_series(t, "q0", xi, q0(xi));
  }
  return t;
}

Table figure_abp_vs_xi(double k) {
  Table t = series_table();
  for (bool restricted : {false, true}) {
    std::string name = "Med" + dispersion_name(Dispersion::kmad(k)) + " GPD xi" + domain(restricted);
    for (int i = 1; i <= 60; ++i) {
      double xi = i / 20.0;
      add_series(t, name, xi, abp(EstimatorKind::MedkMAD, Family::GPD, xi, k, restricted));
    }
  }
  return t;
}

Table figure_efsbp_vs_n(const Model& m, int n_min, int n_max, double k) {
  if (n_min < 4 || n_max < n_min) throw ParameterError("need 4 <= n_min <= n_max");
  Table t = series_table();
  AnalyticOptions ao;
  ao.k = k;
  for (auto e : {EstimatorKind::PE, EstimatorKind::MedkMAD}) {
    try {
      (void)count_plan(e, m.family, false);
    } catch (const DomainError&) {
      continue;
    }
    std::string name = std::string(estimator_name(e)) + " " + std::string(family_name(m.family));
    for (int n = n_min; n <= n_max; ++n) add_series(t, name, n, efsbp_analytic(e, n, m, ao));
  }
  return t;
}

Table figure_quotients(Family f, double k) {
  Table t = series_table();
  for (auto d : {Dispersion::kmad(k), Dispersion::kmad(1), Dispersion::sn(), Dispersion::qn()}) {
    std::string name = dispersion_name(d);
    for (int i = 1; i <= 60; ++i) {
      double xi = i / 20.0;
      add_series(t, name, xi, quotient(f, d, xi));
    }
    auto [lo, hi] = quotient_limits(f, d);
    add_series(t, name + " q_lo", 0.05, lo);
    add_series(t, name + " q_lo", 3.0, lo);
    add_series(t, name + " q_hi", 0.05, hi);
    add_series(t, name + " q_hi", 3.0, hi);
  }
  return t;
}

std::string svg_plot(const Table& series, const std::string& title, bool log_y) {
  struct Pt {
    double x, y;
  };
  std::vector<std::pair<std::string, std::vector<Pt>>> lines;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& r : series.rows) {
    if (r.size() < 3) continue;
    double x = std::stod(r[1]), y = std::stod(r[2]);
    if (log_y) {
      if (!(y > 0)) continue;
      y = std::log10(y);
    }
    if (!std::isfinite(x) || !std::isfinite(y)) continue;
    if (lines.empty() || lines.back().first != r[0]) lines.push_back({r[0], {}});
    lines.back().second.push_back({x, y});
    x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
  }
  if (lines.empty()) throw ParameterError("nothing to plot");
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double W = 640, H = 400, L = 60, R = 180, T = 30, B = 40;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
                          "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << L << "\" y=\"18\" font-size=\"13\">" << title << "</text>\n";
  s << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
    << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<text x=\"" << L << "\" y=\"" << H - B + 15 << "\">" << number(x0) << "</text>\n";
  s << "<text x=\"" << W - R << "\" y=\"" << H - B + 15 << "\" text-anchor=\"end\">" << number(x1)
    << "</text>\n";
  auto ylab = [&](double y) { return log_y ? "1e" + number(y) : number(y); };
  s << "<text x=\"" << L - 4 << "\" y=\"" << H - B << "\" text-anchor=\"end\">" << ylab(y0)
    << "</text>\n";
  s << "<text x=\"" << L - 4 << "\" y=\"" << T + 10 << "\" text-anchor=\"end\">" << ylab(y1)
    << "</text>\n";
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const char* c = colors[i % 10];
    s << "<polyline fill=\"none\" stroke=\"" << c << "\" points=\"";
    for (const auto& p : lines[i].second) s << px(p.x) << ',' << py(p.y) << ' ';
    s << "\"/>\n";
    s << "<text x=\"" << W - R + 8 << "\" y=\"" << T + 14 * (i + 1) << "\" fill=\"" << c << "\">"
      << lines[i].first << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace rbp::report
