#include "pcadv/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace pcadv::report {

using nlohmann::json;

namespace {

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double from_nullable(const json& v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InvalidArgument("report: cannot write " + path.string());
  return os;
}

}  // namespace

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw InvalidArgument("unknown report format '" + s + "' (csv|json)");
}

std::vector<std::string> csv_columns() {
  return {"attack",       "victim",        "defense",          "instances",
          "asr",          "accuracy",      "other",            "mean_l2",
          "mean_chamfer", "mean_kurtosis", "kurtosis_defined", "mean_seconds"};
}

json to_json(const eval::EvalReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"attack", r.attack},
                    {"victim", r.victim},
                    {"defense", r.defense},
                    {"instances", r.instances},
                    {"asr", r.asr},
                    {"accuracy", r.accuracy},
                    {"other", r.other},
                    {"mean_l2", nullable(r.mean_l2)},
                    {"mean_chamfer", nullable(r.mean_chamfer)},
                    {"mean_kurtosis", nullable(r.mean_kurtosis)},
                    {"kurtosis_defined", r.kurtosis_defined},
                    {"mean_seconds", r.mean_seconds}});
  }
  json instances = json::array();
  for (const auto& r : report.instances) {
    instances.push_back({{"attack", r.attack},
                         {"victim", r.victim},
                         {"index", r.index},
                         {"truth", r.truth},
                         {"target", r.target},
                         {"defense", r.defense},
                         {"prediction", r.prediction},
                         {"success", r.success},
                         {"correct", r.correct},
                         {"l2", nullable(r.l2)},
                         {"chamfer", nullable(r.chamfer)},
                         {"kurtosis", nullable(r.kurtosis)},
                         {"seconds", r.seconds},
                         {"status", r.status}});
  }
  return {{"header", report.header}, {"rows", rows}, {"instances", instances}};
}

eval::EvalReport report_from_json(const json& doc) {
  eval::EvalReport out;
  try {
    out.header = doc.at("header");
    for (const auto& r : doc.at("rows")) {
      eval::ReportRow row;
      row.attack = r.at("attack").get<std::string>();
      row.victim = r.at("victim").get<std::string>();
      row.defense = r.at("defense").get<std::string>();
      row.instances = r.at("instances").get<int>();
      row.asr = r.at("asr").get<double>();
      row.accuracy = r.at("accuracy").get<double>();
      row.other = r.at("other").get<double>();
      row.mean_l2 = from_nullable(r.at("mean_l2"));
      row.mean_chamfer = from_nullable(r.at("mean_chamfer"));
      row.mean_kurtosis = from_nullable(r.at("mean_kurtosis"));
      row.kurtosis_defined = r.at("kurtosis_defined").get<int>();
      row.mean_seconds = r.at("mean_seconds").get<double>();
      out.rows.push_back(row);
    }
    for (const auto& r : doc.at("instances")) {
      eval::InstanceRecord rec;
      rec.attack = r.at("attack").get<std::string>();
      rec.victim = r.at("victim").get<std::string>();
      rec.index = r.at("index").get<int>();
      rec.truth = r.at("truth").get<int>();
      rec.target = r.at("target").get<int>();
      rec.defense = r.at("defense").get<std::string>();
      rec.prediction = r.at("prediction").get<int>();
      rec.success = r.at("success").get<bool>();
      rec.correct = r.at("correct").get<bool>();
      rec.l2 = from_nullable(r.at("l2"));
      rec.chamfer = from_nullable(r.at("chamfer"));
      rec.kurtosis = from_nullable(r.at("kurtosis"));
      rec.seconds = r.at("seconds").get<double>();
      rec.status = r.at("status").get<std::string>();
      out.instances.push_back(rec);
    }
  } catch (const json::exception& e) {
    throw MalformedInput(std::string("report: malformed JSON report: ") + e.what());
  }
  return out;
}

void write_csv(const eval::EvalReport& report, const std::filesystem::path& path) {
  auto os = open_for_write(path);
  const auto columns = csv_columns();
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
  for (const auto& r : report.rows) {
    os << r.attack << ',' << r.victim << ',' << r.defense << ',' << r.instances << ','
       << number(r.asr) << ',' << number(r.accuracy) << ',' << number(r.other) << ','
       << number(r.mean_l2) << ',' << number(r.mean_chamfer) << ',' << number(r.mean_kurtosis)
       << ',' << r.kurtosis_defined << ',' << number(r.mean_seconds) << '\n';
  }
}

void write_json(const eval::EvalReport& report, const std::filesystem::path& path) {
  auto os = open_for_write(path);
  os << to_json(report).dump(2) << '\n';
}

eval::EvalReport read_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("report: cannot open " + path.string());
  try {
    return report_from_json(json::parse(is));
  } catch (const json::parse_error& e) {
    throw MalformedInput("report: " + path.string() + ": " + e.what());
  }
}

json sweep_to_json(const std::vector<SweepPoint>& sweep) {
  json out = json::array();
  for (const auto& p : sweep) {
    out.push_back({{"alpha", p.alpha},
                   {"asr", p.asr},
                   {"mean_l2", p.mean_l2},
                   {"mean_chamfer", p.mean_chamfer},
                   {"seeds", p.seeds}});
  }
  return out;
}

std::vector<SweepPoint> sweep_from_json(const json& doc) {
  std::vector<SweepPoint> out;
  try {
    for (const auto& p : doc) {
      out.push_back({p.at("alpha").get<double>(), p.at("asr").get<double>(),
                     p.at("mean_l2").get<double>(), p.at("mean_chamfer").get<double>(),
                     p.at("seeds").get<int>()});
    }
  } catch (const json::exception& e) {
    throw MalformedInput(std::string("report: malformed sweep: ") + e.what());
  }
  return out;
}

void write_sweep_svg(const std::vector<SweepPoint>& sweep_in, const std::filesystem::path& path) {
  if (sweep_in.empty()) throw InvalidArgument("write_sweep_svg: empty sweep");
  std::vector<SweepPoint> sweep = sweep_in;
  for (const auto& p : sweep) {
    if (!(p.alpha > 0)) throw InvalidArgument("write_sweep_svg: alpha must be positive");
  }
  std::sort(sweep.begin(), sweep.end(),
            [](const SweepPoint& a, const SweepPoint& b) { return a.alpha < b.alpha; });

  constexpr double kPanelW = 320, kPanelH = 220, kLeft = 60, kTop = 40, kGap = 90;
  double lo = std::log10(sweep.front().alpha), hi = std::log10(sweep.back().alpha);
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  double dmax = 0;
  for (const auto& p : sweep) dmax = std::max({dmax, p.mean_l2, p.mean_chamfer});
  if (!(dmax > 0)) dmax = 1;
  dmax *= 1.1;

  auto px = [&](int panel, double alpha) {
    return kLeft + panel * (kPanelW + kGap) + (std::log10(alpha) - lo) / (hi - lo) * kPanelW;
  };
  auto py = [&](double v, double vmax) { return kTop + kPanelH - v / vmax * kPanelH; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * (kPanelW + kLeft) + kGap
      << "\" height=\"" << kPanelH + kTop + 60 << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  const char* titles[] = {"attack success rate (%)", "mean distance"};
  for (int panel = 0; panel < 2; ++panel) {
    const double x0 = kLeft + panel * (kPanelW + kGap);
    svg << "<rect x=\"" << x0 << "\" y=\"" << kTop << "\" width=\"" << kPanelW << "\" height=\""
        << kPanelH << "\" fill=\"none\" stroke=\"#444\"/>\n";
    svg << "<text x=\"" << x0 + kPanelW / 2 << "\" y=\"" << kTop - 12
        << "\" text-anchor=\"middle\">" << titles[panel] << "</text>\n";
    svg << "<text x=\"" << x0 + kPanelW / 2 << "\" y=\"" << kTop + kPanelH + 40
        << "\" text-anchor=\"middle\">alpha (log scale)</text>\n";
    for (const auto& p : sweep) {
      svg << "<text x=\"" << px(panel, p.alpha) << "\" y=\"" << kTop + kPanelH + 16
          << "\" text-anchor=\"middle\">" << number(p.alpha) << "</text>\n";
    }
    const double vmax = panel == 0 ? 100.0 : dmax;
    svg << "<text x=\"" << x0 - 6 << "\" y=\"" << kTop + 4 << "\" text-anchor=\"end\">"
        << number(vmax) << "</text>\n";
    svg << "<text x=\"" << x0 - 6 << "\" y=\"" << kTop + kPanelH << "\" text-anchor=\"end\">0</text>\n";
  }

  struct Series {
    const char* name;
    int panel;
    double (*get)(const SweepPoint&);
    const char* color;
  };
  const Series series[] = {
      {"asr", 0, [](const SweepPoint& p) { return p.asr; }, "#c0392b"},
      {"mean_l2", 1, [](const SweepPoint& p) { return p.mean_l2; }, "#2c7fb8"},
      {"mean_chamfer", 1, [](const SweepPoint& p) { return p.mean_chamfer; }, "#31a354"},
  };
  for (const auto& s : series) {
    const double vmax = s.panel == 0 ? 100.0 : dmax;
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      svg << (i ? " " : "") << px(s.panel, sweep[i].alpha) << ',' << py(s.get(sweep[i]), vmax);
    }
    svg << "\"/>\n";
    for (const auto& p : sweep) {
      svg << "<circle cx=\"" << px(s.panel, p.alpha) << "\" cy=\"" << py(s.get(p), vmax)
          << "\" r=\"3.5\" fill=\"" << s.color << "\" data-series=\"" << s.name
          << "\" data-alpha=\"" << number(p.alpha) << "\" data-value=\"" << number(s.get(p))
          << "\"/>\n";
    }
  }
  const double lx = kLeft + kPanelW + kGap + 10;
  svg << "<text x=\"" << lx << "\" y=\"" << kTop + 16 << "\" fill=\"#2c7fb8\">paired l2</text>\n";
  svg << "<text x=\"" << lx << "\" y=\"" << kTop + 32 << "\" fill=\"#31a354\">chamfer</text>\n";
  svg << "</svg>\n";

  auto os = open_for_write(path);
  os << svg.str();
}

std::vector<std::filesystem::path> emit_report(const eval::EvalReport& report,
                                               const std::vector<Format>& formats,
                                               const std::filesystem::path& dir,
                                               const std::string& stem,
                                               const std::vector<SweepPoint>& sweep) {
  if (report.rows.empty() && sweep.empty()) throw InvalidArgument("emit_report: empty report");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::vector<std::filesystem::path> written;
  for (Format f : formats) {
    const auto path = dir / (stem + (f == Format::csv ? ".csv" : ".json"));
    if (f == Format::csv) write_csv(report, path);
    else write_json(report, path);
    written.push_back(path);
  }
  if (!sweep.empty()) {
    const auto path = dir / (stem + "_sweep.svg");
    write_sweep_svg(sweep, path);
    written.push_back(path);
  }
  return written;
}

}  // namespace pcadv::report
