#include "fpk/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace fpk {

namespace {

struct Column {
  const char* name;
  double SeriesRecord::*field;
};

constexpr Column kColumns[] = {
    {"mass", &SeriesRecord::mass},
    {"min_psi", &SeriesRecord::min_psi},
    {"linf_psi", &SeriesRecord::linf_psi},
    {"h_sigma_norm", &SeriesRecord::h_sigma_norm},
    {"l4_norm", &SeriesRecord::l4_norm},
    {"f_l2_norm", &SeriesRecord::f_l2_norm},
    {"propol_C", &SeriesRecord::propol_c},
    {"super_violation", &SeriesRecord::super_violation},
    {"marginal_heat_err", &SeriesRecord::marginal_heat_err},
    {"formulation_err", &SeriesRecord::formulation_err},
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) raise(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  return os;
}

void finish(std::ofstream& os, const std::string& path) {
  os.flush();
  if (!os) raise(ErrorCode::IoError, "short write to '" + path + "'");
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) raise(ErrorCode::IoError, "cannot create directory '" + dir + "': " + ec.message());
}

/// Minimal fixed-size line chart.  Coordinates are snapped to 1/100 px so
/// the text form is stable.
std::string svg_chart(const std::string& title, const std::vector<double>& xs,
                      const std::vector<double>& ys) {
  constexpr double kW = 640, kH = 360, kPad = 48;
  double xmin = xs.front(), xmax = xs.back();
  double ymin = ys.front(), ymax = ys.front();
  for (double y : ys) {
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;

  auto px = [&](double x) { return kPad + (x - xmin) / (xmax - xmin) * (kW - 2 * kPad); };
  auto py = [&](double y) { return kH - kPad - (y - ymin) / (ymax - ymin) * (kH - 2 * kPad); };

  std::string s;
  char buf[256];
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"360\" "
       "viewBox=\"0 0 640 360\">\n";
  s += "<rect width=\"640\" height=\"360\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", kPad,
                kH - kPad, kW - kPad, kH - kPad);
  s += buf;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", kPad, kPad,
                kPad, kH - kPad);
  s += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"20\" font-size=\"14\">%s</text>\n", kPad,
                title.c_str());
  s += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"4\" y=\"%g\" font-size=\"10\">%.6g</text>\n", kPad + 4,
                ymax);
  s += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"4\" y=\"%g\" font-size=\"10\">%.6g</text>\n",
                kH - kPad, ymin);
  s += buf;
  s += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", px(xs[i]), py(ys[i]));
    s += buf;
  }
  s += "\"/>\n</svg>\n";
  return s;
}

}  // namespace

void write_series_csv(const RunHistory& h, const std::string& path) {
  auto os = open_out(path);
  os << "t";
  for (const auto& c : kColumns) os << ',' << c.name;
  os << '\n';
  for (const auto& rec : h.records) {
    os << num(rec.t);
    for (const auto& c : kColumns) os << ',' << num(rec.*c.field);
    os << '\n';
  }
  finish(os, path);
}

void write_reports_csv(const std::vector<PropertyReport>& reports, const std::string& path) {
  auto os = open_out(path);
  os << "name,status,measured,threshold,t_worst\n";
  for (const auto& r : reports)
    os << r.name << ',' << to_string(r.status) << ',' << num(r.measured) << ','
       << num(r.threshold) << ',' << num(r.t_worst) << '\n';
  finish(os, path);
}

void write_plot_data(const RunHistory& h, const std::string& dir) {
  ensure_dir(dir);
  for (const auto& c : kColumns) {
    std::string path = dir + "/" + c.name + ".dat";
    auto os = open_out(path);
    for (const auto& rec : h.records) os << num(rec.t) << ' ' << num(rec.*c.field) << '\n';
    finish(os, path);
  }
}

void write_plot_svgs(const RunHistory& h, const std::string& dir) {
  if (h.records.empty()) return;
  ensure_dir(dir);
  std::vector<double> ts;
  ts.reserve(h.records.size());
  for (const auto& rec : h.records) ts.push_back(rec.t);
  for (const char* name : {"mass", "h_sigma_norm", "min_psi"}) {
    const Column* col = nullptr;
    for (const auto& c : kColumns)
      if (std::string(c.name) == name) col = &c;
    std::vector<double> ys;
    ys.reserve(h.records.size());
    for (const auto& rec : h.records) ys.push_back(rec.*col->field);
    std::string path = dir + "/" + std::string(name) + ".svg";
    auto os = open_out(path);
    os << svg_chart(name, ts, ys);
    finish(os, path);
  }
}

}  // namespace fpk
