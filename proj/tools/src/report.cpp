#include "adda_cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace adda::cli {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double number(const std::string& cell, std::size_t row, const std::string& column) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v)) {
    throw MetricsParseError(row, "column '" + column + "': bad number '" + cell + "'");
  }
  return v;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

MetricsTable parse_metrics(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw MetricsParseError(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split(line);
  if (header.size() < 4 || header.front() != "epoch" || header.back() != "seconds") {
    throw MetricsParseError(1, "unexpected header");
  }
  const std::size_t fixed = 1 + 3;
  if ((header.size() - fixed) % 6 != 0 || header.size() == fixed) {
    throw MetricsParseError(1, "column count does not match epoch, 6 x N, total_loss, p_std, seconds");
  }
  MetricsTable table;
  table.compositions = (header.size() - fixed) / 6;
  const std::size_t n = table.compositions;

  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw MetricsParseError(row_no, "expected " + std::to_string(header.size()) + " cells, found " +
                                          std::to_string(cells.size()));
    }
    MetricsRow r;
    r.epoch = static_cast<std::size_t>(number(cells[0], row_no, "epoch"));
    for (std::size_t i = 0; i < n; ++i) {
      r.p.push_back(number(cells[1 + n + i], row_no, header[1 + n + i]));
      r.score.push_back(number(cells[1 + 2 * n + i], row_no, header[1 + 2 * n + i]));
      r.size.push_back(static_cast<std::size_t>(number(cells[1 + 3 * n + i], row_no, header[1 + 3 * n + i])));
      const std::string& acc = cells[1 + 4 * n + i];
      if (!acc.empty()) r.acc.emplace_back(number(acc, row_no, header[1 + 4 * n + i]));
      else r.acc.emplace_back();
      const std::string& loss = cells[1 + 5 * n + i];
      if (!loss.empty()) r.mean_loss.emplace_back(number(loss, row_no, header[1 + 5 * n + i]));
      else r.mean_loss.emplace_back();
    }
    r.total_loss = number(cells[1 + 6 * n], row_no, "total_loss");
    r.p_std = number(cells[2 + 6 * n], row_no, "p_std");
    r.seconds = number(cells[3 + 6 * n], row_no, "seconds");
    table.rows.push_back(std::move(r));
  }
  if (table.rows.empty()) throw MetricsParseError(row_no + 1, "no data rows");
  return table;
}

MetricsTable load_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read metrics file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_metrics(buf.str());
}

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series) {
  constexpr double kW = 640, kH = 400, kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  }
  if (!std::isfinite(x_min)) x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  if (x_max - x_min < 1e-12) x_min -= 0.5, x_max += 0.5;
  if (y_max - y_min < 1e-12) {
    const double pad = std::max(std::abs(y_min) * 0.05, 1e-3);
    y_min -= pad;
    y_max += pad;
  }
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * pw; };
  auto sy = [&](double y) { return kTop + (1.0 - (y - y_min) / (y_max - y_min)) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << xml_escape(title) << "</text>\n";
  o << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw << "\" y2=\""
    << kTop + ph << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + ph
    << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x_min + (x_max - x_min) * t / 4.0;
    const double yv = y_min + (y_max - y_min) * t / 4.0;
    o << "<text x=\"" << sx(xv) << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">"
      << fmt(xv) << "</text>\n";
    o << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv)
      << "</text>\n";
    o << "<line x1=\"" << kLeft << "\" y1=\"" << sy(yv) << "\" x2=\"" << kLeft + pw << "\" y2=\""
      << sy(yv) << "\" stroke=\"#e0e0e0\"/>\n";
  }
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">"
    << xml_escape(x_label) << "</text>\n";
  o << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << kTop + ph / 2 << ")\">" << xml_escape(y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    if (s.x.size() > 1) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) o << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
      o << "\"/>\n";
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      o << "<circle cx=\"" << sx(s.x[i]) << "\" cy=\"" << sy(s.y[i]) << "\" r=\"2.5\" fill=\"" << color
        << "\"/>\n";
    }
    const double ly = kTop + 10 + 18.0 * static_cast<double>(k);
    o << "<line x1=\"" << kLeft + pw + 14 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + pw + 34
      << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << kLeft + pw + 40 << "\" y=\"" << ly + 4 << "\">" << xml_escape(s.name)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<std::string> write_report(const MetricsTable& table, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<Series> probs(table.compositions), accs(table.compositions);
  Series spread{"std(p)", {}, {}};
  for (std::size_t i = 0; i < table.compositions; ++i) {
    probs[i].name = "p_" + std::to_string(i);
    accs[i].name = "acc_" + std::to_string(i);
  }
  for (const auto& r : table.rows) {
    const auto e = static_cast<double>(r.epoch);
    for (std::size_t i = 0; i < table.compositions; ++i) {
      probs[i].x.push_back(e);
      probs[i].y.push_back(r.p[i]);
      if (r.acc[i]) {
        accs[i].x.push_back(e);
        accs[i].y.push_back(*r.acc[i]);
      }
    }
    spread.x.push_back(e);
    spread.y.push_back(r.p_std);
  }
  const std::vector<std::pair<std::string, std::string>> charts = {
      {"probabilities.svg", line_chart_svg("Sampling probability per composition", "epoch", "p_i", probs)},
      {"p_std.svg", line_chart_svg("Spread of sampling probabilities", "epoch", "std(p)", {spread})},
      {"accuracy.svg", line_chart_svg("Pretext accuracy per composition", "epoch", "Acc_i", accs)},
  };
  std::vector<std::string> written;
  for (const auto& [name, svg] : charts) {
    const std::string path = (fs::path(out_dir) / name).string();
    std::ofstream out(path, std::ios::trunc);
    out << svg;
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    written.push_back(path);
  }
  return written;
}

}  // namespace adda::cli
