#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace adda::cli {

class MetricsParseError : public std::runtime_error {
 public:
  MetricsParseError(std::size_t row, const std::string& what)
      : std::runtime_error("metrics CSV row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

struct MetricsRow {
  std::size_t epoch = 0;
  std::vector<double> p;
  std::vector<double> score;
  std::vector<std::size_t> size;
  std::vector<std::optional<double>> acc;
  std::vector<std::optional<double>> mean_loss;
  double total_loss = 0.0;
  double p_std = 0.0;
  double seconds = 0.0;
};

struct MetricsTable {
  std::size_t compositions = 0;
  std::vector<MetricsRow> rows;
};

// Row numbers in errors are 1-based file lines (the header is row 1).
MetricsTable parse_metrics(const std::string& text);
MetricsTable load_metrics(const std::string& path);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Standalone SVG line chart with markers, axes, ticks and legend.
std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series);

// Writes probabilities.svg, p_std.svg and accuracy.svg into out_dir and
// returns their paths.
std::vector<std::string> write_report(const MetricsTable& table, const std::string& out_dir);

}  // namespace adda::cli
