#pragma once

#include <string>
#include <vector>

#include "riskner/evalmetrics.hpp"

namespace riskner {

struct RunMetrics {
    std::string run;
    MetricsTable table;
};

/// Combined results table: rows (run, category, p, r, f1) in run order, each
/// run followed by its average row. 6-decimal fixed formatting. NoRuns when
/// empty.
std::string results_table_csv(const std::vector<RunMetrics>& runs);

/// Grouped bar chart: one group per entity category, one bar per run, y in
/// [0,1] with 0.1 gridlines. Identical input produces byte-identical SVG.
std::string f1_chart_svg(const std::vector<RunMetrics>& runs);

/// Parses CSVs produced by results_table_csv / metrics_table_csv; one
/// RunMetrics per distinct model value, in first-appearance order.
std::vector<RunMetrics> parse_metrics_csv(const std::string& text);

}  // namespace riskner
