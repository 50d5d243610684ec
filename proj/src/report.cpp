#include "riskner/report.hpp"

#include <algorithm>
#include <sstream>

#include "riskner/errors.hpp"

namespace riskner {

std::string results_table_csv(const std::vector<RunMetrics>& runs) {
    if (runs.empty()) raise(ErrorKind::NoRuns, "no completed runs to report");
    std::ostringstream os;
    os << "model,category,precision,recall,f1\n";
    for (const RunMetrics& run : runs) {
        os << metrics_table_csv(run.run, run.table, false);
    }
    return os.str();
}

namespace {

// Fixed palette; bars cycle through it per run.
const char* kPalette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759",
                          "#b07aa1", "#76b7b2", "#edc948", "#9c755f"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string f1_chart_svg(const std::vector<RunMetrics>& runs) {
    if (runs.empty()) raise(ErrorKind::NoRuns, "no completed runs to chart");

    const std::vector<std::string>& categories = runs.front().table.categories;
    const std::size_t n_cats = categories.size();
    const std::size_t n_runs = runs.size();

    const double bar_w = 22.0;
    const double bar_gap = 4.0;
    const double group_gap = 30.0;
    const double group_w = n_runs * bar_w + (n_runs - 1) * bar_gap;
    const double margin_left = 60.0;
    const double margin_top = 40.0;
    const double plot_h = 300.0;
    const double margin_bottom = 60.0;
    const double legend_h = 24.0 * static_cast<double>(n_runs);
    const double width = margin_left + n_cats * (group_w + group_gap) + 40.0;
    const double height = margin_top + plot_h + margin_bottom + legend_h;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
       << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << " " << fmt(height) << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << fmt(margin_left) << "\" y=\"24\" font-family=\"sans-serif\" "
          "font-size=\"16\">Per-entity F1 by run</text>\n";

    // y axis with 0.1 gridlines
    for (int i = 0; i <= 10; ++i) {
        const double value = static_cast<double>(i) / 10.0;
        const double y = margin_top + plot_h * (1.0 - value);
        os << "<line x1=\"" << fmt(margin_left) << "\" y1=\"" << fmt(y) << "\" x2=\""
           << fmt(width - 20.0) << "\" y2=\"" << fmt(y)
           << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        os << "<text x=\"" << fmt(margin_left - 8.0) << "\" y=\"" << fmt(y + 4.0)
           << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << fmt(value)
           << "</text>\n";
    }

    for (std::size_t c = 0; c < n_cats; ++c) {
        const double group_x = margin_left + c * (group_w + group_gap) + group_gap / 2.0;
        for (std::size_t r = 0; r < n_runs; ++r) {
            const double f1 = runs[r].table.rows.at(c).f1;
            const double h = plot_h * f1;
            const double x = group_x + r * (bar_w + bar_gap);
            const double y = margin_top + plot_h - h;
            os << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(bar_w)
               << "\" height=\"" << fmt(h) << "\" fill=\"" << kPalette[r % 8] << "\"/>\n";
            os << "<text x=\"" << fmt(x + bar_w / 2.0) << "\" y=\"" << fmt(y - 3.0)
               << "\" font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"middle\">"
               << fmt(f1) << "</text>\n";
        }
        os << "<text x=\"" << fmt(group_x + group_w / 2.0) << "\" y=\""
           << fmt(margin_top + plot_h + 18.0)
           << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
           << categories[c] << "</text>\n";
    }

    for (std::size_t r = 0; r < n_runs; ++r) {
        const double y = margin_top + plot_h + 40.0 + 24.0 * static_cast<double>(r);
        os << "<rect x=\"" << fmt(margin_left) << "\" y=\"" << fmt(y - 10.0)
           << "\" width=\"14\" height=\"14\" fill=\"" << kPalette[r % 8] << "\"/>\n";
        os << "<text x=\"" << fmt(margin_left + 20.0) << "\" y=\"" << fmt(y + 2.0)
           << "\" font-family=\"sans-serif\" font-size=\"12\">" << runs[r].run << "</text>\n";
    }

    os << "</svg>\n";
    return os.str();
}

std::vector<RunMetrics> parse_metrics_csv(const std::string& text) {
    std::vector<RunMetrics> runs;
    std::istringstream is(text);
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first && line.rfind("model,", 0) == 0) {
            first = false;
            continue;
        }
        first = false;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (start <= line.size()) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos
                                                                           : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 5) {
            raise(ErrorKind::Config, "metrics CSV row with " + std::to_string(fields.size()) +
                                         " fields: \"" + line + "\"");
        }
        const std::string& model = fields[0];
        auto it = std::find_if(runs.begin(), runs.end(),
                               [&](const RunMetrics& r) { return r.run == model; });
        if (it == runs.end()) {
            runs.push_back(RunMetrics{model, {}});
            it = runs.end() - 1;
        }
        const Prf row{std::stod(fields[2]), std::stod(fields[3]), std::stod(fields[4])};
        if (fields[1] == "average") {
            it->table.average = row;
        } else {
            it->table.categories.push_back(fields[1]);
            it->table.rows.push_back(row);
        }
    }
    return runs;
}

}  // namespace riskner
