#include "riskner/evalmetrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "riskner/errors.hpp"

namespace riskner {

MatchCounts count_matches(const std::vector<std::vector<EntitySpan>>& gold,
                          const std::vector<std::vector<EntitySpan>>& pred,
                          const TagScheme& scheme) {
    if (gold.size() != pred.size()) {
        raise(ErrorKind::SentenceIdMismatch,
              "gold covers " + std::to_string(gold.size()) + " sentences, predictions " +
                  std::to_string(pred.size()));
    }
    MatchCounts counts;
    counts.per_category.assign(scheme.n_categories(), Counts{});
    for (std::size_t s = 0; s < gold.size(); ++s) {
        std::vector<bool> gold_used(gold[s].size(), false);
        for (const EntitySpan& p : pred[s]) {
            bool matched = false;
            for (std::size_t g = 0; g < gold[s].size(); ++g) {
                if (!gold_used[g] && gold[s][g] == p) {
                    gold_used[g] = true;
                    matched = true;
                    break;
                }
            }
            if (matched) {
                ++counts.per_category.at(p.category).tp;
            } else {
                ++counts.per_category.at(p.category).fp;
            }
        }
        for (std::size_t g = 0; g < gold[s].size(); ++g) {
            if (!gold_used[g]) ++counts.per_category.at(gold[s][g].category).fn;
        }
    }
    return counts;
}

Prf prf(const Counts& counts) {
    const auto ratio = [](std::size_t num, std::size_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    Prf out;
    out.precision = ratio(counts.tp, counts.tp + counts.fp);
    out.recall = ratio(counts.tp, counts.tp + counts.fn);
    const double sum = out.precision + out.recall;
    out.f1 = sum == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / sum;
    return out;
}

Prf aggregate(const std::vector<Prf>& rows) {
    if (rows.empty()) raise(ErrorKind::EmptyTable, "no per-category rows to aggregate");
    Prf avg;
    for (const Prf& row : rows) {
        avg.precision += row.precision;
        avg.recall += row.recall;
        avg.f1 += row.f1;
    }
    const double n = static_cast<double>(rows.size());
    avg.precision /= n;
    avg.recall /= n;
    avg.f1 /= n;
    return avg;
}

MetricsTable make_metrics_table(const MatchCounts& counts, const TagScheme& scheme) {
    MetricsTable table;
    table.categories = scheme.entity_types();
    table.rows.reserve(counts.per_category.size());
    for (const Counts& c : counts.per_category) table.rows.push_back(prf(c));
    table.average = aggregate(table.rows);
    return table;
}

std::string format_fixed6(double value) {
    const double rounded = static_cast<double>(std::llround(value * 1e6)) / 1e6;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", rounded);
    return buf;
}

std::string metrics_table_csv(const std::string& model, const MetricsTable& table,
                              bool with_header) {
    std::ostringstream os;
    if (with_header) os << "model,category,precision,recall,f1\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        os << model << "," << table.categories[i] << "," << format_fixed6(table.rows[i].precision)
           << "," << format_fixed6(table.rows[i].recall) << "," << format_fixed6(table.rows[i].f1)
           << "\n";
    }
    os << model << ",average," << format_fixed6(table.average.precision) << ","
       << format_fixed6(table.average.recall) << "," << format_fixed6(table.average.f1) << "\n";
    return os.str();
}

}  // namespace riskner
