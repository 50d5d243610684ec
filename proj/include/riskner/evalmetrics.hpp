#pragma once

#include <string>
#include <vector>

#include "riskner/tagcodec.hpp"
#include "riskner/tagscheme.hpp"

namespace riskner {

struct Counts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    friend bool operator==(const Counts&, const Counts&) = default;
};

/// Exact-match tallies per entity category.
struct MatchCounts {
    std::vector<Counts> per_category;
};

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Per-category P/R/F1 rows plus the unweighted average row (each column
/// averaged independently; the average f1 is not recomputed from average
/// p and r).
struct MetricsTable {
    std::vector<std::string> categories;
    std::vector<Prf> rows;
    Prf average;
};

/// Entity-level exact matching: a predicted span is TP iff a gold span with
/// identical (category, start, end) exists in the same sentence; unmatched
/// predictions are FP, unmatched gold are FN. gold and pred must hold one
/// span set per sentence, aligned by index.
MatchCounts count_matches(const std::vector<std::vector<EntitySpan>>& gold,
                          const std::vector<std::vector<EntitySpan>>& pred,
                          const TagScheme& scheme);

/// p = tp/(tp+fp), r = tp/(tp+fn), f1 = 2pr/(p+r); every 0/0 evaluates to 0.
Prf prf(const Counts& counts);

/// Arithmetic mean of each column independently.
Prf aggregate(const std::vector<Prf>& rows);

MetricsTable make_metrics_table(const MatchCounts& counts, const TagScheme& scheme);

/// CSV with columns model,category,precision,recall,f1 (6 decimal places,
/// half away from zero) plus an "average" category row. When with_header is
/// false only the data rows are emitted (for concatenating several runs).
std::string metrics_table_csv(const std::string& model, const MetricsTable& table,
                              bool with_header = true);

/// Fixed 6-decimal formatting, ties rounded half away from zero.
std::string format_fixed6(double value);

}  // namespace riskner
