#pragma once

#include <vector>

#include "riskner/tagscheme.hpp"

namespace riskner {

/// Contiguous typed token range, start inclusive, end exclusive. `category`
/// indexes the scheme's entity_types.
struct EntitySpan {
    std::size_t category;
    std::size_t start;
    std::size_t end;

    friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
    friend auto operator<=>(const EntitySpan&, const EntitySpan&) = default;
};

struct RepairFix {
    std::size_t position;
    int original;
    int repaired;

    friend bool operator==(const RepairFix&, const RepairFix&) = default;
};

/// Record of the label rewrites repair_tags performed; empty iff the input
/// was already valid IOB2.
struct RepairReport {
    std::vector<RepairFix> fixes;
    bool clean() const noexcept { return fixes.empty(); }
};

/// Converts a BIO label-id sequence into spans. Maximal B-X (I-X)* runs become
/// one span each; output is sorted by start and non-overlapping. In strict
/// mode an orphan I-X (after start, O, or a different category) raises
/// InvalidSequence; in lenient mode it is read as if repaired to B-X.
std::vector<EntitySpan> decode_spans(const std::vector<int>& tags, const TagScheme& scheme,
                                     bool strict = false);

/// Inverse of decode_spans for valid span sets.
std::vector<int> encode_spans(const std::vector<EntitySpan>& spans, std::size_t length,
                              const TagScheme& scheme);

/// Rewrites every orphan I-X to B-X. Idempotent; the result always passes
/// strict decode_spans.
std::pair<std::vector<int>, RepairReport> repair_tags(const std::vector<int>& tags,
                                                      const TagScheme& scheme);

}  // namespace riskner
