#include "riskner/tagcodec.hpp"

#include <algorithm>

#include "riskner/errors.hpp"

namespace riskner {

namespace {

void require_known(const std::vector<int>& tags, const TagScheme& scheme) {
    for (std::size_t i = 0; i < tags.size(); ++i) {
        if (!scheme.valid_label(tags[i])) {
            raise(ErrorKind::UnknownLabel,
                  "label id " + std::to_string(tags[i]) + " at position " + std::to_string(i));
        }
    }
}

}  // namespace

std::vector<EntitySpan> decode_spans(const std::vector<int>& tags, const TagScheme& scheme,
                                     bool strict) {
    require_known(tags, scheme);
    std::vector<EntitySpan> spans;
    bool open = false;
    EntitySpan current{};
    auto close = [&](std::size_t end) {
        if (open) {
            current.end = end;
            spans.push_back(current);
            open = false;
        }
    };
    for (std::size_t i = 0; i < tags.size(); ++i) {
        const int tag = tags[i];
        if (scheme.is_outside(tag)) {
            close(i);
            continue;
        }
        const std::size_t cat = scheme.category_of(tag);
        if (scheme.is_begin(tag)) {
            close(i);
            open = true;
            current = EntitySpan{cat, i, i};
            continue;
        }
        // inside
        if (open && current.category == cat) continue;
        if (strict) {
            raise(ErrorKind::InvalidSequence,
                  "orphan " + scheme.label_name(tag) + " at position " + std::to_string(i));
        }
        close(i);
        open = true;
        current = EntitySpan{cat, i, i};
    }
    close(tags.size());
    return spans;
}

std::vector<int> encode_spans(const std::vector<EntitySpan>& spans, std::size_t length,
                              const TagScheme& scheme) {
    std::vector<EntitySpan> sorted = spans;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const EntitySpan& s = sorted[i];
        if (s.start >= s.end || s.end > length) {
            raise(ErrorKind::SpanOutOfRange,
                  "span [" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                      ") does not fit length " + std::to_string(length));
        }
        if (s.category >= scheme.n_categories()) {
            raise(ErrorKind::UnknownLabel, "category index " + std::to_string(s.category));
        }
        if (i > 0 && sorted[i - 1].end > s.start) {
            raise(ErrorKind::OverlappingSpans,
                  "spans overlap at token " + std::to_string(s.start));
        }
    }
    std::vector<int> tags(length, scheme.outside_id());
    for (const EntitySpan& s : sorted) {
        tags[s.start] = scheme.begin_id(s.category);
        for (std::size_t i = s.start + 1; i < s.end; ++i) tags[i] = scheme.inside_id(s.category);
    }
    return tags;
}

std::pair<std::vector<int>, RepairReport> repair_tags(const std::vector<int>& tags,
                                                      const TagScheme& scheme) {
    require_known(tags, scheme);
    std::vector<int> fixed = tags;
    RepairReport report;
    bool in_entity = false;
    std::size_t entity_cat = 0;
    for (std::size_t i = 0; i < fixed.size(); ++i) {
        const int tag = fixed[i];
        if (scheme.is_outside(tag)) {
            in_entity = false;
            continue;
        }
        const std::size_t cat = scheme.category_of(tag);
        if (scheme.is_inside(tag) && (!in_entity || entity_cat != cat)) {
            fixed[i] = scheme.begin_id(cat);
            report.fixes.push_back(RepairFix{i, tag, fixed[i]});
        }
        in_entity = true;
        entity_cat = cat;
    }
    return {std::move(fixed), std::move(report)};
}

}  // namespace riskner
