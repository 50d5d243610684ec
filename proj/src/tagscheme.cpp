#include "riskner/tagscheme.hpp"

#include "riskner/errors.hpp"

namespace riskner {

TagScheme::TagScheme(std::vector<std::string> entity_types)
    : entity_types_(std::move(entity_types)) {
    if (entity_types_.empty()) {
        raise(ErrorKind::Config, "a tag scheme needs at least one entity category");
    }
    labels_.reserve(1 + 2 * entity_types_.size());
    labels_.push_back("O");
    for (const std::string& c : entity_types_) {
        labels_.push_back("B-" + c);
        labels_.push_back("I-" + c);
    }
}

const TagScheme& TagScheme::default_scheme() {
    static const TagScheme scheme({"PER", "RRE", "PNR", "OSC", "GPU", "CMS"});
    return scheme;
}

std::optional<int> TagScheme::label_id(const std::string& name) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == name) return static_cast<int>(i);
    }
    return std::nullopt;
}

}  // namespace riskner
