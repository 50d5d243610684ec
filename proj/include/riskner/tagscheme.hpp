#pragma once

#include <optional>
#include <string>
#include <vector>

namespace riskner {

/// BIO label inventory over an ordered list of entity categories. Label ids
/// are dense: 0 is "O", then B-c and I-c pairs in category order, so a scheme
/// with six categories has 13 labels.
class TagScheme {
  public:
    explicit TagScheme(std::vector<std::string> entity_types);

    /// The six-category inventory used throughout: PER, RRE, PNR, OSC, GPU, CMS.
    static const TagScheme& default_scheme();

    const std::vector<std::string>& entity_types() const noexcept { return entity_types_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    std::size_t n_categories() const noexcept { return entity_types_.size(); }
    std::size_t n_labels() const noexcept { return labels_.size(); }

    int outside_id() const noexcept { return 0; }
    int begin_id(std::size_t category) const { return static_cast<int>(1 + 2 * category); }
    int inside_id(std::size_t category) const { return static_cast<int>(2 + 2 * category); }

    bool is_outside(int label) const noexcept { return label == 0; }
    bool is_begin(int label) const noexcept { return label > 0 && label % 2 == 1; }
    bool is_inside(int label) const noexcept { return label > 0 && label % 2 == 0; }
    std::size_t category_of(int label) const { return static_cast<std::size_t>((label - 1) / 2); }

    const std::string& label_name(int label) const { return labels_.at(static_cast<std::size_t>(label)); }
    std::optional<int> label_id(const std::string& name) const;
    bool valid_label(int label) const noexcept {
        return label >= 0 && static_cast<std::size_t>(label) < labels_.size();
    }

  private:
    std::vector<std::string> entity_types_;
    std::vector<std::string> labels_;
};

}  // namespace riskner
