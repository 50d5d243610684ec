#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "riskner/tagscheme.hpp"

namespace riskner {

struct Token {
    std::string surface;
    int gold_label = 0;
};

struct Sentence {
    std::vector<Token> tokens;
    std::string source_id;
};

struct Corpus {
    std::vector<Sentence> sentences;

    std::size_t size() const noexcept { return sentences.size(); }
    bool empty() const noexcept { return sentences.empty(); }
    std::size_t token_count() const;
    /// Gold entity occurrences per category (decoded from the BIO labels).
    std::vector<std::size_t> entity_counts(const TagScheme& scheme) const;
    std::size_t total_entities(const TagScheme& scheme) const;
};

enum class ParseMode { Lenient, Strict };

/// Parses a CoNLL-style document: one "surface<TAB or single space>label" per
/// line, blank line between sentences, "#"-prefixed comment lines ignored
/// except "# source_id = X" which names the following sentence.
Corpus parse_conll(const std::string& text, const TagScheme& scheme,
                   ParseMode mode = ParseMode::Lenient);

/// Inverse of parse_conll up to normalized whitespace (tab separator, one
/// trailing newline).
std::string serialize_conll(const Corpus& corpus, const TagScheme& scheme);

struct SplitSet {
    Corpus train;
    Corpus validation;
    Corpus test;
    std::uint64_t seed = 0;
    std::array<double, 3> ratios{};
    /// Indices into the source corpus, in the order sentences were assigned.
    std::array<std::vector<std::size_t>, 3> part_ids;
};

/// Seeded shuffle (SplitMix64 Fisher-Yates) then cut by sentence count at the
/// cumulative ratio boundaries round(cum * n). Same seed and corpus always
/// produce the identical partition.
SplitSet split_corpus(const Corpus& corpus, const std::array<double, 3>& ratios,
                      std::uint64_t seed);

/// JSON manifest with seed, ratios, and per-part sentence-id lists.
std::string split_manifest_json(const SplitSet& split);

class Vocabulary {
  public:
    static constexpr std::size_t kPad = 0;
    static constexpr std::size_t kUnk = 1;
    static constexpr std::size_t kCls = 2;
    static constexpr std::size_t kSep = 3;
    static constexpr std::size_t kReserved = 4;

    Vocabulary();

    /// Unseen tokens map to UNK.
    std::size_t lookup(const std::string& token) const;
    bool contains(const std::string& token) const { return token_to_id_.count(token) > 0; }
    std::size_t size() const noexcept { return id_to_token_.size(); }
    const std::string& token(std::size_t id) const { return id_to_token_.at(id); }
    const std::vector<std::string>& tokens() const noexcept { return id_to_token_; }

    void add(const std::string& token);

    std::string to_json() const;
    static Vocabulary from_json(const std::string& text);

  private:
    std::unordered_map<std::string, std::size_t> token_to_id_;
    std::vector<std::string> id_to_token_;
};

/// Frequency-ranked vocabulary: tokens with frequency >= min_freq, most
/// frequent first, ties lexicographic. max_size caps the total size including
/// the four reserved ids; 0 means unlimited.
Vocabulary build_vocab(const Corpus& corpus, std::size_t min_freq, std::size_t max_size = 0);

enum class SubwordMode { Off, Greedy };

/// Fixed-length encoded sentence: [CLS, t1..tk, SEP, PAD...] with parallel
/// mask/segment/label sequences. label_ids is kIgnoreLabel on CLS/SEP/PAD
/// positions (and on subword continuations and truncation-dropped entities).
struct ModelExample {
    std::vector<std::size_t> input_ids;
    std::vector<int> attention_mask;
    std::vector<std::size_t> segment_ids;
    std::vector<int> label_ids;
    bool truncated = false;
    std::size_t dropped_entities = 0;
    std::size_t n_real = 0;  // real token/piece positions (excludes CLS/SEP/PAD)
};

inline constexpr int kIgnoreLabel = -1;

ModelExample encode_sentence(const Sentence& sentence, const Vocabulary& vocab,
                             const TagScheme& scheme, std::size_t max_len,
                             ParseMode mode = ParseMode::Lenient,
                             SubwordMode subword = SubwordMode::Off);

}  // namespace riskner
