#include "riskner/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "riskner/errors.hpp"
#include "riskner/rng.hpp"
#include "riskner/tagcodec.hpp"

namespace riskner {

std::size_t Corpus::token_count() const {
    std::size_t n = 0;
    for (const Sentence& s : sentences) n += s.tokens.size();
    return n;
}

std::vector<std::size_t> Corpus::entity_counts(const TagScheme& scheme) const {
    std::vector<std::size_t> counts(scheme.n_categories(), 0);
    for (const Sentence& s : sentences) {
        std::vector<int> tags;
        tags.reserve(s.tokens.size());
        for (const Token& t : s.tokens) tags.push_back(t.gold_label);
        for (const EntitySpan& span : decode_spans(tags, scheme)) ++counts[span.category];
    }
    return counts;
}

std::size_t Corpus::total_entities(const TagScheme& scheme) const {
    std::size_t n = 0;
    for (std::size_t c : entity_counts(scheme)) n += c;
    return n;
}

namespace {

constexpr const char* kSourceIdPrefix = "# source_id = ";

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

bool is_blank(std::string_view line) {
    return line.find_first_not_of(" \t") == std::string_view::npos;
}

}  // namespace

Corpus parse_conll(const std::string& text, const TagScheme& scheme, ParseMode mode) {
    Corpus corpus;
    Sentence current;
    std::string pending_source;
    std::size_t blank_run = 0;

    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t nl = text.find('\n', start);
        const std::string_view raw(text.data() + start,
                                   (nl == std::string::npos ? text.size() : nl) - start);
        const bool last = nl == std::string::npos;
        start = last ? text.size() + 1 : nl + 1;
        ++line_no;
        const std::string_view line = strip_cr(raw);

        if (last && line.empty()) break;  // trailing newline, not a blank line

        if (is_blank(line)) {
            if (!current.tokens.empty()) {
                corpus.sentences.push_back(std::move(current));
                current = Sentence{};
                blank_run = 1;
            } else {
                ++blank_run;
                if (blank_run >= 2) {
                    if (mode == ParseMode::Strict) {
                        raise(ErrorKind::EmptySentence,
                              "consecutive blank lines at line " + std::to_string(line_no) +
                                  " produce an empty sentence");
                    }
                    std::cerr << "warning: skipping empty sentence at line " << line_no << "\n";
                }
            }
            pending_source.clear();
            continue;
        }
        if (line.front() == '#') {
            const std::string_view sv(line);
            if (sv.rfind(kSourceIdPrefix, 0) == 0) {
                pending_source = std::string(sv.substr(std::string_view(kSourceIdPrefix).size()));
            }
            continue;
        }
        blank_run = 0;

        std::size_t sep = line.find('\t');
        if (sep == std::string_view::npos) sep = line.find(' ');
        if (sep == std::string_view::npos || sep == 0 || sep + 1 >= line.size()) {
            raise(ErrorKind::MalformedLine,
                  "line " + std::to_string(line_no) + ": expected \"surface<TAB>label\"");
        }
        const std::string surface(line.substr(0, sep));
        const std::string label_name(line.substr(sep + 1));
        if (surface.find_first_of(" \t") != std::string::npos ||
            label_name.find_first_of(" \t") != std::string::npos) {
            raise(ErrorKind::MalformedLine,
                  "line " + std::to_string(line_no) + ": extra whitespace");
        }
        const auto label = scheme.label_id(label_name);
        if (!label) {
            raise(ErrorKind::UnknownLabel,
                  "line " + std::to_string(line_no) + ": label \"" + label_name +
                      "\" is not in the scheme");
        }
        if (current.tokens.empty() && !pending_source.empty()) {
            current.source_id = pending_source;
            pending_source.clear();
        }
        current.tokens.push_back(Token{surface, *label});
    }
    if (!current.tokens.empty()) corpus.sentences.push_back(std::move(current));
    return corpus;
}

std::string serialize_conll(const Corpus& corpus, const TagScheme& scheme) {
    std::ostringstream os;
    for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
        const Sentence& s = corpus.sentences[i];
        if (i) os << "\n";
        if (!s.source_id.empty()) os << kSourceIdPrefix << s.source_id << "\n";
        for (const Token& t : s.tokens) {
            os << t.surface << "\t" << scheme.label_name(t.gold_label) << "\n";
        }
    }
    return os.str();
}

SplitSet split_corpus(const Corpus& corpus, const std::array<double, 3>& ratios,
                      std::uint64_t seed) {
    if (corpus.empty()) raise(ErrorKind::EmptyCorpus, "cannot split an empty corpus");
    double sum = 0.0;
    for (double r : ratios) {
        if (r < 0.0) raise(ErrorKind::Config, "split ratios must be non-negative");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        raise(ErrorKind::Config, "split ratios must sum to 1 (got " + std::to_string(sum) + ")");
    }

    const std::size_t n = corpus.size();
    const std::vector<std::size_t> order = shuffled_indices(n, seed);

    const auto boundary = [&](double cum) {
        const long long b = std::llround(cum * static_cast<double>(n));
        return std::min<std::size_t>(static_cast<std::size_t>(std::max(0LL, b)), n);
    };
    std::size_t b1 = boundary(ratios[0]);
    std::size_t b2 = std::max(b1, boundary(ratios[0] + ratios[1]));

    SplitSet split;
    split.seed = seed;
    split.ratios = ratios;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t part = i < b1 ? 0 : (i < b2 ? 1 : 2);
        split.part_ids[part].push_back(order[i]);
        Corpus& target = part == 0 ? split.train : (part == 1 ? split.validation : split.test);
        target.sentences.push_back(corpus.sentences[order[i]]);
    }
    return split;
}

std::string split_manifest_json(const SplitSet& split) {
    nlohmann::json j;
    j["format"] = "riskner-split-v1";
    j["seed"] = split.seed;
    j["ratios"] = split.ratios;
    j["parts"]["train"] = split.part_ids[0];
    j["parts"]["validation"] = split.part_ids[1];
    j["parts"]["test"] = split.part_ids[2];
    return j.dump(2) + "\n";
}

Vocabulary::Vocabulary() {
    add("[PAD]");
    add("[UNK]");
    add("[CLS]");
    add("[SEP]");
}

void Vocabulary::add(const std::string& token) {
    if (token_to_id_.count(token)) return;
    token_to_id_.emplace(token, id_to_token_.size());
    id_to_token_.push_back(token);
}

std::size_t Vocabulary::lookup(const std::string& token) const {
    const auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnk : it->second;
}

std::string Vocabulary::to_json() const {
    nlohmann::json j;
    j["format"] = "riskner-vocab-v1";
    j["tokens"] = id_to_token_;
    return j.dump(2) + "\n";
}

Vocabulary Vocabulary::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.contains("tokens") || !j["tokens"].is_array()) {
        raise(ErrorKind::Config, "vocabulary file is not valid riskner-vocab JSON");
    }
    const auto tokens = j["tokens"].get<std::vector<std::string>>();
    if (tokens.size() < Vocabulary::kReserved || tokens[0] != "[PAD]" || tokens[1] != "[UNK]" ||
        tokens[2] != "[CLS]" || tokens[3] != "[SEP]") {
        raise(ErrorKind::Config, "vocabulary file lacks the reserved PAD/UNK/CLS/SEP entries");
    }
    Vocabulary v;
    for (std::size_t i = Vocabulary::kReserved; i < tokens.size(); ++i) v.add(tokens[i]);
    return v;
}

Vocabulary build_vocab(const Corpus& corpus, std::size_t min_freq, std::size_t max_size) {
    if (min_freq < 1) raise(ErrorKind::Config, "min_freq must be at least 1");
    std::map<std::string, std::size_t> freq;
    for (const Sentence& s : corpus.sentences) {
        for (const Token& t : s.tokens) ++freq[t.surface];
    }
    std::vector<std::pair<std::string, std::size_t>> ranked;
    ranked.reserve(freq.size());
    for (auto& [token, count] : freq) {
        if (count >= min_freq) ranked.emplace_back(token, count);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary vocab;
    for (const auto& [token, count] : ranked) {
        if (max_size != 0 && vocab.size() >= max_size) break;
        vocab.add(token);
    }
    return vocab;
}

namespace {

struct Piece {
    std::size_t id;
    int label;             // kIgnoreLabel on continuations
    std::size_t token_idx; // original token this piece came from
};

std::vector<Piece> word_pieces(const Sentence& sentence, const Vocabulary& vocab,
                               SubwordMode subword) {
    std::vector<Piece> pieces;
    for (std::size_t ti = 0; ti < sentence.tokens.size(); ++ti) {
        const Token& tok = sentence.tokens[ti];
        if (subword == SubwordMode::Off || vocab.contains(tok.surface)) {
            pieces.push_back(Piece{vocab.lookup(tok.surface), tok.gold_label, ti});
            continue;
        }
        // Greedy longest-match split; continuations carry the "##" prefix and
        // an IGNORE label (the first piece keeps the token's label).
        std::vector<std::size_t> ids;
        std::size_t pos = 0;
        const std::string& word = tok.surface;
        bool failed = false;
        while (pos < word.size()) {
            std::size_t len = word.size() - pos;
            bool matched = false;
            while (len > 0) {
                std::string cand = word.substr(pos, len);
                if (pos > 0) cand = "##" + cand;
                if (vocab.contains(cand)) {
                    ids.push_back(vocab.lookup(cand));
                    pos += len;
                    matched = true;
                    break;
                }
                --len;
            }
            if (!matched) {
                failed = true;
                break;
            }
        }
        if (failed || ids.empty()) {
            pieces.push_back(Piece{Vocabulary::kUnk, tok.gold_label, ti});
            continue;
        }
        for (std::size_t k = 0; k < ids.size(); ++k) {
            pieces.push_back(Piece{ids[k], k == 0 ? tok.gold_label : kIgnoreLabel, ti});
        }
    }
    return pieces;
}

}  // namespace

ModelExample encode_sentence(const Sentence& sentence, const Vocabulary& vocab,
                             const TagScheme& scheme, std::size_t max_len, ParseMode mode,
                             SubwordMode subword) {
    if (max_len < 3) raise(ErrorKind::Config, "max_len must be at least 3");
    if (sentence.tokens.empty()) raise(ErrorKind::EmptySentence, "cannot encode an empty sentence");

    std::vector<Piece> pieces = word_pieces(sentence, vocab, subword);

    const std::size_t budget = max_len - 2;
    const bool truncated = pieces.size() > budget;
    if (truncated && mode == ParseMode::Strict) {
        raise(ErrorKind::Truncation, "sentence of " + std::to_string(pieces.size()) +
                                         " pieces exceeds max_len " + std::to_string(max_len));
    }
    const std::size_t kept = std::min(pieces.size(), budget);

    ModelExample ex;
    ex.truncated = truncated;
    ex.n_real = kept;
    ex.input_ids.assign(max_len, Vocabulary::kPad);
    ex.attention_mask.assign(max_len, 0);
    ex.segment_ids.assign(max_len, 0);
    ex.label_ids.assign(max_len, kIgnoreLabel);

    ex.input_ids[0] = Vocabulary::kCls;
    ex.attention_mask[0] = 1;
    for (std::size_t i = 0; i < kept; ++i) {
        ex.input_ids[1 + i] = pieces[i].id;
        ex.attention_mask[1 + i] = 1;
        ex.label_ids[1 + i] = pieces[i].label;
    }
    ex.input_ids[1 + kept] = Vocabulary::kSep;
    ex.attention_mask[1 + kept] = 1;

    if (truncated) {
        // Entities crossing the cut are dropped from gold: all their kept
        // positions get IGNORE and the drop is counted.
        std::vector<int> tags;
        tags.reserve(sentence.tokens.size());
        for (const Token& t : sentence.tokens) tags.push_back(t.gold_label);
        for (const EntitySpan& span : decode_spans(tags, scheme)) {
            bool any_kept = false;
            bool any_cut = false;
            for (std::size_t i = 0; i < pieces.size(); ++i) {
                if (pieces[i].token_idx < span.start || pieces[i].token_idx >= span.end) continue;
                (i < kept ? any_kept : any_cut) = true;
            }
            if (!(any_kept && any_cut)) continue;
            ++ex.dropped_entities;
            for (std::size_t i = 0; i < kept; ++i) {
                if (pieces[i].token_idx >= span.start && pieces[i].token_idx < span.end) {
                    ex.label_ids[1 + i] = kIgnoreLabel;
                }
            }
        }
    }
    return ex;
}

}  // namespace riskner
