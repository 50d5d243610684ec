#pragma once

#include <memory>
#include <string>
#include <vector>

#include "riskner/encoder.hpp"
#include "riskner/evalmetrics.hpp"
#include "riskner/trainer.hpp"

namespace riskner {

inline constexpr const char* kArtifactVersion = "riskner-0.1.0";
inline constexpr int kCheckpointFormatVersion = 1;

/// Checkpoint container: 8-byte magic, little-endian u64 manifest length, a
/// JSON manifest (format version, encoder config, seed, parameter names and
/// shapes in order), then the raw little-endian float64 parameter data
/// concatenated in manifest order. Loading verifies every shape before
/// accepting any data; round-trips are bit-exact.
void save_checkpoint(const EncoderModel& model, const std::string& path);
std::unique_ptr<EncoderModel> load_checkpoint(const std::string& path);

/// One training run bound to its exact inputs.
struct RunRecord {
    std::string run_id;
    std::string timestamp;
    TrainConfig config;
    std::string corpus_hash;
    std::string artifact_version = kArtifactVersion;
    TrainHistory history;
    MetricsTable final_metrics;
    std::vector<std::string> categories;
};

std::string run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(const std::string& line);

/// Appends one line atomically (single O_APPEND write); the ledger stays
/// valid JSON-lines even if a writer crashes between appends.
void append_jsonl_line(const std::string& path, const std::string& line);

/// All complete lines of a JSON-lines file; a trailing partial line (no
/// newline) is ignored. Missing file yields an empty list.
std::vector<std::string> read_jsonl_lines(const std::string& path);

void append_run_record(const RunRecord& record, const std::string& ledger_path);
std::vector<RunRecord> read_run_records(const std::string& ledger_path);

/// Hex FNV-1a of the serialized corpus; binds run records to exact data.
std::string corpus_content_hash(const Corpus& corpus, const TagScheme& scheme);

// Shared file helpers.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace riskner
