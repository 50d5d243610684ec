#pragma once

#include <stdexcept>
#include <string>

namespace riskner {

enum class ErrorKind {
    // corpus / codec
    UnknownLabel,
    EmptySentence,
    MalformedLine,
    EmptyCorpus,
    Truncation,
    InvalidSequence,
    OverlappingSpans,
    SpanOutOfRange,
    SentenceIdMismatch,
    EmptyTable,
    // engine
    ShapeMismatch,
    NonFiniteValue,
    NonFiniteGradient,
    NoTape,
    IdOutOfRange,
    // trainer / tuner
    NonFiniteUpdate,
    DivergedLoss,
    EmptyAxis,
    NoCompletedTrials,
    // ingest
    InvalidQuery,
    AuthFailed,
    RateLimited,
    MalformedResponse,
    StoreCorrupt,
    // persistence
    VersionMismatch,
    TruncatedFile,
    LedgerCorrupt,
    // cli / report
    NoRuns,
    Usage,
    Io,
    Config,
};

const char* error_kind_name(ErrorKind kind);

/// Error type thrown across the pipeline. `kind` identifies the contract
/// violation, `what()` carries a human-readable diagnostic.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, std::string message) {
    throw Error(kind, std::move(message));
}

}  // namespace riskner
