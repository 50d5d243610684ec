#include "riskner/errors.hpp"

namespace riskner {

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::UnknownLabel: return "UnknownLabel";
        case ErrorKind::EmptySentence: return "EmptySentence";
        case ErrorKind::MalformedLine: return "MalformedLine";
        case ErrorKind::EmptyCorpus: return "EmptyCorpus";
        case ErrorKind::Truncation: return "Truncation";
        case ErrorKind::InvalidSequence: return "InvalidSequence";
        case ErrorKind::OverlappingSpans: return "OverlappingSpans";
        case ErrorKind::SpanOutOfRange: return "SpanOutOfRange";
        case ErrorKind::SentenceIdMismatch: return "SentenceIdMismatch";
        case ErrorKind::EmptyTable: return "EmptyTable";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::NonFiniteValue: return "NonFiniteValue";
        case ErrorKind::NonFiniteGradient: return "NonFiniteGradient";
        case ErrorKind::NoTape: return "NoTape";
        case ErrorKind::IdOutOfRange: return "IdOutOfRange";
        case ErrorKind::NonFiniteUpdate: return "NonFiniteUpdate";
        case ErrorKind::DivergedLoss: return "DivergedLoss";
        case ErrorKind::EmptyAxis: return "EmptyAxis";
        case ErrorKind::NoCompletedTrials: return "NoCompletedTrials";
        case ErrorKind::InvalidQuery: return "InvalidQuery";
        case ErrorKind::AuthFailed: return "AuthFailed";
        case ErrorKind::RateLimited: return "RateLimited";
        case ErrorKind::MalformedResponse: return "MalformedResponse";
        case ErrorKind::StoreCorrupt: return "StoreCorrupt";
        case ErrorKind::VersionMismatch: return "VersionMismatch";
        case ErrorKind::TruncatedFile: return "TruncatedFile";
        case ErrorKind::LedgerCorrupt: return "LedgerCorrupt";
        case ErrorKind::NoRuns: return "NoRuns";
        case ErrorKind::Usage: return "Usage";
        case ErrorKind::Io: return "Io";
        case ErrorKind::Config: return "Config";
    }
    return "Error";
}

}  // namespace riskner
