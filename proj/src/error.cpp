#include "goldfish/error.hpp"

namespace goldfish {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedTimestamp: return "MalformedTimestamp";
    case ErrorCode::ZeroLengthVideo: return "ZeroLengthVideo";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyClip: return "EmptyClip";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::BackendRejected: return "BackendRejected";
    case ErrorCode::EmptyResponse: return "EmptyResponse";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EncoderMismatch: return "EncoderMismatch";
    case ErrorCode::CorruptIndex: return "CorruptIndex";
    case ErrorCode::VersionUnsupported: return "VersionUnsupported";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::EmptyIndex: return "EmptyIndex";
    case ErrorCode::NoHits: return "NoHits";
    case ErrorCode::UnparseableChoice: return "UnparseableChoice";
    case ErrorCode::OrphanClip: return "OrphanClip";
    case ErrorCode::UnparseableVerdict: return "UnparseableVerdict";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidItem: return "InvalidItem";
    case ErrorCode::InvalidManifest: return "InvalidManifest";
    case ErrorCode::DuplicateVideoId: return "DuplicateVideoId";
    case ErrorCode::VideoNotReady: return "VideoNotReady";
    case ErrorCode::MissingVideo: return "MissingVideo";
    case ErrorCode::EmptyBenchmark: return "EmptyBenchmark";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& message, const std::string& stage) {
  std::string out;
  if (!stage.empty()) out += "[" + stage + "] ";
  out += to_string(code);
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::string stage)
    : std::runtime_error(compose(code, message, stage)),
      code_(code),
      stage_(std::move(stage)),
      message_(message) {}

Error Error::with_stage(std::string stage) const { return Error(code_, message_, std::move(stage)); }

}  // namespace goldfish
