#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace goldfish {

enum class ErrorCode {
  // media ingest
  MalformedTimestamp,
  ZeroLengthVideo,
  InvalidArgument,
  // descriptor / backends
  EmptyClip,
  BackendUnavailable,
  BackendRejected,
  EmptyResponse,
  // embedding index
  DimensionMismatch,
  EncoderMismatch,
  CorruptIndex,
  VersionUnsupported,
  // retrieval
  ZeroVector,
  EmptyIndex,
  // answer module
  NoHits,
  UnparseableChoice,
  // benchmark harness
  OrphanClip,
  UnparseableVerdict,
  LengthMismatch,
  InvalidItem,
  // service
  InvalidManifest,
  DuplicateVideoId,
  VideoNotReady,
  MissingVideo,
  EmptyBenchmark,
  InvalidConfig,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure the engine reports carries one of the codes above. The
/// optional stage label names the pipeline stage (describe, embed, answer,
/// judge) that produced a backend error.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string stage = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }

  /// Same error, relabelled with the stage that surfaced it.
  Error with_stage(std::string stage) const;

 private:
  ErrorCode code_;
  std::string stage_;
  std::string message_;
};

}  // namespace goldfish
