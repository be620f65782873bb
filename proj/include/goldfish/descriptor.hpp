#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "goldfish/backends.hpp"
#include "goldfish/media_ingest.hpp"

namespace goldfish {

/// Hard cap on frames per descriptor request.
inline constexpr std::size_t kMaxDescriptorFrames = 45;

inline constexpr std::string_view kSummaryInstruction =
    "Generate a description of this video. Pay close attention to the objects, actions, emotions portrayed in the "
    "video, providing a vivid description of key moments. Specify any visual cues or elements that stand out.";

/// The typos are part of the template the descriptor was tuned with; keep them.
inline constexpr std::string_view kRelatedInfoTemplate =
    "From this video extract the related information to This multichioce question and provide an explaination for "
    "your answer and If you don't know the answer, say 'I DON'T KNOW' as option 5 because maybe the questoin is not "
    "related to the video content. the question is: {question} your answer:";

inline constexpr std::string_view kDontKnowMarker = "I DON'T KNOW";

struct ClipDescription {
  int clip_id = 0;
  std::string summary_text;
  std::string backend_id;
  std::int64_t latency_ms = 0;
  int retries = 0;
};

struct GroundedInfo {
  int clip_id = 0;
  std::string question;
  std::string info_text;
  bool is_dont_know = false;
};

struct DescribeOptions {
  RetryPolicy retry{};
  Sleeper sleeper = real_sleeper();
  /// Whether per-frame subtitles go into the prompt at all.
  bool include_subtitles = true;
};

/// Pairs each sampled frame with the text of the cues covering its
/// timestamp. Throws EmptyClip when the clip has no frames and
/// InvalidArgument above kMaxDescriptorFrames.
DescriptorRequest build_interleaved_prompt(const Clip& clip, const SubtitleTrack& track,
                                           std::string instruction = std::string(kSummaryInstruction),
                                           bool include_subtitles = true);

/// Text rendering: <s>[INST]<Img><ref_1><Sub>sub_1 ... <Img><ref_N><Sub>sub_N instruction[/INST]
std::string render_prompt(const DescriptorRequest& request);

/// Case-insensitive search for kDontKnowMarker, also accepting the
/// typographic apostrophe.
bool contains_dont_know(std::string_view text);

std::string related_info_prompt(std::string_view question);

ClipDescription describe_clip(const DescriptorRequest& request, DescriptorBackend& backend,
                              const DescribeOptions& options = {});

/// `track` supplies per-frame subtitles when available.
GroundedInfo extract_related_info(const Clip& clip, std::string_view question, DescriptorBackend& backend,
                                  const DescribeOptions& options = {}, const SubtitleTrack* track = nullptr);

/// Stable digest of a clip's id, subtitle text and frame indices.
std::uint64_t clip_content_digest(const Clip& clip);

/// Fixed phrase used by the mock descriptors.
std::string mock_summary_phrase(int clip_id, std::uint64_t digest, std::optional<std::string_view> needle);

/// Deterministic offline description. With a needle token the summary
/// mentions it, which is how synthetic retrieval tests plant ground truth.
ClipDescription mock_describe(const Clip& clip, std::optional<std::string_view> needle = std::nullopt);

}  // namespace goldfish
