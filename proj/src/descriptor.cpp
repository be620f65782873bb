#include "goldfish/descriptor.hpp"

#include <chrono>

#include "goldfish/error.hpp"
#include "goldfish/text_util.hpp"

namespace goldfish {

DescriptorRequest build_interleaved_prompt(const Clip& clip, const SubtitleTrack& track, std::string instruction,
                                           bool include_subtitles) {
  if (clip.frame_indices.empty()) {
    throw Error(ErrorCode::EmptyClip, "clip " + std::to_string(clip.clip_id) + " has no sampled frames");
  }
  if (clip.frame_indices.size() > kMaxDescriptorFrames) {
    throw Error(ErrorCode::InvalidArgument, "clip " + std::to_string(clip.clip_id) + " has " +
                                                std::to_string(clip.frame_indices.size()) + " frames; the cap is " +
                                                std::to_string(kMaxDescriptorFrames));
  }

  DescriptorRequest request;
  request.clip_id = clip.clip_id;
  request.instruction = std::move(instruction);
  request.frame_refs.reserve(clip.frame_indices.size());
  request.per_frame_subtitles.reserve(clip.frame_indices.size());
  for (std::size_t j = 0; j < clip.frame_indices.size(); ++j) {
    request.frame_refs.push_back(clip.frame_ref(j));
    std::optional<std::string> subtitle;
    if (include_subtitles) {
      const double t = clip.frame_time_ms(j);
      std::vector<std::string> parts;
      for (const auto& cue : track.cues) {
        if (static_cast<double>(cue.start_ms) <= t && t < static_cast<double>(cue.end_ms)) parts.push_back(cue.text);
      }
      if (!parts.empty()) subtitle = text::join(parts, " ");
    }
    request.per_frame_subtitles.push_back(std::move(subtitle));
  }
  return request;
}

std::string render_prompt(const DescriptorRequest& request) {
  std::string out = "<s>[INST]";
  for (std::size_t j = 0; j < request.frame_refs.size(); ++j) {
    out += "<Img><" + request.frame_refs[j] + ">";
    if (j < request.per_frame_subtitles.size() && request.per_frame_subtitles[j]) {
      out += "<Sub>" + *request.per_frame_subtitles[j];
    }
  }
  out += request.instruction;
  out += "[/INST]";
  return out;
}

bool contains_dont_know(std::string_view text) {
  if (text::contains_icase(text, kDontKnowMarker)) return true;
  return text::contains_icase(text, "I DON’T KNOW");
}

std::string related_info_prompt(std::string_view question) {
  std::string prompt(kRelatedInfoTemplate);
  const auto pos = prompt.find("{question}");
  prompt.replace(pos, std::string_view("{question}").size(), question);
  return prompt;
}

namespace {

std::string call_descriptor(const DescriptorRequest& request, DescriptorBackend& backend,
                            const DescribeOptions& options, std::int64_t& latency_ms, int& retries) {
  std::string text;
  const auto started = std::chrono::steady_clock::now();
  with_retry(options.retry, options.sleeper, [&] { text = backend.describe(request); }, &retries);
  latency_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
  if (text::trim(text).empty()) {
    throw Error(ErrorCode::EmptyResponse, backend.id() + " returned no text for clip " + std::to_string(request.clip_id));
  }
  return text;
}

}  // namespace

ClipDescription describe_clip(const DescriptorRequest& request, DescriptorBackend& backend,
                              const DescribeOptions& options) {
  ClipDescription out;
  out.clip_id = request.clip_id;
  out.backend_id = backend.id();
  out.summary_text = call_descriptor(request, backend, options, out.latency_ms, out.retries);
  return out;
}

GroundedInfo extract_related_info(const Clip& clip, std::string_view question, DescriptorBackend& backend,
                                  const DescribeOptions& options, const SubtitleTrack* track) {
  if (text::trim(question).empty()) throw Error(ErrorCode::InvalidArgument, "question is empty");
  static const SubtitleTrack kNoSubtitles;
  const auto request = build_interleaved_prompt(clip, track ? *track : kNoSubtitles, related_info_prompt(question),
                                                options.include_subtitles && track != nullptr);
  GroundedInfo info;
  info.clip_id = clip.clip_id;
  info.question = std::string(question);
  std::int64_t latency = 0;
  int retries = 0;
  info.info_text = call_descriptor(request, backend, options, latency, retries);
  info.is_dont_know = contains_dont_know(info.info_text);
  return info;
}

std::uint64_t clip_content_digest(const Clip& clip) {
  std::uint64_t h = text::fnv1a64("clip:" + std::to_string(clip.clip_id));
  h = text::fnv1a64("|sub:" + clip.subtitle_text, h);
  std::string frames = "|frames:";
  for (auto f : clip.frame_indices) frames += std::to_string(f) + ",";
  return text::fnv1a64(frames, h);
}

std::string mock_summary_phrase(int clip_id, std::uint64_t digest, std::optional<std::string_view> needle) {
  std::string out = "Clip " + std::to_string(clip_id) + " shows scene " + text::hex64(digest) + ".";
  if (needle) out += " The clip features " + std::string(*needle) + ".";
  return out;
}

ClipDescription mock_describe(const Clip& clip, std::optional<std::string_view> needle) {
  ClipDescription out;
  out.clip_id = clip.clip_id;
  out.summary_text = mock_summary_phrase(clip.clip_id, clip_content_digest(clip), needle);
  out.backend_id = "mock-descriptor";
  return out;
}

}  // namespace goldfish
