#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace goldfish {

inline constexpr std::int64_t kDefaultClipWindowMs = 90'000;
inline constexpr int kDefaultMaxFrames = 45;

struct VideoSource {
  std::string id;
  std::string uri;
  double fps = 0.0;
  std::int64_t frame_count = 0;
  int width = 0;
  int height = 0;
  std::int64_t duration_ms = 0;
};

/// frame_count / fps in milliseconds, rounded to the nearest ms.
std::int64_t nominal_duration_ms(double fps, std::int64_t frame_count);

/// Checks fps > 0, frame_count >= 1 and that duration_ms agrees with
/// frame_count / fps to within one frame period. Throws InvalidArgument.
void validate(const VideoSource& source);

struct SubtitleCue {
  int index = 0;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::string text;

  friend bool operator==(const SubtitleCue&, const SubtitleCue&) = default;
};

struct SubtitleTrack {
  std::vector<SubtitleCue> cues;

  friend bool operator==(const SubtitleTrack&, const SubtitleTrack&) = default;
};

enum class SubtitleFormat { Srt, Vtt };

std::string_view to_string(SubtitleFormat format);
/// "srt" / "vtt", or a path ending in one of those extensions.
SubtitleFormat subtitle_format_from(std::string_view name_or_path);

/// Parses SubRip or WebVTT text. Cue text has markup stripped and whitespace
/// collapsed; cues whose text is empty after that are dropped. Cues are
/// stably ordered by start time and renumbered 1..n. Throws
/// MalformedTimestamp when a timing line cannot be read.
SubtitleTrack parse_subtitles(std::string_view raw, SubtitleFormat format);

/// Canonical text form; parse_subtitles(serialize_subtitles(t, f), f) == t
/// for any track produced by parse_subtitles.
std::string serialize_subtitles(const SubtitleTrack& track, SubtitleFormat format);

/// Parses "HH:MM:SS,mmm" (SRT) or "[HH:]MM:SS.mmm" (VTT).
std::int64_t parse_timestamp(std::string_view s, SubtitleFormat format);

struct Clip {
  int clip_id = 0;  // 1-based ordinal within the video
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::string source_uri;
  double fps = 0.0;
  /// Timeline position of frame index 0 of source_uri; non-zero only for
  /// clips stitched from separate source files.
  std::int64_t frame_origin_ms = 0;
  std::vector<std::int64_t> frame_indices;
  std::string subtitle_text;

  double frame_time_ms(std::size_t j) const;
  /// Opaque payload reference handed to descriptor backends.
  std::string frame_ref(std::size_t j) const;

  friend bool operator==(const Clip&, const Clip&) = default;
};

/// At most max_frames indices evenly spaced over [first, first + count),
/// including both endpoints when count >= 2 and max_frames >= 2.
std::vector<std::int64_t> sample_uniform(std::int64_t first, std::int64_t count, int max_frames);

/// Splits the timeline into ceil(duration / window) consecutive clips and
/// samples each clip's frames down to max_frames. Throws ZeroLengthVideo.
std::vector<Clip> segment_video(const VideoSource& source, std::int64_t clip_window_ms = kDefaultClipWindowMs,
                                int max_frames = kDefaultMaxFrames);

/// Appends each cue's text to every clip whose span overlaps the cue.
std::vector<Clip> align_subtitles(const SubtitleTrack& track, std::span<const Clip> clips);

inline bool spans_overlap(std::int64_t a_start, std::int64_t a_end, std::int64_t b_start, std::int64_t b_end) {
  return a_start < b_end && b_start < a_end;
}

}  // namespace goldfish
