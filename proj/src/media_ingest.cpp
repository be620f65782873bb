#include "goldfish/media_ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "goldfish/error.hpp"
#include "goldfish/text_util.hpp"

namespace goldfish {

std::int64_t nominal_duration_ms(double fps, std::int64_t frame_count) {
  if (fps <= 0.0) return 0;
  return std::llround(static_cast<double>(frame_count) * 1000.0 / fps);
}

void validate(const VideoSource& source) {
  if (!(source.fps > 0.0) || !std::isfinite(source.fps)) {
    throw Error(ErrorCode::InvalidArgument, "fps must be positive");
  }
  if (source.frame_count < 1) throw Error(ErrorCode::InvalidArgument, "frame_count must be >= 1");
  if (source.duration_ms != 0) {
    const double frame_period = 1000.0 / source.fps;
    const double expected = static_cast<double>(source.frame_count) * frame_period;
    if (std::abs(static_cast<double>(source.duration_ms) - expected) > frame_period + 1e-9) {
      throw Error(ErrorCode::InvalidArgument,
                  "duration_ms " + std::to_string(source.duration_ms) + " disagrees with frame_count/fps");
    }
  }
}

std::string_view to_string(SubtitleFormat format) { return format == SubtitleFormat::Srt ? "srt" : "vtt"; }

SubtitleFormat subtitle_format_from(std::string_view name_or_path) {
  const auto lower = text::to_lower(name_or_path);
  auto ends_with = [&](std::string_view suffix) {
    return lower.size() >= suffix.size() && lower.compare(lower.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with("srt")) return SubtitleFormat::Srt;
  if (ends_with("vtt")) return SubtitleFormat::Vtt;
  throw Error(ErrorCode::InvalidArgument, "unknown subtitle format: " + std::string(name_or_path));
}

namespace {

bool parse_digits(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  std::int64_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
    if (v > 1'000'000'000) return false;
  }
  out = v;
  return true;
}

[[noreturn]] void malformed(std::string_view what) {
  throw Error(ErrorCode::MalformedTimestamp, "cannot parse '" + std::string(what) + "'");
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; });
}

std::string decode_vtt_entities(std::string_view s) {
  struct Entity {
    std::string_view name;
    std::string_view value;
  };
  static constexpr Entity kEntities[] = {
      {"&amp;", "&"}, {"&lt;", "<"}, {"&gt;", ">"}, {"&nbsp;", " "}, {"&lrm;", ""}, {"&rlm;", ""},
  };
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    bool matched = false;
    if (s[i] == '&') {
      for (const auto& e : kEntities) {
        if (s.substr(i, e.name.size()) == e.name) {
          out += e.value;
          i += e.name.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out.push_back(s[i++]);
  }
  return out;
}

std::string encode_vtt_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct RawCue {
  std::int64_t start_ms;
  std::int64_t end_ms;
  std::vector<std::string> lines;
};

void parse_timing_line(std::string_view line, SubtitleFormat format, std::int64_t& start, std::int64_t& end) {
  const auto arrow = line.find("-->");
  const auto left = text::trim(line.substr(0, arrow));
  const auto right_full = text::trim(line.substr(arrow + 3));
  // WebVTT cue settings and SRT coordinates follow the end timestamp.
  const auto space = right_full.find_first_of(" \t");
  const auto right = right_full.substr(0, space);
  start = parse_timestamp(left, format);
  end = parse_timestamp(right, format);
  if (end < start) malformed(line);
}

std::string normalize_cue_text(const std::vector<std::string>& lines, SubtitleFormat format) {
  std::string joined = text::join(lines, " ");
  joined = text::strip_markup(joined);
  if (format == SubtitleFormat::Vtt) joined = decode_vtt_entities(joined);
  return text::collapse_whitespace(joined);
}

}  // namespace

std::int64_t parse_timestamp(std::string_view s, SubtitleFormat format) {
  const std::string t = text::trim(s);
  std::string_view v = t;
  auto sep = v.find_last_of(",.");
  if (sep == std::string_view::npos) malformed(s);
  if (format == SubtitleFormat::Vtt && v[sep] != '.') malformed(s);

  std::int64_t millis = 0;
  const auto millis_part = v.substr(sep + 1);
  if (millis_part.size() != 3 || !parse_digits(millis_part, millis)) malformed(s);

  std::vector<std::string_view> fields;
  std::string_view hms = v.substr(0, sep);
  std::size_t pos = 0;
  while (true) {
    const auto colon = hms.find(':', pos);
    fields.push_back(hms.substr(pos, colon == std::string_view::npos ? std::string_view::npos : colon - pos));
    if (colon == std::string_view::npos) break;
    pos = colon + 1;
  }
  const bool hours_optional = format == SubtitleFormat::Vtt;
  if (fields.size() != 3 && !(hours_optional && fields.size() == 2)) malformed(s);

  std::int64_t hours = 0;
  std::int64_t minutes = 0;
  std::int64_t seconds = 0;
  std::size_t i = 0;
  if (fields.size() == 3) {
    if (!parse_digits(fields[i++], hours)) malformed(s);
  }
  if (fields[i].size() != 2 || !parse_digits(fields[i], minutes) || minutes >= 60) malformed(s);
  ++i;
  if (fields[i].size() != 2 || !parse_digits(fields[i], seconds) || seconds >= 60) malformed(s);
  return ((hours * 60 + minutes) * 60 + seconds) * 1000 + millis;
}

SubtitleTrack parse_subtitles(std::string_view raw, SubtitleFormat format) {
  if (raw.size() >= 3 && static_cast<unsigned char>(raw[0]) == 0xEF && static_cast<unsigned char>(raw[1]) == 0xBB &&
      static_cast<unsigned char>(raw[2]) == 0xBF) {
    raw.remove_prefix(3);
  }

  std::vector<std::vector<std::string>> blocks;
  {
    std::vector<std::string> current;
    for (auto& line : text::split_lines(raw)) {
      if (is_blank(line)) {
        if (!current.empty()) blocks.push_back(std::move(current));
        current.clear();
      } else {
        current.push_back(std::move(line));
      }
    }
    if (!current.empty()) blocks.push_back(std::move(current));
  }

  std::vector<RawCue> raw_cues;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& block = blocks[b];
    if (format == SubtitleFormat::Vtt) {
      const std::string_view first = block.front();
      if (b == 0 && first.substr(0, 6) == "WEBVTT") continue;
      if (first.substr(0, 4) == "NOTE" || first.substr(0, 5) == "STYLE" || first.substr(0, 6) == "REGION") continue;
    }
    const auto timing =
        std::find_if(block.begin(), block.end(), [](const std::string& l) { return l.find("-->") != std::string::npos; });
    if (timing == block.end()) {
      // SubRip files in the wild sometimes contain blank lines inside a cue;
      // the orphaned text belongs to the preceding cue.
      if (format == SubtitleFormat::Srt && !raw_cues.empty()) {
        raw_cues.back().lines.insert(raw_cues.back().lines.end(), block.begin(), block.end());
      }
      continue;
    }
    RawCue cue{};
    parse_timing_line(*timing, format, cue.start_ms, cue.end_ms);
    cue.lines.assign(timing + 1, block.end());
    raw_cues.push_back(std::move(cue));
  }

  SubtitleTrack track;
  for (const auto& rc : raw_cues) {
    if (rc.end_ms <= rc.start_ms) continue;
    auto normalized = normalize_cue_text(rc.lines, format);
    if (normalized.empty()) continue;
    track.cues.push_back(SubtitleCue{0, rc.start_ms, rc.end_ms, std::move(normalized)});
  }
  std::stable_sort(track.cues.begin(), track.cues.end(),
                   [](const SubtitleCue& a, const SubtitleCue& b) { return a.start_ms < b.start_ms; });
  for (std::size_t i = 0; i < track.cues.size(); ++i) track.cues[i].index = static_cast<int>(i + 1);
  return track;
}

std::string serialize_subtitles(const SubtitleTrack& track, SubtitleFormat format) {
  std::string out;
  const char sep = format == SubtitleFormat::Srt ? ',' : '.';
  if (format == SubtitleFormat::Vtt) out += "WEBVTT\n\n";
  for (const auto& cue : track.cues) {
    out += std::to_string(cue.index);
    out += '\n';
    out += text::format_timestamp(cue.start_ms, sep);
    out += " --> ";
    out += text::format_timestamp(cue.end_ms, sep);
    out += '\n';
    out += format == SubtitleFormat::Vtt ? encode_vtt_entities(cue.text) : cue.text;
    out += "\n\n";
  }
  return out;
}

double Clip::frame_time_ms(std::size_t j) const {
  return static_cast<double>(frame_origin_ms) + static_cast<double>(frame_indices.at(j)) * 1000.0 / fps;
}

std::string Clip::frame_ref(std::size_t j) const { return source_uri + "#frame=" + std::to_string(frame_indices.at(j)); }

std::vector<std::int64_t> sample_uniform(std::int64_t first, std::int64_t count, int max_frames) {
  std::vector<std::int64_t> out;
  if (count <= 0 || max_frames < 1) return out;
  if (count <= max_frames) {
    out.reserve(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) out.push_back(first + i);
    return out;
  }
  if (max_frames == 1) return {first};
  const std::int64_t steps = max_frames - 1;
  out.reserve(static_cast<std::size_t>(max_frames));
  for (std::int64_t j = 0; j < max_frames; ++j) {
    // round-half-up of j * (count - 1) / steps
    out.push_back(first + (2 * j * (count - 1) + steps) / (2 * steps));
  }
  return out;
}

namespace {

double frame_time(std::int64_t i, double fps) { return static_cast<double>(i) * 1000.0 / fps; }

/// Smallest frame index whose timestamp is >= t_ms, clamped to [0, frame_count].
std::int64_t first_frame_at_or_after(std::int64_t t_ms, double fps, std::int64_t frame_count) {
  auto i = static_cast<std::int64_t>(std::ceil(static_cast<double>(t_ms) * fps / 1000.0));
  i = std::clamp<std::int64_t>(i, 0, frame_count);
  while (i > 0 && frame_time(i - 1, fps) >= static_cast<double>(t_ms)) --i;
  while (i < frame_count && frame_time(i, fps) < static_cast<double>(t_ms)) ++i;
  return i;
}

}  // namespace

std::vector<Clip> segment_video(const VideoSource& source, std::int64_t clip_window_ms, int max_frames) {
  if (source.frame_count <= 0) throw Error(ErrorCode::ZeroLengthVideo, "video '" + source.id + "' has no frames");
  if (!(source.fps > 0.0)) throw Error(ErrorCode::InvalidArgument, "fps must be positive");
  if (clip_window_ms <= 0) throw Error(ErrorCode::InvalidArgument, "clip window must be positive");
  if (max_frames < 1) throw Error(ErrorCode::InvalidArgument, "max_frames must be >= 1");

  const std::int64_t duration =
      source.duration_ms > 0 ? source.duration_ms : nominal_duration_ms(source.fps, source.frame_count);
  if (duration <= 0) throw Error(ErrorCode::ZeroLengthVideo, "video '" + source.id + "' has zero duration");

  const std::int64_t m = (duration + clip_window_ms - 1) / clip_window_ms;
  std::vector<Clip> clips;
  clips.reserve(static_cast<std::size_t>(m));
  for (std::int64_t k = 0; k < m; ++k) {
    Clip clip;
    clip.clip_id = static_cast<int>(k + 1);
    clip.start_ms = k * clip_window_ms;
    clip.end_ms = std::min((k + 1) * clip_window_ms, duration);
    clip.source_uri = source.uri;
    clip.fps = source.fps;
    const auto first = first_frame_at_or_after(clip.start_ms, source.fps, source.frame_count);
    const auto last = first_frame_at_or_after(clip.end_ms, source.fps, source.frame_count);
    clip.frame_indices = sample_uniform(first, last - first, max_frames);
    clips.push_back(std::move(clip));
  }
  return clips;
}

std::vector<Clip> align_subtitles(const SubtitleTrack& track, std::span<const Clip> clips) {
  std::vector<Clip> out(clips.begin(), clips.end());
  for (auto& clip : out) {
    std::vector<std::string> parts;
    for (const auto& cue : track.cues) {
      if (spans_overlap(clip.start_ms, clip.end_ms, cue.start_ms, cue.end_ms)) parts.push_back(cue.text);
    }
    clip.subtitle_text = text::join(parts, " ");
  }
  return out;
}

}  // namespace goldfish
