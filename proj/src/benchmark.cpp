#include "goldfish/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "goldfish/error.hpp"
#include "goldfish/text_util.hpp"

namespace goldfish {

using json = nlohmann::json;

std::int64_t EpisodeClip::effective_duration_ms() const {
  return duration_ms > 0 ? duration_ms : nominal_duration_ms(fps, frame_count);
}

std::optional<std::pair<std::size_t, std::size_t>> EpisodeManifest::locate(std::string_view clip_id) const {
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const auto& clips = episodes[e].clips;
    for (std::size_t c = 0; c < clips.size(); ++c) {
      if (clips[c].clip_id == clip_id) return std::pair{e, c};
    }
  }
  return std::nullopt;
}

const EpisodeClip* EpisodeManifest::find_clip(std::string_view clip_id) const {
  const auto where = locate(clip_id);
  return where ? &episodes[where->first].clips[where->second] : nullptr;
}

namespace {

std::pair<std::size_t, std::size_t> locate_or_throw(const EpisodeManifest& manifest, const ClipLevelItem& item) {
  const auto where = manifest.locate(item.clip_id);
  if (!where) {
    throw Error(ErrorCode::OrphanClip, "item '" + item.item_id + "' references clip '" + item.clip_id +
                                           "' which no episode lists");
  }
  return *where;
}

BenchmarkItem make_item(const ClipLevelItem& item, const Episode& episode, VideoRef ref) {
  BenchmarkItem out;
  out.item_id = item.item_id;
  out.episode_id = episode.episode_id;
  out.question = item.question;
  out.gt_clip_id = item.clip_id;
  out.video_ref = std::move(ref);
  if (!item.options.empty()) {
    out.mcq = McqQuestion::from_options(item.question, item.options);
    if (!item.answer_option || *item.answer_option < 1 || *item.answer_option > 5) {
      throw Error(ErrorCode::InvalidItem, "item '" + item.item_id + "' has options but no valid answer index");
    }
    out.gt_option = item.answer_option;
    out.gt_answer = out.mcq->options[static_cast<std::size_t>(*item.answer_option - 1)];
  } else {
    out.gt_answer = item.answer_text;
  }
  return out;
}

}  // namespace

std::vector<BenchmarkItem> build_episode_benchmark(std::span<const ClipLevelItem> items,
                                                   const EpisodeManifest& manifest) {
  std::vector<BenchmarkItem> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    const auto [e, c] = locate_or_throw(manifest, item);
    const auto& episode = manifest.episodes[e];
    VideoRef ref{episode.episode_id, {}};
    for (const auto& clip : episode.clips) ref.clip_ids.push_back(clip.clip_id);
    out.push_back(make_item(item, episode, std::move(ref)));
  }
  return out;
}

std::pair<std::size_t, std::size_t> window_bounds(std::size_t gt_position, std::size_t episode_size, int window_n) {
  if (window_n < 1) throw Error(ErrorCode::InvalidArgument, "window must be >= 1");
  const auto n = static_cast<std::size_t>(window_n);
  if (episode_size <= n) return {0, episode_size - 1};
  const auto half = static_cast<std::ptrdiff_t>((n - 1) / 2);
  auto start = static_cast<std::ptrdiff_t>(gt_position) - half;
  start = std::clamp<std::ptrdiff_t>(start, 0, static_cast<std::ptrdiff_t>(episode_size - n));
  return {static_cast<std::size_t>(start), static_cast<std::size_t>(start) + n - 1};
}

std::vector<BenchmarkItem> build_window_variant(std::span<const ClipLevelItem> items, const EpisodeManifest& manifest,
                                                int window_n) {
  if (window_n < 1) throw Error(ErrorCode::InvalidArgument, "window must be >= 1");
  std::vector<BenchmarkItem> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    const auto [e, c] = locate_or_throw(manifest, item);
    const auto& episode = manifest.episodes[e];
    const auto [first, last] = window_bounds(c, episode.clips.size(), window_n);
    VideoRef ref;
    ref.video_id = episode.episode_id + "#w" + std::to_string(window_n) + "-" + std::to_string(first + 1) + "-" +
                   std::to_string(last + 1);
    for (std::size_t i = first; i <= last; ++i) ref.clip_ids.push_back(episode.clips[i].clip_id);
    out.push_back(make_item(item, episode, std::move(ref)));
  }
  return out;
}

std::vector<ClipLevelItem> to_clip_level(std::span<const BenchmarkItem> items) {
  std::vector<ClipLevelItem> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    ClipLevelItem c;
    c.item_id = item.item_id;
    c.episode_id = item.episode_id;
    c.clip_id = item.gt_clip_id;
    c.question = item.question;
    if (item.mcq) {
      c.options.assign(item.mcq->options.begin(), item.mcq->options.end());
      c.answer_option = item.gt_option;
    }
    c.answer_text = item.gt_answer;
    out.push_back(std::move(c));
  }
  return out;
}

AggregatedVideo aggregate_video(const VideoRef& ref, const EpisodeManifest& manifest, int max_frames) {
  AggregatedVideo video;
  video.source.id = ref.video_id;
  video.source.uri = "aggregate:" + ref.video_id;
  std::int64_t offset = 0;
  for (std::size_t k = 0; k < ref.clip_ids.size(); ++k) {
    const auto* src = manifest.find_clip(ref.clip_ids[k]);
    if (!src) throw Error(ErrorCode::OrphanClip, "video '" + ref.video_id + "' lists unknown clip " + ref.clip_ids[k]);
    const auto duration = src->effective_duration_ms();
    if (duration <= 0 || !(src->fps > 0.0)) {
      throw Error(ErrorCode::InvalidManifest, "clip '" + src->clip_id + "' needs fps and frame_count or duration_ms");
    }
    const auto frames = src->frame_count > 0
                            ? src->frame_count
                            : std::max<std::int64_t>(1, std::llround(static_cast<double>(duration) * src->fps / 1000.0));

    Clip clip;
    clip.clip_id = static_cast<int>(k + 1);
    clip.start_ms = offset;
    clip.end_ms = offset + duration;
    clip.source_uri = src->uri;
    clip.fps = src->fps;
    clip.frame_origin_ms = offset;
    clip.frame_indices = sample_uniform(0, frames, max_frames);
    video.clips.push_back(std::move(clip));
    video.source_clip_ids.push_back(src->clip_id);

    if (!src->subtitles.empty()) {
      for (auto cue : parse_subtitles(src->subtitles, src->subtitle_format).cues) {
        cue.start_ms += offset;
        cue.end_ms += offset;
        video.track.cues.push_back(std::move(cue));
      }
    }
    if (src->needle) video.needles.push_back(NeedleSpan{src->uri, 0, frames - 1, *src->needle});

    if (k == 0) video.source.fps = src->fps;
    video.source.frame_count += frames;
    offset += duration;
  }
  video.source.duration_ms = offset;
  std::stable_sort(video.track.cues.begin(), video.track.cues.end(),
                   [](const SubtitleCue& a, const SubtitleCue& b) { return a.start_ms < b.start_ms; });
  for (std::size_t i = 0; i < video.track.cues.size(); ++i) video.track.cues[i].index = static_cast<int>(i + 1);
  video.clips = align_subtitles(video.track, video.clips);
  return video;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

namespace {

std::string id_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  throw Error(ErrorCode::InvalidItem, "identifier must be a string or integer");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<ClipLevelItem> parse_clip_items_jsonl(std::string_view jsonl) {
  std::vector<ClipLevelItem> items;
  std::size_t line_no = 0;
  for (const auto& line : text::split_lines(jsonl)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      ClipLevelItem item;
      item.item_id = id_string(j.at("item_id"));
      item.clip_id = id_string(j.at("clip_id"));
      item.question = j.at("question").get<std::string>();
      if (j.contains("episode_id")) item.episode_id = id_string(j["episode_id"]);
      if (j.contains("options") && !j["options"].is_null()) item.options = j["options"].get<std::vector<std::string>>();
      const auto& answer = j.at("answer");
      if (answer.is_number_integer()) {
        if (item.options.empty()) throw Error(ErrorCode::InvalidItem, "numeric answer without options");
        item.answer_option = answer.get<int>();
      } else {
        item.answer_text = answer.get<std::string>();
        if (!item.options.empty()) {
          for (std::size_t i = 0; i < item.options.size(); ++i) {
            if (text::to_lower(text::trim(item.options[i])) == text::to_lower(text::trim(item.answer_text))) {
              item.answer_option = static_cast<int>(i + 1);
              break;
            }
          }
          if (!item.answer_option) throw Error(ErrorCode::InvalidItem, "answer text matches no option");
        }
      }
      if (item.answer_option && (*item.answer_option < 1 || *item.answer_option > static_cast<int>(item.options.size()))) {
        throw Error(ErrorCode::InvalidItem, "answer index out of range");
      }
      items.push_back(std::move(item));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidItem, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return items;
}

EpisodeManifest episode_manifest_from_json(const json& j, const std::filesystem::path& base_dir) {
  EpisodeManifest manifest;
  try {
    for (const auto& je : j.at("episodes")) {
      Episode episode;
      episode.episode_id = id_string(je.at("episode_id"));
      for (const auto& jc : je.at("clips")) {
        EpisodeClip clip;
        clip.clip_id = id_string(jc.at("clip_id"));
        clip.uri = jc.value("uri", clip.clip_id);
        clip.fps = jc.value("fps", 3.0);
        clip.frame_count = jc.value("frame_count", std::int64_t{0});
        clip.duration_ms = jc.value("duration_ms", std::int64_t{0});
        if (jc.contains("subtitles_path")) {
          const std::filesystem::path p = jc["subtitles_path"].get<std::string>();
          clip.subtitles = read_file(p.is_absolute() ? p : base_dir / p);
          clip.subtitle_format = subtitle_format_from(p.string());
        }
        if (jc.contains("subtitles")) clip.subtitles = jc["subtitles"].get<std::string>();
        if (jc.contains("subtitle_format")) clip.subtitle_format = subtitle_format_from(jc["subtitle_format"].get<std::string>());
        if (jc.contains("needle") && !jc["needle"].is_null()) clip.needle = jc["needle"].get<std::string>();
        if (clip.frame_count <= 0 && clip.duration_ms <= 0) {
          throw Error(ErrorCode::InvalidManifest, "clip '" + clip.clip_id + "' needs frame_count or duration_ms");
        }
        episode.clips.push_back(std::move(clip));
      }
      manifest.episodes.push_back(std::move(episode));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidManifest, std::string("episode manifest: ") + e.what());
  }
  return manifest;
}

json to_json(const EpisodeManifest& manifest) {
  json episodes = json::array();
  for (const auto& e : manifest.episodes) {
    json clips = json::array();
    for (const auto& c : e.clips) {
      json jc = {{"clip_id", c.clip_id},
                 {"uri", c.uri},
                 {"fps", c.fps},
                 {"frame_count", c.frame_count},
                 {"duration_ms", c.duration_ms}};
      if (!c.subtitles.empty()) {
        jc["subtitles"] = c.subtitles;
        jc["subtitle_format"] = std::string(to_string(c.subtitle_format));
      }
      if (c.needle) jc["needle"] = *c.needle;
      clips.push_back(std::move(jc));
    }
    episodes.push_back({{"episode_id", e.episode_id}, {"clips", std::move(clips)}});
  }
  return {{"episodes", std::move(episodes)}};
}

json to_json(const Benchmark& benchmark) {
  json items = json::array();
  for (const auto& item : benchmark.items) {
    json ji = {{"item_id", item.item_id},
               {"episode_id", item.episode_id},
               {"question", item.question},
               {"gt_answer", item.gt_answer},
               {"gt_clip_id", item.gt_clip_id},
               {"video_ref", {{"video_id", item.video_ref.video_id}, {"clip_ids", item.video_ref.clip_ids}}}};
    if (item.mcq) {
      ji["options"] = std::vector<std::string>(item.mcq->options.begin(), item.mcq->options.end());
      ji["gt_option"] = *item.gt_option;
    }
    items.push_back(std::move(ji));
  }
  json out = to_json(benchmark.manifest);
  out["variant"] = benchmark.variant;
  out["items"] = std::move(items);
  return out;
}

Benchmark benchmark_from_json(const json& j) {
  Benchmark b;
  b.manifest = episode_manifest_from_json(j);
  b.variant = j.value("variant", std::string("episode"));
  try {
    for (const auto& ji : j.at("items")) {
      BenchmarkItem item;
      item.item_id = id_string(ji.at("item_id"));
      item.episode_id = id_string(ji.at("episode_id"));
      item.question = ji.at("question").get<std::string>();
      item.gt_answer = ji.at("gt_answer").get<std::string>();
      item.gt_clip_id = id_string(ji.at("gt_clip_id"));
      item.video_ref.video_id = ji.at("video_ref").at("video_id").get<std::string>();
      item.video_ref.clip_ids = ji.at("video_ref").at("clip_ids").get<std::vector<std::string>>();
      if (ji.contains("options")) {
        const auto options = ji["options"].get<std::vector<std::string>>();
        item.mcq = McqQuestion::from_options(item.question, options);
        item.gt_option = ji.at("gt_option").get<int>();
      }
      if (std::find(item.video_ref.clip_ids.begin(), item.video_ref.clip_ids.end(), item.gt_clip_id) ==
          item.video_ref.clip_ids.end()) {
        throw Error(ErrorCode::InvalidItem, "item '" + item.item_id + "': gt clip is not part of its video");
      }
      b.items.push_back(std::move(item));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidItem, std::string("benchmark items: ") + e.what());
  }
  return b;
}

Benchmark build_benchmark(std::span<const ClipLevelItem> items, const EpisodeManifest& manifest, int window_n) {
  Benchmark b;
  b.manifest = manifest;
  if (window_n == 0) {
    b.variant = "episode";
    b.items = build_episode_benchmark(items, manifest);
  } else {
    b.variant = "window-" + std::to_string(window_n);
    b.items = build_window_variant(items, manifest, window_n);
  }
  return b;
}

TvqaConversion convert_tvqa(std::string_view jsonl, double fps, std::int64_t clip_duration_ms) {
  static const std::regex vid_pattern(R"(^(.*)_seg(\d+)_clip_(\d+)$)");
  struct ClipKey {
    int seg;
    int clip;
    std::string vid;
    bool operator<(const ClipKey& o) const { return std::tie(seg, clip, vid) < std::tie(o.seg, o.clip, o.vid); }
  };
  std::map<std::string, std::map<ClipKey, bool>> episodes;

  TvqaConversion out;
  std::size_t line_no = 0;
  for (const auto& line : text::split_lines(jsonl)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      const auto vid = j.at("vid_name").get<std::string>();
      std::smatch m;
      if (!std::regex_match(vid, m, vid_pattern)) {
        throw Error(ErrorCode::InvalidItem, "unrecognised vid_name '" + vid + "'");
      }
      const auto episode_id = m[1].str();
      episodes[episode_id][ClipKey{std::stoi(m[2].str()), std::stoi(m[3].str()), vid}] = true;

      const int answer_idx = j.at("answer_idx").get<int>();
      if (answer_idx < 0 || answer_idx > 4) throw Error(ErrorCode::InvalidItem, "answer_idx out of range");
      ClipLevelItem item;
      item.item_id = id_string(j.at("qid"));
      item.episode_id = episode_id;
      item.clip_id = vid;
      item.question = j.at("q").get<std::string>();
      item.answer_text = j.at("a" + std::to_string(answer_idx)).get<std::string>();
      out.items.push_back(std::move(item));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidItem, "TVQA line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  for (const auto& [episode_id, clips] : episodes) {
    Episode episode;
    episode.episode_id = episode_id;
    for (const auto& [key, unused] : clips) {
      EpisodeClip clip;
      clip.clip_id = key.vid;
      clip.uri = key.vid;
      clip.fps = fps;
      clip.duration_ms = clip_duration_ms;
      clip.frame_count = std::llround(static_cast<double>(clip_duration_ms) * fps / 1000.0);
      episode.clips.push_back(std::move(clip));
    }
    out.manifest.episodes.push_back(std::move(episode));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Judge
// ---------------------------------------------------------------------------

ChatRequest build_judge_prompt(std::string_view question, std::string_view answer, std::string_view prediction) {
  // Placeholders are filled back to front so braces inside the inputs are never rescanned.
  std::string user(kJudgeUserTemplate);
  const auto pred_pos = user.find("{pred}");
  user.replace(pred_pos, 6, prediction);
  const auto answer_pos = user.find("{answer}");
  user.replace(answer_pos, 8, answer);
  const auto question_pos = user.find("{question}");
  user.replace(question_pos, 10, question);
  return ChatRequest{std::string(kJudgeSystemPrompt), user};
}

std::optional<JudgeVerdict> parse_judge_verdict(std::string_view response) {
  static const std::regex pred_re(R"(['"]?\bpred\b['"]?\s*:\s*['"]?\s*(yes|no)\b)", std::regex::icase);
  static const std::regex score_re(R"(['"]?\bscore\b['"]?\s*:\s*['"]?\s*(-?\d+(?:\.\d+)?))", std::regex::icase);
  const std::string r(response);
  std::smatch pm;
  std::smatch sm;
  if (!std::regex_search(r, pm, pred_re) || !std::regex_search(r, sm, score_re)) return std::nullopt;

  JudgeVerdict v;
  v.yes = text::to_lower(pm[1].str()) == "yes";
  const double raw = std::stod(sm[1].str());
  const double rounded = std::floor(raw + 0.5);
  v.score = static_cast<int>(std::clamp(rounded, 0.0, 5.0));
  return v;
}

JudgeVerdict judge_open_ended(std::string_view question, std::string_view gt_answer, std::string_view prediction,
                              ChatBackend& judge, const RetryPolicy& retry, const Sleeper& sleeper) {
  if (text::trim(question).empty() || text::trim(gt_answer).empty() || text::trim(prediction).empty()) {
    throw Error(ErrorCode::InvalidArgument, "judge inputs must be non-empty");
  }
  std::string reply;
  const auto request = build_judge_prompt(question, gt_answer, prediction);
  with_retry(retry, sleeper, [&] { reply = judge.complete(request); });
  const auto verdict = parse_judge_verdict(reply);
  if (!verdict) throw Error(ErrorCode::UnparseableVerdict, "judge reply: " + reply.substr(0, 200));
  return *verdict;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

ItemOutcome ItemOutcome::from_verdict(const std::optional<JudgeVerdict>& verdict, std::string prediction) {
  ItemOutcome o;
  o.prediction = std::move(prediction);
  if (verdict) {
    o.correct = verdict->yes;
    o.score = verdict->score;
  } else {
    o.error = std::string(to_string(ErrorCode::UnparseableVerdict));
  }
  return o;
}

ItemOutcome ItemOutcome::from_choice(std::optional<int> choice, int gt_option) {
  ItemOutcome o;
  if (choice) {
    o.correct = *choice == gt_option;
    o.prediction = std::to_string(*choice);
  } else {
    o.error = std::string(to_string(ErrorCode::UnparseableChoice));
  }
  return o;
}

EvalReport compute_report(std::span<const BenchmarkItem> items, std::span<const std::vector<std::string>> hits_per_item,
                          std::span<const ItemOutcome> outcomes, std::size_t k) {
  if (items.size() != hits_per_item.size() || items.size() != outcomes.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(items.size()) + " items, " +
                                               std::to_string(hits_per_item.size()) + " hit lists, " +
                                               std::to_string(outcomes.size()) + " outcomes");
  }
  EvalReport report;
  report.n_items = items.size();
  report.k = k;
  std::size_t correct = 0;
  std::size_t retrieved = 0;
  long long score_sum = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    ItemRow row;
    row.item_id = items[i].item_id;
    row.hits = hits_per_item[i];
    const auto top = std::min(k, row.hits.size());
    row.retrieved = std::find(row.hits.begin(), row.hits.begin() + static_cast<std::ptrdiff_t>(top),
                              items[i].gt_clip_id) != row.hits.begin() + static_cast<std::ptrdiff_t>(top);
    row.outcome = outcomes[i];
    if (row.retrieved) ++retrieved;
    if (row.outcome.correct) ++correct;
    if (row.outcome.score) {
      score_sum += *row.outcome.score;
      ++report.scored_items;
    }
    report.per_item.push_back(std::move(row));
  }
  if (report.n_items > 0) {
    report.accuracy = static_cast<double>(correct) / static_cast<double>(report.n_items);
    report.retrieval_accuracy = static_cast<double>(retrieved) / static_cast<double>(report.n_items);
  }
  if (report.scored_items > 0) {
    report.mean_score = static_cast<double>(score_sum) / static_cast<double>(report.scored_items);
  }
  return report;
}

json to_json(const EvalReport& report) {
  json rows = json::array();
  for (const auto& row : report.per_item) {
    json jr = {{"item_id", row.item_id},
               {"hits", row.hits},
               {"retrieved", row.retrieved},
               {"correct", row.outcome.correct},
               {"prediction", row.outcome.prediction}};
    jr["score"] = row.outcome.score ? json(*row.outcome.score) : json(nullptr);
    if (!row.outcome.error.empty()) jr["error"] = row.outcome.error;
    rows.push_back(std::move(jr));
  }
  return {{"n_items", report.n_items},
          {"accuracy", report.accuracy},
          {"mean_score", report.mean_score},
          {"scored_items", report.scored_items},
          {"retrieval_accuracy", report.retrieval_accuracy},
          {"k", report.k},
          {"backend_errors", report.backend_errors},
          {"per_item", std::move(rows)}};
}

}  // namespace goldfish
