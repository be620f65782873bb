#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "goldfish/answer.hpp"
#include "goldfish/backends.hpp"
#include "goldfish/media_ingest.hpp"
#include "goldfish/mock_backends.hpp"

namespace goldfish {

// ---------------------------------------------------------------------------
// Dataset model
// ---------------------------------------------------------------------------

/// One short source clip of an episode.
struct EpisodeClip {
  std::string clip_id;
  std::string uri;
  double fps = 3.0;
  std::int64_t frame_count = 0;
  std::int64_t duration_ms = 0;  // 0: derived from frame_count / fps
  std::string subtitles;         // raw subtitle text, may be empty
  SubtitleFormat subtitle_format = SubtitleFormat::Srt;
  /// Synthetic ground-truth token understood by the mock descriptor.
  std::optional<std::string> needle;

  std::int64_t effective_duration_ms() const;
};

struct Episode {
  std::string episode_id;
  std::vector<EpisodeClip> clips;  // temporal order
};

struct EpisodeManifest {
  std::vector<Episode> episodes;

  /// (episode index, clip index) of a clip id, if listed.
  std::optional<std::pair<std::size_t, std::size_t>> locate(std::string_view clip_id) const;
  const EpisodeClip* find_clip(std::string_view clip_id) const;
};

/// Clip-level QA record in the generic input format.
struct ClipLevelItem {
  std::string item_id;
  std::string episode_id;  // optional in the input; the manifest is authoritative
  std::string clip_id;
  std::string question;
  std::vector<std::string> options;
  /// Open-ended answer text; for multiple choice the option text.
  std::string answer_text;
  /// 1-based option index for multiple choice.
  std::optional<int> answer_option;
};

/// The long video a question is asked against: source clips in order.
struct VideoRef {
  std::string video_id;
  std::vector<std::string> clip_ids;

  friend bool operator==(const VideoRef&, const VideoRef&) = default;
};

struct BenchmarkItem {
  std::string item_id;
  std::string episode_id;
  std::string question;
  std::optional<McqQuestion> mcq;
  std::string gt_answer;
  std::optional<int> gt_option;  // 1..5 when mcq is set
  std::string gt_clip_id;
  VideoRef video_ref;
};

/// Every item's video becomes its full episode. Throws OrphanClip.
std::vector<BenchmarkItem> build_episode_benchmark(std::span<const ClipLevelItem> items,
                                                   const EpisodeManifest& manifest);

/// Every item's video becomes `window_n` consecutive clips of its episode
/// containing the ground-truth clip, centred on it (start = gt - (n-1)/2)
/// and shifted to stay inside the episode. Episodes shorter than window_n
/// contribute all their clips. Throws OrphanClip, InvalidArgument (n < 1).
std::vector<BenchmarkItem> build_window_variant(std::span<const ClipLevelItem> items, const EpisodeManifest& manifest,
                                                int window_n);

/// 0-based [first, last] clip positions of a centred, clamped window.
std::pair<std::size_t, std::size_t> window_bounds(std::size_t gt_position, std::size_t episode_size, int window_n);

/// Recovers the clip-level view of built items (for re-building variants).
std::vector<ClipLevelItem> to_clip_level(std::span<const BenchmarkItem> items);

/// A VideoRef materialised as an engine video: one engine clip per source
/// clip, laid end to end, with shifted subtitles.
struct AggregatedVideo {
  VideoSource source;
  std::vector<Clip> clips;  // clips[k-1] has clip_id k and comes from source_clip_ids[k-1]
  SubtitleTrack track;
  std::vector<std::string> source_clip_ids;
  std::vector<NeedleSpan> needles;
};

AggregatedVideo aggregate_video(const VideoRef& ref, const EpisodeManifest& manifest, int max_frames);

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

/// Generic input: one JSON object per line with item_id, clip_id, question,
/// answer and optional episode_id / options. `answer` is text, or an
/// integer option index (1-based) when options are present.
std::vector<ClipLevelItem> parse_clip_items_jsonl(std::string_view jsonl);

/// Clips may carry subtitles inline ("subtitles") or by path
/// ("subtitles_path", resolved against base_dir).
EpisodeManifest episode_manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const EpisodeManifest& manifest);

struct Benchmark {
  std::string variant;  // "episode" or "window-N"
  EpisodeManifest manifest;
  std::vector<BenchmarkItem> items;
};

nlohmann::json to_json(const Benchmark& benchmark);
Benchmark benchmark_from_json(const nlohmann::json& j);

/// "episode" for window_n == 0, else the window variant.
Benchmark build_benchmark(std::span<const ClipLevelItem> items, const EpisodeManifest& manifest, int window_n);

struct TvqaConversion {
  std::vector<ClipLevelItem> items;
  EpisodeManifest manifest;
};

/// Converts TVQA's native JSONL (qid, q, a0..a4, answer_idx, vid_name) to
/// open-ended clip-level items plus an episode skeleton. Episodes come from
/// vid_name with its "_segNN_clip_NN" suffix removed; clips are ordered by
/// segment then clip number. Clip metadata uses the given defaults.
TvqaConversion convert_tvqa(std::string_view jsonl, double fps, std::int64_t clip_duration_ms);

// ---------------------------------------------------------------------------
// Judge
// ---------------------------------------------------------------------------

inline constexpr std::string_view kJudgeSystemPrompt =
    "You are an intelligent chatbot designed for evaluating the correctness of generative outputs for "
    "question-answer pairs. Your task is to compare the predicted answer with the correct answer and determine if "
    "they match meaningfully. Here's how you can accomplish the task:\n"
    "INSTRUCTIONS:\n"
    "- Focus on the meaningful match between the predicted answer and the correct answer.\n"
    "- Consider synonyms or paraphrases as valid matches.\n"
    "- Evaluate the correctness of the prediction compared to the answer.";

inline constexpr std::string_view kJudgeUserTemplate =
    "Please evaluate the following video-based question-answer pair:\n"
    "Question: {question}\n"
    "Correct Answer: {answer}\n"
    "Predicted Answer: {pred}\n"
    "Provide your evaluation only as a yes/no and score where the score is an integer value between 0 and 5, with 5 "
    "indicating the highest meaningful match. Please generate the response in the form of a Python dictionary string "
    "with keys 'pred' and 'score', where the value of 'pred' is a string of 'yes' or 'no' and the value of 'score' is "
    "an INTEGER, not STRING. DO NOT PROVIDE ANY OTHER OUTPUT TEXT OR EXPLANATION. Only provide the Python dictionary "
    "string. For example, your response should look like this: {'pred': 'yes', 'score': 4.8}.";

struct JudgeVerdict {
  bool yes = false;
  int score = 0;  // 0..5

  friend bool operator==(const JudgeVerdict&, const JudgeVerdict&) = default;
};

ChatRequest build_judge_prompt(std::string_view question, std::string_view answer, std::string_view prediction);

/// Finds a pred/score pair in a dictionary-ish reply. Quotes may be single,
/// double or absent; prose around it is ignored; the score is rounded half
/// up and clamped to [0, 5]. nullopt when either key is missing.
std::optional<JudgeVerdict> parse_judge_verdict(std::string_view response);

/// Throws UnparseableVerdict, or the backend's error.
JudgeVerdict judge_open_ended(std::string_view question, std::string_view gt_answer, std::string_view prediction,
                              ChatBackend& judge, const RetryPolicy& retry = {}, const Sleeper& sleeper = real_sleeper());

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct ItemOutcome {
  bool correct = false;
  std::optional<int> score;  // judge score; absent for MCQ and unparseable verdicts
  std::string prediction;
  std::string error;

  /// nullopt verdict: counted incorrect, excluded from mean_score.
  static ItemOutcome from_verdict(const std::optional<JudgeVerdict>& verdict, std::string prediction = {});
  /// nullopt choice (unparseable): counted incorrect.
  static ItemOutcome from_choice(std::optional<int> choice, int gt_option);
};

struct ItemRow {
  std::string item_id;
  std::vector<std::string> hits;
  bool retrieved = false;
  ItemOutcome outcome;
};

struct EvalReport {
  std::size_t n_items = 0;
  double accuracy = 0.0;
  double mean_score = 0.0;
  std::size_t scored_items = 0;
  double retrieval_accuracy = 0.0;
  std::size_t k = 0;
  /// Items whose answer or judge backend call failed outright.
  std::size_t backend_errors = 0;
  std::vector<ItemRow> per_item;
};

/// hits_per_item[i] is item i's ranked list of source clip ids; only the
/// first k count. Throws LengthMismatch.
EvalReport compute_report(std::span<const BenchmarkItem> items, std::span<const std::vector<std::string>> hits_per_item,
                          std::span<const ItemOutcome> outcomes, std::size_t k);

nlohmann::json to_json(const EvalReport& report);

}  // namespace goldfish
