#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "goldfish/answer.hpp"
#include "goldfish/backends.hpp"
#include "goldfish/benchmark.hpp"
#include "goldfish/config.hpp"
#include "goldfish/descriptor.hpp"
#include "goldfish/embedding_index.hpp"
#include "goldfish/media_ingest.hpp"
#include "goldfish/retriever.hpp"

namespace goldfish {

struct Backends {
  std::shared_ptr<DescriptorBackend> descriptor;
  std::shared_ptr<EmbeddingBackend> encoder;
  std::shared_ptr<ChatBackend> answerer;
  std::shared_ptr<ChatBackend> judge;
};

/// mock:// endpoints get the offline mocks, http(s):// the HTTP clients.
Backends make_backends(const EngineConfig& config);

enum class JobState { Queued, Describing, Embedding, Ready, Failed };
std::string_view to_string(JobState state);

struct IngestJob {
  std::string job_id;
  std::string video_id;
  JobState state = JobState::Queued;
  std::size_t clips_done = 0;
  std::size_t clips_total = 0;
  std::optional<std::string> error;
};

struct IngestRequest {
  VideoSource source;
  std::string subtitles;  // raw text, may be empty
  SubtitleFormat subtitle_format = SubtitleFormat::Srt;
  bool force = false;
};

/// Everything the engine keeps per ingested video.
struct VideoData {
  VideoSource source;
  std::vector<Clip> clips;
  SubtitleTrack track;
  EmbeddingIndex index;
};

struct PipelineOptions {
  DescribeOptions describe{};
  std::size_t parallelism = 4;
  std::size_t embed_batch = 64;
};

struct PipelineProgress {
  std::function<void(JobState)> on_stage;
  std::function<void(std::size_t done, std::size_t total)> on_progress;
};

/// Describes every clip, embeds summaries and subtitles, and builds the
/// index. Clips without sampled frames get an empty summary. Backend errors
/// come back labelled "describe" or "embed".
EmbeddingIndex index_clips(const std::string& video_id, std::span<const Clip> clips, const SubtitleTrack& track,
                           DescriptorBackend& descriptor, EmbeddingBackend& encoder, const PipelineOptions& options,
                           const PipelineProgress& progress = {});

struct AskOverrides {
  std::optional<std::size_t> k;
  std::optional<FusionStrategy> strategy;
  std::optional<AnswerStrategy> answer_strategy;
};

struct AskHit {
  int clip_id = 0;
  double score = 0.0;
  MatchedKind matched_kind = MatchedKind::Summary;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::string summary_text;
};

struct StageTimings {
  double embed_ms = 0;
  double retrieve_ms = 0;
  double context_ms = 0;
  double answer_ms = 0;
  double total_ms = 0;
};

struct AskResponse {
  std::string answer;
  std::vector<AskHit> hits;
  std::size_t k = 0;
  FusionStrategy strategy = FusionStrategy::Union;
  AnswerStrategy answer_strategy = AnswerStrategy::A;
  StageTimings timing;
};

struct RetrieveDebug {
  std::vector<ScoredKey> keys;  // every eligible key, best first
  std::vector<AskHit> hits;     // the top-k distinct clips
  std::size_t k = 0;
  FusionStrategy strategy = FusionStrategy::Union;
};

struct BenchmarkOptions {
  /// 0 rebuilds the episode variant; 5/10/20 (or any n >= 1) a window variant.
  std::optional<int> window;
  std::optional<std::size_t> k;
};

/// Owns configuration, backends, ingest jobs and the on-disk video store
/// (one directory per video under config.index_dir). Safe to share between
/// threads: asks run concurrently, ingest of one video id is exclusive.
class Engine {
 public:
  explicit Engine(EngineConfig config);
  Engine(EngineConfig config, Backends backends);
  ~Engine();

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const EngineConfig& config() const { return config_; }

  /// Validates synchronously (InvalidManifest, DuplicateVideoId), then runs
  /// segmentation, description, embedding and persistence on a worker thread.
  IngestJob ingest_video(IngestRequest request);
  std::optional<IngestJob> job(const std::string& job_id) const;
  /// Blocks until the job is ready or failed, or the timeout passes.
  IngestJob wait(const std::string& job_id, std::chrono::milliseconds timeout = std::chrono::minutes(30)) const;

  /// Throws VideoNotReady for unknown or still-ingesting videos.
  std::shared_ptr<const VideoData> video(const std::string& video_id);

  AskResponse ask(const std::string& video_id, const std::string& question, const AskOverrides& overrides = {});
  RetrieveDebug retrieve_debug(const std::string& video_id, const std::string& question,
                               std::optional<FusionStrategy> strategy = std::nullopt,
                               std::optional<std::size_t> k = std::nullopt);

  /// Throws EmptyBenchmark, MissingVideo, and labelled backend errors from
  /// indexing. Per-item answer/judge failures are recorded in the report.
  EvalReport run_benchmark(const Benchmark& benchmark, const BenchmarkOptions& options = {});

 private:
  PipelineOptions pipeline_options() const;
  RetryPolicy retry_policy() const;
  std::filesystem::path video_dir(const std::string& video_id) const;
  void run_ingest(const std::string& job_id, const VideoSource& source, const SubtitleTrack& track);
  void finish_job(const std::string& job_id, const std::function<void(IngestJob&)>& fn);
  void update_job(const std::string& job_id, const std::function<void(IngestJob&)>& fn);
  RetrievalQuery encode_query(const std::string& question, const VideoData& video);
  std::vector<AskHit> to_ask_hits(std::span<const RetrievalHit> hits, const VideoData& video) const;

  EngineConfig config_;
  Backends backends_;

  mutable std::mutex jobs_mutex_;
  mutable std::condition_variable jobs_cv_;
  std::map<std::string, IngestJob> jobs_;
  std::map<std::string, std::string> active_ingest_;  // video_id -> job_id
  std::uint64_t next_job_ = 1;

  std::shared_mutex videos_mutex_;
  std::map<std::string, std::shared_ptr<const VideoData>> videos_;

  std::mutex workers_mutex_;
  std::vector<std::jthread> workers_;
};

nlohmann::json to_json(const IngestJob& job);
nlohmann::json to_json(const AskResponse& response);
nlohmann::json to_json(const RetrieveDebug& debug);
nlohmann::json to_json(const Clip& clip);
nlohmann::json to_json(const VideoSource& source);
/// Throws InvalidManifest when fps, frame_count, uri or id is missing or invalid.
VideoSource video_source_from_json(const nlohmann::json& j);

void save_video(const VideoData& video, const std::filesystem::path& dir);
VideoData load_video(const std::filesystem::path& dir);

}  // namespace goldfish
