#include "goldfish/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>

#include "goldfish/error.hpp"
#include "goldfish/http_backends.hpp"
#include "goldfish/mock_backends.hpp"
#include "goldfish/text_util.hpp"

namespace goldfish {

using json = nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

template <class F>
auto staged(const std::string& stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

bool is_backend_error(ErrorCode code) {
  return code == ErrorCode::BackendUnavailable || code == ErrorCode::BackendRejected ||
         code == ErrorCode::EmptyResponse || code == ErrorCode::DimensionMismatch ||
         code == ErrorCode::EncoderMismatch;
}

bool valid_video_id(const std::string& id) {
  if (id.empty() || id.size() > 200 || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '#';
  });
}

double elapsed_ms(Clock::time_point from, Clock::time_point to) {
  return std::chrono::duration<double, std::milli>(to - from).count();
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << content;
  if (!out.flush()) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

Clip clip_from_json(const json& j) {
  Clip clip;
  clip.clip_id = j.at("clip_id").get<int>();
  clip.start_ms = j.at("start_ms").get<std::int64_t>();
  clip.end_ms = j.at("end_ms").get<std::int64_t>();
  clip.source_uri = j.at("source_uri").get<std::string>();
  clip.fps = j.at("fps").get<double>();
  clip.frame_origin_ms = j.value("frame_origin_ms", std::int64_t{0});
  clip.frame_indices = j.at("frame_indices").get<std::vector<std::int64_t>>();
  clip.subtitle_text = j.value("subtitle_text", std::string{});
  return clip;
}

}  // namespace

Backends make_backends(const EngineConfig& config) {
  auto endpoint = [&](const BackendEndpoint& e) { return HttpEndpoint{e.url, e.api_key, config.request_timeout}; };
  Backends b;
  if (config.descriptor.is_mock()) {
    b.descriptor = std::make_shared<MockDescriptorBackend>();
  } else {
    b.descriptor = std::make_shared<HttpDescriptorBackend>(endpoint(config.descriptor));
  }
  if (config.embedding.is_mock()) {
    b.encoder = std::make_shared<MockEncoder>(config.mock_embedding_dim);
  } else {
    b.encoder = std::make_shared<HttpEmbeddingBackend>(endpoint(config.embedding), config.embedding.model);
  }
  if (config.answer.is_mock()) {
    b.answerer = std::make_shared<KeywordAnswerer>();
  } else {
    b.answerer = std::make_shared<HttpChatBackend>(endpoint(config.answer), config.answer.model, config.temperature);
  }
  if (config.judge.is_mock()) {
    b.judge = std::make_shared<KeywordJudge>();
  } else {
    b.judge = std::make_shared<HttpChatBackend>(endpoint(config.judge), config.judge.model, config.temperature);
  }
  return b;
}

std::string_view to_string(JobState state) {
  switch (state) {
    case JobState::Queued: return "queued";
    case JobState::Describing: return "describing";
    case JobState::Embedding: return "embedding";
    case JobState::Ready: return "ready";
    case JobState::Failed: return "failed";
  }
  return "unknown";
}

EmbeddingIndex index_clips(const std::string& video_id, std::span<const Clip> clips, const SubtitleTrack& track,
                           DescriptorBackend& descriptor, EmbeddingBackend& encoder, const PipelineOptions& options,
                           const PipelineProgress& progress) {
  const auto m = clips.size();
  if (progress.on_stage) progress.on_stage(JobState::Describing);

  std::vector<std::string> summaries(m);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  staged("describe", [&] {
    parallel_for(m, options.parallelism, [&](std::size_t i) {
      const Clip& clip = clips[i];
      if (!clip.frame_indices.empty()) {
        const auto request = build_interleaved_prompt(clip, track, std::string(kSummaryInstruction),
                                                      options.describe.include_subtitles);
        summaries[i] = describe_clip(request, descriptor, options.describe).summary_text;
      }
      const auto n = ++done;
      if (progress.on_progress) {
        std::lock_guard lock(progress_mutex);
        progress.on_progress(n, m);
      }
    });
  });

  if (progress.on_stage) progress.on_stage(JobState::Embedding);
  std::vector<std::string> texts;
  texts.reserve(2 * m);
  texts.insert(texts.end(), summaries.begin(), summaries.end());
  for (const auto& clip : clips) texts.push_back(clip.subtitle_text);

  std::vector<EmbeddingVector> vectors;
  vectors.reserve(texts.size());
  std::size_t dim = 0;
  const auto batch = std::max<std::size_t>(1, options.embed_batch);
  staged("embed", [&] {
    for (std::size_t off = 0; off < texts.size(); off += batch) {
      const auto chunk = std::span<const std::string>(texts).subspan(off, std::min(batch, texts.size() - off));
      std::vector<EmbeddingVector> part;
      with_retry(options.describe.retry, options.describe.sleeper, [&] { part = embed_texts(chunk, encoder, dim); });
      if (dim == 0 && !part.empty()) dim = part.front().dim();
      std::move(part.begin(), part.end(), std::back_inserter(vectors));
    }
  });

  EmbeddingIndex index(video_id, utc_timestamp());
  staged("embed", [&] {
    for (std::size_t i = 0; i < m; ++i) {
      const Clip& clip = clips[i];
      index.upsert(ClipRecord{clip.clip_id, summaries[i], clip.subtitle_text, clip.start_ms, clip.end_ms},
                   std::move(vectors[i]), std::move(vectors[m + i]));
    }
  });
  return index;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

json to_json(const VideoSource& source) {
  return {{"id", source.id},
          {"uri", source.uri},
          {"fps", source.fps},
          {"frame_count", source.frame_count},
          {"width", source.width},
          {"height", source.height},
          {"duration_ms", source.duration_ms}};
}

VideoSource video_source_from_json(const json& j) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::InvalidManifest, "video manifest must be a JSON object");
    VideoSource s;
    s.id = j.at("id").get<std::string>();
    s.uri = j.at("uri").get<std::string>();
    s.fps = j.at("fps").get<double>();
    s.frame_count = j.at("frame_count").get<std::int64_t>();
    s.width = j.value("width", 0);
    s.height = j.value("height", 0);
    s.duration_ms = j.value("duration_ms", std::int64_t{0});
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidManifest, std::string("video manifest: ") + e.what());
  }
}

json to_json(const Clip& clip) {
  return {{"clip_id", clip.clip_id},
          {"start_ms", clip.start_ms},
          {"end_ms", clip.end_ms},
          {"source_uri", clip.source_uri},
          {"fps", clip.fps},
          {"frame_origin_ms", clip.frame_origin_ms},
          {"frame_indices", clip.frame_indices},
          {"subtitle_text", clip.subtitle_text}};
}

void save_video(const VideoData& video, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir.parent_path(), ec);
  std::random_device rd;
  const auto tmp = dir.parent_path() / (dir.filename().string() + ".tmp-" + text::hex64((std::uint64_t{rd()} << 32) | rd()));
  try {
    fs::create_directories(tmp);
    write_text(tmp / "video.json", to_json(video.source).dump(2));
    json clips = json::array();
    for (const auto& c : video.clips) clips.push_back(to_json(c));
    write_text(tmp / "clips.json", clips.dump(2));
    write_text(tmp / "subtitles.srt", serialize_subtitles(video.track, SubtitleFormat::Srt));
    save_index(video.index, tmp / "index.gfidx");
    fs::remove_all(dir);
    fs::rename(tmp, dir);
  } catch (const fs::filesystem_error& e) {
    fs::remove_all(tmp, ec);
    throw Error(ErrorCode::IoError, e.what());
  } catch (...) {
    fs::remove_all(tmp, ec);
    throw;
  }
}

VideoData load_video(const fs::path& dir) {
  VideoData video;
  try {
    video.source = video_source_from_json(json::parse(read_text(dir / "video.json")));
    for (const auto& c : json::parse(read_text(dir / "clips.json"))) video.clips.push_back(clip_from_json(c));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptIndex, dir.string() + ": " + e.what());
  }
  video.track = parse_subtitles(read_text(dir / "subtitles.srt"), SubtitleFormat::Srt);
  video.index = load_index(dir / "index.gfidx");
  return video;
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

Engine::Engine(EngineConfig config) : Engine(config, make_backends(config)) {}

Engine::Engine(EngineConfig config, Backends backends) : config_(std::move(config)), backends_(std::move(backends)) {
  config_.validate();
  if (!backends_.descriptor || !backends_.encoder || !backends_.answerer || !backends_.judge) {
    throw Error(ErrorCode::InvalidConfig, "all four backends are required");
  }
}

Engine::~Engine() {
  std::lock_guard lock(workers_mutex_);
  workers_.clear();  // joins
}

RetryPolicy Engine::retry_policy() const {
  return RetryPolicy{config_.retry_attempts, config_.retry_backoff, 2.0};
}

PipelineOptions Engine::pipeline_options() const {
  PipelineOptions o;
  o.describe.retry = retry_policy();
  o.describe.include_subtitles = config_.include_subtitles_in_descriptor;
  o.parallelism = config_.parallelism;
  return o;
}

fs::path Engine::video_dir(const std::string& video_id) const { return config_.index_dir / video_id; }

IngestJob Engine::ingest_video(IngestRequest request) {
  const auto& source = request.source;
  if (!valid_video_id(source.id)) {
    throw Error(ErrorCode::InvalidManifest, "video id must be 1-200 characters of [A-Za-z0-9._#-], got '" + source.id + "'");
  }
  if (source.uri.empty()) throw Error(ErrorCode::InvalidManifest, "video uri is required");
  if (source.frame_count <= 0) throw Error(ErrorCode::ZeroLengthVideo, "video '" + source.id + "' has no frames");
  try {
    validate(source);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidManifest, e.what());
  }
  auto track = parse_subtitles(request.subtitles, request.subtitle_format);

  IngestJob job;
  {
    std::lock_guard lock(jobs_mutex_);
    if (active_ingest_.contains(source.id)) {
      throw Error(ErrorCode::DuplicateVideoId, "video '" + source.id + "' is already being ingested");
    }
    if (!request.force) {
      bool known = false;
      {
        std::shared_lock vlock(videos_mutex_);
        known = videos_.contains(source.id);
      }
      if (known || fs::exists(video_dir(source.id) / "index.gfidx")) {
        throw Error(ErrorCode::DuplicateVideoId, "video '" + source.id + "' already exists");
      }
    }
    job.job_id = "job-" + std::to_string(next_job_++);
    job.video_id = source.id;
    jobs_[job.job_id] = job;
    active_ingest_[source.id] = job.job_id;
  }

  std::lock_guard lock(workers_mutex_);

  workers_.emplace_back([this, id = job.job_id, src = request.source, tr = std::move(track)] { run_ingest(id, src, tr); });
  return job;
}

void Engine::update_job(const std::string& job_id, const std::function<void(IngestJob&)>& fn) {
  {
    std::lock_guard lock(jobs_mutex_);
    fn(jobs_.at(job_id));
  }
  jobs_cv_.notify_all();
}

void Engine::finish_job(const std::string& job_id, const std::function<void(IngestJob&)>& fn) {
  {
    std::lock_guard lock(jobs_mutex_);
    auto& job = jobs_.at(job_id);
    fn(job);
    active_ingest_.erase(job.video_id);
  }
  jobs_cv_.notify_all();
}

void Engine::run_ingest(const std::string& job_id, const VideoSource& source, const SubtitleTrack& track) {
  try {
    const auto clips = align_subtitles(track, segment_video(source, config_.clip_window_ms, config_.max_frames));
    update_job(job_id, [&](IngestJob& j) { j.clips_total = clips.size(); });

    PipelineProgress progress;
    progress.on_stage = [&](JobState s) {
      update_job(job_id, [&](IngestJob& j) { j.state = std::max(j.state, s); });
    };
    progress.on_progress = [&](std::size_t done, std::size_t) {
      update_job(job_id, [&](IngestJob& j) { j.clips_done = std::max(j.clips_done, done); });
    };
    auto index = index_clips(source.id, clips, track, *backends_.descriptor, *backends_.encoder, pipeline_options(),
                             progress);
    auto data = std::make_shared<const VideoData>(VideoData{source, clips, track, std::move(index)});
    save_video(*data, video_dir(source.id));
    {
      std::unique_lock lock(videos_mutex_);
      videos_[source.id] = data;
    }
    finish_job(job_id, [&](IngestJob& j) {
      j.state = JobState::Ready;
      j.clips_done = j.clips_total;
    });
  } catch (const std::exception& e) {
    finish_job(job_id, [&](IngestJob& j) {
      j.state = JobState::Failed;
      j.error = e.what();
    });
  }
}

std::optional<IngestJob> Engine::job(const std::string& job_id) const {
  std::lock_guard lock(jobs_mutex_);
  const auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

IngestJob Engine::wait(const std::string& job_id, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(jobs_mutex_);
  const auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw Error(ErrorCode::InvalidArgument, "unknown job '" + job_id + "'");
  jobs_cv_.wait_for(lock, timeout, [&] {
    return it->second.state == JobState::Ready || it->second.state == JobState::Failed;
  });
  return it->second;
}

std::shared_ptr<const VideoData> Engine::video(const std::string& video_id) {
  {
    std::shared_lock lock(videos_mutex_);
    if (const auto it = videos_.find(video_id); it != videos_.end()) return it->second;
  }
  {
    std::lock_guard lock(jobs_mutex_);
    if (active_ingest_.contains(video_id)) {
      throw Error(ErrorCode::VideoNotReady, "video '" + video_id + "' is still being ingested");
    }
  }
  if (!valid_video_id(video_id) || !fs::exists(video_dir(video_id) / "index.gfidx")) {
    throw Error(ErrorCode::VideoNotReady, "unknown video '" + video_id + "'");
  }
  auto data = std::make_shared<const VideoData>(load_video(video_dir(video_id)));
  std::unique_lock lock(videos_mutex_);
  return videos_.emplace(video_id, std::move(data)).first->second;
}

RetrievalQuery Engine::encode_query(const std::string& question, const VideoData& video) {
  if (text::trim(question).empty()) throw Error(ErrorCode::InvalidArgument, "question is empty");
  RetrievalQuery query{question, {}};
  staged("embed", [&] {
    with_retry(retry_policy(), real_sleeper(), [&] {
      query.embedding = embed_text(question, *backends_.encoder, video.index.manifest().dim);
    });
  });
  return query;
}

std::vector<AskHit> Engine::to_ask_hits(std::span<const RetrievalHit> hits, const VideoData& video) const {
  std::vector<AskHit> out;
  out.reserve(hits.size());
  for (const auto& h : hits) {
    AskHit a{h.clip_id, h.score, h.matched_kind, 0, 0, {}};
    if (const auto* e = video.index.find(h.clip_id)) {
      a.start_ms = e->record.start_ms;
      a.end_ms = e->record.end_ms;
      a.summary_text = e->record.summary_text;
    }
    out.push_back(std::move(a));
  }
  return out;
}

AskResponse Engine::ask(const std::string& video_id, const std::string& question, const AskOverrides& overrides) {
  const auto t0 = Clock::now();
  const auto video = this->video(video_id);

  AskResponse response;
  response.k = overrides.k.value_or(config_.k);
  response.strategy = overrides.strategy.value_or(config_.fusion);
  response.answer_strategy = overrides.answer_strategy.value_or(config_.answer_strategy);
  if (response.k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");

  const auto query = encode_query(question, *video);
  const auto t1 = Clock::now();
  const auto hits = retrieve_top_k(query, video->index, {response.k, response.strategy});
  const auto t2 = Clock::now();

  const auto options = pipeline_options();
  GroundingSources grounding{backends_.descriptor.get(), video->clips, &video->track, options.describe,
                             options.parallelism};
  const auto context = staged("describe", [&] {
    return assemble_context(hits, video->index, response.answer_strategy, question, grounding);
  });
  const auto t3 = Clock::now();
  const auto answer = staged("answer", [&] {
    return answer_question(context, *backends_.answerer, response.answer_strategy, retry_policy());
  });
  const auto t4 = Clock::now();

  response.answer = answer.text;
  response.hits = to_ask_hits(hits, *video);
  response.timing = {elapsed_ms(t0, t1), elapsed_ms(t1, t2), elapsed_ms(t2, t3), elapsed_ms(t3, t4),
                     elapsed_ms(t0, t4)};
  return response;
}

RetrieveDebug Engine::retrieve_debug(const std::string& video_id, const std::string& question,
                                     std::optional<FusionStrategy> strategy, std::optional<std::size_t> k) {
  const auto video = this->video(video_id);
  RetrieveDebug debug;
  debug.k = k.value_or(config_.k);
  debug.strategy = strategy.value_or(config_.fusion);
  if (debug.k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  const auto query = encode_query(question, *video);
  debug.keys = score_keys(query, video->index, debug.strategy);
  debug.hits = to_ask_hits(retrieve_top_k(query, video->index, {debug.k, debug.strategy}), *video);
  return debug;
}

EvalReport Engine::run_benchmark(const Benchmark& benchmark, const BenchmarkOptions& options) {
  std::vector<BenchmarkItem> items = benchmark.items;
  if (options.window) {
    const auto clip_level = to_clip_level(benchmark.items);
    items = build_benchmark(clip_level, benchmark.manifest, *options.window).items;
  }
  if (items.empty()) throw Error(ErrorCode::EmptyBenchmark, "benchmark has no items");
  const auto k = options.k.value_or(config_.k);
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");

  std::map<std::string, AggregatedVideo> aggregated;
  for (const auto& item : items) {
    const auto& ref = item.video_ref;
    if (aggregated.contains(ref.video_id)) continue;
    try {
      aggregated.emplace(ref.video_id, aggregate_video(ref, benchmark.manifest, config_.max_frames));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::OrphanClip) throw;
      throw Error(ErrorCode::MissingVideo, e.what());
    }
  }

  // The offline descriptor has to know where the planted needles are.
  std::shared_ptr<DescriptorBackend> descriptor = backends_.descriptor;
  if (dynamic_cast<MockDescriptorBackend*>(descriptor.get())) {
    std::vector<NeedleSpan> needles;
    for (const auto& [id, video] : aggregated) needles.insert(needles.end(), video.needles.begin(), video.needles.end());
    descriptor = std::make_shared<MockDescriptorBackend>(std::move(needles));
  }

  // TODO: reuse per-source-clip descriptions across overlapping window videos.
  const auto pipeline = pipeline_options();
  std::map<std::string, VideoData> built;
  for (const auto& [id, video] : aggregated) {
    auto index = index_clips(id, video.clips, video.track, *descriptor, *backends_.encoder, pipeline);
    built.emplace(id, VideoData{video.source, video.clips, video.track, std::move(index)});
  }

  const auto n = items.size();
  std::vector<std::vector<std::string>> hits_per_item(n);
  std::vector<ItemOutcome> outcomes(n);
  std::atomic<std::size_t> backend_errors{0};
  const auto retry = retry_policy();

  parallel_for(n, config_.parallelism, [&](std::size_t i) {
    const auto& item = items[i];
    const auto& video = built.at(item.video_ref.video_id);
    const auto& source_ids = aggregated.at(item.video_ref.video_id).source_clip_ids;
    try {
      const auto query = encode_query(item.question, video);
      const auto hits = retrieve_top_k(query, video.index, {k, config_.fusion});
      for (const auto& h : hits) hits_per_item[i].push_back(source_ids.at(static_cast<std::size_t>(h.clip_id - 1)));

      GroundingSources grounding{descriptor.get(), video.clips, &video.track, pipeline.describe, 1};
      const auto context = staged("describe", [&] {
        return assemble_context(hits, video.index, config_.answer_strategy, item.question, grounding);
      });

      if (item.mcq) {
        const int gt = item.gt_option.value_or(0);
        try {
          const int choice =
              staged("answer", [&] { return answer_mcq(*item.mcq, context, *backends_.answerer, retry); });
          outcomes[i] = ItemOutcome::from_choice(choice, gt);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::UnparseableChoice) throw;
          outcomes[i] = ItemOutcome::from_choice(std::nullopt, gt);
          outcomes[i].error = e.what();
        }
      } else {
        const auto answer = staged("answer", [&] {
          return answer_question(context, *backends_.answerer, config_.answer_strategy, retry);
        });
        try {
          const auto verdict = staged("judge", [&] {
            return judge_open_ended(item.question, item.gt_answer, answer.text, *backends_.judge, retry);
          });
          outcomes[i] = ItemOutcome::from_verdict(verdict, answer.text);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::UnparseableVerdict) throw;
          outcomes[i] = ItemOutcome::from_verdict(std::nullopt, answer.text);
          outcomes[i].error = e.what();
        }
      }
    } catch (const Error& e) {
      if (!is_backend_error(e.code())) throw;
      ++backend_errors;
      outcomes[i] = ItemOutcome{};
      outcomes[i].error = e.what();
    }
  });

  auto report = compute_report(items, hits_per_item, outcomes, k);
  report.backend_errors = backend_errors.load();
  return report;
}

// ---------------------------------------------------------------------------
// JSON views
// ---------------------------------------------------------------------------

json to_json(const IngestJob& job) {
  json j{{"job_id", job.job_id},
         {"video_id", job.video_id},
         {"state", std::string(to_string(job.state))},
         {"progress", {{"clips_done", job.clips_done}, {"clips_total", job.clips_total}}}};
  j["error"] = job.error ? json(*job.error) : json(nullptr);
  return j;
}

namespace {

json hits_json(std::span<const AskHit> hits) {
  json out = json::array();
  for (const auto& h : hits) {
    out.push_back({{"clip_id", h.clip_id},
                   {"score", h.score},
                   {"matched_kind", std::string(to_string(h.matched_kind))},
                   {"start_ms", h.start_ms},
                   {"end_ms", h.end_ms},
                   {"summary_text", h.summary_text}});
  }
  return out;
}

}  // namespace

json to_json(const AskResponse& r) {
  return {{"answer", r.answer},
          {"hits", hits_json(r.hits)},
          {"k", r.k},
          {"strategy", std::string(to_string(r.strategy))},
          {"answer_strategy", std::string(to_string(r.answer_strategy))},
          {"timing_ms",
           {{"embed", r.timing.embed_ms},
            {"retrieve", r.timing.retrieve_ms},
            {"context", r.timing.context_ms},
            {"answer", r.timing.answer_ms},
            {"total", r.timing.total_ms}}}};
}

json to_json(const RetrieveDebug& d) {
  json keys = json::array();
  for (const auto& key : d.keys) {
    keys.push_back({{"clip_id", key.clip_id}, {"kind", std::string(to_string(key.kind))}, {"score", key.score}});
  }
  return {{"k", d.k}, {"strategy", std::string(to_string(d.strategy))}, {"keys", keys}, {"hits", hits_json(d.hits)}};
}

}  // namespace goldfish
