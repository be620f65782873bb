#include "goldfish/http_service.hpp"

#include <fstream>
#include <sstream>

#include <httplib.h>

namespace goldfish {

using json = nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedTimestamp:
    case ErrorCode::ZeroLengthVideo:
    case ErrorCode::InvalidArgument:
    case ErrorCode::EmptyClip:
    case ErrorCode::InvalidItem:
    case ErrorCode::InvalidManifest:
    case ErrorCode::InvalidConfig:
    case ErrorCode::EmptyBenchmark:
    case ErrorCode::OrphanClip:
    case ErrorCode::LengthMismatch:
      return 400;
    case ErrorCode::MissingVideo:
      return 404;
    case ErrorCode::DuplicateVideoId:
    case ErrorCode::VideoNotReady:
      return 409;
    case ErrorCode::ZeroVector:
    case ErrorCode::EmptyIndex:
    case ErrorCode::NoHits:
      return 422;
    case ErrorCode::BackendRejected:
    case ErrorCode::EmptyResponse:
    case ErrorCode::UnparseableChoice:
    case ErrorCode::UnparseableVerdict:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::EncoderMismatch:
      return 502;
    case ErrorCode::BackendUnavailable:
      return 503;
    case ErrorCode::CorruptIndex:
    case ErrorCode::VersionUnsupported:
    case ErrorCode::IoError:
      return 500;
  }
  return 500;
}

json error_body(const Error& error) {
  json e{{"code", std::string(to_string(error.code()))}, {"message", error.what()}};
  e["stage"] = error.stage().empty() ? json(nullptr) : json(error.stage());
  return {{"error", e}};
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("request body is not JSON: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<std::size_t> parse_k(const json& v) {
  if (v.is_null()) return std::nullopt;
  if (!v.is_number_integer() || v.get<std::int64_t>() < 1) throw Error(ErrorCode::InvalidArgument, "k must be an integer >= 1");
  return v.get<std::size_t>();
}

std::optional<std::size_t> parse_k(const std::string& v) {
  if (v.empty()) return std::nullopt;
  try {
    std::size_t pos = 0;
    const auto k = std::stoll(v, &pos);
    if (pos == v.size() && k >= 1) return static_cast<std::size_t>(k);
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidArgument, "k must be an integer >= 1, got '" + v + "'");
}

// Wraps a handler so every failure becomes a JSON error response.
template <class F>
httplib::Server::Handler guarded(F fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_json(res, http_status(e.code()), error_body(e));
    } catch (const json::exception& e) {
      send_json(res, 400, error_body(Error(ErrorCode::InvalidArgument, e.what())));
    } catch (const std::exception& e) {
      send_json(res, 500, {{"error", {{"code", "Internal"}, {"message", e.what()}, {"stage", nullptr}}}});
    }
  };
}

}  // namespace

struct HttpService::Impl {
  Engine& engine;
  httplib::Server server;

  explicit Impl(Engine& e) : engine(e) { routes(); }

  void routes() {
    server.Get("/health", guarded([](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"status", "ok"}});
    }));

    server.Get("/config", guarded([this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, to_json(engine.config()));
    }));

    server.Post("/videos", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req);
      IngestRequest request;
      request.source = video_source_from_json(body.contains("manifest") ? body["manifest"] : body);
      if (body.contains("subtitles")) {
        request.subtitles = body["subtitles"].get<std::string>();
      } else if (body.contains("subtitles_path")) {
        request.subtitles = read_file(body["subtitles_path"].get<std::string>());
        request.subtitle_format = subtitle_format_from(body["subtitles_path"].get<std::string>());
      }
      if (body.contains("subtitle_format")) {
        request.subtitle_format = subtitle_format_from(body["subtitle_format"].get<std::string>());
      }
      request.force = body.value("force", false);
      send_json(res, 202, to_json(engine.ingest_video(std::move(request))));
    }));

    server.Get(R"(/jobs/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto job = engine.job(req.matches[1]);
      if (!job) {
        send_json(res, 404, error_body(Error(ErrorCode::InvalidArgument, "unknown job '" + std::string(req.matches[1]) + "'")));
        return;
      }
      send_json(res, 200, to_json(*job));
    }));

    server.Get(R"(/videos/([^/]+)/clips)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto video = engine.video(req.matches[1]);
      json clips = json::array();
      for (const auto& clip : video->clips) {
        const auto* entry = video->index.find(clip.clip_id);
        clips.push_back({{"clip_id", clip.clip_id},
                         {"start_ms", clip.start_ms},
                         {"end_ms", clip.end_ms},
                         {"summary_text", entry ? entry->record.summary_text : std::string{}},
                         {"subtitle_text", clip.subtitle_text},
                         {"frame_count", clip.frame_indices.size()}});
      }
      send_json(res, 200, {{"video_id", video->source.id}, {"clips", clips}});
    }));

    server.Post(R"(/videos/([^/]+)/ask)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req);
      if (!body.contains("question") || !body["question"].is_string()) {
        throw Error(ErrorCode::InvalidArgument, "question (string) is required");
      }
      AskOverrides overrides;
      overrides.k = parse_k(body.value("k", json(nullptr)));
      if (body.contains("strategy") && !body["strategy"].is_null()) {
        overrides.strategy = fusion_strategy_from(body["strategy"].get<std::string>());
      }
      if (body.contains("answer_strategy") && !body["answer_strategy"].is_null()) {
        overrides.answer_strategy = answer_strategy_from(body["answer_strategy"].get<std::string>());
      }
      send_json(res, 200, to_json(engine.ask(req.matches[1], body["question"].get<std::string>(), overrides)));
    }));

    server.Get(R"(/videos/([^/]+)/retrieve)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto q = req.get_param_value("q");
      if (q.empty()) throw Error(ErrorCode::InvalidArgument, "query parameter q is required");
      std::optional<FusionStrategy> strategy;
      if (req.has_param("strategy")) strategy = fusion_strategy_from(req.get_param_value("strategy"));
      send_json(res, 200, to_json(engine.retrieve_debug(req.matches[1], q, strategy, parse_k(req.get_param_value("k")))));
    }));

    server.Post("/benchmarks/run", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req);
      json bench_json;
      if (body.contains("benchmark")) {
        bench_json = body["benchmark"];
      } else if (body.contains("benchmark_path")) {
        bench_json = json::parse(read_file(body["benchmark_path"].get<std::string>()));
      } else {
        bench_json = body;
      }
      BenchmarkOptions options;
      if (body.contains("window") && !body["window"].is_null()) options.window = body["window"].get<int>();
      options.k = parse_k(body.value("k", json(nullptr)));
      send_json(res, 200, to_json(engine.run_benchmark(benchmark_from_json(bench_json), options)));
    }));
  }
};

HttpService::HttpService(Engine& engine) : impl_(std::make_unique<Impl>(engine)) {}
HttpService::~HttpService() { stop(); }

int HttpService::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }
bool HttpService::bind(const std::string& host, int port) { return impl_->server.bind_to_port(host, port); }
bool HttpService::listen_after_bind() { return impl_->server.listen_after_bind(); }
void HttpService::stop() {
  if (impl_) impl_->server.stop();
}
void HttpService::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace goldfish
