#include "goldfish/config.hpp"

#include <cstdlib>
#include <fstream>

#include "goldfish/error.hpp"

namespace goldfish {

using json = nlohmann::json;

namespace {

void validate_url(const std::string& role, const std::string& url) {
  if (url.starts_with("mock://")) return;
  const bool http = url.starts_with("http://") || url.starts_with("https://");
  const auto host_start = url.find("://");
  if (!http || host_start == std::string::npos || url.size() <= host_start + 3 || url[host_start + 3] == '/') {
    throw Error(ErrorCode::InvalidConfig, role + " endpoint is not a valid http(s) or mock:// URI: '" + url + "'");
  }
}

void apply_endpoint(BackendEndpoint& endpoint, const json& j) {
  if (j.contains("url")) endpoint.url = j["url"].get<std::string>();
  if (j.contains("api_key")) endpoint.api_key = j["api_key"].get<std::string>();
  if (j.contains("model")) endpoint.model = j["model"].get<std::string>();
}

json endpoint_json(const BackendEndpoint& endpoint) {
  // API keys are never echoed back.
  return {{"url", endpoint.url}, {"model", endpoint.model}, {"api_key", endpoint.api_key.empty() ? "" : "***"}};
}

std::size_t parse_size(const std::string& name, const std::string& value) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoll(value, &pos);
    if (pos != value.size() || v < 0) throw std::invalid_argument(value);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, name + " must be a non-negative integer, got '" + value + "'");
  }
}

}  // namespace

void EngineConfig::validate() const {
  validate_url("descriptor", descriptor.url);
  validate_url("embedding", embedding.url);
  validate_url("answer", answer.url);
  validate_url("judge", judge.url);
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");
  if (clip_window_ms <= 0) throw Error(ErrorCode::InvalidConfig, "clip_window_ms must be positive");
  if (max_frames < 1) throw Error(ErrorCode::InvalidConfig, "max_frames must be >= 1");
  if (parallelism < 1) throw Error(ErrorCode::InvalidConfig, "parallelism must be >= 1");
  if (retry_attempts < 1) throw Error(ErrorCode::InvalidConfig, "retry_attempts must be >= 1");
  if (mock_embedding_dim < 1) throw Error(ErrorCode::InvalidConfig, "mock_embedding_dim must be >= 1");
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

void apply_json(EngineConfig& config, const json& j) {
  try {
    if (j.contains("descriptor")) apply_endpoint(config.descriptor, j["descriptor"]);
    if (j.contains("embedding")) apply_endpoint(config.embedding, j["embedding"]);
    if (j.contains("answer")) apply_endpoint(config.answer, j["answer"]);
    if (j.contains("judge")) apply_endpoint(config.judge, j["judge"]);
    if (j.contains("k")) config.k = j["k"].get<std::size_t>();
    if (j.contains("fusion")) config.fusion = fusion_strategy_from(j["fusion"].get<std::string>());
    if (j.contains("answer_strategy")) config.answer_strategy = answer_strategy_from(j["answer_strategy"].get<std::string>());
    if (j.contains("clip_window_ms")) config.clip_window_ms = j["clip_window_ms"].get<std::int64_t>();
    if (j.contains("max_frames")) config.max_frames = j["max_frames"].get<int>();
    if (j.contains("include_subtitles_in_descriptor")) {
      config.include_subtitles_in_descriptor = j["include_subtitles_in_descriptor"].get<bool>();
    }
    if (j.contains("parallelism")) config.parallelism = j["parallelism"].get<std::size_t>();
    if (j.contains("retry_attempts")) config.retry_attempts = j["retry_attempts"].get<int>();
    if (j.contains("retry_backoff_ms")) config.retry_backoff = std::chrono::milliseconds(j["retry_backoff_ms"].get<std::int64_t>());
    if (j.contains("request_timeout_s")) config.request_timeout = std::chrono::seconds(j["request_timeout_s"].get<std::int64_t>());
    if (j.contains("temperature")) config.temperature = j["temperature"].get<double>();
    if (j.contains("mock_embedding_dim")) config.mock_embedding_dim = j["mock_embedding_dim"].get<std::size_t>();
    if (j.contains("index_dir")) config.index_dir = j["index_dir"].get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
}

void apply_env(EngineConfig& config, const EnvLookup& env) {
  auto set = [&](const char* name, std::string& target) {
    if (auto v = env(name)) target = *v;
  };
  set("GOLDFISH_DESCRIPTOR_URL", config.descriptor.url);
  set("GOLDFISH_DESCRIPTOR_API_KEY", config.descriptor.api_key);
  set("GOLDFISH_EMBEDDING_URL", config.embedding.url);
  set("GOLDFISH_EMBEDDING_API_KEY", config.embedding.api_key);
  set("GOLDFISH_EMBEDDING_MODEL", config.embedding.model);
  set("GOLDFISH_ANSWER_URL", config.answer.url);
  set("GOLDFISH_ANSWER_API_KEY", config.answer.api_key);
  set("GOLDFISH_ANSWER_MODEL", config.answer.model);
  set("GOLDFISH_JUDGE_URL", config.judge.url);
  set("GOLDFISH_JUDGE_API_KEY", config.judge.api_key);
  set("GOLDFISH_JUDGE_MODEL", config.judge.model);
  if (auto v = env("GOLDFISH_INDEX_DIR")) config.index_dir = *v;
  if (auto v = env("GOLDFISH_K")) config.k = parse_size("GOLDFISH_K", *v);
  if (auto v = env("GOLDFISH_PARALLELISM")) config.parallelism = parse_size("GOLDFISH_PARALLELISM", *v);
}

EngineConfig load_config(const std::optional<std::filesystem::path>& config_file, const EnvLookup& env) {
  EngineConfig config;
  std::optional<std::filesystem::path> path = config_file;
  if (!path) {
    if (auto v = env("GOLDFISH_CONFIG")) path = *v;
  }
  if (path) {
    std::ifstream in(*path);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read config file " + path->string());
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidConfig, path->string() + ": " + e.what());
    }
    apply_json(config, j);
  }
  apply_env(config, env);
  config.validate();
  return config;
}

json to_json(const EngineConfig& config) {
  return {
      {"descriptor", endpoint_json(config.descriptor)},
      {"embedding", endpoint_json(config.embedding)},
      {"answer", endpoint_json(config.answer)},
      {"judge", endpoint_json(config.judge)},
      {"k", config.k},
      {"fusion", std::string(to_string(config.fusion))},
      {"answer_strategy", std::string(to_string(config.answer_strategy))},
      {"clip_window_ms", config.clip_window_ms},
      {"max_frames", config.max_frames},
      {"include_subtitles_in_descriptor", config.include_subtitles_in_descriptor},
      {"parallelism", config.parallelism},
      {"retry_attempts", config.retry_attempts},
      {"retry_backoff_ms", config.retry_backoff.count()},
      {"request_timeout_s", config.request_timeout.count()},
      {"temperature", config.temperature},
      {"mock_embedding_dim", config.mock_embedding_dim},
      {"index_dir", config.index_dir.string()},
  };
}

}  // namespace goldfish
