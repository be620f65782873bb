#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "goldfish/answer.hpp"
#include "goldfish/media_ingest.hpp"
#include "goldfish/retriever.hpp"

namespace goldfish {

/// "mock://" selects the built-in offline backend for that role.
struct BackendEndpoint {
  std::string url = "mock://";
  std::string api_key;
  std::string model;

  bool is_mock() const { return url.starts_with("mock://"); }
};

struct EngineConfig {
  BackendEndpoint descriptor{};
  BackendEndpoint embedding{"mock://", "", "text-embedding-3-small"};
  BackendEndpoint answer{"mock://", "", "llama-2-13b-chat"};
  BackendEndpoint judge{"mock://", "", "gpt-3.5-turbo"};

  std::size_t k = 3;
  FusionStrategy fusion = FusionStrategy::Union;
  AnswerStrategy answer_strategy = AnswerStrategy::A;
  std::int64_t clip_window_ms = kDefaultClipWindowMs;
  int max_frames = kDefaultMaxFrames;
  bool include_subtitles_in_descriptor = true;

  std::size_t parallelism = 4;
  int retry_attempts = 3;
  std::chrono::milliseconds retry_backoff{500};
  std::chrono::seconds request_timeout{120};
  double temperature = 0.0;
  std::size_t mock_embedding_dim = 4096;

  std::filesystem::path index_dir = "goldfish-index";

  /// Throws InvalidConfig.
  void validate() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads the real process environment.
EnvLookup process_env();

/// Applies the keys present in `j` on top of `config`.
void apply_json(EngineConfig& config, const nlohmann::json& j);

/// GOLDFISH_* variables on top of `config`.
void apply_env(EngineConfig& config, const EnvLookup& env);

/// defaults < config file < environment. The file is `config_file` when
/// given, else $GOLDFISH_CONFIG when set. The result is validated.
EngineConfig load_config(const std::optional<std::filesystem::path>& config_file, const EnvLookup& env);

nlohmann::json to_json(const EngineConfig& config);

}  // namespace goldfish
