#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace goldfish {

/// Frames and per-frame subtitles for one clip, plus the instruction that
/// closes the interleaved prompt.
struct DescriptorRequest {
  int clip_id = 0;
  std::vector<std::string> frame_refs;
  std::vector<std::optional<std::string>> per_frame_subtitles;
  std::string instruction;
};

/// Vision-language model that turns a clip into text.
class DescriptorBackend {
 public:
  virtual ~DescriptorBackend() = default;
  virtual std::string id() const = 0;
  virtual std::string describe(const DescriptorRequest& request) = 0;
};

struct EmbeddingBatch {
  std::vector<std::vector<float>> vectors;
  std::size_t dim = 0;
  std::string encoder_id;
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::string id() const = 0;
  virtual EmbeddingBatch embed(std::span<const std::string> inputs) = 0;
};

struct ChatRequest {
  std::string system;
  std::string user;
};

/// Chat-completion style model used for answering and judging.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string id() const = 0;
  virtual std::string complete(const ChatRequest& request) = 0;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  double multiplier = 2.0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

Sleeper real_sleeper();

/// Runs `call`, retrying BackendUnavailable failures with exponential
/// backoff. Any other error propagates immediately. `retries_out`, when
/// given, receives the number of retries that were needed.
void with_retry(const RetryPolicy& policy, const Sleeper& sleep, const std::function<void()>& call,
                int* retries_out = nullptr);

/// Calls fn(i) for i in [0, count) on at most `parallelism` threads. The
/// first exception thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t parallelism, const std::function<void(std::size_t)>& fn);

}  // namespace goldfish
