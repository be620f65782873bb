#pragma once

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "goldfish/engine.hpp"
#include "goldfish/error.hpp"

namespace goldfish {

/// HTTP status an error code maps to.
int http_status(ErrorCode code);
/// {"error": {"code", "message", "stage"}}
nlohmann::json error_body(const Error& error);

/// JSON API over an Engine:
///   POST /videos                      manifest (+ subtitles) -> IngestJob (202)
///   GET  /jobs/{id}                   IngestJob
///   GET  /videos/{id}/clips           clip list with summaries
///   POST /videos/{id}/ask             {question, k?, strategy?, answer_strategy?}
///   GET  /videos/{id}/retrieve        ?q=&k=&strategy=
///   POST /benchmarks/run              {benchmark, window?, k?} -> report
///   GET  /health, GET /config
class HttpService {
 public:
  explicit HttpService(Engine& engine);
  ~HttpService();

  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds an ephemeral port and returns it, or -1.
  int bind_any_port(const std::string& host = "127.0.0.1");
  bool bind(const std::string& host, int port);
  /// Blocks until stop().
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace goldfish
