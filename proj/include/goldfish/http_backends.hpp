#pragma once

#include <chrono>
#include <string>

#include "goldfish/backends.hpp"

namespace goldfish {

struct HttpEndpoint {
  std::string url;  // scheme://host[:port]/path
  std::string auth_token;
  std::chrono::seconds timeout{60};
};

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path;
};

/// Splits "http://host:8080/v1/x" into {"http://host:8080", "/v1/x"}.
/// Throws InvalidConfig for anything that is not an http(s) URL.
ParsedUrl parse_http_url(const std::string& url);

/// POST {clip_id, frames, subtitles, instruction} -> {text}
class HttpDescriptorBackend final : public DescriptorBackend {
 public:
  explicit HttpDescriptorBackend(HttpEndpoint endpoint);
  std::string id() const override;
  std::string describe(const DescriptorRequest& request) override;

 private:
  HttpEndpoint endpoint_;
  ParsedUrl url_;
};

/// POST {input: [..]} -> {vectors, dim, encoder_id}. Endpoints whose path
/// ends in "/embeddings" are spoken to in the OpenAI request/response shape.
class HttpEmbeddingBackend final : public EmbeddingBackend {
 public:
  HttpEmbeddingBackend(HttpEndpoint endpoint, std::string model);
  std::string id() const override;
  EmbeddingBatch embed(std::span<const std::string> inputs) override;

 private:
  HttpEndpoint endpoint_;
  ParsedUrl url_;
  std::string model_;
};

/// POST {system, user, model, temperature} -> {text}. Paths ending in
/// "/chat/completions" use the OpenAI messages shape instead.
class HttpChatBackend final : public ChatBackend {
 public:
  HttpChatBackend(HttpEndpoint endpoint, std::string model, double temperature = 0.0);
  std::string id() const override;
  std::string complete(const ChatRequest& request) override;

 private:
  HttpEndpoint endpoint_;
  ParsedUrl url_;
  std::string model_;
  double temperature_;
};

}  // namespace goldfish
