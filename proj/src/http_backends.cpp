#include "goldfish/http_backends.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "goldfish/error.hpp"

namespace goldfish {

using json = nlohmann::json;

ParsedUrl parse_http_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::InvalidConfig, "not a URL: " + url);
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw Error(ErrorCode::InvalidConfig, "unsupported scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  out.scheme_host_port = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (out.scheme_host_port.size() <= scheme_end + 3) throw Error(ErrorCode::InvalidConfig, "missing host: " + url);
  return out;
}

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

json post_json(const HttpEndpoint& endpoint, const ParsedUrl& url, const json& body) {
  httplib::Client client(url.scheme_host_port);
  client.set_connection_timeout(endpoint.timeout);
  client.set_read_timeout(endpoint.timeout);
  client.set_write_timeout(endpoint.timeout);
  httplib::Headers headers;
  if (!endpoint.auth_token.empty()) headers.emplace("Authorization", "Bearer " + endpoint.auth_token);

  auto res = client.Post(url.path, headers, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::BackendUnavailable, endpoint.url + ": " + httplib::to_string(res.error()));
  }
  const int status = res->status;
  if (status == 408 || status == 429 || status >= 500) {
    throw Error(ErrorCode::BackendUnavailable, endpoint.url + " returned HTTP " + std::to_string(status));
  }
  if (status < 200 || status >= 300) {
    throw Error(ErrorCode::BackendRejected,
                endpoint.url + " returned HTTP " + std::to_string(status) + ": " + res->body.substr(0, 200));
  }
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BackendRejected, endpoint.url + " sent an invalid JSON body: " + e.what());
  }
}

std::string text_field(const json& body, const std::string& url) {
  if (body.contains("text") && body["text"].is_string()) return body["text"].get<std::string>();
  // OpenAI chat-completions shape
  if (body.contains("choices") && body["choices"].is_array() && !body["choices"].empty()) {
    const auto& choice = body["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content") &&
        choice["message"]["content"].is_string()) {
      return choice["message"]["content"].get<std::string>();
    }
  }
  throw Error(ErrorCode::BackendRejected, url + " response has no text field");
}

}  // namespace

HttpDescriptorBackend::HttpDescriptorBackend(HttpEndpoint endpoint)
    : endpoint_(std::move(endpoint)), url_(parse_http_url(endpoint_.url)) {}

std::string HttpDescriptorBackend::id() const { return "http:" + endpoint_.url; }

std::string HttpDescriptorBackend::describe(const DescriptorRequest& request) {
  json subtitles = json::array();
  for (const auto& s : request.per_frame_subtitles) subtitles.push_back(s.value_or(""));
  const json body = {
      {"clip_id", request.clip_id},
      {"frames", request.frame_refs},
      {"subtitles", std::move(subtitles)},
      {"instruction", request.instruction},
  };
  return text_field(post_json(endpoint_, url_, body), endpoint_.url);
}

HttpEmbeddingBackend::HttpEmbeddingBackend(HttpEndpoint endpoint, std::string model)
    : endpoint_(std::move(endpoint)), url_(parse_http_url(endpoint_.url)), model_(std::move(model)) {}

std::string HttpEmbeddingBackend::id() const { return "http:" + endpoint_.url; }

EmbeddingBatch HttpEmbeddingBackend::embed(std::span<const std::string> inputs) {
  const json body = {{"input", std::vector<std::string>(inputs.begin(), inputs.end())}, {"model", model_}};
  const json response = post_json(endpoint_, url_, body);

  EmbeddingBatch batch;
  try {
    if (response.contains("vectors")) {
      batch.vectors = response.at("vectors").get<std::vector<std::vector<float>>>();
      batch.dim = response.at("dim").get<std::size_t>();
      batch.encoder_id = response.at("encoder_id").get<std::string>();
    } else if (response.contains("data")) {
      auto data = response.at("data");
      std::sort(data.begin(), data.end(), [](const json& a, const json& b) {
        return a.value("index", 0) < b.value("index", 0);
      });
      for (const auto& row : data) batch.vectors.push_back(row.at("embedding").get<std::vector<float>>());
      batch.dim = batch.vectors.empty() ? 0 : batch.vectors.front().size();
      batch.encoder_id = response.value("model", model_);
    } else {
      throw Error(ErrorCode::BackendRejected, endpoint_.url + " response has neither 'vectors' nor 'data'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BackendRejected, endpoint_.url + " embedding response malformed: " + e.what());
  }
  if (batch.vectors.size() != inputs.size()) {
    throw Error(ErrorCode::BackendRejected, "expected " + std::to_string(inputs.size()) + " vectors, got " +
                                                std::to_string(batch.vectors.size()));
  }
  return batch;
}

HttpChatBackend::HttpChatBackend(HttpEndpoint endpoint, std::string model, double temperature)
    : endpoint_(std::move(endpoint)), url_(parse_http_url(endpoint_.url)), model_(std::move(model)),
      temperature_(temperature) {}

std::string HttpChatBackend::id() const { return "http:" + endpoint_.url + "#" + model_; }

std::string HttpChatBackend::complete(const ChatRequest& request) {
  json body;
  if (ends_with(url_.path, "/chat/completions")) {
    body = {
        {"model", model_},
        {"temperature", temperature_},
        {"messages",
         json::array({{{"role", "system"}, {"content", request.system}}, {{"role", "user"}, {"content", request.user}}})},
    };
  } else {
    body = {{"system", request.system}, {"user", request.user}, {"model", model_}, {"temperature", temperature_}};
  }
  return text_field(post_json(endpoint_, url_, body), endpoint_.url);
}

}  // namespace goldfish
