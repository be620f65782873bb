#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "goldfish/backends.hpp"

namespace goldfish {

/// Offline text encoder. Every token contributes a fixed sparse ±1 pattern
/// derived from hash(encoder_id, token), so texts sharing rare tokens score
/// high; a small whole-text pattern keeps distinct texts apart. Output is a
/// unit vector and depends only on (text, encoder_id, dim).
class MockEncoder final : public EmbeddingBackend {
 public:
  static constexpr std::size_t kDefaultDim = 4096;

  explicit MockEncoder(std::size_t dim = kDefaultDim, std::string encoder_id = "mock-hash-v1");

  std::string id() const override { return encoder_id_; }
  EmbeddingBatch embed(std::span<const std::string> inputs) override;

  std::vector<float> encode(std::string_view text) const;
  std::size_t calls() const { return calls_.load(); }

 private:
  std::size_t dim_;
  std::string encoder_id_;
  std::atomic<std::size_t> calls_{0};
};

/// Marks frames [first_frame, last_frame] of `uri` as containing `token`.
struct NeedleSpan {
  std::string uri;
  std::int64_t first_frame = 0;
  std::int64_t last_frame = 0;
  std::string token;
};

/// Offline descriptor. Summary requests get the mock summary phrase (with
/// the needle token when any frame falls in a needle span). Related-info
/// requests get the needle or matching subtitle text when the question
/// mentions it, else "I DON'T KNOW".
class MockDescriptorBackend final : public DescriptorBackend {
 public:
  explicit MockDescriptorBackend(std::vector<NeedleSpan> needles = {});

  std::string id() const override { return "mock-descriptor"; }
  std::string describe(const DescriptorRequest& request) override;

  std::size_t calls() const { return calls_.load(); }

 private:
  std::vector<NeedleSpan> needles_;
  std::atomic<std::size_t> calls_{0};
};

/// Answers from the context only: returns the first context line that
/// contains a distinctive question token, or "I don't know based on the
/// provided information." For multiple-choice prompts it replies with the
/// number of the option found on that line (5 when nothing matches).
class KeywordAnswerer final : public ChatBackend {
 public:
  std::string id() const override { return "mock-keyword-answerer"; }
  std::string complete(const ChatRequest& request) override;
  std::size_t calls() const { return calls_.load(); }

 private:
  std::atomic<std::size_t> calls_{0};
};

/// Judge stand-in: yes/5 when the prediction contains the correct answer
/// (case-insensitive), otherwise no/0, formatted like a judge model reply.
class KeywordJudge final : public ChatBackend {
 public:
  std::string id() const override { return "mock-keyword-judge"; }
  std::string complete(const ChatRequest& request) override;
};

/// Backend that always fails with BackendUnavailable.
class UnreachableBackend final : public DescriptorBackend, public EmbeddingBackend, public ChatBackend {
 public:
  std::string id() const override { return "unreachable"; }
  std::string describe(const DescriptorRequest&) override;
  EmbeddingBatch embed(std::span<const std::string>) override;
  std::string complete(const ChatRequest&) override;
};

}  // namespace goldfish
