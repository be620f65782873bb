#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "goldfish/backends.hpp"
#include "goldfish/descriptor.hpp"
#include "goldfish/embedding_index.hpp"
#include "goldfish/media_ingest.hpp"
#include "goldfish/retriever.hpp"

namespace goldfish {

/// A: summaries + subtitles straight to the answer model.
/// B: question-grounded info from the descriptor + summaries.
/// C: B plus subtitles.
enum class AnswerStrategy { A, B, C };

std::string_view to_string(AnswerStrategy strategy);
AnswerStrategy answer_strategy_from(std::string_view name);

inline constexpr std::string_view kAnswerSystemPrompt =
    "You are given summaries and subtitles of the most relevant video clips. Answer the question using only this "
    "information; if it is insufficient, say so.";

inline constexpr std::string_view kUnknownOption = "I don't know";

struct ContextEntry {
  int clip_id = 0;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  double score = 0.0;
  std::string summary_text;
  std::optional<std::string> subtitle_text;
  std::optional<GroundedInfo> info;
};

struct AnswerContext {
  std::string question;
  std::vector<ContextEntry> entries;  // retrieval rank order
};

struct Answer {
  std::string text;
  std::vector<int> used_clip_ids;
  AnswerStrategy strategy = AnswerStrategy::A;
  std::string backend_id;
};

/// What strategies B and C need beyond the index.
struct GroundingSources {
  DescriptorBackend* descriptor = nullptr;
  std::span<const Clip> clips;
  const SubtitleTrack* track = nullptr;
  DescribeOptions options{};
  std::size_t parallelism = 4;
};

/// Builds the answer context in hit order. Strategy A never touches the
/// descriptor. B and C call extract_related_info for every hit (concurrently,
/// bounded by grounding.parallelism). Throws NoHits.
AnswerContext assemble_context(std::span<const RetrievalHit> hits, const EmbeddingIndex& index,
                               AnswerStrategy strategy, std::string_view question,
                               const GroundingSources& grounding = {});

/// Entries in rank order, each headed by its time span, then the question.
std::string serialize_context(const AnswerContext& context);

ChatRequest build_answer_prompt(const AnswerContext& context);

Answer answer_question(const AnswerContext& context, ChatBackend& backend, AnswerStrategy strategy = AnswerStrategy::A,
                       const RetryPolicy& retry = {}, const Sleeper& sleeper = real_sleeper());

struct McqQuestion {
  std::string stem;
  std::array<std::string, 5> options;  // options[4] is always kUnknownOption

  /// Appends the "I don't know" option to four real options.
  static McqQuestion with_unknown_option(std::string stem, std::span<const std::string> four_options);
  /// Accepts four options (unknown option appended) or five whose last is
  /// already the unknown option. Throws InvalidItem otherwise.
  static McqQuestion from_options(std::string stem, std::span<const std::string> options);
};

ChatRequest build_mcq_prompt(const McqQuestion& question, const AnswerContext& context);

/// Rules, first match wins: "option N" anywhere; the whole reply is a lone
/// digit (optionally bracketed or followed by '.', ':' or ')'); the reply
/// contains an option's text verbatim (case-insensitive, longest option
/// wins, lower index on equal length). Returns 1..5 or nullopt.
std::optional<int> parse_mcq_choice(std::string_view reply, const McqQuestion& question);

/// Throws UnparseableChoice when parse_mcq_choice fails.
int answer_mcq(const McqQuestion& question, const AnswerContext& context, ChatBackend& backend,
               const RetryPolicy& retry = {}, const Sleeper& sleeper = real_sleeper());

}  // namespace goldfish
