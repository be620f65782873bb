#include "goldfish/answer.hpp"

#include <algorithm>
#include <regex>
#include <unordered_map>

#include "goldfish/error.hpp"
#include "goldfish/text_util.hpp"

namespace goldfish {

std::string_view to_string(AnswerStrategy strategy) {
  switch (strategy) {
    case AnswerStrategy::A: return "A";
    case AnswerStrategy::B: return "B";
    case AnswerStrategy::C: return "C";
  }
  return "A";
}

AnswerStrategy answer_strategy_from(std::string_view name) {
  const auto n = text::to_lower(text::trim(name));
  if (n == "a") return AnswerStrategy::A;
  if (n == "b") return AnswerStrategy::B;
  if (n == "c") return AnswerStrategy::C;
  throw Error(ErrorCode::InvalidArgument, "unknown answer strategy '" + std::string(name) + "'");
}

AnswerContext assemble_context(std::span<const RetrievalHit> hits, const EmbeddingIndex& index,
                               AnswerStrategy strategy, std::string_view question,
                               const GroundingSources& grounding) {
  if (hits.empty()) throw Error(ErrorCode::NoHits, "retrieval returned no clips");

  AnswerContext context;
  context.question = std::string(question);
  context.entries.reserve(hits.size());
  for (const auto& hit : hits) {
    const auto* entry = index.find(hit.clip_id);
    if (!entry) throw Error(ErrorCode::InvalidArgument, "hit references unknown clip " + std::to_string(hit.clip_id));
    ContextEntry e;
    e.clip_id = hit.clip_id;
    e.start_ms = entry->record.start_ms;
    e.end_ms = entry->record.end_ms;
    e.score = hit.score;
    e.summary_text = entry->record.summary_text;
    if (strategy != AnswerStrategy::B) e.subtitle_text = entry->record.subtitle_text;
    context.entries.push_back(std::move(e));
  }
  if (strategy == AnswerStrategy::A) return context;

  if (grounding.descriptor == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "strategy " + std::string(to_string(strategy)) + " needs a descriptor backend");
  }
  std::unordered_map<int, const Clip*> clips_by_id;
  for (const auto& clip : grounding.clips) clips_by_id.emplace(clip.clip_id, &clip);
  for (const auto& e : context.entries) {
    if (!clips_by_id.contains(e.clip_id)) {
      throw Error(ErrorCode::InvalidArgument, "no clip data for clip " + std::to_string(e.clip_id));
    }
  }

  // Results land in their rank slot regardless of completion order.
  std::vector<GroundedInfo> infos(context.entries.size());
  parallel_for(context.entries.size(), grounding.parallelism, [&](std::size_t i) {
    const Clip& clip = *clips_by_id.at(context.entries[i].clip_id);
    infos[i] = extract_related_info(clip, question, *grounding.descriptor, grounding.options, grounding.track);
  });
  for (std::size_t i = 0; i < infos.size(); ++i) context.entries[i].info = std::move(infos[i]);
  return context;
}

std::string serialize_context(const AnswerContext& context) {
  std::string out;
  for (std::size_t i = 0; i < context.entries.size(); ++i) {
    const auto& e = context.entries[i];
    out += "Clip " + std::to_string(i + 1) + " [" + text::format_timestamp(e.start_ms, '.') + " - " +
           text::format_timestamp(e.end_ms, '.') + "]\n";
    if (e.info) {
      out += "Related information";
      if (e.info->is_dont_know) out += " (the video model answered I DON'T KNOW for this clip)";
      out += ": " + e.info->info_text + "\n";
    }
    out += "Summary: " + e.summary_text + "\n";
    if (e.subtitle_text) out += "Subtitles: " + *e.subtitle_text + "\n";
    out += "\n";
  }
  out += "Question: " + context.question;
  return out;
}

ChatRequest build_answer_prompt(const AnswerContext& context) {
  return ChatRequest{std::string(kAnswerSystemPrompt), serialize_context(context)};
}

namespace {

std::string call_chat(ChatBackend& backend, const ChatRequest& request, const RetryPolicy& retry,
                      const Sleeper& sleeper) {
  std::string reply;
  with_retry(retry, sleeper, [&] { reply = backend.complete(request); });
  if (text::trim(reply).empty()) throw Error(ErrorCode::EmptyResponse, backend.id() + " returned no text");
  return reply;
}

}  // namespace

Answer answer_question(const AnswerContext& context, ChatBackend& backend, AnswerStrategy strategy,
                       const RetryPolicy& retry, const Sleeper& sleeper) {
  if (context.entries.empty()) throw Error(ErrorCode::NoHits, "answer context is empty");
  Answer answer;
  answer.text = call_chat(backend, build_answer_prompt(context), retry, sleeper);
  answer.strategy = strategy;
  answer.backend_id = backend.id();
  for (const auto& e : context.entries) answer.used_clip_ids.push_back(e.clip_id);
  return answer;
}

McqQuestion McqQuestion::with_unknown_option(std::string stem, std::span<const std::string> four_options) {
  if (four_options.size() != 4) throw Error(ErrorCode::InvalidItem, "expected 4 options");
  McqQuestion q;
  q.stem = std::move(stem);
  std::copy(four_options.begin(), four_options.end(), q.options.begin());
  q.options[4] = std::string(kUnknownOption);
  return q;
}

McqQuestion McqQuestion::from_options(std::string stem, std::span<const std::string> options) {
  if (options.size() == 4) return with_unknown_option(std::move(stem), options);
  if (options.size() == 5 && text::to_lower(text::trim(options[4])) == text::to_lower(kUnknownOption)) {
    McqQuestion q;
    q.stem = std::move(stem);
    std::copy(options.begin(), options.end(), q.options.begin());
    q.options[4] = std::string(kUnknownOption);
    return q;
  }
  throw Error(ErrorCode::InvalidItem, "multiple-choice items need 4 options, or 5 ending in \"I don't know\"");
}

ChatRequest build_mcq_prompt(const McqQuestion& question, const AnswerContext& context) {
  AnswerContext with_stem = context;
  with_stem.question = question.stem;
  std::string user = serialize_context(with_stem);
  user += "\nOptions:\n";
  for (std::size_t i = 0; i < question.options.size(); ++i) {
    user += std::to_string(i + 1) + ". " + question.options[i] + "\n";
  }
  user += "Reply with the number of the correct option.";
  return ChatRequest{std::string(kAnswerSystemPrompt), user};
}

std::optional<int> parse_mcq_choice(std::string_view reply, const McqQuestion& question) {
  const std::string r(reply);
  static const std::regex option_rule(R"(\boption\s*#?\s*([1-5])\b)", std::regex::icase);
  std::smatch m;
  if (std::regex_search(r, m, option_rule)) return m[1].str()[0] - '0';

  static const std::regex digit_rule(R"(^\s*[\(\[]?([1-5])[\)\]]?[.:)]?\s*$)");
  if (std::regex_match(r, m, digit_rule)) return m[1].str()[0] - '0';

  std::optional<int> best;
  std::size_t best_len = 0;
  for (std::size_t i = 0; i < question.options.size(); ++i) {
    const auto option = text::trim(question.options[i]);
    if (option.empty()) continue;
    if (option.size() > best_len && text::contains_icase(r, option)) {
      best = static_cast<int>(i + 1);
      best_len = option.size();
    }
  }
  if (!best && contains_dont_know(r)) return 5;
  return best;
}

int answer_mcq(const McqQuestion& question, const AnswerContext& context, ChatBackend& backend,
               const RetryPolicy& retry, const Sleeper& sleeper) {
  if (context.entries.empty()) throw Error(ErrorCode::NoHits, "answer context is empty");
  const auto reply = call_chat(backend, build_mcq_prompt(question, context), retry, sleeper);
  const auto choice = parse_mcq_choice(reply, question);
  if (!choice) throw Error(ErrorCode::UnparseableChoice, "could not map reply to an option: " + reply.substr(0, 120));
  return *choice;
}

}  // namespace goldfish
