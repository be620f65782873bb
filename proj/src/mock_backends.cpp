#include "goldfish/mock_backends.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

#include "goldfish/descriptor.hpp"
#include "goldfish/error.hpp"
#include "goldfish/text_util.hpp"

namespace goldfish {

namespace {

constexpr int kBucketsPerToken = 8;
constexpr int kTextBuckets = 16;
constexpr float kTextWeight = 0.25f;

void scatter(std::vector<float>& v, std::uint64_t seed, int buckets, float weight) {
  std::mt19937_64 rng(seed);
  for (int i = 0; i < buckets; ++i) {
    const std::uint64_t r = rng();
    const auto bucket = static_cast<std::size_t>(r % v.size());
    v[bucket] += (r >> 63) ? -weight : weight;
  }
}

const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> words = {
      "a",     "an",    "the",   "is",    "are",  "was",   "were", "be",    "been", "do",   "does", "did",
      "what",  "which", "who",   "whom",  "whose", "where", "when", "why",  "how",  "in",   "on",   "at",
      "of",    "to",    "for",   "with",  "by",   "from",  "and",  "or",    "not",  "this", "that", "these",
      "those", "it",    "its",   "he",    "she",  "they",  "them", "his",   "her",  "their", "you", "your",
      "i",     "we",    "our",   "there", "here", "after", "before", "about", "into", "than", "then", "video",
      "clip",  "scene", "say",   "said",  "says", "appear", "appears", "happen", "happens", "happened",
  };
  return words;
}

/// Question tokens worth searching for, most distinctive first: tokens with
/// digits or hyphens, then longer tokens.
std::vector<std::string> distinctive_tokens(std::string_view question) {
  std::vector<std::string> tokens;
  for (auto& t : text::tokenize(question)) {
    if (t.size() < 3 || stopwords().contains(t)) continue;
    if (std::find(tokens.begin(), tokens.end(), t) == tokens.end()) tokens.push_back(std::move(t));
  }
  auto marked = [](const std::string& t) {
    return std::any_of(t.begin(), t.end(), [](char c) { return c == '-' || (c >= '0' && c <= '9'); });
  };
  std::stable_sort(tokens.begin(), tokens.end(), [&](const std::string& a, const std::string& b) {
    if (marked(a) != marked(b)) return marked(a);
    return a.size() > b.size();
  });
  return tokens;
}

std::string between(std::string_view s, std::string_view open, std::string_view close) {
  const auto b = s.find(open);
  if (b == std::string_view::npos) return {};
  const auto start = b + open.size();
  const auto e = close.empty() ? std::string_view::npos : s.find(close, start);
  return std::string(s.substr(start, e == std::string_view::npos ? std::string_view::npos : e - start));
}

bool parse_frame_ref(std::string_view ref, std::string& uri, std::int64_t& frame) {
  const auto pos = ref.rfind("#frame=");
  if (pos == std::string_view::npos) return false;
  uri = std::string(ref.substr(0, pos));
  try {
    frame = std::stoll(std::string(ref.substr(pos + 7)));
  } catch (...) {
    return false;
  }
  return true;
}

}  // namespace

MockEncoder::MockEncoder(std::size_t dim, std::string encoder_id) : dim_(dim), encoder_id_(std::move(encoder_id)) {
  if (dim_ == 0) throw Error(ErrorCode::InvalidArgument, "mock encoder dim must be positive");
}

std::vector<float> MockEncoder::encode(std::string_view input) const {
  std::vector<float> v(dim_, 0.0f);
  for (const auto& token : text::tokenize(input)) {
    scatter(v, text::fnv1a64(encoder_id_ + '\x1f' + token), kBucketsPerToken, 1.0f);
  }
  scatter(v, text::fnv1a64(encoder_id_ + '\x1e' + std::string(input)), kTextBuckets, kTextWeight);

  double norm2 = 0.0;
  for (float f : v) norm2 += static_cast<double>(f) * f;
  if (norm2 == 0.0) {
    v[text::fnv1a64(input) % dim_] = 1.0f;
    return v;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (float& f : v) f = static_cast<float>(f * inv);
  return v;
}

EmbeddingBatch MockEncoder::embed(std::span<const std::string> inputs) {
  ++calls_;
  EmbeddingBatch batch;
  batch.dim = dim_;
  batch.encoder_id = encoder_id_;
  batch.vectors.reserve(inputs.size());
  for (const auto& s : inputs) batch.vectors.push_back(encode(s));
  return batch;
}

MockDescriptorBackend::MockDescriptorBackend(std::vector<NeedleSpan> needles) : needles_(std::move(needles)) {}

std::string MockDescriptorBackend::describe(const DescriptorRequest& request) {
  ++calls_;
  std::optional<std::string> needle;
  for (const auto& ref : request.frame_refs) {
    std::string uri;
    std::int64_t frame = 0;
    if (!parse_frame_ref(ref, uri, frame)) continue;
    for (const auto& n : needles_) {
      if (n.uri == uri && frame >= n.first_frame && frame <= n.last_frame) needle = n.token;
    }
    if (needle) break;
  }

  std::vector<std::string> subtitles;
  for (const auto& s : request.per_frame_subtitles) {
    if (s && (subtitles.empty() || subtitles.back() != *s)) subtitles.push_back(*s);
  }

  if (request.instruction.starts_with("From this video extract")) {
    const auto question = between(request.instruction, "the question is: ", " your answer:");
    const auto tokens = distinctive_tokens(question);
    if (needle && text::contains_icase(question, *needle)) return "The clip shows " + *needle + ".";
    for (const auto& token : tokens) {
      for (const auto& s : subtitles) {
        if (text::contains_icase(s, token)) return "The subtitles mention: " + s;
      }
    }
    return std::string(kDontKnowMarker);
  }

  std::uint64_t digest = text::fnv1a64("clip:" + std::to_string(request.clip_id));
  for (const auto& ref : request.frame_refs) digest = text::fnv1a64(ref + '\n', digest);
  for (const auto& s : subtitles) digest = text::fnv1a64(s + '\n', digest);
  return mock_summary_phrase(request.clip_id, digest, needle);
}

std::string KeywordAnswerer::complete(const ChatRequest& request) {
  ++calls_;
  const std::string_view user = request.user;
  const auto question_pos = user.rfind("Question: ");
  const std::string_view context = user.substr(0, question_pos == std::string_view::npos ? 0 : question_pos);
  const auto options_pos = user.find("\nOptions:\n", question_pos == std::string_view::npos ? 0 : question_pos);
  const std::string question(user.substr(
      question_pos == std::string_view::npos ? 0 : question_pos + 10,
      options_pos == std::string_view::npos ? std::string_view::npos : options_pos - question_pos - 10));

  std::string matched_line;
  for (const auto& token : distinctive_tokens(question)) {
    for (const auto& line : text::split_lines(context)) {
      if (text::contains_icase(line, token)) {
        matched_line = line;
        break;
      }
    }
    if (!matched_line.empty()) break;
  }

  if (options_pos != std::string_view::npos) {
    if (matched_line.empty()) return "5";
    int option_number = 0;
    for (const auto& line : text::split_lines(user.substr(options_pos + 10))) {
      if (line.size() > 3 && line[0] >= '1' && line[0] <= '4' && line[1] == '.') {
        const auto option_text = text::trim(std::string_view(line).substr(2));
        if (!option_text.empty() && text::contains_icase(matched_line, option_text)) {
          option_number = line[0] - '0';
          break;
        }
      }
    }
    return option_number ? std::to_string(option_number) : "5";
  }

  if (matched_line.empty()) return "I don't know based on the provided information.";
  return matched_line;
}

std::string KeywordJudge::complete(const ChatRequest& request) {
  const auto answer = text::trim(between(request.user, "Correct Answer: ", "\n"));
  const auto pred = text::trim(between(request.user, "Predicted Answer: ", "\n"));
  if (!answer.empty() && text::contains_icase(pred, answer)) return "{'pred': 'yes', 'score': 5}";
  return "{'pred': 'no', 'score': 0}";
}

std::string UnreachableBackend::describe(const DescriptorRequest&) {
  throw Error(ErrorCode::BackendUnavailable, "backend unreachable");
}

EmbeddingBatch UnreachableBackend::embed(std::span<const std::string>) {
  throw Error(ErrorCode::BackendUnavailable, "backend unreachable");
}

std::string UnreachableBackend::complete(const ChatRequest&) {
  throw Error(ErrorCode::BackendUnavailable, "backend unreachable");
}

}  // namespace goldfish
