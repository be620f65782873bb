#pragma once

// Shared oracles and synthetic data for the unit and acceptance suites.
// Oracles are written independently of the library code they check.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "goldfish/answer.hpp"
#include "goldfish/benchmark.hpp"
#include "goldfish/embedding_index.hpp"
#include "goldfish/engine.hpp"
#include "goldfish/media_ingest.hpp"
#include "goldfish/mock_backends.hpp"
#include "goldfish/retriever.hpp"
#include "goldfish/text_util.hpp"

namespace goldfish::testing {

// ---------------------------------------------------------------------------
// Retrieval oracle
// ---------------------------------------------------------------------------

inline long double oracle_cosine(const std::vector<float>& a, const std::vector<float>& b) {
  long double dot = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    aa += static_cast<long double>(a[i]) * a[i];
    bb += static_cast<long double>(b[i]) * b[i];
  }
  return dot / std::sqrt(aa * bb);
}

struct OracleHit {
  int clip_id;
  long double score;
  MatchedKind kind;
};

/// Scores every eligible key of every clip from scratch, keeps each clip's
/// best key, sorts everything and takes k. The concatenated key is built as
/// an actual 2d vector against a duplicated query.
inline std::vector<OracleHit> brute_force_top_k(const std::vector<float>& q, const EmbeddingIndex& index,
                                                FusionStrategy strategy, std::size_t k) {
  std::vector<OracleHit> best;
  for (const auto& [id, e] : index.entries()) {
    std::vector<OracleHit> keys;
    switch (strategy) {
      case FusionStrategy::SummaryOnly:
        keys.push_back({id, oracle_cosine(e.summary.values, q), MatchedKind::Summary});
        break;
      case FusionStrategy::SubtitlesOnly:
        keys.push_back({id, oracle_cosine(e.subtitle.values, q), MatchedKind::Subtitle});
        break;
      case FusionStrategy::Union:
        keys.push_back({id, oracle_cosine(e.summary.values, q), MatchedKind::Summary});
        keys.push_back({id, oracle_cosine(e.subtitle.values, q), MatchedKind::Subtitle});
        break;
      case FusionStrategy::Concatenated: {
        std::vector<float> key = e.subtitle.values;
        key.insert(key.end(), e.summary.values.begin(), e.summary.values.end());
        std::vector<float> qq = q;
        qq.insert(qq.end(), q.begin(), q.end());
        keys.push_back({id, oracle_cosine(key, qq), MatchedKind::Concatenated});
        break;
      }
    }
    // Max score; summary wins an exact tie.
    OracleHit top = keys.front();
    for (const auto& h : keys) {
      if (h.score > top.score) top = h;
    }
    best.push_back(top);
  }
  std::sort(best.begin(), best.end(), [](const OracleHit& a, const OracleHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.clip_id < b.clip_id;
  });
  if (best.size() > k) best.resize(k);
  return best;
}

inline std::vector<float> random_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  std::vector<float> v(dim);
  for (;;) {
    float norm = 0;
    for (auto& x : v) {
      x = n(rng);
      norm += x * x;
    }
    if (norm > 0) return v;
  }
}

/// Random index with un-normalized vectors. A few clips copy another clip's
/// vectors so exact score ties occur.
inline EmbeddingIndex random_index(std::mt19937_64& rng, std::size_t m, std::size_t dim) {
  EmbeddingIndex index("synthetic", "1970-01-01T00:00:00Z");
  std::vector<std::pair<std::vector<float>, std::vector<float>>> made;
  std::uniform_real_distribution<float> scale(0.25f, 4.0f);
  std::bernoulli_distribution dup(0.05);
  for (std::size_t i = 1; i <= m; ++i) {
    std::vector<float> sum, sub;
    if (!made.empty() && dup(rng)) {
      std::uniform_int_distribution<std::size_t> pick(0, made.size() - 1);
      std::tie(sum, sub) = made[pick(rng)];
    } else {
      sum = random_vector(rng, dim);
      sub = random_vector(rng, dim);
      const float s = scale(rng);
      for (auto& x : sub) x *= s;
    }
    made.emplace_back(sum, sub);
    index.upsert(ClipRecord{static_cast<int>(i), "s" + std::to_string(i), "u" + std::to_string(i),
                            static_cast<std::int64_t>(i - 1) * 1000, static_cast<std::int64_t>(i) * 1000},
                 EmbeddingVector{sum, "synthetic"}, EmbeddingVector{sub, "synthetic"});
  }
  return index;
}

inline RetrievalQuery random_query(std::mt19937_64& rng, std::size_t dim) {
  return RetrievalQuery{"q", EmbeddingVector{random_vector(rng, dim), "synthetic"}};
}

/// True when retrieve_top_k agrees with the brute-force oracle in set and order.
inline bool matches_oracle(const RetrievalQuery& q, const EmbeddingIndex& index, FusionStrategy strategy,
                           std::size_t k) {
  const auto got = retrieve_top_k(q, index, {k, strategy});
  const auto want = brute_force_top_k(q.embedding.values, index, strategy, k);
  if (got.size() != want.size()) return false;
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (got[i].clip_id != want[i].clip_id || got[i].matched_kind != want[i].kind) return false;
    if (std::abs(static_cast<long double>(got[i].score) - want[i].score) > 1e-9L) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Synthetic text
// ---------------------------------------------------------------------------

/// Pronounceable non-words; they never collide with English question words.
inline std::string pseudo_word(std::mt19937_64& rng) {
  static const char* const kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"};
  static const char* const kVowels[] = {"a", "e", "i", "o", "u"};
  std::uniform_int_distribution<int> on(0, 13), vo(0, 4), syl(2, 3);
  std::string w;
  const int n = syl(rng);
  for (int i = 0; i < n; ++i) {
    w += kOnsets[on(rng)];
    w += kVowels[vo(rng)];
  }
  return w + "x";
}

inline std::string pseudo_sentence(std::mt19937_64& rng, int words) {
  std::string s;
  for (int i = 0; i < words; ++i) {
    if (i) s += ' ';
    s += pseudo_word(rng);
  }
  return s + ".";
}

/// One cue per clip window, in the middle of the window.
inline std::string pseudo_srt(std::mt19937_64& rng, int clips, std::int64_t window_ms) {
  SubtitleTrack track;
  for (int c = 0; c < clips; ++c) {
    const std::int64_t mid = c * window_ms + window_ms / 2;
    track.cues.push_back({c + 1, mid - 2000, mid + 2000, pseudo_sentence(rng, 6)});
  }
  return serialize_subtitles(track, SubtitleFormat::Srt);
}

inline std::string needle_token(std::uint64_t seed, int position) {
  return "NEEDLE-" + text::hex64(text::fnv1a64("needle/" + std::to_string(seed) + "/" + std::to_string(position)))
                         .substr(0, 8);
}

inline std::string needle_question(const std::string& token) { return "Which clip features " + token + "?"; }

// ---------------------------------------------------------------------------
// Planted-needle pipeline
// ---------------------------------------------------------------------------

/// A mock-ingested video with exactly one needle clip.
struct NeedleVideo {
  VideoData video;
  int needle_clip = 0;  // 1-based
  std::string token;
};

inline NeedleVideo make_needle_video(int n_clips, int needle_clip, std::uint64_t seed, MockEncoder& encoder) {
  constexpr std::int64_t kWindow = 90'000;
  constexpr double kFps = 1.0;
  std::mt19937_64 rng(seed);
  NeedleVideo out;
  out.needle_clip = needle_clip;
  out.token = needle_token(seed, needle_clip);

  VideoSource source{"needle-" + std::to_string(seed), "synthetic://needle/" + std::to_string(seed), kFps,
                     n_clips * 90, 0, 0, 0};
  const auto track = parse_subtitles(pseudo_srt(rng, n_clips, kWindow), SubtitleFormat::Srt);
  const auto clips = align_subtitles(track, segment_video(source, kWindow, 45));

  const std::int64_t first = (needle_clip - 1) * 90;
  MockDescriptorBackend descriptor({NeedleSpan{source.uri, first, first + 89, out.token}});
  PipelineOptions options;
  options.describe.sleeper = [](std::chrono::milliseconds) {};
  auto index = index_clips(source.id, clips, track, descriptor, encoder, options);
  out.video = VideoData{source, clips, track, std::move(index)};
  return out;
}

struct NeedleOutcome {
  int needle_rank = 0;  // 1-based; 0 when not retrieved
  bool answer_has_token = false;
  bool context_has_token = false;
};

/// Retrieval on: top-k by the given strategy. Retrieval off: the first k
/// clips in temporal order, the same context budget.
inline NeedleOutcome ask_needle(const NeedleVideo& nv, MockEncoder& encoder, ChatBackend& answerer, std::size_t k,
                                FusionStrategy strategy, bool retrieval) {
  const auto question = needle_question(nv.token);
  std::vector<RetrievalHit> hits;
  if (retrieval) {
    const RetrievalQuery query{question, embed_text(question, encoder)};
    hits = retrieve_top_k(query, nv.video.index, {k, strategy});
  } else {
    for (std::size_t i = 1; i <= std::min(k, nv.video.index.size()); ++i) {
      hits.push_back({static_cast<int>(i), 0.0, MatchedKind::Summary});
    }
  }
  NeedleOutcome out;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i].clip_id == nv.needle_clip) out.needle_rank = static_cast<int>(i + 1);
  }
  const auto context = assemble_context(hits, nv.video.index, AnswerStrategy::A, question);
  for (const auto& e : context.entries) {
    if (e.summary_text.find(nv.token) != std::string::npos) out.context_has_token = true;
  }
  const auto answer = answer_question(context, answerer, AnswerStrategy::A);
  out.answer_has_token = answer.text.find(nv.token) != std::string::npos;
  return out;
}

// ---------------------------------------------------------------------------
// Episode benchmark fixtures
// ---------------------------------------------------------------------------

/// `episodes` episodes of `clips_per_episode` 72-second clips at 3 fps with
/// pseudo-word subtitles; every clip carries a needle; one open-ended item
/// per `item_stride` clips asks about that clip's needle.
struct NeedleBenchmark {
  EpisodeManifest manifest;
  std::vector<ClipLevelItem> items;
};

inline NeedleBenchmark make_needle_benchmark(int episodes, int clips_per_episode, int item_stride, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  NeedleBenchmark nb;
  for (int e = 0; e < episodes; ++e) {
    Episode ep;
    ep.episode_id = "ep" + std::to_string(e + 1);
    for (int c = 0; c < clips_per_episode; ++c) {
      EpisodeClip clip;
      clip.clip_id = ep.episode_id + "_c" + std::to_string(c + 1);
      clip.uri = "synthetic://" + clip.clip_id;
      clip.fps = 3.0;
      clip.frame_count = 216;
      clip.duration_ms = 72'000;
      SubtitleTrack t;
      t.cues.push_back({1, 30'000, 34'000, pseudo_sentence(rng, 6)});
      clip.subtitles = serialize_subtitles(t, SubtitleFormat::Srt);
      clip.needle = needle_token(seed, e * 1000 + c);
      if (c % item_stride == 0) {
        ClipLevelItem item;
        item.item_id = clip.clip_id + "_q";
        item.episode_id = ep.episode_id;
        item.clip_id = clip.clip_id;
        item.question = needle_question(*clip.needle);
        item.answer_text = *clip.needle;
        nb.items.push_back(item);
      }
      ep.clips.push_back(std::move(clip));
    }
    nb.manifest.episodes.push_back(std::move(ep));
  }
  return nb;
}

// ---------------------------------------------------------------------------
// Judge reply fixtures
// ---------------------------------------------------------------------------

struct JudgeFixture {
  std::string reply;
  std::optional<JudgeVerdict> want;
};

inline std::vector<JudgeFixture> judge_fixtures() {
  return {
      {"{'pred': 'yes', 'score': 4.8}", JudgeVerdict{true, 5}},
      {"Sure! {\"pred\": \"no\", \"score\": 1}", JudgeVerdict{false, 1}},
      {"maybe", std::nullopt},
      {"{'pred': 'yes', 'score': 5}", JudgeVerdict{true, 5}},
      {"{'pred': 'no', 'score': 0}", JudgeVerdict{false, 0}},
      {"{\"score\": 3, \"pred\": \"yes\"}", JudgeVerdict{true, 3}},
      {"{'pred': 'Yes', 'score': '4'}", JudgeVerdict{true, 4}},
      {"{pred: no, score: 2}", JudgeVerdict{false, 2}},
      {"{'pred': 'yes', 'score': 2.5}", JudgeVerdict{true, 3}},
      {"{'pred': 'yes', 'score': 2.49}", JudgeVerdict{true, 2}},
      {"{'pred': 'yes', 'score': 7}", JudgeVerdict{true, 5}},
      {"{'pred': 'no', 'score': -1}", JudgeVerdict{false, 0}},
      {"{'PRED': 'NO', 'SCORE': 1}", JudgeVerdict{false, 1}},
      {"Here is my evaluation:\n{'pred': 'yes', 'score': 4}\nThanks.", JudgeVerdict{true, 4}},
      {"```python\n{'pred': 'no', 'score': 1}\n```", JudgeVerdict{false, 1}},
      {"{'pred': 'yes'}", std::nullopt},
      {"{'score': 4}", std::nullopt},
      {"{'pred': 'perhaps', 'score': 3}", std::nullopt},
      {"", std::nullopt},
      {"yes, 5", std::nullopt},
      {"{ 'pred' : 'no' , 'score' : 0.4 }", JudgeVerdict{false, 0}},
      {"{'pred':'yes','score':3.0}", JudgeVerdict{true, 3}},
  };
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  static std::atomic<int> counter{0};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("goldfish-test-" + name + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace goldfish::testing
