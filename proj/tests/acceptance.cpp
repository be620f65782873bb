// Acceptance runner: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "goldfish/benchmark.hpp"
#include "goldfish/config.hpp"
#include "goldfish/engine.hpp"
#include "goldfish/error.hpp"
#include "support/fixtures.hpp"

using namespace goldfish;
namespace gt = goldfish::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_s;  // 0: no runtime bound
  std::function<Outcome()> run;
};

constexpr FusionStrategy kAll[] = {FusionStrategy::SubtitlesOnly, FusionStrategy::SummaryOnly,
                                   FusionStrategy::Concatenated, FusionStrategy::Union};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

Outcome retrieval_oracle() {
  std::mt19937_64 rng(20240101);
  std::uniform_int_distribution<std::size_t> m_dist(1, 1000), dim_dist(1, 64), k_dist(1, 12);
  std::size_t indexes = 0, comparisons = 0, mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto m = trial < 10 ? std::size_t{1000} : m_dist(rng);
    const auto dim = dim_dist(rng);
    const auto index = gt::random_index(rng, m, dim);
    ++indexes;
    const auto query = gt::random_query(rng, dim);
    const auto k = trial % 50 == 0 ? m + 3 : k_dist(rng);
    for (auto s : kAll) {
      ++comparisons;
      if (!gt::matches_oracle(query, index, s, k)) ++mismatches;
    }
  }
  return {mismatches == 0 && indexes >= 1000, std::to_string(indexes) + " indexes, " + std::to_string(comparisons) +
                                                  " comparisons, " + std::to_string(mismatches) + " mismatches"};
}

Outcome cosine_correctness() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> dim_dist(1, 64);
  std::size_t failures = 0;
  for (int i = 0; i < 20'000; ++i) {
    const auto dim = dim_dist(rng);
    const auto a = gt::random_vector(rng, dim);
    const auto b = gt::random_vector(rng, dim);
    const double ab = cosine_similarity(a, b);
    if (ab != cosine_similarity(b, a) || std::abs(ab) > 1.0 + 1e-6) ++failures;
  }
  const EmbeddingVector x{{1, 2, 3}, "e"}, y{{4, 5, 6}, "e"};
  const double hand = cosine_similarity(x, y);
  const bool hand_ok = std::abs(hand - 0.974631846) <= 1e-9;

  // Positive scaling of the query: exact equality for exactly representable
  // scalings; arbitrary factors must keep the ranking.
  std::size_t scale_failures = 0, rank_failures = 0;
  std::uniform_real_distribution<float> any(0.001f, 1000.0f);
  for (int trial = 0; trial < 200; ++trial) {
    const auto index = gt::random_index(rng, 100, 16);
    const auto q = gt::random_query(rng, 16);
    for (auto s : kAll) {
      const auto base = retrieve_top_k(q, index, {10, s});
      for (float f : {0.125f, 0.5f, 2.0f, 64.0f, 4096.0f}) {
        auto scaled = q;
        for (auto& v : scaled.embedding.values) v *= f;
        if (retrieve_top_k(scaled, index, {10, s}) != base) ++scale_failures;
      }
      auto scaled = q;
      const float f = any(rng);
      for (auto& v : scaled.embedding.values) v *= f;
      const auto hits = retrieve_top_k(scaled, index, {10, s});
      for (std::size_t j = 0; j < hits.size(); ++j) {
        if (hits[j].clip_id != base[j].clip_id || std::abs(hits[j].score - base[j].score) > 1e-6) ++rank_failures;
      }
    }
  }
  return {failures == 0 && hand_ok && scale_failures == 0 && rank_failures == 0,
          "hand value " + fmt(hand) + ", " + std::to_string(failures) + " symmetry/bound failures, " +
              std::to_string(scale_failures) + " exact-scaling failures, " + std::to_string(rank_failures) +
              " ranking changes under arbitrary scaling"};
}

Outcome segmentation_alignment() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::int64_t> frames_dist(1, 20'000);
  std::uniform_int_distribution<int> l_dist(1, 60), fps_pick(0, 5);
  std::uniform_int_distribution<std::int64_t> window_dist(500, 120'000);
  const double fps_choices[] = {1.0, 3.0, 23.976, 25.0, 29.97, 60.0};
  std::size_t trials = 0, violations = 0, spanning = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    ++trials;
    const double fps = fps_choices[fps_pick(rng)];
    const auto frame_count = frames_dist(rng);
    const auto window = window_dist(rng);
    const int max_frames = l_dist(rng);
    const VideoSource source{"v", "file://v", fps, frame_count, 0, 0, 0};
    const auto duration = nominal_duration_ms(fps, frame_count);
    const auto clips = segment_video(source, window, max_frames);

    // Random cues with unique tokens, some forced across clip boundaries.
    SubtitleTrack track;
    std::uniform_int_distribution<std::int64_t> t_dist(0, std::max<std::int64_t>(0, duration - 1));
    for (int c = 0; c < 12; ++c) {
      std::int64_t start = t_dist(rng);
      if (c % 3 == 0 && clips.size() > 1) {
        const auto& boundary = clips[static_cast<std::size_t>(c) % (clips.size() - 1)];
        start = std::max<std::int64_t>(0, boundary.end_ms - 400);
      }
      track.cues.push_back({c + 1, start, start + 800, "tok" + std::to_string(c) + "q"});
    }
    std::stable_sort(track.cues.begin(), track.cues.end(),
                     [](const SubtitleCue& a, const SubtitleCue& b) { return a.start_ms < b.start_ms; });
    const auto aligned = align_subtitles(track, clips);

    bool ok = !clips.empty() && clips.front().start_ms == 0 && clips.back().end_ms == duration;
    std::int64_t last_frame = -1;
    for (std::size_t i = 0; i < clips.size() && ok; ++i) {
      const auto& c = clips[i];
      ok = c.clip_id == static_cast<int>(i + 1) && c.start_ms < c.end_ms;
      if (i + 1 < clips.size()) ok = ok && c.end_ms == clips[i + 1].start_ms;
      ok = ok && c.frame_indices.size() <= static_cast<std::size_t>(max_frames);
      for (auto f : c.frame_indices) {
        const double t = static_cast<double>(f) * 1000.0 / fps;
        ok = ok && f > last_frame && f < frame_count && t >= static_cast<double>(c.start_ms) - 1e-6 &&
             t < static_cast<double>(c.end_ms);
        last_frame = f;
      }
    }
    for (const auto& cue : track.cues) {
      int hits = 0;
      for (const auto& c : aligned) {
        const bool overlaps = cue.start_ms < c.end_ms && c.start_ms < cue.end_ms;
        const bool present = c.subtitle_text.find(cue.text) != std::string::npos;
        ok = ok && overlaps == present;
        hits += present;
      }
      if (hits >= 2) ++spanning;
    }
    if (!ok) ++violations;
  }
  return {violations == 0 && spanning > 0, std::to_string(trials) + " randomized videos, " + std::to_string(spanning) +
                                               " boundary-spanning cues, " + std::to_string(violations) +
                                               " violations"};
}

Outcome planted_needle() {
  MockEncoder encoder;
  KeywordAnswerer answerer;
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<int> where(1, 200);
  int rank1 = 0, answered = 0;
  for (int p = 0; p < 100; ++p) {
    const auto nv = gt::make_needle_video(200, where(rng), 5000 + static_cast<std::uint64_t>(p), encoder);
    const auto o = gt::ask_needle(nv, encoder, answerer, 3, FusionStrategy::Union, true);
    rank1 += o.needle_rank == 1;
    answered += o.answer_has_token;
  }
  return {rank1 == 100 && answered == 100,
          "rank 1 in " + std::to_string(rank1) + "/100, token in answer " + std::to_string(answered) + "/100"};
}

Outcome length_robustness() {
  const auto dir = gt::temp_dir("acceptance-length");
  EngineConfig config;
  config.index_dir = dir;
  config.retry_backoff = std::chrono::milliseconds(1);
  Engine engine(config);
  const auto nb = gt::make_needle_benchmark(4, 30, 3, 777);
  const auto bench = build_benchmark(nb.items, nb.manifest, 0);
  std::vector<double> acc;
  std::string detail;
  for (int n : {5, 10, 20}) {
    const auto report = engine.run_benchmark(bench, {n, std::nullopt});
    acc.push_back(report.retrieval_accuracy);
    if (!detail.empty()) detail += ", ";
    detail += "window " + std::to_string(n) + ": " + fmt(report.retrieval_accuracy) + " over " +
              std::to_string(report.n_items) + " items";
  }
  std::filesystem::remove_all(dir);
  return {acc[0] == acc[1] && acc[1] == acc[2], detail};
}

Outcome no_retrieval() {
  MockEncoder encoder;
  KeywordAnswerer answerer;
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> where(1, 200);
  constexpr int kPlacements = 100;
  int excluded = 0, without = 0, with = 0;
  for (int p = 0; p < kPlacements; ++p) {
    const auto nv = gt::make_needle_video(200, where(rng), 9000 + static_cast<std::uint64_t>(p), encoder);
    const auto off = gt::ask_needle(nv, encoder, answerer, 3, FusionStrategy::Union, false);
    const auto on = gt::ask_needle(nv, encoder, answerer, 3, FusionStrategy::Union, true);
    excluded += !off.context_has_token;
    without += off.answer_has_token;
    with += on.answer_has_token;
  }
  const double exclusion = excluded / double(kPlacements);
  const double rate_off = without / double(kPlacements);
  const double rate_on = with / double(kPlacements);
  return {exclusion >= 0.9 && rate_off < 0.1 && rate_on == 1.0,
          "budget excludes needle in " + fmt(exclusion * 100) + "% of placements; containment " + fmt(rate_off * 100) +
              "% without retrieval vs " + fmt(rate_on * 100) + "% with"};
}

Outcome judge_parser() {
  const auto fixtures = gt::judge_fixtures();
  std::size_t agree = 0;
  for (const auto& f : fixtures) agree += parse_judge_verdict(f.reply) == f.want;
  const auto example = parse_judge_verdict("{'pred': 'yes', 'score': 4.8}");
  const bool rounds = example && example->score == 5;
  return {fixtures.size() >= 20 && agree == fixtures.size() && rounds,
          std::to_string(agree) + "/" + std::to_string(fixtures.size()) + " fixtures agree, 4.8 -> " +
              (example ? std::to_string(example->score) : std::string("none"))};
}

Outcome report_arithmetic() {
  std::vector<BenchmarkItem> items(10);
  std::vector<std::vector<std::string>> hits(10, std::vector<std::string>{"g"});
  std::vector<ItemOutcome> outcomes;
  const int scores[10] = {5, 5, 5, 5, 5, 5, 4, 2, 1, 1};
  for (std::size_t i = 0; i < 10; ++i) {
    items[i].gt_clip_id = "g";
    outcomes.push_back(ItemOutcome::from_verdict(JudgeVerdict{i < 7, scores[i]}, "p"));
  }
  const auto report = compute_report(items, hits, outcomes, 3);
  const bool exact = report.accuracy == 0.70 && report.mean_score == 3.8;

  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> clip(0, 14), len(0, 15);
  std::size_t violations = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<BenchmarkItem> its(25);
    std::vector<std::vector<std::string>> hs(25);
    std::vector<ItemOutcome> os(25);
    for (std::size_t i = 0; i < its.size(); ++i) {
      its[i].gt_clip_id = std::to_string(clip(rng));
      const int n = len(rng);
      for (int j = 0; j < n; ++j) hs[i].push_back(std::to_string(clip(rng)));
    }
    double prev = -1.0;
    for (std::size_t k = 1; k <= 16; ++k) {
      const double acc = compute_report(its, hs, os, k).retrieval_accuracy;
      if (acc < prev) ++violations;
      prev = acc;
    }
  }
  return {exact && violations == 0, "accuracy " + fmt(report.accuracy) + ", mean_score " + fmt(report.mean_score) +
                                        ", " + std::to_string(violations) + " monotonicity violations in 500 trials"};
}

Outcome config_parity() {
  const auto path = std::filesystem::path(GOLDFISH_SOURCE_DIR) / "config" / "goldfish.json";
  const auto c = load_config(path, [](const std::string&) { return std::optional<std::string>(); });
  const EngineConfig defaults;
  const bool ok = c.k == 3 && c.fusion == FusionStrategy::Union && c.answer_strategy == AnswerStrategy::A &&
                  c.max_frames == 45 && defaults.k == 3 && defaults.fusion == FusionStrategy::Union &&
                  defaults.answer_strategy == AnswerStrategy::A && defaults.max_frames == 45;
  return {ok, "k=" + std::to_string(c.k) + " fusion=" + std::string(to_string(c.fusion)) +
                  " answer_strategy=" + std::string(to_string(c.answer_strategy)) +
                  " max_frames=" + std::to_string(c.max_frames)};
}

Outcome index_persistence() {
  const auto dir = gt::temp_dir("acceptance-persist");
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> m_dist(1, 300), dim_dist(1, 64);
  std::size_t identical = 0, rejected = 0;
  constexpr int kTrials = 200;
  for (int t = 0; t < kTrials; ++t) {
    const auto index = gt::random_index(rng, m_dist(rng), dim_dist(rng));
    const auto path = dir / ("i" + std::to_string(t) + ".gfidx");
    save_index(index, path);
    const auto loaded = load_index(path);
    if (loaded == index && serialize_index(loaded) == serialize_index(index)) ++identical;

    auto bytes = serialize_index(index);
    bytes[bytes.size() - 1 - static_cast<std::size_t>(t % 8)] ^= 0x5a;
    try {
      deserialize_index(bytes);
    } catch (const Error& e) {
      rejected += e.code() == ErrorCode::CorruptIndex;
    }
  }
  std::filesystem::remove_all(dir);
  return {identical == kTrials && rejected == kTrials,
          std::to_string(identical) + "/" + std::to_string(kTrials) + " byte-identical round trips, " +
              std::to_string(rejected) + "/" + std::to_string(kTrials) + " corrupted checksums rejected"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"retrieval-oracle-equivalence", 60, retrieval_oracle},
      {"cosine-correctness", 0, cosine_correctness},
      {"segmentation-alignment-invariants", 10, segmentation_alignment},
      {"planted-needle-end-to-end", 10, planted_needle},
      {"length-robustness", 0, length_robustness},
      {"no-retrieval-degradation", 10, no_retrieval},
      {"judge-output-parser", 0, judge_parser},
      {"report-arithmetic", 0, report_arithmetic},
      {"configuration-parity", 0, config_parity},
      {"index-persistence", 0, index_persistence},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = o.pass;
    std::string timing = fmt(secs) + " s";
    if (c.budget_s > 0) {
      timing += " (limit " + fmt(c.budget_s) + " s)";
      pass = pass && secs < c.budget_s;
    }
    std::printf("%s %s: %s; %s\n", pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
    failed += !pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
