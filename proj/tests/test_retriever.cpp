#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "goldfish/error.hpp"
#include "goldfish/retriever.hpp"
#include "support/fixtures.hpp"

using namespace goldfish;
using goldfish::testing::matches_oracle;
using goldfish::testing::random_index;
using goldfish::testing::random_query;

namespace {

constexpr FusionStrategy kAll[] = {FusionStrategy::SubtitlesOnly, FusionStrategy::SummaryOnly,
                                   FusionStrategy::Concatenated, FusionStrategy::Union};

EmbeddingVector v(std::vector<float> x) { return {std::move(x), "enc"}; }

RetrievalQuery query(std::vector<float> x) { return {"q", v(std::move(x))}; }

template <class F>
ErrorCode code_of(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::IoError;
}

}  // namespace

TEST(Cosine, HandValues) {
  EXPECT_DOUBLE_EQ(cosine_similarity(v({1, 0, 0}), v({1, 0, 0})), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(v({1, 0}), v({0, 1})), 0.0);
  // 32 / sqrt(14 * 77)
  EXPECT_NEAR(cosine_similarity(v({1, 2, 3}), v({4, 5, 6})), 0.974631846, 1e-9);
  EXPECT_NEAR(cosine_similarity(v({1, 2, 3}), v({4, 5, 6})), 32.0 / std::sqrt(1078.0), 1e-15);
}

TEST(Cosine, Errors) {
  EXPECT_EQ(code_of([] { cosine_similarity(v({0, 0}), v({1, 0})); }), ErrorCode::ZeroVector);
  EXPECT_EQ(code_of([] { cosine_similarity(v({1, 0}), v({1, 0, 0})); }), ErrorCode::DimensionMismatch);
}

TEST(Cosine, SymmetricAndBounded) {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<std::size_t> d(1, 64);
  for (int i = 0; i < 5000; ++i) {
    const auto n = d(rng);
    const auto a = goldfish::testing::random_vector(rng, n);
    const auto b = goldfish::testing::random_vector(rng, n);
    const double ab = cosine_similarity(a, b);
    EXPECT_EQ(ab, cosine_similarity(b, a));
    EXPECT_LE(std::abs(ab), 1.0 + 1e-6);
    EXPECT_LE(std::abs(cosine_similarity(a, a)), 1.0 + 1e-6);
  }
}

TEST(ScoreKeys, CountsPerStrategy) {
  EmbeddingIndex index("v");
  index.upsert({1, "a", "b", 0, 1}, v({1, 0}), v({0, 1}));
  index.upsert({2, "c", "d", 1, 2}, v({1, 1}), v({1, -1}));
  const auto q = query({1, 0});
  EXPECT_EQ(score_keys(q, index, FusionStrategy::Union).size(), 4u);
  EXPECT_EQ(score_keys(q, index, FusionStrategy::Concatenated).size(), 2u);
  EXPECT_EQ(score_keys(q, index, FusionStrategy::SummaryOnly).size(), 2u);
  EXPECT_EQ(score_keys(q, index, FusionStrategy::SubtitlesOnly).size(), 2u);
  for (const auto& k : score_keys(q, index, FusionStrategy::SubtitlesOnly)) EXPECT_EQ(k.kind, MatchedKind::Subtitle);
  for (const auto& k : score_keys(q, index, FusionStrategy::SummaryOnly)) EXPECT_EQ(k.kind, MatchedKind::Summary);
}

TEST(ScoreKeys, ConcatenatedDuplicatedQuery) {
  // E_sub = T_Q, E_sum orthogonal, all unit: [T_Q; 0-ish] . [T_Q; T_Q] = 1,
  // |key| = sqrt(2), |query| = sqrt(2)  ->  1/2.
  EmbeddingIndex index("v");
  index.upsert({1, "s", "u", 0, 1}, v({0, 1, 0}), v({1, 0, 0}));
  const auto scored = score_keys(query({1, 0, 0}), index, FusionStrategy::Concatenated);
  ASSERT_EQ(scored.size(), 1u);
  EXPECT_EQ(scored[0].kind, MatchedKind::Concatenated);
  EXPECT_NEAR(scored[0].score, 0.5, 1e-12);
  // Independent check by building the 6-d vectors explicitly.
  EXPECT_NEAR(cosine_similarity(v({1, 0, 0, 0, 1, 0}), v({1, 0, 0, 1, 0, 0})), 0.5, 1e-12);
}

TEST(ScoreKeys, Errors) {
  EmbeddingIndex empty("v");
  EXPECT_EQ(code_of([&] { score_keys(query({1}), empty, FusionStrategy::Union); }), ErrorCode::EmptyIndex);
  EmbeddingIndex index("v");
  index.upsert({1, "s", "u", 0, 1}, v({1, 0}), v({0, 1}));
  EXPECT_EQ(code_of([&] { score_keys(query({1, 0, 0}), index, FusionStrategy::Union); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { score_keys(RetrievalQuery{"q", {{1, 0}, "other"}}, index, FusionStrategy::Union); }),
            ErrorCode::EncoderMismatch);
  EXPECT_EQ(code_of([&] { retrieve_top_k(query({1, 0}), index, {0, FusionStrategy::Union}); }),
            ErrorCode::InvalidArgument);
}

TEST(RetrieveTopK, FewerClipsThanK) {
  EmbeddingIndex index("v");
  index.upsert({1, "s", "u", 0, 1}, v({1, 0}), v({0, 1}));
  index.upsert({2, "s", "u", 1, 2}, v({0, 1}), v({1, 0}));
  for (auto s : kAll) EXPECT_EQ(retrieve_top_k(query({1, 0}), index, {3, s}).size(), 2u);
}

TEST(RetrieveTopK, TieGoesToLowerClipId) {
  EmbeddingIndex index("v");
  for (int i = 1; i <= 10; ++i) {
    const bool tied = i == 4 || i == 9;
    index.upsert({i, "s", "u", 0, 1}, v({tied ? 1.0f : 0.1f, 1}), v({0, 1}));
  }
  const auto hits = retrieve_top_k(query({1, 0}), index, {2, FusionStrategy::SummaryOnly});
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].clip_id, 4);
  EXPECT_EQ(hits[1].clip_id, 9);
  EXPECT_EQ(hits[0].score, hits[1].score);
}

TEST(RetrieveTopK, UnionDedupAtMaxScore) {
  EmbeddingIndex index("v");
  index.upsert({1, "s", "u", 0, 1}, v({1, 0.1f}), v({1, 0}));  // both keys near the query
  index.upsert({2, "s", "u", 0, 1}, v({0.5f, 1}), v({0, 1}));
  const auto hits = retrieve_top_k(query({1, 0}), index, {2, FusionStrategy::Union});
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].clip_id, 1);
  EXPECT_EQ(hits[0].matched_kind, MatchedKind::Subtitle);
  EXPECT_DOUBLE_EQ(hits[0].score, 1.0);
  EXPECT_EQ(hits[1].clip_id, 2);
}

TEST(RetrieveTopK, MatchesBruteForceOn50Clips) {
  std::mt19937_64 rng(50);
  for (int trial = 0; trial < 40; ++trial) {
    const auto index = random_index(rng, 50, 16);
    const auto q = random_query(rng, 16);
    for (auto s : kAll) {
      for (std::size_t k : {1u, 3u, 10u, 50u, 80u}) EXPECT_TRUE(matches_oracle(q, index, s, k));
    }
  }
}

TEST(RetrieveTopK, HitsSortedAndDistinct) {
  std::mt19937_64 rng(51);
  const auto index = random_index(rng, 200, 8);
  for (int i = 0; i < 50; ++i) {
    const auto q = random_query(rng, 8);
    for (auto s : kAll) {
      const auto hits = retrieve_top_k(q, index, {20, s});
      std::set<int> ids;
      for (std::size_t j = 0; j < hits.size(); ++j) {
        EXPECT_TRUE(ids.insert(hits[j].clip_id).second);
        if (j) {
          EXPECT_GE(hits[j - 1].score, hits[j].score);
        }
      }
    }
  }
}

TEST(RetrieveTopK, UnionScoreIsMaxOfKeys) {
  std::mt19937_64 rng(52);
  const auto index = random_index(rng, 100, 12);
  const auto q = random_query(rng, 12);
  for (const auto& h : retrieve_top_k(q, index, {100, FusionStrategy::Union})) {
    const auto* e = index.find(h.clip_id);
    const double best = std::max(cosine_similarity(q.embedding.values, e->summary.values),
                                 cosine_similarity(q.embedding.values, e->subtitle.values));
    EXPECT_EQ(h.score, best);
  }
}

TEST(RetrieveTopK, PrefixProperty) {
  std::mt19937_64 rng(53);
  const auto index = random_index(rng, 120, 10);
  for (int i = 0; i < 20; ++i) {
    const auto q = random_query(rng, 10);
    for (auto s : kAll) {
      const auto big = retrieve_top_k(q, index, {40, s});
      for (std::size_t k = 1; k <= 40; k += 7) {
        const auto small = retrieve_top_k(q, index, {k, s});
        ASSERT_LE(small.size(), big.size());
        EXPECT_TRUE(std::equal(small.begin(), small.end(), big.begin()));
      }
    }
  }
}

TEST(RetrieveTopK, InvariantUnderQueryScaling) {
  std::mt19937_64 rng(54);
  const auto index = random_index(rng, 100, 16);
  std::uniform_real_distribution<float> any(0.01f, 100.0f);
  for (int i = 0; i < 30; ++i) {
    const auto q = random_query(rng, 16);
    for (auto s : kAll) {
      const auto base = retrieve_top_k(q, index, {10, s});
      // Power-of-two factors scale every float exactly, so scores are identical.
      for (float f : {0.25f, 2.0f, 1024.0f}) {
        auto scaled = q;
        for (auto& x : scaled.embedding.values) x *= f;
        EXPECT_EQ(retrieve_top_k(scaled, index, {10, s}), base);
      }
      // Arbitrary factors: same ranking, scores equal to rounding.
      auto scaled = q;
      const float f = any(rng);
      for (auto& x : scaled.embedding.values) x *= f;
      const auto hits = retrieve_top_k(scaled, index, {10, s});
      ASSERT_EQ(hits.size(), base.size());
      for (std::size_t j = 0; j < hits.size(); ++j) {
        EXPECT_NEAR(hits[j].score, base[j].score, 1e-6);
      }
    }
  }
}

TEST(FusionStrategyNames, RoundTrip) {
  for (auto s : kAll) EXPECT_EQ(fusion_strategy_from(to_string(s)), s);
  EXPECT_EQ(fusion_strategy_from("Union"), FusionStrategy::Union);
  EXPECT_EQ(fusion_strategy_from("concatenated"), FusionStrategy::Concatenated);
  EXPECT_THROW(fusion_strategy_from("xor"), Error);
}
