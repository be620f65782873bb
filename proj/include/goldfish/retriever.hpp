#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "goldfish/embedding_index.hpp"

namespace goldfish {

/// Which keys stand for a clip during retrieval.
enum class FusionStrategy {
  SubtitlesOnly,
  SummaryOnly,
  /// One key per clip: [subtitle ; summary] scored against [query ; query].
  Concatenated,
  /// Both keys of every clip scored independently; a clip ranks by its better key.
  Union,
};

std::string_view to_string(FusionStrategy strategy);
FusionStrategy fusion_strategy_from(std::string_view name);

enum class MatchedKind { Summary, Subtitle, Concatenated };
std::string_view to_string(MatchedKind kind);

struct RetrievalConfig {
  std::size_t k = 3;
  FusionStrategy strategy = FusionStrategy::Union;
};

struct RetrievalQuery {
  std::string question;
  EmbeddingVector embedding;
};

struct ScoredKey {
  int clip_id = 0;
  MatchedKind kind = MatchedKind::Summary;
  double score = 0.0;

  friend bool operator==(const ScoredKey&, const ScoredKey&) = default;
};

struct RetrievalHit {
  int clip_id = 0;
  double score = 0.0;
  MatchedKind matched_kind = MatchedKind::Summary;

  friend bool operator==(const RetrievalHit&, const RetrievalHit&) = default;
};

/// a.b / (|a| |b|), accumulated in double. Throws DimensionMismatch or ZeroVector.
double cosine_similarity(std::span<const float> a, std::span<const float> b);
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Scores the keys the strategy makes eligible, sorted by descending score
/// (ties: lower clip id, then summary before subtitle). Throws EmptyIndex,
/// EncoderMismatch, DimensionMismatch.
std::vector<ScoredKey> score_keys(const RetrievalQuery& query, const EmbeddingIndex& index, FusionStrategy strategy);

/// The k distinct clips with the highest best-key score, ties broken by
/// lower clip id. Fewer than k clips yields all of them.
std::vector<RetrievalHit> retrieve_top_k(const RetrievalQuery& query, const EmbeddingIndex& index,
                                         const RetrievalConfig& config = {});

}  // namespace goldfish
