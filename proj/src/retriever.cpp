#include "goldfish/retriever.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "goldfish/error.hpp"
#include "goldfish/text_util.hpp"

namespace goldfish {

std::string_view to_string(FusionStrategy strategy) {
  switch (strategy) {
    case FusionStrategy::SubtitlesOnly: return "subtitles";
    case FusionStrategy::SummaryOnly: return "summary";
    case FusionStrategy::Concatenated: return "and";
    case FusionStrategy::Union: return "or";
  }
  return "or";
}

FusionStrategy fusion_strategy_from(std::string_view name) {
  const auto n = text::to_lower(name);
  if (n == "subtitles" || n == "subtitle" || n == "subtitles_only") return FusionStrategy::SubtitlesOnly;
  if (n == "summary" || n == "summary_only") return FusionStrategy::SummaryOnly;
  if (n == "and" || n == "concatenated" || n == "concat") return FusionStrategy::Concatenated;
  if (n == "or" || n == "union") return FusionStrategy::Union;
  throw Error(ErrorCode::InvalidArgument, "unknown fusion strategy '" + std::string(name) + "'");
}

std::string_view to_string(MatchedKind kind) {
  switch (kind) {
    case MatchedKind::Summary: return "summary";
    case MatchedKind::Subtitle: return "subtitle";
    case MatchedKind::Concatenated: return "concatenated";
  }
  return "summary";
}

namespace {

struct DotNorms {
  double dot = 0.0;
  double aa = 0.0;
  double bb = 0.0;
};

DotNorms dot_norms(std::span<const float> a, std::span<const float> b) {
  DotNorms r;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i];
    const double y = b[i];
    r.dot += x * y;
    r.aa += x * x;
    r.bb += y * y;
  }
  return r;
}

bool ranks_before(const ScoredKey& a, const ScoredKey& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.clip_id != b.clip_id) return a.clip_id < b.clip_id;
  return a.kind < b.kind;
}

void check_query(const RetrievalQuery& query, const EmbeddingIndex& index) {
  if (index.empty()) throw Error(ErrorCode::EmptyIndex, "index '" + index.manifest().video_id + "' has no clips");
  if (query.embedding.encoder_id != index.manifest().encoder_id) {
    throw Error(ErrorCode::EncoderMismatch, "query encoded by '" + query.embedding.encoder_id + "', index by '" +
                                                index.manifest().encoder_id + "'");
  }
  if (query.embedding.dim() != index.manifest().dim) {
    throw Error(ErrorCode::DimensionMismatch, "query dim " + std::to_string(query.embedding.dim()) +
                                                  ", index dim " + std::to_string(index.manifest().dim));
  }
}

}  // namespace

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  const auto r = dot_norms(a, b);
  if (r.aa == 0.0 || r.bb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector is undefined");
  return r.dot / (std::sqrt(r.aa) * std::sqrt(r.bb));
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  return cosine_similarity(std::span<const float>(a.values), std::span<const float>(b.values));
}

std::vector<ScoredKey> score_keys(const RetrievalQuery& query, const EmbeddingIndex& index, FusionStrategy strategy) {
  check_query(query, index);
  const std::span<const float> q = query.embedding.values;

  std::vector<ScoredKey> scored;
  scored.reserve(strategy == FusionStrategy::Union ? index.key_count() : index.size());
  for (const auto& [id, entry] : index.entries()) {
    switch (strategy) {
      case FusionStrategy::SummaryOnly:
        scored.push_back({id, MatchedKind::Summary, cosine_similarity(q, entry.summary.values)});
        break;
      case FusionStrategy::SubtitlesOnly:
        scored.push_back({id, MatchedKind::Subtitle, cosine_similarity(q, entry.subtitle.values)});
        break;
      case FusionStrategy::Union:
        scored.push_back({id, MatchedKind::Summary, cosine_similarity(q, entry.summary.values)});
        scored.push_back({id, MatchedKind::Subtitle, cosine_similarity(q, entry.subtitle.values)});
        break;
      case FusionStrategy::Concatenated: {
        // cos([sub; sum], [q; q]) = (sub.q + sum.q) / (sqrt(|sub|^2 + |sum|^2) * sqrt(2) |q|)
        const auto sub = dot_norms(entry.subtitle.values, q);
        const auto sum = dot_norms(entry.summary.values, q);
        const double key_norm2 = sub.aa + sum.aa;
        if (key_norm2 == 0.0 || sub.bb == 0.0) throw Error(ErrorCode::ZeroVector, "clip " + std::to_string(id));
        const double score = (sub.dot + sum.dot) / (std::sqrt(key_norm2) * std::sqrt(2.0 * sub.bb));
        scored.push_back({id, MatchedKind::Concatenated, score});
        break;
      }
    }
  }
  std::sort(scored.begin(), scored.end(), ranks_before);
  return scored;
}

std::vector<RetrievalHit> retrieve_top_k(const RetrievalQuery& query, const EmbeddingIndex& index,
                                         const RetrievalConfig& config) {
  if (config.k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  const auto scored = score_keys(query, index, config.strategy);

  // scored is already in rank order, so the first key seen for a clip is its best.
  std::vector<RetrievalHit> hits;
  hits.reserve(std::min(config.k, index.size()));
  std::unordered_map<int, bool> seen;
  for (const auto& key : scored) {
    if (!seen.emplace(key.clip_id, true).second) continue;
    hits.push_back({key.clip_id, key.score, key.kind});
    if (hits.size() == config.k) break;
  }
  return hits;
}

}  // namespace goldfish
