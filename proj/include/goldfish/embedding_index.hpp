#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "goldfish/backends.hpp"

namespace goldfish {

inline constexpr std::string_view kEmptyTextToken = "[EMPTY]";
inline constexpr std::uint32_t kIndexFormatVersion = 1;
inline constexpr std::string_view kIndexExtension = ".gfidx";

struct EmbeddingVector {
  std::vector<float> values;
  std::string encoder_id;

  std::size_t dim() const { return values.size(); }
  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

enum class KeyKind { Summary, Subtitle };
std::string_view to_string(KeyKind kind);

struct ClipRecord {
  int clip_id = 0;
  std::string summary_text;
  std::string subtitle_text;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;

  friend bool operator==(const ClipRecord&, const ClipRecord&) = default;
};

struct IndexManifest {
  std::string video_id;
  std::size_t dim = 0;
  std::string encoder_id;
  std::size_t record_count = 0;
  std::string created_at;

  friend bool operator==(const IndexManifest&, const IndexManifest&) = default;
};

struct RetrievalKey {
  int clip_id = 0;
  KeyKind kind = KeyKind::Summary;
  const EmbeddingVector* vector = nullptr;
};

/// Two keys (summary, subtitle) per clip, all from one encoder at one
/// dimensionality. The first upsert fixes dim and encoder_id.
class EmbeddingIndex {
 public:
  struct Entry {
    ClipRecord record;
    EmbeddingVector summary;
    EmbeddingVector subtitle;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  explicit EmbeddingIndex(std::string video_id = {}, std::string created_at = {});

  /// Inserts or atomically replaces the record and both keys of a clip.
  /// Throws DimensionMismatch or EncoderMismatch; the index is untouched on error.
  void upsert(ClipRecord record, EmbeddingVector summary_vec, EmbeddingVector subtitle_vec);

  const IndexManifest& manifest() const { return manifest_; }
  const std::map<int, Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t key_count() const { return 2 * entries_.size(); }
  const Entry* find(int clip_id) const;

  /// All 2m keys, ordered by clip id then kind.
  std::vector<RetrievalKey> keys() const;

  friend bool operator==(const EmbeddingIndex&, const EmbeddingIndex&) = default;

 private:
  friend EmbeddingIndex deserialize_index(std::span<const std::uint8_t>, const std::set<std::uint32_t>&);

  IndexManifest manifest_;
  std::map<int, Entry> entries_;
};

/// Current UTC time as ISO-8601.
std::string utc_timestamp();

/// Layout: "GFIDX\n", u32 version, u64 header length, JSON header (manifest
/// and records), f32 vectors (per clip: summary then subtitle), u64 FNV-1a
/// checksum of everything before it. All integers and floats little-endian.
std::vector<std::uint8_t> serialize_index(const EmbeddingIndex& index);
EmbeddingIndex deserialize_index(std::span<const std::uint8_t> bytes,
                                 const std::set<std::uint32_t>& supported_versions = {kIndexFormatVersion});

void save_index(const EmbeddingIndex& index, const std::filesystem::path& path);
EmbeddingIndex load_index(const std::filesystem::path& path,
                          const std::set<std::uint32_t>& supported_versions = {kIndexFormatVersion});

/// Encodes texts in one backend call. Blank texts are sent as kEmptyTextToken.
/// Throws DimensionMismatch when a returned vector length differs from the
/// backend-reported dim (or from expected_dim when non-zero).
std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts, EmbeddingBackend& backend,
                                         std::size_t expected_dim = 0);

EmbeddingVector embed_text(const std::string& text, EmbeddingBackend& backend, std::size_t expected_dim = 0);

}  // namespace goldfish
