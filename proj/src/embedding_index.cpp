#include "goldfish/embedding_index.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>

#include <nlohmann/json.hpp>

#include "goldfish/error.hpp"
#include "goldfish/text_util.hpp"

namespace goldfish {

using json = nlohmann::json;

std::string_view to_string(KeyKind kind) { return kind == KeyKind::Summary ? "summary" : "subtitle"; }

EmbeddingIndex::EmbeddingIndex(std::string video_id, std::string created_at) {
  manifest_.video_id = std::move(video_id);
  manifest_.created_at = created_at.empty() ? utc_timestamp() : std::move(created_at);
}

void EmbeddingIndex::upsert(ClipRecord record, EmbeddingVector summary_vec, EmbeddingVector subtitle_vec) {
  if (summary_vec.dim() == 0 || summary_vec.dim() != subtitle_vec.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "summary/subtitle vectors have dims " +
                                                  std::to_string(summary_vec.dim()) + " and " +
                                                  std::to_string(subtitle_vec.dim()));
  }
  if (summary_vec.encoder_id != subtitle_vec.encoder_id) {
    throw Error(ErrorCode::EncoderMismatch,
                "keys of one clip come from '" + summary_vec.encoder_id + "' and '" + subtitle_vec.encoder_id + "'");
  }
  if (!entries_.empty()) {
    if (summary_vec.dim() != manifest_.dim) {
      throw Error(ErrorCode::DimensionMismatch, "index dim is " + std::to_string(manifest_.dim) + ", got " +
                                                    std::to_string(summary_vec.dim()));
    }
    if (summary_vec.encoder_id != manifest_.encoder_id) {
      throw Error(ErrorCode::EncoderMismatch,
                  "index encoder is '" + manifest_.encoder_id + "', got '" + summary_vec.encoder_id + "'");
    }
  } else {
    manifest_.dim = summary_vec.dim();
    manifest_.encoder_id = summary_vec.encoder_id;
  }
  const int id = record.clip_id;
  entries_.insert_or_assign(id, Entry{std::move(record), std::move(summary_vec), std::move(subtitle_vec)});
  manifest_.record_count = entries_.size();
}

const EmbeddingIndex::Entry* EmbeddingIndex::find(int clip_id) const {
  const auto it = entries_.find(clip_id);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<RetrievalKey> EmbeddingIndex::keys() const {
  std::vector<RetrievalKey> out;
  out.reserve(key_count());
  for (const auto& [id, entry] : entries_) {
    out.push_back({id, KeyKind::Summary, &entry.summary});
    out.push_back({id, KeyKind::Subtitle, &entry.subtitle});
  }
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

constexpr std::string_view kMagic = "GFIDX\n";

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::is_integral_v<T>);
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(u & 0xFF));
    u = static_cast<U>(u >> 8);
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(static_cast<U>(bytes[offset + i]) << (8 * i));
  return static_cast<T>(u);
}

void put_f32(std::vector<std::uint8_t>& out, float f) { put_le(out, std::bit_cast<std::uint32_t>(f)); }

float get_f32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return std::bit_cast<float>(get_le<std::uint32_t>(bytes, offset));
}

[[noreturn]] void corrupt(const std::string& why) { throw Error(ErrorCode::CorruptIndex, why); }

}  // namespace

std::vector<std::uint8_t> serialize_index(const EmbeddingIndex& index) {
  const auto& m = index.manifest();
  json records = json::array();
  for (const auto& [id, e] : index.entries()) {
    records.push_back({{"clip_id", e.record.clip_id},
                       {"summary_text", e.record.summary_text},
                       {"subtitle_text", e.record.subtitle_text},
                       {"start_ms", e.record.start_ms},
                       {"end_ms", e.record.end_ms}});
  }
  const json header = {
      {"manifest",
       {{"video_id", m.video_id},
        {"dim", m.dim},
        {"encoder_id", m.encoder_id},
        {"record_count", m.record_count},
        {"created_at", m.created_at}}},
      {"records", std::move(records)},
  };
  const std::string header_text = header.dump();

  std::vector<std::uint8_t> out;
  out.reserve(kMagic.size() + 12 + header_text.size() + index.key_count() * m.dim * 4 + 8);
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  put_le<std::uint32_t>(out, kIndexFormatVersion);
  put_le<std::uint64_t>(out, header_text.size());
  out.insert(out.end(), header_text.begin(), header_text.end());
  for (const auto& [id, e] : index.entries()) {
    for (float f : e.summary.values) put_f32(out, f);
    for (float f : e.subtitle.values) put_f32(out, f);
  }
  put_le<std::uint64_t>(out, text::fnv1a64(out));
  return out;
}

EmbeddingIndex deserialize_index(std::span<const std::uint8_t> bytes, const std::set<std::uint32_t>& supported_versions) {
  const std::size_t fixed = kMagic.size() + 4 + 8;
  if (bytes.size() < fixed + 8) corrupt("file too short");
  if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) corrupt("bad magic");

  const auto stored_checksum = get_le<std::uint64_t>(bytes, bytes.size() - 8);
  if (text::fnv1a64(bytes.first(bytes.size() - 8)) != stored_checksum) corrupt("checksum mismatch");

  const auto version = get_le<std::uint32_t>(bytes, kMagic.size());
  if (!supported_versions.contains(version)) {
    throw Error(ErrorCode::VersionUnsupported, "index format version " + std::to_string(version));
  }
  const auto header_len = get_le<std::uint64_t>(bytes, kMagic.size() + 4);
  if (header_len > bytes.size() - fixed - 8) corrupt("header length out of range");

  json header;
  try {
    header = json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(fixed),
                         bytes.begin() + static_cast<std::ptrdiff_t>(fixed + header_len));
  } catch (const json::exception& e) {
    corrupt(std::string("header: ") + e.what());
  }

  EmbeddingIndex index;
  try {
    const auto& m = header.at("manifest");
    index.manifest_.video_id = m.at("video_id").get<std::string>();
    index.manifest_.dim = m.at("dim").get<std::size_t>();
    index.manifest_.encoder_id = m.at("encoder_id").get<std::string>();
    index.manifest_.record_count = m.at("record_count").get<std::size_t>();
    index.manifest_.created_at = m.at("created_at").get<std::string>();

    const auto& records = header.at("records");
    if (records.size() != index.manifest_.record_count) corrupt("record_count disagrees with records");
    const std::size_t dim = index.manifest_.dim;
    const std::size_t blob_bytes = records.size() * 2 * dim * 4;
    if (fixed + header_len + blob_bytes + 8 != bytes.size()) corrupt("vector blob has the wrong size");

    std::size_t offset = fixed + header_len;
    auto read_vector = [&] {
      EmbeddingVector v;
      v.encoder_id = index.manifest_.encoder_id;
      v.values.resize(dim);
      for (std::size_t i = 0; i < dim; ++i, offset += 4) v.values[i] = get_f32(bytes, offset);
      return v;
    };
    for (const auto& r : records) {
      ClipRecord record{r.at("clip_id").get<int>(), r.at("summary_text").get<std::string>(),
                        r.at("subtitle_text").get<std::string>(), r.at("start_ms").get<std::int64_t>(),
                        r.at("end_ms").get<std::int64_t>()};
      auto summary = read_vector();
      auto subtitle = read_vector();
      const int id = record.clip_id;
      if (!index.entries_.emplace(id, EmbeddingIndex::Entry{std::move(record), std::move(summary), std::move(subtitle)})
               .second) {
        corrupt("duplicate clip_id " + std::to_string(id));
      }
    }
  } catch (const json::exception& e) {
    corrupt(std::string("header: ") + e.what());
  }
  return index;
}

void save_index(const EmbeddingIndex& index, const std::filesystem::path& path) {
  const auto bytes = serialize_index(index);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

EmbeddingIndex load_index(const std::filesystem::path& path, const std::set<std::uint32_t>& supported_versions) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_index(bytes, supported_versions);
}

std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts, EmbeddingBackend& backend,
                                         std::size_t expected_dim) {
  std::vector<std::string> inputs;
  inputs.reserve(texts.size());
  for (const auto& t : texts) inputs.push_back(text::trim(t).empty() ? std::string(kEmptyTextToken) : t);

  auto batch = backend.embed(inputs);
  if (batch.vectors.size() != inputs.size()) {
    throw Error(ErrorCode::BackendRejected, "expected " + std::to_string(inputs.size()) + " vectors, got " +
                                                std::to_string(batch.vectors.size()));
  }
  std::vector<EmbeddingVector> out;
  out.reserve(batch.vectors.size());
  for (auto& values : batch.vectors) {
    if (values.size() != batch.dim || (expected_dim != 0 && values.size() != expected_dim)) {
      throw Error(ErrorCode::DimensionMismatch,
                  "backend " + backend.id() + " returned a " + std::to_string(values.size()) +
                      "-dim vector (reported " + std::to_string(batch.dim) + ", expected " +
                      std::to_string(expected_dim ? expected_dim : batch.dim) + ")");
    }
    for (float f : values) {
      if (!std::isfinite(f)) throw Error(ErrorCode::BackendRejected, "backend returned a non-finite value");
    }
    out.push_back(EmbeddingVector{std::move(values), batch.encoder_id});
  }
  return out;
}

EmbeddingVector embed_text(const std::string& text, EmbeddingBackend& backend, std::size_t expected_dim) {
  return std::move(embed_texts(std::span(&text, 1), backend, expected_dim).front());
}

}  // namespace goldfish
