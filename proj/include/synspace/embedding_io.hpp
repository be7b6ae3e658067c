#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "synspace/embedding.hpp"

namespace synspace {

// S3EM binary layout (little-endian):
//   "S3EM" | u32 version=1 | u32 dim | u32 count | count*dim f32 row-major |
//   u32 label_bytes | label_bytes of '\n'-separated UTF-8 labels
inline constexpr char kS3emMagic[4] = {'S', '3', 'E', 'M'};
inline constexpr std::uint32_t kS3emVersion = 1;

std::vector<std::uint8_t> encode_s3em(const EmbeddingSet& set);
EmbeddingSet decode_s3em(const std::vector<std::uint8_t>& bytes);

// Text alternative: one "label<TAB>v1,v2,...,vD" record per line.
std::string encode_embedding_text(const EmbeddingSet& set);
EmbeddingSet decode_embedding_text(const std::string& text);

/// Files ending in .tsv or .txt use the text format; everything else is S3EM.
/// Values are returned exactly as stored (no normalization).
EmbeddingSet load_embeddings(const std::filesystem::path& path);
void save_embeddings(const EmbeddingSet& set, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace synspace
