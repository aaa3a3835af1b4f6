#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "apa/embedding.hpp"
#include "apa/error.hpp"

namespace apa {

// AEMB v1 interchange format, all integers little-endian:
//
//   bytes 0-3   magic "AEMB"
//   u32         version (1)
//   u32         rows
//   u32         cols
//   f32[rows*cols]  row-major payload
//   u32         backend id length, followed by that many UTF-8 bytes

inline constexpr uint32_t kAembVersion = 1;

/// Upper bound on rows * cols accepted by the reader.
inline constexpr uint64_t kAembMaxEntries = uint64_t{1} << 31;

class AembError : public DataError {
 public:
  enum class Kind { Io, BadMagic, VersionMismatch, Truncated, DimensionOverflow, TrailingData };

  AembError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path);
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

/// In-memory encoding, byte-identical to the file contents.
std::string encode_embeddings(const EmbeddingMatrix& matrix);
EmbeddingMatrix decode_embeddings(const std::string& bytes);

}  // namespace apa
