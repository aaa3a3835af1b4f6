#include "apa/aemb.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace apa {
namespace {

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

uint32_t get_u32(const std::string& in, std::size_t pos) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<uint32_t>(static_cast<unsigned char>(in[pos + static_cast<std::size_t>(i)]))
         << (8 * i);
  }
  return v;
}

using Kind = AembError::Kind;

}  // namespace

std::string encode_embeddings(const EmbeddingMatrix& m) {
  validate(m);
  if (m.rows() > std::numeric_limits<uint32_t>::max() ||
      m.cols() > std::numeric_limits<uint32_t>::max() ||
      static_cast<uint64_t>(m.rows()) * m.cols() > kAembMaxEntries) {
    throw AembError(Kind::DimensionOverflow, "AEMB: matrix too large to encode");
  }
  if (m.backend_id.size() > std::numeric_limits<uint32_t>::max()) {
    throw AembError(Kind::DimensionOverflow, "AEMB: backend id too long");
  }

  std::string out;
  out.reserve(16 + m.rows() * m.cols() * 4 + 4 + m.backend_id.size());
  out.append("AEMB", 4);
  put_u32(out, kAembVersion);
  put_u32(out, static_cast<uint32_t>(m.rows()));
  put_u32(out, static_cast<uint32_t>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      uint32_t w;
      const float v = m.data(static_cast<long>(r), static_cast<long>(c));
      std::memcpy(&w, &v, 4);
      put_u32(out, w);
    }
  }
  put_u32(out, static_cast<uint32_t>(m.backend_id.size()));
  out.append(m.backend_id);
  return out;
}

EmbeddingMatrix decode_embeddings(const std::string& in) {
  if (in.size() < 4 || std::memcmp(in.data(), "AEMB", 4) != 0) {
    throw AembError(Kind::BadMagic, "AEMB: bad magic");
  }
  if (in.size() < 16) throw AembError(Kind::Truncated, "AEMB: truncated header");
  const uint32_t version = get_u32(in, 4);
  if (version != kAembVersion) {
    throw AembError(Kind::VersionMismatch,
                    "AEMB: version mismatch (file " + std::to_string(version) + ", expected " +
                        std::to_string(kAembVersion) + ")");
  }
  const uint32_t rows = get_u32(in, 8);
  const uint32_t cols = get_u32(in, 12);
  const uint64_t entries = static_cast<uint64_t>(rows) * cols;
  if (rows == 0 || cols == 0 || entries > kAembMaxEntries) {
    throw AembError(Kind::DimensionOverflow,
                    "AEMB: invalid dimensions " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  const uint64_t payload_end = 16 + entries * 4;
  if (in.size() < payload_end + 4) throw AembError(Kind::Truncated, "AEMB: truncated payload");
  const uint32_t id_len = get_u32(in, payload_end);
  if (in.size() < payload_end + 4 + id_len) {
    throw AembError(Kind::Truncated, "AEMB: truncated backend id");
  }
  if (in.size() > payload_end + 4 + id_len) {
    throw AembError(Kind::TrailingData, "AEMB: unexpected bytes after backend id");
  }

  EmbeddingMatrix m;
  m.data.resize(rows, cols);
  std::size_t pos = 16;
  for (uint32_t r = 0; r < rows; ++r) {
    for (uint32_t c = 0; c < cols; ++c, pos += 4) {
      const uint32_t w = get_u32(in, pos);
      float v;
      std::memcpy(&v, &w, 4);
      m.data(r, c) = v;
    }
  }
  m.backend_id = in.substr(payload_end + 4, id_len);
  validate(m);
  return m;
}

void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path) {
  const std::string bytes = encode_embeddings(matrix);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw AembError(Kind::Io, "AEMB: cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw AembError(Kind::Io, "AEMB: write failed: " + path.string());
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AembError(Kind::Io, "AEMB: cannot open: " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_embeddings(bytes);
}

}  // namespace apa
