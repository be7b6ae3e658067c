#include "synspace/embedding_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "synspace/error.hpp"

namespace synspace {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFFu));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::TruncatedFile, std::string("file ends inside ") + what);
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

bool uses_text_format(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return ext == ".tsv" || ext == ".txt";
}

}  // namespace

std::vector<std::uint8_t> encode_s3em(const EmbeddingSet& set) {
  if (set.dim() == 0) throw Error(ErrorCode::DimensionMismatch, "cannot save a set without dimension");
  std::string label_block;
  if (set.has_labels()) {
    for (std::size_t i = 0; i < set.labels().size(); ++i) {
      const auto& l = set.labels()[i];
      if (l.find('\n') != std::string::npos) throw Error(ErrorCode::PreconditionViolation, "label contains a newline");
      if (i) label_block.push_back('\n');
      label_block += l;
    }
  }
  std::vector<std::uint8_t> out;
  out.reserve(20 + set.data().size() * 4 + label_block.size());
  out.insert(out.end(), std::begin(kS3emMagic), std::end(kS3emMagic));
  put_u32(out, kS3emVersion);
  put_u32(out, static_cast<std::uint32_t>(set.dim()));
  put_u32(out, static_cast<std::uint32_t>(set.size()));
  for (float v : set.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(label_block.size()));
  out.insert(out.end(), label_block.begin(), label_block.end());
  return out;
}

EmbeddingSet decode_s3em(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  const std::string magic = r.str(4, "magic");
  if (std::memcmp(magic.data(), kS3emMagic, 4) != 0) throw Error(ErrorCode::BadMagic, "expected S3EM, got '" + magic + "'");
  const auto version = r.u32("version");
  if (version != kS3emVersion) throw Error(ErrorCode::UnsupportedVersion, "version " + std::to_string(version));
  const auto dim = r.u32("dim");
  const auto count = r.u32("count");
  if (dim == 0) throw Error(ErrorCode::DimensionMismatch, "dim is zero");
  const std::uint64_t n_values = static_cast<std::uint64_t>(dim) * count;
  if (n_values * 4 > r.remaining()) throw Error(ErrorCode::TruncatedFile, "file ends inside embedding values");
  std::vector<float> data(n_values);
  for (auto& v : data) {
    v = std::bit_cast<float>(r.u32("values"));
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "embedding file contains NaN or Inf");
  }
  const auto label_len = r.u32("label block length");
  const std::string block = r.str(label_len, "label block");
  std::vector<std::string> labels;
  if (label_len > 0) {
    std::size_t start = 0;
    while (true) {
      const auto nl = block.find('\n', start);
      labels.push_back(block.substr(start, nl == std::string::npos ? std::string::npos : nl - start));
      if (nl == std::string::npos) break;
      start = nl + 1;
    }
    if (labels.size() == count + 1 && labels.back().empty()) labels.pop_back();
    if (labels.size() != count) {
      throw Error(ErrorCode::DimensionMismatch,
                  "label block has " + std::to_string(labels.size()) + " entries for " + std::to_string(count) + " rows");
    }
  }
  return EmbeddingSet(dim, std::move(data), std::move(labels));
}

std::string encode_embedding_text(const EmbeddingSet& set) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set.has_labels()) {
      const auto& l = set.labels()[i];
      if (l.find_first_of("\t\n") != std::string::npos) {
        throw Error(ErrorCode::PreconditionViolation, "label contains a tab or newline");
      }
      out += l;
    }
    out.push_back('\t');
    const auto row = set.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out.push_back(',');
      const auto res = std::to_chars(buf, buf + sizeof(buf), row[j]);
      out.append(buf, res.ptr);
    }
    out.push_back('\n');
  }
  return out;
}

EmbeddingSet decode_embedding_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t dim = 0;
  std::vector<float> data;
  std::vector<std::string> labels;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": missing tab");
    labels.push_back(line.substr(0, tab));
    std::size_t row_dim = 0;
    const char* p = line.data() + tab + 1;
    const char* end = line.data() + line.size();
    while (p < end) {
      float v = 0.0f;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad number");
      }
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "line " + std::to_string(line_no));
      data.push_back(v);
      ++row_dim;
      p = res.ptr;
      if (p < end) {
        if (*p != ',') throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected ','");
        ++p;
      }
    }
    if (dim == 0) dim = row_dim;
    if (row_dim == 0 || row_dim != dim) {
      throw Error(ErrorCode::DimensionMismatch, "line " + std::to_string(line_no) + " has " + std::to_string(row_dim) +
                                                    " values, expected " + std::to_string(dim));
    }
  }
  if (dim == 0) throw Error(ErrorCode::TruncatedFile, "text embedding file has no records");
  // An unlabeled set is written with empty label columns; read it back unlabeled.
  if (std::all_of(labels.begin(), labels.end(), [](const std::string& l) { return l.empty(); })) labels.clear();
  return EmbeddingSet(dim, std::move(data), std::move(labels));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  if (uses_text_format(path)) return decode_embedding_text(std::string(bytes.begin(), bytes.end()));
  return decode_s3em(bytes);
}

void save_embeddings(const EmbeddingSet& set, const std::filesystem::path& path) {
  if (uses_text_format(path)) {
    write_file_atomic(path, encode_embedding_text(set));
    return;
  }
  const auto bytes = encode_s3em(set);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace synspace
