#include "lift/trainer/checkpoint.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <fstream>

namespace lift::train {

std::string sha256_hex(const void* data, size_t len) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int md_len = 0;
  if (EVP_Digest(data, len, md, &md_len, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(md_len * 2);
  for (unsigned int i = 0; i < md_len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

std::string sha256_hex(const std::string& s) { return sha256_hex(s.data(), s.size()); }

namespace {

constexpr char kMagic[8] = {'L', 'I', 'F', 'T', 'C', 'K', 'P', '1'};
constexpr uint32_t kVersion = 1;

template <typename I>
void put(std::string& buf, I v) {
  for (size_t i = 0; i < sizeof(I); ++i) buf += static_cast<char>((v >> (8 * i)) & 0xff);
}

template <typename I>
I take(const std::string& buf, size_t& off) {
  if (off + sizeof(I) > buf.size()) throw CorruptionError("checkpoint truncated");
  I v = 0;
  for (size_t i = 0; i < sizeof(I); ++i)
    v |= static_cast<I>(static_cast<unsigned char>(buf[off + i])) << (8 * i);
  off += sizeof(I);
  return v;
}

std::string take_str(const std::string& buf, size_t& off, size_t len) {
  if (off + len > buf.size()) throw CorruptionError("checkpoint truncated");
  std::string s = buf.substr(off, len);
  off += len;
  return s;
}

std::string group_of(const std::string& qualified_name) {
  auto dot = qualified_name.find('.');
  return dot == std::string::npos ? qualified_name : qualified_name.substr(0, dot);
}

}  // namespace

namespace detail {

void append_tensor_record(std::string& buf, const NamedTensor& t) {
  put<uint32_t>(buf, static_cast<uint32_t>(t.name.size()));
  buf += t.name;
  put<uint32_t>(buf, static_cast<uint32_t>(t.rows));
  put<uint32_t>(buf, static_cast<uint32_t>(t.cols));
  for (float v : t.data) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put<uint32_t>(buf, bits);
  }
}

}  // namespace detail

void CheckpointData::recompute_digests() {
  std::map<std::string, std::string> buffers;
  for (const NamedTensor& t : tensors) {
    detail::append_tensor_record(buffers[group_of(t.name)], t);
  }
  group_digests.clear();
  for (const auto& [g, buf] : buffers) group_digests[g] = sha256_hex(buf);
}

void save_checkpoint(const CheckpointData& ckpt, const std::string& path) {
  std::string buf;
  buf.append(kMagic, sizeof(kMagic));
  put<uint32_t>(buf, kVersion);
  std::string header = ckpt.header.dump();
  put<uint64_t>(buf, header.size());
  buf += header;
  put<uint32_t>(buf, static_cast<uint32_t>(ckpt.tensors.size()));
  for (const NamedTensor& t : ckpt.tensors) detail::append_tensor_record(buf, t);
  put<uint32_t>(buf, static_cast<uint32_t>(ckpt.group_digests.size()));
  for (const auto& [g, d] : ckpt.group_digests) {
    put<uint32_t>(buf, static_cast<uint32_t>(g.size()));
    buf += g;
    put<uint32_t>(buf, static_cast<uint32_t>(d.size()));
    buf += d;
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write checkpoint: " + path);
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw IoError("short write: " + path);
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read checkpoint: " + path);
  std::string buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  size_t off = 0;
  std::string magic = take_str(buf, off, sizeof(kMagic));
  if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("not a checkpoint file: " + path);
  }
  uint32_t version = take<uint32_t>(buf, off);
  if (version != kVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  CheckpointData ckpt;
  uint64_t hlen = take<uint64_t>(buf, off);
  ckpt.header = nlohmann::json::parse(take_str(buf, off, hlen));
  uint32_t n = take<uint32_t>(buf, off);
  for (uint32_t i = 0; i < n; ++i) {
    NamedTensor t;
    uint32_t nl = take<uint32_t>(buf, off);
    t.name = take_str(buf, off, nl);
    t.rows = static_cast<int>(take<uint32_t>(buf, off));
    t.cols = static_cast<int>(take<uint32_t>(buf, off));
    int64_t count = static_cast<int64_t>(t.rows) * t.cols;
    t.data.resize(count);
    for (int64_t k = 0; k < count; ++k) {
      uint32_t bits = take<uint32_t>(buf, off);
      float v;
      std::memcpy(&v, &bits, 4);
      t.data[k] = v;
    }
    ckpt.tensors.push_back(std::move(t));
  }
  std::map<std::string, std::string> stored;
  uint32_t ng = take<uint32_t>(buf, off);
  for (uint32_t i = 0; i < ng; ++i) {
    uint32_t gl = take<uint32_t>(buf, off);
    std::string g = take_str(buf, off, gl);
    uint32_t dl = take<uint32_t>(buf, off);
    stored[g] = take_str(buf, off, dl);
  }
  ckpt.recompute_digests();
  if (stored != ckpt.group_digests) throw CorruptionError("checkpoint digest mismatch: " + path);
  return ckpt;
}

}  // namespace lift::train
