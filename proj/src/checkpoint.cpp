#include <cstring>
#include <fstream>
#include <iterator>

#include "mag/error.hpp"
#include "mag/trainer.hpp"

namespace mag {

namespace {

constexpr char kMagic[8] = {'M', 'A', 'G', 'C', 'K', 'P', 'T', '\0'};

std::uint64_t Fnv1a(const std::string& bytes, std::size_t len) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= static_cast<unsigned char>(bytes[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Little-endian writer/reader. The build targets little-endian hosts only.
class Writer {
 public:
  template <typename T>
  void Put(T value) {
    char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    buf_.append(raw, sizeof(T));
  }
  void PutBytes(const std::string& s) {
    Put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    buf_ += s;
  }
  void PutRaw(const char* data, std::size_t len) { buf_.append(data, len); }
  std::string& buffer() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(const std::string& buf, std::size_t limit) : buf_(buf), limit_(limit) {}

  template <typename T>
  T Get() {
    Need(sizeof(T));
    T value;
    std::memcpy(&value, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string GetBytes() {
    const auto len = Get<std::uint32_t>();
    Need(len);
    std::string s = buf_.substr(pos_, len);
    pos_ += len;
    return s;
  }
  void GetRaw(char* out, std::size_t len) {
    Need(len);
    std::memcpy(out, buf_.data() + pos_, len);
    pos_ += len;
  }
  std::size_t pos() const { return pos_; }

 private:
  void Need(std::size_t len) const {
    if (pos_ + len > limit_) throw Error(ErrorKind::kCheckpoint, "checkpoint truncated or corrupt");
  }
  const std::string& buf_;
  std::size_t limit_;
  std::size_t pos_ = 0;
};

}  // namespace

void SaveCheckpoint(const ModelParams& params, const std::string& config_json, std::uint64_t seed,
                    const std::string& path) {
  Writer w;
  w.PutRaw(kMagic, sizeof(kMagic));
  w.Put<std::uint32_t>(kCheckpointVersion);
  w.Put<std::uint64_t>(seed);
  w.PutBytes(config_json);
  const auto tensors = params.Tensors();
  const auto names = params.TensorNames();
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(tensors.size()));
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    w.PutBytes(names[i]);
    w.Put<std::uint32_t>(static_cast<std::uint32_t>(tensors[i]->rows()));
    w.Put<std::uint32_t>(static_cast<std::uint32_t>(tensors[i]->cols()));
    // Matrix is row-major, so data() is already in file order.
    w.PutRaw(reinterpret_cast<const char*>(tensors[i]->data()), sizeof(double) * tensors[i]->size());
  }
  const std::uint64_t checksum = Fnv1a(w.buffer(), w.buffer().size());
  w.Put<std::uint64_t>(checksum);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kFile, "cannot write checkpoint " + path);
  out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
  if (!out) throw Error(ErrorKind::kFile, "failed writing checkpoint " + path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kFile, "cannot open checkpoint " + path);
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < sizeof(kMagic) + 4 + 8) throw Error(ErrorKind::kCheckpoint, "checkpoint truncated or corrupt");
  if (std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorKind::kCheckpoint, path + " is not a checkpoint file");
  }
  Reader header(buf, buf.size());
  char magic[sizeof(kMagic)];
  header.GetRaw(magic, sizeof(magic));
  const auto version = header.Get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw Error(ErrorKind::kCheckpoint, "checkpoint version " + std::to_string(version) + " unsupported (expected " +
                                            std::to_string(kCheckpointVersion) + ")");
  }
  const std::size_t body = buf.size() - sizeof(std::uint64_t);
  std::uint64_t stored = 0;
  std::memcpy(&stored, buf.data() + body, sizeof(stored));
  if (stored != Fnv1a(buf, body)) throw Error(ErrorKind::kCheckpoint, "checkpoint truncated or corrupt");

  Reader r(buf, body);
  r.GetRaw(magic, sizeof(magic));
  r.Get<std::uint32_t>();
  Checkpoint ck;
  ck.seed = r.Get<std::uint64_t>();
  ck.config_json = r.GetBytes();
  const auto count = r.Get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = r.GetBytes();
    const auto rows = r.Get<std::uint32_t>();
    const auto cols = r.Get<std::uint32_t>();
    Matrix m(rows, cols);
    r.GetRaw(reinterpret_cast<char*>(m.data()), sizeof(double) * m.size());
    auto bad = [&] { throw Error(ErrorKind::kCheckpoint, "unexpected tensor " + name + " in checkpoint"); };
    if (name.rfind("gnn", 0) == 0) {
      const auto dot = name.find(".w");
      if (dot != 4) bad();
      const int b = name[3] - '1';
      const int layer = std::stoi(name.substr(6));
      if (b < 0 || b > 1 || layer != ck.params.backbones[b].depth()) bad();
      ck.params.backbones[b].layers.push_back(std::move(m));
    } else if (name.rfind("disc", 0) == 0) {
      const int k = std::stoi(name.substr(4));
      if (k != static_cast<int>(ck.params.discriminators.size())) bad();
      ck.params.discriminators.push_back({std::move(m)});
    } else {
      bad();
    }
  }
  if (r.pos() != body) throw Error(ErrorKind::kCheckpoint, "trailing bytes in checkpoint");
  const auto& b0 = ck.params.backbones[0];
  const auto& b1 = ck.params.backbones[1];
  if (b0.depth() == 0 || b0.depth() != b1.depth() || ck.params.discriminators.empty()) {
    throw Error(ErrorKind::kCheckpoint, "checkpoint is missing tensors");
  }
  for (int l = 0; l < b0.depth(); ++l) {
    if (b0.layers[l].rows() != b1.layers[l].rows() || b0.layers[l].cols() != b1.layers[l].cols()) {
      throw Error(ErrorKind::kCheckpoint, "backbone shapes disagree in checkpoint");
    }
  }
  return ck;
}

}  // namespace mag
