#include "saturn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "saturn/error.hpp"
#include "saturn/rng.hpp"

namespace saturn {

namespace {

constexpr char kMagic[8] = {'S', 'A', 'T', 'N', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double value) { put(out, std::bit_cast<std::uint64_t>(value)); }

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t limit) : bytes_(bytes), limit_(limit) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return value;
  }

  double get_f64() { return std::bit_cast<double>(get<std::uint64_t>()); }

  std::string get_bytes(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > limit_) throw CheckpointError("checkpoint truncated");
  }

  const std::string& bytes_;
  std::size_t limit_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const ModelParams& params) {
  std::string out(kMagic, sizeof(kMagic));
  put(out, kCheckpointVersion);
  put(out, static_cast<std::uint32_t>(params.dim));
  put(out, static_cast<std::uint32_t>(params.layer_count()));
  put(out, static_cast<std::uint32_t>(params.max_position));
  put(out, params.seed);
  const auto blocks = params.blocks();
  put(out, static_cast<std::uint32_t>(blocks.size()));
  for (const auto& b : blocks) {
    put(out, static_cast<std::uint32_t>(b.name.size()));
    out += b.name;
    put(out, static_cast<std::uint32_t>(b.tensor->rows));
    put(out, static_cast<std::uint32_t>(b.tensor->cols));
    for (double x : b.tensor->data) put_f64(out, x);
  }
  put(out, fnv1a(out));
  return out;
}

ModelParams deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) + 8 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("not a checkpoint (bad magic)");
  }
  const std::size_t body = bytes.size() - 8;
  {
    Reader tail(bytes, bytes.size());
    tail.get_bytes(body);
    if (tail.get<std::uint64_t>() != fnv1a(std::string_view(bytes).substr(0, body))) {
      throw CheckpointError("checkpoint checksum mismatch");
    }
  }

  Reader in(bytes, body);
  in.get_bytes(sizeof(kMagic));
  if (const auto version = in.get<std::uint32_t>(); version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto dim = in.get<std::uint32_t>();
  const auto layers = in.get<std::uint32_t>();
  const auto max_position = in.get<std::uint32_t>();
  const auto seed = in.get<std::uint64_t>();
  if (dim == 0 || layers == 0 || max_position == 0) throw CheckpointError("checkpoint has empty dimensions");

  // Shape template; every value is overwritten below.
  ModelParams params = init_params(dim, seed, layers, max_position).zeros_like();
  auto blocks = params.blocks();
  if (in.get<std::uint32_t>() != blocks.size()) throw CheckpointError("checkpoint section count mismatch");
  for (auto& b : blocks) {
    const std::string name = in.get_bytes(in.get<std::uint32_t>());
    if (name != b.name) throw CheckpointError("unexpected section '" + name + "', wanted '" + b.name + "'");
    const auto rows = in.get<std::uint32_t>();
    const auto cols = in.get<std::uint32_t>();
    if (rows != b.tensor->rows || cols != b.tensor->cols) throw CheckpointError("bad shape for section " + name);
    for (auto& x : b.tensor->data) x = in.get_f64();
  }
  if (in.position() != body) throw CheckpointError("trailing bytes in checkpoint");
  if (!params.finite()) throw CheckpointError("checkpoint contains non-finite values");
  return params;
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write '" + path.string() + "'");
  const std::string bytes = serialize_checkpoint(params);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("write failed for '" + path.string() + "'");
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize_checkpoint(buffer.str());
}

}  // namespace saturn
