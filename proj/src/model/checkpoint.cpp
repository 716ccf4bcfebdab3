#include "cfp/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cfp/errors.hpp"

namespace cfp::model {
namespace {

constexpr char kMagic[4] = {'C', 'F', 'P', 'T'};

template <typename T>
void put(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& origin) : bytes_(bytes), origin_(origin) {}

  template <typename T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    need(sizeof(U));
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return std::bit_cast<T>(bits);
  }

  std::string take(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  [[nodiscard]] bool done() const { return pos_ == bytes_.size(); }
  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(origin_ + ": " + what + " at byte " + std::to_string(pos_));
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail("truncated checkpoint");
  }
  const std::string& bytes_;
  const std::string& origin_;
  std::size_t pos_ = 0;
};

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t.value;
  return nullptr;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, ckpt.config_text.size());
  out += ckpt.config_text;
  put<std::uint64_t>(out, ckpt.config_hash);
  put<std::uint64_t>(out, ckpt.step);
  put<std::uint64_t>(out, ckpt.tensors.size());
  for (const auto& t : ckpt.tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.value.rank()));
    for (std::size_t dim : t.value.shape()) put<std::uint64_t>(out, dim);
    for (double v : t.value.data()) put<double>(out, v);
  }
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes, const std::string& origin) {
  Reader in(bytes, origin);
  if (in.take(4) != std::string(kMagic, 4)) in.fail("bad magic (expected CFPT)");
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) in.fail("unsupported version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.config_text = in.take(in.get<std::uint64_t>());
  ckpt.config_hash = in.get<std::uint64_t>();
  if (ckpt.config_hash != fnv1a64(ckpt.config_text)) in.fail("config hash does not match config text");
  ckpt.step = in.get<std::uint64_t>();
  const auto count = in.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = in.take(in.get<std::uint32_t>());
    const auto rank = in.get<std::uint32_t>();
    if (rank > 8) in.fail("implausible rank " + std::to_string(rank) + " for " + t.name);
    numerics::Shape shape(rank);
    std::size_t total = 1;
    for (auto& dim : shape) {
      dim = in.get<std::uint64_t>();
      if (dim > (std::size_t{1} << 32)) in.fail("implausible dimension for " + t.name);
      total *= dim;
    }
    if (total * 8 > bytes.size()) in.fail("payload of " + t.name + " exceeds file size");
    std::vector<double> data(total);
    for (auto& v : data) v = in.get<double>();
    t.value = Tensor(std::move(shape), std::move(data));
    ckpt.tensors.push_back(std::move(t));
  }
  if (!in.done()) in.fail("trailing bytes");
  return ckpt;
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot write checkpoint " + path);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw DataError("short write to " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot read checkpoint " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return deserialize_checkpoint(ss.str(), path);
}

void append_model(Checkpoint& ckpt, const Model& model) {
  for (const auto& p : model.parameters()) ckpt.tensors.push_back({p.name, p.value});
}

Model load_model(const Checkpoint& ckpt) {
  const ModelConfig config = ModelConfig::from_map(parse_config_text(ckpt.config_text, "checkpoint config"));
  Model model = Model::skeleton(config);
  std::size_t next = 0;
  for (auto& p : model.parameters()) {
    if (next >= ckpt.tensors.size() || ckpt.tensors[next].name != p.name) {
      throw FormatError("checkpoint is missing parameter " + p.name + " (or it is out of order)");
    }
    const Tensor& stored = ckpt.tensors[next].value;
    if (stored.shape() != p.value.shape()) {
      throw FormatError("checkpoint parameter " + p.name + " has shape " + numerics::shape_to_string(stored.shape()) +
                        ", config implies " + numerics::shape_to_string(p.value.shape()));
    }
    p.value = stored;
    ++next;
  }
  return model;
}

}  // namespace cfp::model
