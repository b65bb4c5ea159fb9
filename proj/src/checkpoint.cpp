#include "srres/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

namespace srres {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'S', 'R', 'C', 'K'};
constexpr std::uint8_t kDtypeF32 = 0;

class Writer {
 public:
  template <typename U>
  void put(U v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    bytes_.insert(bytes_.end(), p, p + sizeof(U));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename U>
  U get() {
    U v;
    get_bytes(&v, sizeof(U));
    return v;
  }
  void get_bytes(void* out, std::size_t n) {
    if (n > bytes_.size() - pos_) throw CheckpointError("truncated checkpoint");
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const SrModel<float>& m) {
  const auto slots = m.state();
  Writer w;
  w.put_bytes(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(slots.size()));
  for (const auto& s : slots) {
    w.put<std::uint16_t>(static_cast<std::uint16_t>(s.name.size()));
    w.put_bytes(s.name.data(), s.name.size());
    w.put<std::uint8_t>(kDtypeF32);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(s.dims.size()));
    for (std::size_t d : s.dims) w.put<std::uint64_t>(d);
    w.put_bytes(s.values.data(), s.values.size_bytes());
  }
  return w.take();
}

SrModel<float> decode_checkpoint(std::span<const std::uint8_t> bytes, const ModelConfig& config) {
  Reader r(bytes);
  char magic[4];
  r.get_bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(magic)) != 0) throw CheckpointError("bad magic bytes");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) throw CheckpointError("unsupported version " + std::to_string(version));

  // Build the architecture from config, then overwrite every slot.
  Rng rng(0);
  SrModel<float> model = model_init<float>(config, rng);
  auto slots = model.state();
  const auto count = r.get<std::uint32_t>();
  if (count != slots.size()) {
    throw CheckpointError("checkpoint has " + std::to_string(count) + " tensors, config expects " +
                          std::to_string(slots.size()));
  }
  for (auto& slot : slots) {
    const auto name_len = r.get<std::uint16_t>();
    std::string name(name_len, '\0');
    r.get_bytes(name.data(), name_len);
    if (name != slot.name) throw CheckpointError("expected tensor '" + slot.name + "', found '" + name + "'");
    if (r.get<std::uint8_t>() != kDtypeF32) throw CheckpointError("unsupported dtype for " + name);
    const auto rank = r.get<std::uint8_t>();
    if (rank != slot.dims.size()) throw CheckpointError("rank mismatch for " + name);
    for (std::size_t d : slot.dims) {
      if (r.get<std::uint64_t>() != d) throw CheckpointError("dimension mismatch for " + name);
    }
    r.get_bytes(slot.values.data(), slot.values.size_bytes());
  }
  if (!r.done()) throw CheckpointError("trailing bytes after last tensor");
  return model;
}

std::string config_to_json(const ModelConfig& config, int epoch) {
  nlohmann::ordered_json j;
  j["scale"] = config.scale;
  j["image_channels"] = config.image_channels;
  j["feat_channels"] = config.feat_channels;
  j["mapping_layers"] = config.mapping_layers;
  j["kernel_size"] = config.kernel_size;
  j["use_batchnorm"] = config.use_batchnorm;
  j["block_order"] = to_string(config.block_order);
  j["residual"] = config.residual;
  j["final_activation"] = to_string(config.final_activation);
  if (epoch >= 0) j["epoch"] = epoch;
  return j.dump(2) + "\n";
}

ModelConfig config_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ModelConfig c;
    c.scale = j.at("scale").get<std::size_t>();
    c.image_channels = j.at("image_channels").get<std::size_t>();
    c.feat_channels = j.at("feat_channels").get<std::size_t>();
    c.mapping_layers = j.at("mapping_layers").get<std::size_t>();
    c.kernel_size = j.at("kernel_size").get<std::size_t>();
    c.use_batchnorm = j.at("use_batchnorm").get<bool>();
    c.block_order = parse_block_order(j.at("block_order").get<std::string>());
    c.residual = j.at("residual").get<bool>();
    c.final_activation = parse_final_activation(j.at("final_activation").get<std::string>());
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad config sidecar: ") + e.what());
  } catch (const InvalidConfig& e) {
    throw CheckpointError(std::string("bad config sidecar: ") + e.what());
  }
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw IoError("short write to " + path);
}

void save_checkpoint(const std::string& path, const SrModel<float>& m, int epoch) {
  write_file_bytes(path, encode_checkpoint(m));
  const std::string sidecar = config_to_json(m.config(), epoch);
  write_file_bytes(path + ".json", std::span(reinterpret_cast<const std::uint8_t*>(sidecar.data()), sidecar.size()));
}

namespace {

std::string read_sidecar(const std::string& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(path + ".json");
  } catch (const IoError&) {
    throw CheckpointError("missing config sidecar " + path + ".json");
  }
  return {bytes.begin(), bytes.end()};
}

}  // namespace

SrModel<float> load_checkpoint(const std::string& path) {
  const ModelConfig config = config_from_json(read_sidecar(path));
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const IoError& e) {
    throw CheckpointError(e.what());
  }
  return decode_checkpoint(bytes, config);
}

int checkpoint_epoch(const std::string& path) {
  const auto j = nlohmann::json::parse(read_sidecar(path), nullptr, false);
  if (j.is_discarded() || !j.contains("epoch")) return -1;
  return j["epoch"].get<int>();
}

}  // namespace srres
