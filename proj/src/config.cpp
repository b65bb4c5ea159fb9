#include "srres/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace srres {

void RunConfig::validate() const {
  model.validate();
  if (model.image_channels != 1) throw InvalidConfig("training runs on the luma channel; image_channels must be 1");
  if (optim.epochs < 1) throw InvalidConfig("epochs must be >= 1");
  if (optim.batch_size < 1) throw InvalidConfig("batch_size must be >= 1");
  if (!(optim.lr > 0.0)) throw InvalidConfig("lr must be positive");
  if (!(optim.beta1 >= 0.0 && optim.beta1 < 1.0) || !(optim.beta2 >= 0.0 && optim.beta2 < 1.0)) {
    throw InvalidConfig("adam betas must lie in [0, 1)");
  }
  if (optim.clip_norm < 0.0) throw InvalidConfig("clip_norm must be >= 0");
  if (data.patch < 1) throw InvalidConfig("patch must be >= 1");
  if (data.root.empty()) throw InvalidConfig("data_root is required");
  std::error_code ec;
  if (!std::filesystem::is_directory(data.root, ec)) throw InvalidConfig("data_root does not exist: " + data.root);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "scale",        "feat_channels", "mapping_layers", "kernel_size",       "use_batchnorm",
      "block_order",  "residual",      "final_activation", "optimizer",       "lr",
      "beta1",        "beta2",         "adam_eps",       "batch_size",        "epochs",
      "clip_norm",    "patches_per_epoch", "eval_every", "data_root",         "patch",
      "split_ratio",  "seed",          "hflip",          "use_cache",         "out_dir",
  };
  return keys;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool known_key(const std::string& key) {
  for (const auto& k : config_keys()) {
    if (k == key) return true;
  }
  return false;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw InvalidConfig(key + ": expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw InvalidConfig(key + ": expected an integer, got '" + v + "'");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw InvalidConfig(key + ": expected a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InvalidConfig(key + ": expected true/false, got '" + v + "'");
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidConfig("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (!known_key(key)) throw InvalidConfig("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    out[key] = value;
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& values) {
  for (const auto& [key, v] : values) {
    if (key == "scale") cfg.model.scale = to_size(key, v);
    else if (key == "feat_channels") cfg.model.feat_channels = to_size(key, v);
    else if (key == "mapping_layers") cfg.model.mapping_layers = to_size(key, v);
    else if (key == "kernel_size") cfg.model.kernel_size = to_size(key, v);
    else if (key == "use_batchnorm") cfg.model.use_batchnorm = to_bool(key, v);
    else if (key == "block_order") cfg.model.block_order = parse_block_order(v);
    else if (key == "residual") cfg.model.residual = to_bool(key, v);
    else if (key == "final_activation") cfg.model.final_activation = parse_final_activation(v);
    else if (key == "optimizer") {
      if (v == "adam") cfg.optim.kind = OptimizerKind::kAdam;
      else if (v == "sgd") cfg.optim.kind = OptimizerKind::kSgd;
      else throw InvalidConfig("optimizer must be adam or sgd, got '" + v + "'");
    }
    else if (key == "lr") cfg.optim.lr = to_double(key, v);
    else if (key == "beta1") cfg.optim.beta1 = to_double(key, v);
    else if (key == "beta2") cfg.optim.beta2 = to_double(key, v);
    else if (key == "adam_eps") cfg.optim.adam_eps = to_double(key, v);
    else if (key == "batch_size") cfg.optim.batch_size = to_size(key, v);
    else if (key == "epochs") cfg.optim.epochs = to_size(key, v);
    else if (key == "clip_norm") cfg.optim.clip_norm = to_double(key, v);
    else if (key == "patches_per_epoch") cfg.optim.patches_per_epoch = to_size(key, v);
    else if (key == "eval_every") cfg.optim.eval_every = to_size(key, v);
    else if (key == "data_root") cfg.data.root = v;
    else if (key == "patch") cfg.data.patch = to_size(key, v);
    else if (key == "split_ratio") cfg.data.split_ratio = to_double(key, v);
    else if (key == "seed") cfg.data.seed = to_u64(key, v);
    else if (key == "hflip") cfg.data.hflip = to_bool(key, v);
    else if (key == "use_cache") cfg.data.use_cache = to_bool(key, v);
    else if (key == "out_dir") cfg.out_dir = v;
    else throw InvalidConfig("unknown key '" + key + "'");
  }
}

std::string config_value(const RunConfig& cfg, const std::string& key) {
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  if (key == "scale") return std::to_string(cfg.model.scale);
  if (key == "feat_channels") return std::to_string(cfg.model.feat_channels);
  if (key == "mapping_layers") return std::to_string(cfg.model.mapping_layers);
  if (key == "kernel_size") return std::to_string(cfg.model.kernel_size);
  if (key == "use_batchnorm") return b(cfg.model.use_batchnorm);
  if (key == "block_order") return to_string(cfg.model.block_order);
  if (key == "residual") return b(cfg.model.residual);
  if (key == "final_activation") return to_string(cfg.model.final_activation);
  if (key == "optimizer") return cfg.optim.kind == OptimizerKind::kAdam ? "adam" : "sgd";
  if (key == "lr") return fmt_double(cfg.optim.lr);
  if (key == "beta1") return fmt_double(cfg.optim.beta1);
  if (key == "beta2") return fmt_double(cfg.optim.beta2);
  if (key == "adam_eps") return fmt_double(cfg.optim.adam_eps);
  if (key == "batch_size") return std::to_string(cfg.optim.batch_size);
  if (key == "epochs") return std::to_string(cfg.optim.epochs);
  if (key == "clip_norm") return fmt_double(cfg.optim.clip_norm);
  if (key == "patches_per_epoch") return std::to_string(cfg.optim.patches_per_epoch);
  if (key == "eval_every") return std::to_string(cfg.optim.eval_every);
  if (key == "data_root") return "\"" + cfg.data.root + "\"";
  if (key == "patch") return std::to_string(cfg.data.patch);
  if (key == "split_ratio") return fmt_double(cfg.data.split_ratio);
  if (key == "seed") return std::to_string(cfg.data.seed);
  if (key == "hflip") return b(cfg.data.hflip);
  if (key == "use_cache") return b(cfg.data.use_cache);
  if (key == "out_dir") return "\"" + cfg.out_dir + "\"";
  throw InvalidConfig("unknown key '" + key + "'");
}

std::string render_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& key : config_keys()) out += key + " = " + config_value(cfg, key) + "\n";
  return out;
}

}  // namespace srres
