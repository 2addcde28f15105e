#include "a2f/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "a2f/errors.hpp"
#include "a2f/util.hpp"

namespace a2f {

namespace {

using T = RunConfig::Type;

std::string trim(std::string s) {
  auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::optional<bool> parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  return std::nullopt;
}

bool valid_value(T type, const std::string& v) {
  switch (type) {
    case T::string:
      return true;
    case T::integer: {
      std::int64_t x = 0;
      auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
      return ec == std::errc() && p == v.data() + v.size();
    }
    case T::real: {
      try {
        std::size_t pos = 0;
        (void)std::stod(v, &pos);
        return pos == v.size();
      } catch (const std::exception&) {
        return false;
      }
    }
    case T::boolean:
      return parse_bool(v).has_value();
  }
  return false;
}

const RunConfig::Key& find_key(const std::string& name) {
  for (const auto& k : RunConfig::keys()) {
    if (k.name == name) return k;
  }
  throw ConfigError("unknown config key '" + name + "'");
}

}  // namespace

const std::vector<RunConfig::Key>& RunConfig::keys() {
  static const std::vector<Key> table = {
      {"dataset", T::string, "celeba", "celeba | lfwa | cuhk | synthetic"},
      {"data_root", T::string, "", "dataset root directory"},
      {"manifest", T::string, "", "manifest.jsonl produced by prepare-data"},
      {"schema", T::string, "", "attribute schema file (empty: built-in default)"},
      {"output_dir", T::string, "runs", "where checkpoints and results go"},
      {"seed", T::integer, "0", "global seed"},
      {"epochs", T::integer, "20", "training epochs"},
      {"batch_size", T::integer, "128", "mini-batch size"},
      {"lr", T::real, "0.0002", "Adam learning rate"},
      {"beta1", T::real, "0.5", "Adam beta1"},
      {"beta2", T::real, "0.999", "Adam beta2"},
      {"warm_epochs", T::integer, "10", "epochs at the base learning rate"},
      {"decay_epochs", T::integer, "10", "per-epoch decay factor is 1 - 1/decay_epochs"},
      {"max_steps", T::integer, "0", "stop after this many steps (0: no cap)"},
      {"lambda_kl_sketch", T::real, "1", "weight of the sketch-posterior KL"},
      {"lambda_kl_noise", T::real, "1", "weight of the noise-posterior KL"},
      {"lambda_l1", T::real, "100", "L1 weight of the GAN objective"},
      {"lambda_perp", T::real, "10", "perceptual weight of the GAN objective"},
      {"prob_eps", T::real, "1e-7", "probability clamp inside logs"},
      {"z_dim", T::integer, "512", "Stage-1 latent size"},
      {"noise_dim", T::integer, "100", "Stage-1 noise length"},
      {"attr_embed_dim", T::integer, "256", "Stage-1/2 attribute code size"},
      {"stage3_attr_embed_dim", T::integer, "128", "Stage-3 attribute code size"},
      {"reconstruction", T::string, "l1", "Stage-1 reconstruction term: l1 | mse"},
      {"width_divisor", T::integer, "1", "divide every channel width by this"},
      {"growth_rate", T::integer, "32", "dense-block growth rate before width_divisor"},
      {"dense_layers", T::integer, "6", "layers per dense block"},
      {"conditional_d2", T::boolean, "true", "Stage-2 discriminator sees the coarse sketch"},
      {"conditional_d3", T::boolean, "true", "Stage-3 discriminator sees the sketch"},
      {"stage2_attributes", T::boolean, "true", "build Stage 2 with attribute fusion"},
      {"stage3_attributes", T::boolean, "true", "build Stage 3 with attribute fusion"},
      {"vgg_weights", T::string, "", "conv1_1/conv1_2 archive (empty: seeded random weights)"},
      {"vgg_width", T::integer, "64", "width of the random fallback extractor"},
      {"sketch_sigma", T::real, "3", "pencil-sketch blur sigma in pixels"},
      {"cap_train", T::integer, "-1", "subsample the train split (-1: all)"},
      {"cap_test", T::integer, "-1", "subsample the test split (-1: all)"},
      {"test_fraction", T::real, "0.1", "hash-split test share without a partition file"},
      {"detector_boxes", T::string, "", "face boxes file (empty: centre crop)"},
      {"stage1_ckpt", T::string, "", "Stage-1 checkpoint"},
      {"stage2_ckpt", T::string, "", "Stage-2 checkpoint"},
      {"stage3_ckpt", T::string, "", "Stage-3 checkpoint"},
      {"predictor_ckpt", T::string, "", "attribute predictor checkpoint"},
      {"splits", T::integer, "10", "Inception Score splits"},
      {"is_attributes", T::string, "Male,Smiling,Young,Black_Hair,Blond_Hair,Brown_Hair,Gray_Hair",
       "attributes whose sign patterns are the Inception Score classes"},
      {"host", T::string, "127.0.0.1", "service bind address"},
      {"port", T::integer, "8080", "service port"},
      {"cors_origin", T::string, "*", "Access-Control-Allow-Origin value"},
      {"log_level", T::string, "info", "debug | info | warn | error | off"},
  };
  return table;
}

RunConfig::RunConfig() {
  for (const auto& k : keys()) values_[k.name] = k.default_value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto& k = find_key(key);
  const auto v = trim(value);
  if (!valid_value(k.type, v)) throw ConfigError("config key '" + key + "': invalid value '" + value + "'");
  values_[key] = v;
}

void RunConfig::parse(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": expected key = value");
    }
    try {
      set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  parse(read_text_file(path), path.string());
}

void RunConfig::apply_env(const std::function<const char*(const char*)>& getenv) {
  for (const auto& k : keys()) {
    std::string name = "A2F_" + k.name;
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::toupper(ch); });
    if (const char* v = getenv(name.c_str())) {
      try {
        set(k.name, v);
      } catch (const ConfigError& e) {
        throw ConfigError(name + ": " + e.what());
      }
    }
  }
}

std::string RunConfig::get(const std::string& key) const {
  find_key(key);
  return values_.at(key);
}

std::int64_t RunConfig::get_int(const std::string& key) const {
  if (find_key(key).type != T::integer) throw ConfigError("config key '" + key + "' is not an integer");
  return std::stoll(values_.at(key));
}

double RunConfig::get_double(const std::string& key) const {
  const auto type = find_key(key).type;
  if (type != T::real && type != T::integer) throw ConfigError("config key '" + key + "' is not numeric");
  return std::stod(values_.at(key));
}

bool RunConfig::get_bool(const std::string& key) const {
  if (find_key(key).type != T::boolean) throw ConfigError("config key '" + key + "' is not a boolean");
  return *parse_bool(values_.at(key));
}

std::optional<std::filesystem::path> RunConfig::get_path(const std::string& key) const {
  const auto v = get(key);
  if (v.empty()) return std::nullopt;
  return std::filesystem::path(v);
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::string RunConfig::provenance_hash() const { return to_hex(fnv1a64(canonical())); }

AttributeSchema schema_from(const RunConfig& c) {
  if (auto p = c.get_path("schema")) return load_schema(*p);
  return default_schema();
}

TrainOptions train_options_from(const RunConfig& c) {
  TrainOptions o;
  o.epochs = static_cast<int>(c.get_int("epochs"));
  o.batch_size = c.get_int("batch_size");
  o.learning_rate = c.get_double("lr");
  o.beta1 = c.get_double("beta1");
  o.beta2 = c.get_double("beta2");
  o.warm_epochs = static_cast<int>(c.get_int("warm_epochs"));
  o.decay_epochs = static_cast<int>(c.get_int("decay_epochs"));
  o.seed = static_cast<std::uint64_t>(c.get_int("seed"));
  o.max_steps = c.get_int("max_steps");
  o.validate();
  return o;
}

LossWeights loss_weights_from(const RunConfig& c) {
  LossWeights w;
  w.lambda_kl_sketch = c.get_double("lambda_kl_sketch");
  w.lambda_kl_noise = c.get_double("lambda_kl_noise");
  w.lambda_l1 = c.get_double("lambda_l1");
  w.lambda_perp = c.get_double("lambda_perp");
  w.prob_eps = c.get_double("prob_eps");
  w.validate();
  return w;
}

Stage1Config stage1_config_from(const RunConfig& c, const AttributeSchema& schema) {
  Stage1Config s;
  s.texture_dim = static_cast<int>(schema.texture_indices().size());
  s.z_dim = static_cast<int>(c.get_int("z_dim"));
  s.encoder_channels.back() = 2 * s.z_dim;
  s.noise_dim = static_cast<int>(c.get_int("noise_dim"));
  s.attr_embed_dim = static_cast<int>(c.get_int("attr_embed_dim"));
  const auto recon = c.get("reconstruction");
  if (recon != "l1" && recon != "mse") throw ConfigError("reconstruction must be l1 or mse");
  s.reconstruction = recon == "mse" ? ReconstructionKind::mse : ReconstructionKind::l1;
  const int divisor = static_cast<int>(c.get_int("width_divisor"));
  if (divisor > 1) {
    s = s.scaled(divisor);
    // Attribute code width is explicit; keep it.
    s.attr_embed_dim = static_cast<int>(c.get_int("attr_embed_dim"));
  }
  s.validate();
  return s;
}

AUDeNetConfig audenet_config_from(const RunConfig& c) {
  AUDeNetConfig a;
  a.growth_rate = static_cast<int>(c.get_int("growth_rate"));
  a.layers_per_block = static_cast<int>(c.get_int("dense_layers"));
  a.attr_embed_dim = static_cast<int>(c.get_int("attr_embed_dim"));
  a.attribute_conditioning = c.get_bool("stage2_attributes");
  const int divisor = static_cast<int>(c.get_int("width_divisor"));
  if (divisor > 1) a = a.scaled(divisor);
  a.validate();
  return a;
}

PatchDiscriminatorConfig discriminator_config_from(const RunConfig& c, int stage) {
  PatchDiscriminatorConfig d;
  d.conditional = c.get_bool(stage == 2 ? "conditional_d2" : "conditional_d3");
  const int divisor = static_cast<int>(c.get_int("width_divisor"));
  if (divisor > 1) d = d.scaled(divisor);
  return d;
}

Stage3Config stage3_config_from(const RunConfig& c, const AttributeSchema& schema) {
  Stage3Config s;
  s.attr_dim = static_cast<int>(schema.size());
  s.attribute_conditioning = c.get_bool("stage3_attributes");
  const int divisor = static_cast<int>(c.get_int("width_divisor"));
  if (divisor > 1) s = s.scaled(divisor);
  s.attr_embed_dim = static_cast<int>(c.get_int("stage3_attr_embed_dim"));
  s.validate();
  return s;
}

AttributePredictorConfig predictor_config_from(const RunConfig&, const AttributeSchema& schema) {
  AttributePredictorConfig p;
  p.attr_dim = static_cast<int>(schema.size());
  return p;
}

std::shared_ptr<VggConv12Extractor> extractor_from(const RunConfig& c) {
  if (auto p = c.get_path("vgg_weights")) return VggConv12Extractor::from_file(*p);
  return VggConv12Extractor::random(static_cast<std::uint64_t>(c.get_int("seed")),
                                    static_cast<int>(c.get_int("vgg_width")));
}

}  // namespace a2f
