#include "a2f/gan_training.hpp"

#include "a2f/checkpoint.hpp"
#include "a2f/errors.hpp"
#include "a2f/log.hpp"
#include "json.hpp"

namespace a2f {

using nlohmann::json;

namespace {

void check_images(const torch::Tensor& t, const char* what) {
  if (t.dim() != 4 || t.size(1) != 3 || t.size(2) != 64 || t.size(3) != 64) {
    throw DataError(std::string(what) + " must be N x 3 x 64 x 64");
  }
}

struct GanConfigs {
  std::string generator;
  PatchDiscriminatorConfig discriminator;
};

std::string gan_config_json(const std::string& generator_json, const PatchDiscriminatorConfig& d) {
  return json{{"generator", json::parse(generator_json)}, {"discriminator", json::parse(d.to_json())}}.dump();
}

GanConfigs parse_gan_config(const std::string& text) {
  try {
    const auto j = json::parse(text);
    return {j.at("generator").dump(), PatchDiscriminatorConfig::from_json(j.at("discriminator").dump())};
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed GAN config: ") + e.what());
  }
}

}  // namespace

double patch_accuracy(const torch::Tensor& real_scores, const torch::Tensor& fake_scores) {
  const auto correct = (real_scores > 0.5).sum().item<double>() + (fake_scores < 0.5).sum().item<double>();
  return correct / static_cast<double>(real_scores.numel() + fake_scores.numel());
}

TrainingLog train_conditional_gan(torch::nn::Module& generator, const ConditionalGenerator& generate,
                                  PatchDiscriminatorImpl& discriminator, const GanData& data,
                                  const TrainOptions& options, const LossWeights& weights,
                                  const FeatureExtractor* extractor, const GanSwitches& switches,
                                  const StepCallback& on_step, const EpochHook& on_epoch) {
  options.validate();
  weights.validate();
  check_images(data.conditions, "GAN conditions");
  check_images(data.targets, "GAN targets");
  const auto n = data.conditions.size(0);
  if (data.targets.size(0) != n || data.attributes.size(0) != n) {
    throw DataError("GAN data: condition/target/attribute counts differ");
  }
  if (n < 2) throw DataError("GAN data: need at least two pairs");
  if (weights.lambda_perp > 0 && extractor == nullptr) {
    throw ConfigError("perceptual weight is positive but no feature extractor was given");
  }
  TrainingLog log;
  if (options.epochs == 0) return log;

  auto gen = make_generator(options.seed);
  auto g_opt = make_adam(generator.parameters(), options);
  auto d_opt = make_adam(discriminator.parameters(), options);
  generator.train();
  discriminator.train();
  bool stop = false;
  for (int epoch = 0; epoch < options.epochs && !stop; ++epoch) {
    const double lr = learning_rate_at(options, epoch);
    set_learning_rate(g_opt, lr);
    set_learning_rate(d_opt, lr);
    EpochRecord record{epoch + 1, lr, 0, {}};
    for (const auto& idx : epoch_batches(n, options.batch_size, gen)) {
      if (idx.size(0) < 2) continue;  // batch norm needs two samples
      const auto cond = data.conditions.index_select(0, idx);
      const auto real = data.targets.index_select(0, idx);
      const auto attrs = data.attributes.index_select(0, idx);
      std::map<std::string, double> values;

      torch::Tensor fake;
      if (switches.update_generator) {
        fake = generate(cond, attrs);
      } else {
        torch::NoGradGuard no_grad;
        fake = generate(cond, attrs);
      }

      {
        d_opt.zero_grad();
        const auto d_real = discriminator.forward(cond, real);
        const auto d_fake = discriminator.forward(cond, fake.detach());
        const auto d_loss = discriminator_adversarial_loss(d_real, d_fake, weights.prob_eps);
        values["d_loss"] = d_loss.item<double>();
        values["d_accuracy"] = patch_accuracy(d_real.detach(), d_fake.detach());
        if (switches.update_discriminator) {
          d_loss.backward();
          d_opt.step();
        }
      }

      if (switches.update_generator) {
        g_opt.zero_grad();
        const auto adv = generator_adversarial_loss(discriminator.forward(cond, fake), weights.prob_eps);
        const auto l1 = a2f::l1_loss(fake, real);
        const auto perp = weights.lambda_perp > 0 ? perceptual_loss(fake, real, *extractor)
                                                  : torch::zeros({}, fake.options());
        const auto total = composite_loss(adv, l1, perp, weights);
        values["g_adv"] = adv.item<double>();
        values["l1"] = l1.item<double>();
        values["perceptual"] = perp.item<double>();
        values["g_total"] = total.item<double>();
        check_finite_losses(values, epoch, log.total_steps + 1);
        total.backward();
        g_opt.step();
        discriminator.zero_grad();
      } else {
        values["l1"] = a2f::l1_loss(fake, real).item<double>();
        check_finite_losses(values, epoch, log.total_steps + 1);
      }

      ++log.total_steps;
      ++record.steps;
      for (const auto& [k, v] : values) record.losses[k] += v;
      if (on_step && !on_step(log.total_steps, values)) stop = true;
      if (options.max_steps > 0 && log.total_steps >= options.max_steps) stop = true;
      if (stop) break;
    }
    for (auto& [k, v] : record.losses) v /= std::max<std::int64_t>(1, record.steps);
    log::info("gan epoch ", record.epoch, ": l1=", record.losses["l1"], " d_loss=", record.losses["d_loss"],
              " d_acc=", record.losses["d_accuracy"]);
    log.epochs.push_back(record);
    if (on_epoch) on_epoch(record.epoch, g_opt, d_opt);
  }
  return log;
}

Stage2Pairs make_stage2_pairs(Stage1ModelImpl& stage1, const torch::Tensor& sketches, const torch::Tensor& texture) {
  check_images(sketches, "stage2 target sketches");
  torch::NoGradGuard no_grad;
  const bool was_training = stage1.is_training();
  stage1.eval();
  Stage2Pairs pairs;
  const auto enc = stage1.encode_sketch(sketches, texture);
  pairs.coarse = stage1.decode(enc.posterior.mean, enc.attr_embedding);
  pairs.attr_embedding = enc.attr_embedding;
  pairs.targets = sketches;
  stage1.train(was_training);
  return pairs;
}

TrainingLog train_stage2(AUDeNet& generator, PatchDiscriminator& discriminator, const Stage2Pairs& pairs,
                         const TrainOptions& options, const LossWeights& weights,
                         const FeatureExtractor* extractor, const AttributeSchema& schema,
                         const GanSwitches& switches, const StepCallback& on_step) {
  if (pairs.attr_embedding.dim() != 2 || pairs.attr_embedding.size(1) != generator->config().attr_embed_dim) {
    throw DataError("stage2: attribute embedding width does not match the generator");
  }
  auto g = generator;
  const ConditionalGenerator generate = [g](const torch::Tensor& c, const torch::Tensor& a) mutable {
    return g->forward(c, a);
  };
  EpochHook hook;
  if (options.checkpoint_path) {
    hook = [&](int epoch, const torch::optim::Optimizer& go, const torch::optim::Optimizer& dopt) {
      save_stage2(*options.checkpoint_path, generator, discriminator, schema, epoch, &go, &dopt);
    };
  }
  return train_conditional_gan(*generator, generate, *discriminator,
                               {pairs.coarse, pairs.targets, pairs.attr_embedding}, options, weights, extractor,
                               switches, on_step, hook);
}

torch::Tensor enhance_sketches(AUDeNetImpl& generator, const Stage2Pairs& pairs, std::int64_t batch_size) {
  torch::NoGradGuard no_grad;
  const bool was_training = generator.is_training();
  generator.eval();
  std::vector<torch::Tensor> out;
  const auto n = pairs.coarse.size(0);
  for (std::int64_t i = 0; i < n; i += batch_size) {
    const auto len = std::min(batch_size, n - i);
    out.push_back(generator.forward(pairs.coarse.narrow(0, i, len), pairs.attr_embedding.narrow(0, i, len)));
  }
  generator.train(was_training);
  return torch::cat(out, 0);
}

TrainingLog train_stage3(Stage3Generator& generator, PatchDiscriminator& discriminator, const Stage3Pairs& pairs,
                         const TrainOptions& options, const LossWeights& weights,
                         const FeatureExtractor* extractor, const AttributeSchema& schema,
                         const GanSwitches& switches, const StepCallback& on_step) {
  if (pairs.attributes.dim() != 2 || pairs.attributes.size(1) != generator->config().attr_dim ||
      static_cast<std::size_t>(pairs.attributes.size(1)) != schema.size()) {
    throw DataError("stage3: attribute width does not match the generator/schema");
  }
  auto g = generator;
  const ConditionalGenerator generate = [g](const torch::Tensor& c, const torch::Tensor& a) mutable {
    return g->forward(c, a);
  };
  EpochHook hook;
  if (options.checkpoint_path) {
    hook = [&](int epoch, const torch::optim::Optimizer& go, const torch::optim::Optimizer& dopt) {
      save_stage3(*options.checkpoint_path, generator, discriminator, schema, epoch, &go, &dopt);
    };
  }
  return train_conditional_gan(*generator, generate, *discriminator, {pairs.sketches, pairs.faces, pairs.attributes},
                               options, weights, extractor, switches, on_step, hook);
}

void save_stage2(const std::filesystem::path& path, AUDeNet& generator, PatchDiscriminator& discriminator,
                 const AttributeSchema& schema, std::int64_t epoch, const torch::optim::Optimizer* g_opt,
                 const torch::optim::Optimizer* d_opt) {
  CheckpointHeader header;
  header.stage = "stage2";
  header.config_json = gan_config_json(generator->config().to_json(), discriminator->config());
  header.schema = schema;
  header.epoch = epoch;
  save_checkpoint(path, header, {{"G2", generator.get(), g_opt}, {"D2", discriminator.get(), d_opt}});
}

void save_stage3(const std::filesystem::path& path, Stage3Generator& generator, PatchDiscriminator& discriminator,
                 const AttributeSchema& schema, std::int64_t epoch, const torch::optim::Optimizer* g_opt,
                 const torch::optim::Optimizer* d_opt) {
  CheckpointHeader header;
  header.stage = "stage3";
  header.config_json = gan_config_json(generator->config().to_json(), discriminator->config());
  header.schema = schema;
  header.epoch = epoch;
  save_checkpoint(path, header, {{"G3", generator.get(), g_opt}, {"D3", discriminator.get(), d_opt}});
}

LoadedStage2 load_stage2(const std::filesystem::path& path) {
  CheckpointReader reader(path);
  reader.expect_stage("stage2");
  const auto configs = parse_gan_config(reader.header().config_json);
  LoadedStage2 out;
  out.generator = AUDeNet(AUDeNetConfig::from_json(configs.generator));
  out.discriminator = PatchDiscriminator(configs.discriminator);
  reader.load_module("G2", *out.generator);
  reader.load_module("D2", *out.discriminator);
  out.generator->eval();
  out.discriminator->eval();
  out.schema = reader.header().schema;
  out.epoch = reader.header().epoch;
  return out;
}

LoadedStage3 load_stage3(const std::filesystem::path& path) {
  CheckpointReader reader(path);
  reader.expect_stage("stage3");
  const auto configs = parse_gan_config(reader.header().config_json);
  LoadedStage3 out;
  out.generator = Stage3Generator(Stage3Config::from_json(configs.generator));
  out.discriminator = PatchDiscriminator(configs.discriminator);
  reader.load_module("G3", *out.generator);
  reader.load_module("D3", *out.discriminator);
  out.generator->eval();
  out.discriminator->eval();
  out.schema = reader.header().schema;
  out.epoch = reader.header().epoch;
  return out;
}

}  // namespace a2f
