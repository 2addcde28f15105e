#include "testing.hpp"

#include "a2f/audenet.hpp"
#include "a2f/errors.hpp"
#include "a2f/patch_discriminator.hpp"
#include "a2f/stage1.hpp"
#include "a2f/stage3.hpp"
#include "fixtures.hpp"

using namespace a2f;
using a2f::testing::tiny_audenet_config;
using a2f::testing::tiny_stage1_config;
using a2f::testing::tiny_stage3_config;

namespace {

torch::Tensor images(std::int64_t n, std::uint64_t seed) {
  auto g = make_generator(seed);
  return torch::rand({n, 3, 64, 64}, g) * 2 - 1;
}

void check_image_batch(const torch::Tensor& y, std::int64_t n) {
  CHECK(y.sizes() == torch::IntArrayRef({n, 3, 64, 64}));
  CHECK(y.min().item<float>() >= -1.0f);
  CHECK(y.max().item<float>() <= 1.0f);
}

}  // namespace

TEST_CASE("full-size layer plans") {
  CHECK(Stage1Config{}.encoder_plan() == "CONV5(64)-CONV5(128)-CONV3(256)-CONV3(512)-CONV4(1024)");
  CHECK(AUDeNetConfig{}.layer_plan() ==
        "C(64)-M(64)-D(256)-T(128)-D(512)-T(256)-D(1024)-T(512)-D(1024)-DT(256)-D(512)-DT(128)-D(256)-DT(64)-"
        "D(64)-D(32)-D(32)-DT(16)-C(3)");
  CHECK(Stage3Config{}.layer_plan() == "C(64)-C(128)-C(256)-C(512)-C(512)-R(512)-DC(512)-DC(256)-DC(128)-DC(64)-DC(3)");
}

TEST_CASE("configs round-trip through json and validate") {
  CHECK(Stage1Config::from_json(tiny_stage1_config().to_json()).to_json() == tiny_stage1_config().to_json());
  CHECK(AUDeNetConfig::from_json(tiny_audenet_config().to_json()).to_json() == tiny_audenet_config().to_json());
  CHECK(Stage3Config::from_json(tiny_stage3_config().to_json()).to_json() == tiny_stage3_config().to_json());
  PatchDiscriminatorConfig d;
  CHECK(PatchDiscriminatorConfig::from_json(d.to_json()).to_json() == d.to_json());
  auto bad = Stage1Config{};
  bad.z_dim = 100;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS((void)Stage1Config{}.scaled(0), ConfigError);
}

TEST_CASE("Stage 1 encodes to the latent size and decodes to 64x64x3") {
  auto m = make_stage1_model(tiny_stage1_config(), 3);
  const auto& c = m->config();
  auto texture = torch::zeros({2, c.texture_dim});
  auto enc = m->encode_sketch(images(2, 1), texture);
  CHECK(enc.posterior.mean.sizes() == torch::IntArrayRef({2, c.z_dim}));
  CHECK(enc.posterior.log_variance.sizes() == torch::IntArrayRef({2, c.z_dim}));
  CHECK(enc.attr_embedding.sizes() == torch::IntArrayRef({2, c.attr_embed_dim}));
  auto noise = m->encode_noise(torch::randn({2, c.noise_dim}), texture);
  CHECK(noise.posterior.mean.sizes() == torch::IntArrayRef({2, c.z_dim}));
  check_image_batch(m->decode(enc.posterior.mean, enc.attr_embedding), 2);
  CHECK_THROWS(m->encode_sketch(images(2, 1), torch::zeros({2, c.texture_dim + 1})));
}

TEST_CASE("AUDeNet keeps the resolution and wires skips at 64/32/16/8") {
  auto g = make_audenet(tiny_audenet_config(), 4);
  const auto& c = g->config();
  AUDeNetTrace trace;
  auto y = g->forward(images(2, 2), torch::randn({2, c.attr_embed_dim}), true, &trace);
  check_image_batch(y, 2);
  CHECK(trace.bottleneck_shape == (std::vector<std::int64_t>{2, c.bottleneck, 4, 4}));
  std::vector<std::int64_t> res;
  for (const auto& s : trace.skips) res.push_back(s.resolution);
  CHECK(res == (std::vector<std::int64_t>{8, 16, 32, 64}));
  CHECK(g->dense_blocks().size() == 3 + 1 + 5);
}

TEST_CASE("dense block concatenations are live") {
  torch::manual_seed(0);
  DenseBlock block(4, 6, 3, 2);
  block->eval();
  auto x = torch::randn({2, 4, 8, 8});
  const auto ref = block->forward(x);
  CHECK(ref.sizes() == torch::IntArrayRef({2, 6, 8, 8}));
  for (int layer = 1; layer <= 3; ++layer) {
    for (int source = 0; source < layer; ++source) {
      block->sever_link(std::pair{layer, source});
      CHECK_FALSE(torch::allclose(block->forward(x), ref));
    }
  }
  block->sever_link(std::nullopt);
  CHECK(torch::equal(block->forward(x), ref));
}

TEST_CASE("attribute code reaches AUDeNet and Stage 3") {
  auto g2 = make_audenet(tiny_audenet_config(), 5);
  g2->eval();
  const auto x = images(2, 3);
  const auto e = torch::randn({2, g2->config().attr_embed_dim});
  CHECK_FALSE(torch::allclose(g2->forward(x, e), g2->forward(x, torch::zeros_like(e))));
  CHECK(torch::equal(g2->forward(x, e, false), g2->forward(x, torch::zeros_like(e))));

  auto g3 = make_stage3_generator(tiny_stage3_config(), 6);
  g3->eval();
  const auto a = torch::ones({2, 19});
  Stage3Trace trace;
  check_image_batch(g3->forward(x, a, true, &trace), 2);
  CHECK_FALSE(torch::allclose(g3->forward(x, a), g3->forward(x, -a)));
  CHECK(torch::equal(g3->forward(x, a, false), g3->forward(x, -a, false)));
  CHECK(trace.skips.size() == 4);
}

TEST_CASE("Stage-3 residual block adds its input back") {
  auto g3 = make_stage3_generator(tiny_stage3_config(), 7);
  g3->eval();
  auto& r = g3->residual();
  torch::NoGradGuard guard;
  r->conv2()->weight.zero_();
  auto x = torch::randn({1, tiny_stage3_config().encoder_channels.back(), 2, 2});
  // Fresh BN in eval mode maps zero to zero, so the block is the identity.
  CHECK(torch::allclose(r->forward(x), x));
}

TEST_CASE("patch discriminator emits 6x6 maps") {
  CHECK(conv_output_size(64, 4, 2, 1) == 32);
  CHECK(conv_output_size(8, 4, 1, 1) == 7);
  for (bool conditional : {true, false}) {
    auto d = make_patch_discriminator(a2f::testing::tiny_discriminator_config(conditional), 8);
    auto s = d->forward(images(3, 4), images(3, 5));
    CHECK(s.sizes() == torch::IntArrayRef({3, 1, 6, 6}));
    CHECK(s.min().item<float>() >= 0.0f);
    CHECK(s.max().item<float>() <= 1.0f);
  }
  auto cond = make_patch_discriminator(a2f::testing::tiny_discriminator_config(true), 9);
  cond->eval();
  const auto y = images(1, 6);
  CHECK_FALSE(torch::allclose(cond->forward(images(1, 7), y), cond->forward(images(1, 8), y)));
}

TEST_CASE("same seed, same weights") {
  auto a = make_stage3_generator(tiny_stage3_config(), 11);
  auto b = make_stage3_generator(tiny_stage3_config(), 11);
  auto c = make_stage3_generator(tiny_stage3_config(), 12);
  const auto pa = a->parameters();
  const auto pb = b->parameters();
  const auto pc = c->parameters();
  bool all_equal = true;
  bool any_diff = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    all_equal = all_equal && torch::equal(pa[i], pb[i]);
    any_diff = any_diff || !torch::equal(pa[i], pc[i]);
  }
  CHECK(all_equal);
  CHECK(any_diff);
}
