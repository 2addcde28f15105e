#include "testing.hpp"

#include <map>

#include "a2f/config.hpp"
#include "a2f/errors.hpp"
#include "a2f/util.hpp"
#include "fixtures.hpp"

using namespace a2f;

TEST_CASE("every key has a default") {
  RunConfig c;
  for (const auto& k : RunConfig::keys()) CHECK_NOTHROW((void)c.get(k.name));
  CHECK(c.get_double("lr") == 2e-4);
  CHECK(c.get_int("batch_size") == 128);
  CHECK(c.get_int("z_dim") == 512);
  CHECK(c.get_int("noise_dim") == 100);
  CHECK(c.get_double("lambda_l1") == 100.0);
  CHECK(c.get_double("lambda_perp") == 10.0);
  CHECK(c.get_double("sketch_sigma") == 3.0);
  CHECK_FALSE(c.get_path("manifest").has_value());
}

TEST_CASE("unknown keys and ill-typed values are config errors") {
  RunConfig c;
  CHECK_THROWS_AS(c.set("learning_rate", "1"), ConfigError);
  CHECK_THROWS_AS(c.set("epochs", "ten"), ConfigError);
  CHECK_THROWS_AS(c.set("lr", "fast"), ConfigError);
  CHECK_THROWS_AS(c.set("conditional_d2", "maybe"), ConfigError);
  CHECK_THROWS_AS(c.parse("epochs 3\n"), ConfigError);
}

TEST_CASE("file, environment and explicit values layer in that order") {
  a2f::testing::TempDir dir("a2f-config");
  write_text_file(dir / "run.cfg", "# desk run\nepochs = 3\nbatch_size = 8  # paired\nlr=0.001\n");
  RunConfig c;
  c.load_file(dir / "run.cfg");
  CHECK(c.get_int("epochs") == 3);
  CHECK(c.get_int("batch_size") == 8);
  std::map<std::string, std::string> env{{"A2F_EPOCHS", "5"}, {"A2F_SEED", "9"}};
  c.apply_env([&](const char* k) -> const char* {
    auto it = env.find(k);
    return it == env.end() ? nullptr : it->second.c_str();
  });
  CHECK(c.get_int("epochs") == 5);
  CHECK(c.get_int("seed") == 9);
  c.set("epochs", "7");
  CHECK(c.get_int("epochs") == 7);
  CHECK(c.get_double("lr") == 0.001);
}

TEST_CASE("provenance hash depends only on the effective config") {
  RunConfig a, b;
  a.set("seed", "3");
  a.set("epochs", "2");
  b.set("epochs", "2");
  b.set("seed", "3");
  CHECK(a.canonical() == b.canonical());
  CHECK(a.provenance_hash() == b.provenance_hash());
  b.set("seed", "4");
  CHECK(a.provenance_hash() != b.provenance_hash());
}

TEST_CASE("builders translate the config into component settings") {
  RunConfig c;
  c.set("width_divisor", "8");
  c.set("epochs", "4");
  c.set("warm_epochs", "2");
  const auto& schema = schema_from(c);
  const auto s1 = stage1_config_from(c, schema);
  CHECK(s1.texture_dim == 13);
  CHECK(s1.z_dim == 64);
  CHECK(s1.attr_embed_dim == 256);
  const auto s2 = audenet_config_from(c);
  CHECK(s2.attr_embed_dim == s1.attr_embed_dim);
  CHECK(s2.stem == 8);
  const auto s3 = stage3_config_from(c, schema);
  CHECK(s3.attr_dim == 19);
  CHECK(s3.attr_embed_dim == 128);
  CHECK(discriminator_config_from(c, 2).channels[0] == 8);
  CHECK(train_options_from(c).epochs == 4);
  CHECK(loss_weights_from(c).lambda_l1 == 100.0);
  c.set("reconstruction", "huber");
  CHECK_THROWS_AS(stage1_config_from(c, schema), ConfigError);
}
