#include <benchmark/benchmark.h>
#include <torch/torch.h>

#include "a2f/audenet.hpp"
#include "a2f/metrics.hpp"
#include "a2f/patch_discriminator.hpp"
#include "a2f/pipeline.hpp"
#include "a2f/sketch.hpp"
#include "a2f/stage1.hpp"
#include "a2f/stage3.hpp"
#include "a2f/synthetic.hpp"

using namespace a2f;

namespace {

// Width divisor from the benchmark argument; 1 is the full model.
void BM_Stage1Decode(benchmark::State& state) {
  torch::NoGradGuard guard;
  auto m = make_stage1_model(Stage1Config{}.scaled(static_cast<int>(state.range(0))), 0);
  m->eval();
  const auto& c = m->config();
  auto z = torch::randn({1, c.z_dim});
  auto e = m->embed_attributes(torch::zeros({1, c.texture_dim}));
  for (auto _ : state) benchmark::DoNotOptimize(m->decode(z, e));
}
BENCHMARK(BM_Stage1Decode)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_AUDeNetForward(benchmark::State& state) {
  torch::NoGradGuard guard;
  auto g = make_audenet(AUDeNetConfig{}.scaled(static_cast<int>(state.range(0))), 0);
  g->eval();
  auto x = torch::rand({1, 3, 64, 64}) * 2 - 1;
  auto e = torch::randn({1, g->config().attr_embed_dim});
  for (auto _ : state) benchmark::DoNotOptimize(g->forward(x, e));
}
BENCHMARK(BM_AUDeNetForward)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Stage3Forward(benchmark::State& state) {
  torch::NoGradGuard guard;
  auto g = make_stage3_generator(Stage3Config{}.scaled(static_cast<int>(state.range(0))), 0);
  g->eval();
  auto x = torch::rand({1, 3, 64, 64}) * 2 - 1;
  auto a = torch::zeros({1, 19});
  for (auto _ : state) benchmark::DoNotOptimize(g->forward(x, a));
}
BENCHMARK(BM_Stage3Forward)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_PatchDiscriminator(benchmark::State& state) {
  torch::NoGradGuard guard;
  auto d = make_patch_discriminator(PatchDiscriminatorConfig{}, 0);
  d->eval();
  auto x = torch::rand({8, 3, 64, 64}) * 2 - 1;
  for (auto _ : state) benchmark::DoNotOptimize(d->forward(x, x));
}
BENCHMARK(BM_PatchDiscriminator)->Unit(benchmark::kMillisecond);

void BM_PencilSketch(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const auto face = render_synthetic_face(default_schema(), AttributeVector::filled(19, 1.0), 1, size, size);
  for (auto _ : state) benchmark::DoNotOptimize(pencil_sketch(face, 3.0));
}
BENCHMARK(BM_PencilSketch)->Arg(64)->Arg(178)->Unit(benchmark::kMicrosecond);

void BM_InceptionScore(benchmark::State& state) {
  auto raw = torch::rand({state.range(0), 128}, torch::kFloat64);
  auto p = raw / raw.sum(1, true);
  for (auto _ : state) benchmark::DoNotOptimize(inception_score(p, 10));
}
BENCHMARK(BM_InceptionScore)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Synthesize(benchmark::State& state) {
  const int div = static_cast<int>(state.range(0));
  auto s1 = Stage1Config{}.scaled(div);
  auto s2 = AUDeNetConfig{}.scaled(div);
  s2.attr_embed_dim = s1.attr_embed_dim;
  auto session = PipelineSession::from_models(make_stage1_model(s1, 0), make_audenet(s2, 1),
                                              make_stage3_generator(Stage3Config{}.scaled(div), 2), default_schema());
  const auto a = AttributeVector::filled(19, -1.0);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(synthesize(*session, a, seed++));
}
BENCHMARK(BM_Synthesize)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  torch::set_num_threads(1);
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
