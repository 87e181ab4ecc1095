// Microbenchmarks for the hot paths of the training and scoring loops.

#include <benchmark/benchmark.h>

#include "gmgan/gan.hpp"
#include "gmgan/mlp.hpp"
#include "gmgan/msssim.hpp"
#include "gmgan/trainer.hpp"

namespace {

using namespace gmgan;

void BM_MlpForward(benchmark::State& state) {
  const int64_t batch = state.range(0);
  MlpSpec spec = MlpSpec::make({100, 128, 128, 2}, Act::Tanh);
  Rng rng(1);
  ParamStore params;
  init_mlp_params(spec, params, rng, 0.02);
  Tensor x = Tensor::zeros({batch, 100});
  for (double& v : x.v) v = rng.normal();
  for (auto _ : state) {
    Tensor out = mlp_eval(spec, params, x);
    benchmark::DoNotOptimize(out.v.data());
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_MlpForward)->Arg(64)->Arg(128);

void BM_MlpForwardBackward(benchmark::State& state) {
  const int64_t batch = state.range(0);
  MlpSpec spec = MlpSpec::make({100, 128, 128, 2}, Act::Tanh);
  Rng rng(2);
  ParamStore params;
  init_mlp_params(spec, params, rng, 0.02);
  Tensor x = Tensor::zeros({batch, 100});
  for (double& v : x.v) v = rng.normal();
  for (auto _ : state) {
    ForwardTrace tr = mlp_forward(spec, params, x);
    backprop(tr, Tensor::full({batch, 2}, 1.0));
    params.zero_grads();
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_MlpForwardBackward)->Arg(64)->Arg(128);

void BM_TrainIteration(benchmark::State& state) {
  Rng data_rng(3);
  Dataset ds = gen_toy(5000, 0.1, data_rng);
  TrainConfig cfg;
  cfg.K = 9;
  cfg.d = 100;
  cfg.seed = 4;
  TrainSession session = TrainSession::create(cfg, ds);
  for (auto _ : state) session.run(ds, 1);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_TrainIteration);

void BM_MsSsimPair(benchmark::State& state) {
  Rng rng(5);
  Tensor a = Tensor::zeros({28, 28});
  Tensor b = Tensor::zeros({28, 28});
  for (double& v : a.v) v = rng.uniform(-1, 1);
  for (double& v : b.v) v = rng.uniform(-1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(ms_ssim(a, b));
}
BENCHMARK(BM_MsSsimPair);

void BM_MixtureSampling(benchmark::State& state) {
  Rng init(6);
  MixturePrior prior = MixturePrior::init_static(9, 100, 0.1, 0.15, init);
  Rng rng(7);
  std::vector<int> comps(128);
  for (auto& k : comps) k = prior.sample_component(rng);
  for (auto _ : state) {
    Tensor z = prior.sample_latent_batch(comps, SigmaScale{1.0}, rng);
    benchmark::DoNotOptimize(z.v.data());
  }
  state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(BM_MixtureSampling);

}  // namespace

BENCHMARK_MAIN();
