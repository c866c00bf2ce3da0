#include <benchmark/benchmark.h>

#include "kacl/dos.hpp"
#include "kacl/eigensolver.hpp"
#include "kacl/grid.hpp"
#include "kacl/model.hpp"

namespace {

kl::ModelParams bench_params() {
  kl::ModelParams p;
  p.d = 2;
  p.nu = 1.0;
  p.a = 0.3;
  return p;
}

void BM_MaskBuild(benchmark::State& state) {
  const kl::ModelParams p = bench_params();
  const kl::Box box = kl::Box::centered(2, 6.0);
  kl::Rng rng = kl::Rng::keyed(7, 0);
  const kl::Cloud cloud = kl::sample_cloud(box.inflated(p.a), p, rng);
  const double h = 6.0 / state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kl::build_mask(box, cloud, p.a, h));
  }
}
BENCHMARK(BM_MaskBuild)->Arg(64)->Arg(128);

void BM_Assemble(benchmark::State& state) {
  const kl::ModelParams p = bench_params();
  const kl::Box box = kl::Box::centered(2, 6.0);
  kl::Rng rng = kl::Rng::keyed(7, 0);
  const kl::Cloud cloud = kl::sample_cloud(box.inflated(p.a), p, rng);
  const kl::GridDomain dom = kl::build_mask(box, cloud, p.a, 6.0 / state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kl::assemble_half_laplacian(dom));
  }
}
BENCHMARK(BM_Assemble)->Arg(64)->Arg(128);

void BM_LowestPair(benchmark::State& state) {
  const kl::ModelParams p = bench_params();
  const kl::Box box = kl::Box::centered(2, 4.0);
  kl::Rng rng = kl::Rng::keyed(11, 0);
  const kl::Cloud cloud = kl::sample_cloud(box.inflated(p.a), p, rng);
  const kl::GridDomain dom = kl::build_mask(box, cloud, p.a, 8.0 / state.range(0));
  const kl::SparseOperator op = kl::assemble_half_laplacian(dom);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kl::smallest_eigenpairs(op, 2));
  }
}
BENCHMARK(BM_LowestPair)->Arg(48)->Arg(96);

void BM_SausageVolume(benchmark::State& state) {
  for (auto _ : state) {
    kl::Rng rng = kl::Rng::keyed(3, state.iterations());
    benchmark::DoNotOptimize(
        kl::bridge_sausage_volume(1.0, 0.3, 2, state.range(0), 0.3 / 16, rng));
  }
}
BENCHMARK(BM_SausageVolume)->Arg(128)->Arg(512);

}  // namespace
