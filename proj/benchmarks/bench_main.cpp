#include <benchmark/benchmark.h>

#include "embres/dimension.hpp"
#include "embres/range_index.hpp"
#include "embres/singularity.hpp"
#include "embres/synth.hpp"
#include "embres/tangent_cone.hpp"

using namespace embres;

namespace {

PointCloud patch(std::size_t samples) {
  SynthSpec spec;
  spec.kind = SynthKind::FlatPatch;
  spec.ambient = 10;
  spec.dims = {2};
  spec.samples = samples;
  spec.seed = 1;
  return generate(spec).cloud;
}

void BM_RangeCountIndex(benchmark::State& state) {
  const auto cloud = patch(static_cast<std::size_t>(state.range(0)));
  const RangeIndex index(cloud);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.range_count(cloud.point(i), 0.2));
    i = (i + 1) % cloud.size();
  }
}
BENCHMARK(BM_RangeCountIndex)->Arg(1000)->Arg(10000)->Arg(50000);

void BM_RangeCountScan(benchmark::State& state) {
  const auto cloud = patch(static_cast<std::size_t>(state.range(0)));
  std::size_t i = 0;
  for (auto _ : state) {
    const auto c = cloud.point(i);
    std::size_t count = 0;
    for (std::size_t j = 0; j < cloud.size(); ++j) count += squared_distance(cloud.point(j), c) <= 0.04;
    benchmark::DoNotOptimize(count);
    i = (i + 1) % cloud.size();
  }
}
BENCHMARK(BM_RangeCountScan)->Arg(1000)->Arg(10000)->Arg(50000);

void BM_PointProfile(benchmark::State& state) {
  const auto cloud = patch(3000);
  const RangeIndex index(cloud);
  const auto params = resolve(SingularityParams{}, cloud);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(point_profile(index, cloud, i, params));
    i = (i + 1) % cloud.size();
  }
}
BENCHMARK(BM_PointProfile);

void BM_SingularLocus(benchmark::State& state) {
  const auto cloud = patch(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(singular_locus(cloud, SingularityParams{}, 1));
}
BENCHMARK(BM_SingularLocus)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);

void BM_ClusterDirections(benchmark::State& state) {
  SynthSpec spec;
  spec.ambient = 10;
  spec.dims = {1, 2};
  spec.samples = static_cast<std::size_t>(state.range(0));
  spec.seed = 2;
  const auto g = generate(spec);
  const auto dirs = local_directions(g.cloud, g.truth.center, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(cluster_directions(dirs));
}
BENCHMARK(BM_ClusterDirections)->Arg(500)->Arg(1500)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
