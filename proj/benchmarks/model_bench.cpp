#include <benchmark/benchmark.h>

#include "deepim/autograd.hpp"
#include "deepim/graph.hpp"
#include "deepim/models.hpp"

namespace {

using namespace deepim;

void BM_TauForward(benchmark::State& state) {
  Graph g = erdos_renyi(static_cast<NodeId>(state.range(0)),
                        static_cast<std::uint64_t>(state.range(0)) * 5, 17);
  ModelArch arch;
  arch.encoder_hidden = {128, 128};
  arch.student_hidden = {64};
  ModelBundle bundle = ModelBundle::init(g, arch, 5);
  AttnGraph ag_view = AttnGraph::build(g);
  ag::Matrix x = ag::Matrix::Zero(g.node_count(), 1);
  for (NodeId v = 0; v < g.node_count(); v += 10) x(v, 0) = 1.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(tau_value(bundle, ag_view, x).sum());
  state.SetItemsProcessed(state.iterations() * g.edge_count());
}
BENCHMARK(BM_TauForward)->Arg(200)->Arg(1000)->Arg(5000);

void BM_EncodeDecode(benchmark::State& state) {
  Graph g = erdos_renyi(static_cast<NodeId>(state.range(0)),
                        static_cast<std::uint64_t>(state.range(0)) * 5, 17);
  ModelArch arch;
  arch.encoder_hidden = {256, 256};
  arch.student_hidden = {64};
  ModelBundle bundle = ModelBundle::init(g, arch, 5);
  ag::Matrix x = ag::Matrix::Zero(1, g.node_count());
  for (NodeId v = 0; v < g.node_count(); v += 10) x(0, v) = 1.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(decode_value(bundle, encode_value(bundle, x)).sum());
}
BENCHMARK(BM_EncodeDecode)->Arg(1000)->Arg(5000);

}  // namespace

BENCHMARK_MAIN();
