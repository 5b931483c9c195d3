#include <benchmark/benchmark.h>

#include <string>

#include "pilin/parser.hpp"
#include "pilin/rank.hpp"
#include "pilin/runtime.hpp"
#include "pilin/typeck.hpp"
#include "pilin/validity.hpp"

namespace {

const char* const kPrograms[] = {"buyer_seller",   "compulsive_buyer", "omega",
                                 "work_gather",    "forwarder",        "slot_machine",
                                 "context_free_tree", "player_machine"};

pilin::Program load(std::size_t i) {
  return pilin::parse_file(std::string(PILIN_CORPUS_DIR) + "/" + kPrograms[i] + ".pilin").program;
}

void BM_Parse(benchmark::State& state) {
  const std::string path = std::string(PILIN_CORPUS_DIR) + "/" + kPrograms[state.range(0)] + ".pilin";
  for (auto _ : state) benchmark::DoNotOptimize(pilin::parse_file(path));
  state.SetLabel(kPrograms[state.range(0)]);
}

void BM_Rank(benchmark::State& state) {
  const pilin::Program prog = load(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pilin::compute_ranks(prog));
  state.SetLabel(kPrograms[state.range(0)]);
}

void BM_QuasiTyping(benchmark::State& state) {
  const pilin::Program prog = load(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pilin::check_program(prog));
  state.SetLabel(kPrograms[state.range(0)]);
}

void BM_Validity(benchmark::State& state) {
  const pilin::Program prog = load(static_cast<std::size_t>(state.range(0)));
  const pilin::ProofGraph g = pilin::check_program(prog);
  const pilin::RankTable ranks = pilin::compute_ranks(prog);
  for (auto _ : state) benchmark::DoNotOptimize(pilin::check_validity(g, ranks));
  state.SetLabel(kPrograms[state.range(0)]);
}

void BM_Oracle(benchmark::State& state) {
  const pilin::Program prog = load(static_cast<std::size_t>(state.range(0)));
  const pilin::ProofGraph g = pilin::check_program(prog);
  const pilin::RankTable ranks = pilin::compute_ranks(prog);
  for (auto _ : state) benchmark::DoNotOptimize(pilin::oracle_check(g, ranks, 8));
  state.SetLabel(kPrograms[state.range(0)]);
}

void BM_RandomRun(benchmark::State& state) {
  const pilin::Program prog = load(static_cast<std::size_t>(state.range(0)));
  const pilin::RankTable ranks = pilin::compute_ranks(prog);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(pilin::run(prog, ranks, pilin::Policy::random(seed++, 16), 10'000));
  state.SetLabel(kPrograms[state.range(0)]);
}

}  // namespace

BENCHMARK(BM_Parse)->DenseRange(0, 7);
BENCHMARK(BM_Rank)->DenseRange(0, 7);
BENCHMARK(BM_QuasiTyping)->DenseRange(0, 7);
BENCHMARK(BM_Validity)->DenseRange(0, 7);
BENCHMARK(BM_Oracle)->DenseRange(0, 7);
// Skips the two programs that never terminate.
BENCHMARK(BM_RandomRun)->Arg(0)->Arg(3)->Arg(4)->Arg(5)->Arg(6)->Arg(7);

BENCHMARK_MAIN();
