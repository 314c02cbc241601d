#include <benchmark/benchmark.h>

#include "lagree/checker.hpp"
#include "lagree/lattice.hpp"
#include "lagree/signature.hpp"
#include "lagree/simnet.hpp"

using namespace lagree;

namespace {

LatticeValue make_value(int items, uint64_t salt) {
  LatticeValue v;
  for (int i = 0; i < items; ++i) {
    v.insert(make_value_item(salt * 1000 + uint64_t(i), "payload" + std::to_string(i)));
  }
  return v;
}

ScenarioConfig scenario(const std::string& protocol, const std::string& strategy) {
  ScenarioConfig cfg;
  cfg.protocol = protocol;
  cfg.n = 4;
  cfg.f = 1;
  cfg.scheduler.policy = "random";
  cfg.scheduler.seed = 1;
  cfg.byzantine.push_back({3, strategy, Json::object()});
  return cfg;
}

}  // namespace

static void BM_lattice_join(benchmark::State& state) {
  LatticeValue a = make_value(int(state.range(0)), 1);
  LatticeValue b = make_value(int(state.range(0)), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(join(a, b));
  }
}
BENCHMARK(BM_lattice_join)->Arg(16)->Arg(128);

static void BM_value_codec(benchmark::State& state) {
  LatticeValue v = make_value(int(state.range(0)), 3);
  for (auto _ : state) {
    Bytes enc = v.encode();
    benchmark::DoNotOptimize(LatticeValue::decode_all(enc));
  }
}
BENCHMARK(BM_value_codec)->Arg(16)->Arg(128);

static void BM_ideal_sign_verify(benchmark::State& state) {
  IdealSignatureProvider sig;
  Bytes data = make_value(8, 4).encode();
  for (auto _ : state) {
    Bytes s = sig.sign(2, data);
    benchmark::DoNotOptimize(sig.verify(2, data, s));
  }
}
BENCHMARK(BM_ideal_sign_verify);

static void BM_ed25519_sign_verify(benchmark::State& state) {
  Ed25519SignatureProvider sig(7, 4);
  Bytes data = make_value(8, 5).encode();
  for (auto _ : state) {
    Bytes s = sig.sign(2, data);
    benchmark::DoNotOptimize(sig.verify(2, data, s));
  }
}
BENCHMARK(BM_ed25519_sign_verify);

static void BM_rbcast_run(benchmark::State& state) {
  ScenarioConfig cfg = scenario("rbcast", "equivocator");
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_scenario(cfg));
  }
}
BENCHMARK(BM_rbcast_run);

static void BM_wts_run(benchmark::State& state) {
  ScenarioConfig cfg = scenario("wts", "equivocator");
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_scenario(cfg));
  }
}
BENCHMARK(BM_wts_run);

static void BM_sbs_run(benchmark::State& state) {
  ScenarioConfig cfg = scenario("sbs", "double_signer");
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_scenario(cfg));
  }
}
BENCHMARK(BM_sbs_run);

static void BM_check_trace(benchmark::State& state) {
  ScenarioConfig cfg = scenario("wts", "equivocator");
  RunResult rr = run_scenario(cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_trace(rr.trace, cfg));
  }
}
BENCHMARK(BM_check_trace);

BENCHMARK_MAIN();
