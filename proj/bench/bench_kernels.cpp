#include "mtfee/experiment.hpp"
#include "mtfee/solver.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

using namespace mtfee;

namespace {

ValidatedParams desk(int q_bar, double T) {
    ModelParams p;
    p.q_bar = q_bar;
    p.T = T;
    return validate(p.with_default_delta_inf());
}

const RegimeSpec& mc_spec() {
    static const RegimeSpec s = regime_spec(desk(5, 10.0), Regime::exchange);
    return s;
}

const ExperimentSpec& experiment_spec() {
    static const ExperimentSpec spec = [] {
        const ValidatedParams vp = desk(50, 600.0);
        ExperimentSpec e;
        e.regimes.push_back({"contracted", build_policy(vp, PolicyKind::contracted, {.time_nodes = 201})});
        e.regimes.push_back({"benchmark", build_policy(vp, PolicyKind::benchmark, {.time_nodes = 201})});
        e.n_paths = 256;
        e.seed = 1;
        e.output_times = uniform_grid(600.0, 61);
        return e;
    }();
    return spec;
}

void BM_solve_mc(benchmark::State& st) {
    omp_set_num_threads(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(solve_mc(mc_spec(), 0.0, 0, 20000, 7).mean);
    st.SetItemsProcessed(st.iterations() * 20000);
}

void BM_solve_mc_serial(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(solve_mc_serial(mc_spec(), 0.0, 0, 20000, 7).mean);
    st.SetItemsProcessed(st.iterations() * 20000);
}

void BM_run_experiment(benchmark::State& st) {
    omp_set_num_threads(static_cast<int>(st.range(0)));
    const auto& spec = experiment_spec();
    for (auto _ : st) benchmark::DoNotOptimize(run_experiment(spec).n_paths);
    st.SetItemsProcessed(st.iterations() * spec.n_paths);
}

void BM_run_experiment_serial(benchmark::State& st) {
    const auto& spec = experiment_spec();
    for (auto _ : st) benchmark::DoNotOptimize(run_experiment_serial(spec).n_paths);
    st.SetItemsProcessed(st.iterations() * spec.n_paths);
}

void BM_matrix_exp(benchmark::State& st) {
    const RegimeSpec s = regime_spec(desk(static_cast<int>(st.range(0)), 600.0), Regime::exchange);
    const auto times = uniform_grid(600.0, 1001);
    for (auto _ : st) benchmark::DoNotOptimize(solve_matrix_exp(s, times).log_u(0, 0));
}

void BM_log_ratios(benchmark::State& st) {
    const RegimeSpec s = regime_spec(desk(50, 600.0), Regime::exchange);
    for (auto _ : st) benchmark::DoNotOptimize(solve_log_ratios(s, 0.01).at(0, 0));
}

void thread_counts(benchmark::internal::Benchmark* b) {
    b->Arg(1);
    if (omp_get_max_threads() > 1) b->Arg(omp_get_max_threads());
}

}  // namespace

BENCHMARK(BM_solve_mc)->Apply(thread_counts)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_solve_mc_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_run_experiment)->Apply(thread_counts)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_run_experiment_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_matrix_exp)->Arg(10)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_log_ratios)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
