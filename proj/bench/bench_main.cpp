// Times the replication kernels under the serial reference policy and the
// OpenMP policy, and checks that both produce identical aggregates.

#include <chrono>
#include <cstdio>

#include "fnc/calibration.hpp"
#include "fnc/experiment.hpp"
#include "fnc/io.hpp"
#include "fnc/parallel.hpp"

namespace {

template <typename F>
double time_seconds(F&& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void report(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-28s serial %7.3fs   omp %7.3fs   speedup %4.2fx   identical %s\n", name,
              serial, parallel, serial / parallel, identical ? "yes" : "NO");
}

}  // namespace

int main() {
  std::printf("workers: %d\n", fnc::worker_count());

  {
    const fnc::CovarianceModel model = fnc::parse_model_spec("ar:0.2", 2000);
    fnc::BoundingSequences serial_bounds, parallel_bounds;
    const double t_serial = time_seconds([&] {
      serial_bounds = fnc::calibrate_model(model, 1000, 7, fnc::Sidedness::one_sided,
                                           fnc::ExecutionPolicy::serial);
    });
    const double t_parallel = time_seconds([&] {
      parallel_bounds = fnc::calibrate_model(model, 1000, 7, fnc::Sidedness::one_sided,
                                             fnc::ExecutionPolicy::parallel);
    });
    report("calibrate m=2000 N=1000", t_serial, t_parallel,
           serial_bounds.c_half == parallel_bounds.c_half &&
               serial_bounds.c_one == parallel_bounds.c_one);
  }

  {
    fnc::ExperimentConfig config;
    config.m = 2000;
    config.model = fnc::parse_model_spec("ar:0.2", config.m);
    config.sparsity.gamma = 0.3;
    config.sparsity.intensity = 3.0;
    config.methods = {{fnc::SelectionMethod::fnc, 0.2, fnc::SignalCountSource::known, 0},
                      {fnc::SelectionMethod::bh, 0.05, fnc::SignalCountSource::known, 0}};
    config.n_reps = 200;
    config.seed = 11;
    fnc::ReplicationSummary serial_summary, parallel_summary;
    const double t_serial = time_seconds(
        [&] { serial_summary = fnc::run_experiment(config, fnc::ExecutionPolicy::serial); });
    const double t_parallel = time_seconds([&] {
      parallel_summary = fnc::run_experiment(config, fnc::ExecutionPolicy::parallel);
    });
    report("experiment m=2000 reps=200", t_serial, t_parallel,
           serial_summary.methods[0].mean_fnp == parallel_summary.methods[0].mean_fnp &&
               serial_summary.methods[1].mean_fdp == parallel_summary.methods[1].mean_fdp);
  }

  return 0;
}
