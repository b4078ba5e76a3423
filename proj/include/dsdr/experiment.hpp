#pragma once

#include "dsdr/csvio.hpp"
#include "dsdr/protocol.hpp"

namespace dsdr {

enum class RunMode { Global, Exact, ApproxHomogeneous, ApproxHeterogeneous };

const char* run_mode_name(RunMode m);

struct ExperimentConfig {
  Method method = Method::Sir;
  RunMode mode = RunMode::Global;
  int model_id = 1;
  PredictorKind xmode = PredictorKind::StandardNormal;
  Eigen::Index n = 1000;
  int p = 10;
  int slices = 10;
  int workers = 5;
  KRule k_rule = KRule::fixed(0);  // fixed k = 0 resolves to the model's structural dimension
  Aggregation aggregation = Aggregation::SpectrumWeighted;
  PartitionKind partition = PartitionKind::HomogeneousEqual;
  int reps = 1;
  std::uint64_t base_seed = 0;
  TransportKind transport = TransportKind::InProcess;
  int tcp_port = 0;
  SliceStrategy slicing = SliceStrategy::EqualCount;  // benchmark default
  bool pooled_correction = true;
  double sigma_noise = 0.5;

  KRule resolved_k_rule() const;
  void validate() const;
};

// One repetition: generate, partition, estimate, score against the true
// basis. Estimation-phase timing only; for distributed in-process runs the
// recorded time is the simulated-parallel figure (slowest worker + master).
ResultTable run_experiment(const ExperimentConfig& config);

struct TimingPointResult {
  Eigen::Index n = 0;
  int p = 0;
  int workers = 0;
  double global_seconds = 0.0;
  double dist_sim_parallel_seconds = 0.0;
  double dist_wall_seconds = 0.0;
  bool skipped = false;
};

struct TimingConfig {
  std::vector<Eigen::Index> n_values{10000, 100000, 200000};
  std::vector<int> p_values{100};
  std::vector<int> s_values{5};
  Method method = Method::Sir;
  RunMode dist_mode = RunMode::Exact;
  int slices = 10;
  std::uint64_t seed = 7;
  std::uint64_t budget_cells = 0;  // 0: DSDR_BUDGET_CELLS env or the 5e7 default
};

std::uint64_t timing_budget_cells(std::uint64_t configured);

std::vector<TimingPointResult> timing_sweep(const TimingConfig& config);

void write_timing_table(const std::vector<TimingPointResult>& rows, const std::string& path);

}  // namespace dsdr
