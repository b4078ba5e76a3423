#include "dsdr/experiment.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>

namespace dsdr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string k_rule_label(const KRule& rule) {
  if (rule.kind == KRule::Kind::FixedK) return "k=" + std::to_string(rule.k);
  return "alpha=" + format_real(rule.alpha);
}

}  // namespace

const char* run_mode_name(RunMode m) {
  switch (m) {
    case RunMode::Global: return "global";
    case RunMode::Exact: return "exact";
    case RunMode::ApproxHomogeneous: return "approx-homo";
    case RunMode::ApproxHeterogeneous: return "approx-hetero";
  }
  return "?";
}

KRule ExperimentConfig::resolved_k_rule() const {
  if (k_rule.kind == KRule::Kind::FixedK && k_rule.k <= 0)
    return KRule::fixed(structural_dim(model_id));
  return k_rule;
}

void ExperimentConfig::validate() const {
  if (model_id < 1 || model_id > 8) throw ConfigError("model must be in 1..8");
  if (n < 2) throw ConfigError("n must be >= 2");
  if (p < 1) throw ConfigError("p must be >= 1");
  if (p < min_dimension(model_id))
    throw ConfigError("model " + std::to_string(model_id) + " needs p >= " +
                      std::to_string(min_dimension(model_id)));
  if (slices < 2) throw ConfigError("slices must be >= 2");
  if (reps < 1) throw ConfigError("reps must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (mode != RunMode::Global && n < workers) throw ConfigError("n must be >= workers");
  if (mode == RunMode::Exact && method != Method::Sir)
    throw ConfigError("exact mode supports SIR only");
  if (k_rule.kind == KRule::Kind::FixedK && k_rule.k > p)
    throw ConfigError("K must be <= p");
  if (k_rule.kind == KRule::Kind::VarianceThreshold &&
      (k_rule.alpha <= 0.0 || k_rule.alpha > 1.0))
    throw ConfigError("alpha must be in (0, 1]");
  if (sigma_noise < 0.0) throw ConfigError("sigma must be >= 0");
}

ResultTable run_experiment(const ExperimentConfig& config) {
  config.validate();
  const KRule k_rule = config.resolved_k_rule();
  const int d = structural_dim(config.model_id);
  const MatrixXd truth = true_basis(config.model_id, config.p);
  const MatrixXd sigma_x = predictor_covariance({config.xmode, config.p});

  PartitionScheme scheme;
  switch (config.partition) {
    case PartitionKind::HomogeneousEqual:
      scheme = PartitionScheme::homogeneous_equal(config.workers);
      break;
    case PartitionKind::HeterogeneousEqual:
      scheme = PartitionScheme::heterogeneous_equal(config.workers);
      break;
    case PartitionKind::HeterogeneousUnequal:
      scheme = PartitionScheme::heterogeneous_unequal(config.workers);
      break;
  }

  ResultTable table;
  table.config_names = {"method", "mode",      "model",     "xmode",  "n",
                        "p",      "slices",    "workers",   "k_rule", "aggregate",
                        "partition", "seed",   "transport"};
  table.config_values = {method_name(config.method),
                         run_mode_name(config.mode),
                         std::to_string(config.model_id),
                         predictor_kind_name(config.xmode),
                         std::to_string(config.n),
                         std::to_string(config.p),
                         std::to_string(config.slices),
                         std::to_string(config.workers),
                         k_rule_label(k_rule),
                         config.aggregation == Aggregation::SpectrumWeighted ? "spectrum" : "basis",
                         partition_kind_name(config.partition),
                         std::to_string(config.base_seed),
                         config.transport == TransportKind::InProcess ? "inproc" : "tcp"};

  for (int rep = 0; rep < config.reps; ++rep) {
    MetricRecord record;
    record.repetition = rep;
    const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(rep);
    try {
      Dataset data;
      data.x = gen_predictors({config.xmode, config.p}, config.n, seed);
      data.y = gen_response(config.model_id, data.x, config.sigma_noise, seed);

      SdrEstimate estimate;
      if (config.mode == RunMode::Global) {
        const auto t0 = Clock::now();
        if (k_rule.kind == KRule::Kind::FixedK) {
          estimate = fit_global(data, config.method, config.slices, k_rule.k, config.slicing);
        } else {
          GlobalFit fit =
              fit_global_detail(data, config.method, config.slices, config.p, config.slicing);
          const int kk = select_k(fit.estimate.eigenvalues, k_rule, config.p);
          estimate = std::move(fit.estimate);
          estimate.beta = estimate.beta.leftCols(kk).eval();
          estimate.eigenvalues = estimate.eigenvalues.head(kk).eval();
          estimate.params.k = kk;
        }
        record.wall_time_seconds = seconds_since(t0);
      } else {
        auto shards = partition(data, scheme, seed);
        ProtocolOptions options;
        options.mode = config.mode == RunMode::Exact ? ProtocolMode::Exact
                       : config.mode == RunMode::ApproxHomogeneous
                           ? ProtocolMode::ApproxHomogeneous
                           : ProtocolMode::ApproxHeterogeneous;
        options.method = config.method;
        options.slices = config.slices;
        options.local_rule = k_rule;
        options.master_rule = k_rule;
        options.aggregation = config.aggregation;
        options.local_strategy = config.slicing;
        options.pooled_correction = config.pooled_correction;
        options.transport = config.transport;
        options.tcp_port = config.tcp_port;
        ProtocolResult result = run_protocol(shards, options);
        estimate = std::move(result.estimate);
        estimate.params.partition_tag = partition_kind_name(config.partition);
        record.bytes_up = result.ledger.bytes(Direction::Up);
        record.bytes_down = result.ledger.bytes(Direction::Down);
        record.wall_time_seconds = config.transport == TransportKind::InProcess
                                       ? result.timing.simulated_parallel_seconds()
                                       : result.timing.wall_seconds;
      }

      const auto k_est = static_cast<int>(estimate.beta.cols());
      const int k_cmp = std::min(k_est, d);
      record.trace_correlation =
          trace_correlation(truth.leftCols(k_cmp), estimate.beta.leftCols(k_cmp));
      double r2_sum = 0.0;
      for (int c = 0; c < k_est; ++c) {
        const double r2 = r_squared(estimate.beta.col(c), truth, sigma_x);
        record.r_squared_columns.push_back(r2);
        r2_sum += r2;
      }
      record.r_squared = r2_sum / std::max(k_est, 1);
    } catch (const std::exception& e) {
      record.failed = true;
      record.error = e.what();
    }
    table.max_r2_columns =
        std::max(table.max_r2_columns, static_cast<int>(record.r_squared_columns.size()));
    table.records.push_back(std::move(record));
  }
  return table;
}

std::uint64_t timing_budget_cells(std::uint64_t configured) {
  if (configured > 0) return configured;
  if (const char* env = std::getenv("DSDR_BUDGET_CELLS")) {
    const auto v = std::strtoull(env, nullptr, 10);
    if (v > 0) return v;
  }
  return 50'000'000ULL;
}

std::vector<TimingPointResult> timing_sweep(const TimingConfig& config) {
  const std::uint64_t budget = timing_budget_cells(config.budget_cells);
  std::vector<TimingPointResult> rows;
  for (const int p : config.p_values) {
    for (const auto n : config.n_values) {
      const std::uint64_t cells = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(p);
      if (cells > budget) {
        for (const int s : config.s_values) rows.push_back({n, p, s, 0.0, 0.0, 0.0, true});
        continue;
      }
      Dataset data;
      data.x = gen_predictors({PredictorKind::StandardNormal, p}, n, config.seed);
      data.y = gen_response(1, data.x, 0.5, config.seed);
      const int k = 1;

      const auto t0 = Clock::now();
      fit_global(data, config.method, config.slices, k, SliceStrategy::EqualWidth);
      const double global_seconds = seconds_since(t0);

      for (const int s : config.s_values) {
        TimingPointResult row;
        row.n = n;
        row.p = p;
        row.workers = s;
        row.global_seconds = global_seconds;
        auto shards = partition(data, PartitionScheme::homogeneous_equal(s), config.seed);
        ProtocolOptions options;
        options.mode = config.dist_mode == RunMode::Exact ? ProtocolMode::Exact
                       : config.dist_mode == RunMode::ApproxHeterogeneous
                           ? ProtocolMode::ApproxHeterogeneous
                           : ProtocolMode::ApproxHomogeneous;
        options.method = config.method;
        options.slices = config.slices;
        options.local_rule = KRule::fixed(k);
        options.master_rule = KRule::fixed(k);
        options.local_strategy = SliceStrategy::EqualWidth;
        ProtocolResult result = run_protocol(shards, options);
        row.dist_sim_parallel_seconds = result.timing.simulated_parallel_seconds();
        row.dist_wall_seconds = result.timing.wall_seconds;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_timing_table(const std::vector<TimingPointResult>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "n,p,workers,global_seconds,dist_sim_parallel_seconds,dist_wall_seconds,skipped\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.p << ',' << r.workers << ',' << format_real(r.global_seconds) << ','
        << format_real(r.dist_sim_parallel_seconds) << ',' << format_real(r.dist_wall_seconds)
        << ',' << (r.skipped ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace dsdr
