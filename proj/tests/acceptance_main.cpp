// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <vector>

#include "dsdr/experiment.hpp"

using namespace dsdr;

namespace {

using Clock = std::chrono::steady_clock;

struct Criterion {
  int id;
  const char* label;
  std::function<bool(std::string&)> run;
};

Dataset simulate(int model, PredictorKind kind, Eigen::Index n, int p, std::uint64_t seed) {
  Dataset data;
  data.x = gen_predictors({kind, p}, n, seed);
  data.y = gen_response(model, data.x, 0.5, seed);
  return data;
}

double mean_trace_correlation(const ResultTable& table, int* failures = nullptr) {
  double sum = 0.0;
  int ok = 0, bad = 0;
  for (const auto& r : table.records) {
    if (r.failed) {
      ++bad;
      continue;
    }
    sum += r.trace_correlation;
    ++ok;
  }
  if (failures) *failures = bad;
  return ok > 0 ? sum / ok : 0.0;
}

ExperimentConfig base_config(Method method, RunMode mode, int model, PredictorKind xmode,
                             Eigen::Index n, int p, int reps, std::uint64_t seed) {
  ExperimentConfig config;
  config.method = method;
  config.mode = mode;
  config.model_id = model;
  config.xmode = xmode;
  config.n = n;
  config.p = p;
  config.reps = reps;
  config.base_seed = seed;
  return config;
}

// --- criterion 1: exactness of the two-round pipeline ------------------------

bool criterion_exactness(std::string& detail) {
  Rng picker(20240601, 1);
  int cases = 0;
  double worst_subspace = 0.0, worst_kernel = 0.0, worst_sigma = 0.0;
  const int s_choices[4] = {1, 2, 5, 10};

  while (cases < 100) {
    const auto n = static_cast<Eigen::Index>(50 + picker.below(1951));
    const int p = static_cast<int>(2 + picker.below(49));
    const int s = s_choices[picker.below(4)];
    if (n < 2 * s) continue;
    const int model = p >= 4 ? 1 : 3;
    const int k = std::min(2, p - 1 > 0 ? p - 1 : 1);
    Dataset data = simulate(model, PredictorKind::StandardNormal, n, p,
                            1000 + static_cast<std::uint64_t>(cases));

    PartitionScheme scheme;
    switch (cases % 3) {
      case 0: scheme = PartitionScheme::homogeneous_equal(s); break;
      case 1: scheme = PartitionScheme::heterogeneous_equal(s); break;
      default: scheme = PartitionScheme::heterogeneous_unequal(s); break;
    }
    auto shards = partition(data, scheme, static_cast<std::uint64_t>(cases));

    GlobalFit global = fit_global_detail(data, Method::Sir, 10, k, SliceStrategy::EqualWidth);
    std::vector<Round1Msg> r1;
    for (std::size_t i = 0; i < shards.size(); ++i)
      r1.push_back(edsir_worker_round1(shards[i], static_cast<std::uint32_t>(i)));
    Broadcast1 bc = edsir_master_round1(r1, 10);
    std::vector<Round2Msg> r2;
    for (std::size_t i = 0; i < shards.size(); ++i)
      r2.push_back(edsir_worker_round2(shards[i], bc, static_cast<std::uint32_t>(i)));
    FinalizeResult fin = edsir_finalize_detail(r2, KRule::fixed(k));

    const double gap = 1.0 - trace_correlation(global.estimate.beta, fin.estimate.beta);
    const double kernel_err =
        (fin.kernel - global.kernel).norm() / std::max(1e-300, global.kernel.norm());
    const double sigma_err =
        (fin.sigma - global.sigma).norm() / std::max(1e-300, global.sigma.norm());
    worst_subspace = std::max(worst_subspace, gap);
    worst_kernel = std::max(worst_kernel, kernel_err);
    worst_sigma = std::max(worst_sigma, sigma_err);
    ++cases;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "100 cases; worst 1-tc %.2e (<=1e-10), kernel %.2e, sigma %.2e (<=1e-12)",
                worst_subspace, worst_kernel, worst_sigma);
  detail = buf;
  return worst_subspace <= 1e-10 && worst_kernel <= 1e-12 && worst_sigma <= 1e-12;
}

// --- criterion 2: Model 1 anchors ---------------------------------------------

bool criterion_model1(std::string& detail) {
  auto global = base_config(Method::Sir, RunMode::Global, 1, PredictorKind::StandardNormal, 1000,
                            10, 200, 20);
  global.slices = 10;
  const double g = mean_trace_correlation(run_experiment(global));

  auto homo = global;
  homo.mode = RunMode::ApproxHomogeneous;
  homo.workers = 5;
  const double d = mean_trace_correlation(run_experiment(homo));

  char buf[120];
  std::snprintf(buf, sizeof(buf), "global %.4f, approx-homo %.4f (both >= 0.995)", g, d);
  detail = buf;
  return g >= 0.995 && d >= 0.995;
}

// --- criterion 3: Model 4 SAVE anchors ------------------------------------------

bool criterion_save(std::string& detail) {
  auto global = base_config(Method::Save, RunMode::Global, 4, PredictorKind::StandardNormal, 1000,
                            10, 200, 30);
  const double g = mean_trace_correlation(run_experiment(global));

  auto homo = global;
  homo.mode = RunMode::ApproxHomogeneous;
  homo.workers = 5;
  const double d = mean_trace_correlation(run_experiment(homo));

  char buf[120];
  std::snprintf(buf, sizeof(buf), "global %.4f, approx-homo %.4f (both >= 0.98)", g, d);
  detail = buf;
  return g >= 0.98 && d >= 0.98;
}

// --- criterion 4: Model 6 DR anchor ----------------------------------------------

bool criterion_dr(std::string& detail) {
  auto global = base_config(Method::Dr, RunMode::Global, 6, PredictorKind::StandardNormal, 1000,
                            10, 200, 40);
  global.slices = 5;
  const double g = mean_trace_correlation(run_experiment(global));
  char buf[120];
  std::snprintf(buf, sizeof(buf), "global %.4f (>= 0.98)", g);
  detail = buf;
  return g >= 0.98;
}

// --- criterion 5: heterogeneity benefit --------------------------------------------

bool criterion_heterogeneity_benefit(std::string& detail) {
  auto global = base_config(Method::Sir, RunMode::Global, 3, PredictorKind::DependentNormal, 1000,
                            50, 200, 50);
  const double g = mean_trace_correlation(run_experiment(global));

  auto hetero = global;
  hetero.mode = RunMode::ApproxHeterogeneous;
  hetero.partition = PartitionKind::HeterogeneousEqual;
  hetero.workers = 5;
  const double d = mean_trace_correlation(run_experiment(hetero));

  char buf[140];
  std::snprintf(buf, sizeof(buf), "approx-hetero %.4f vs global %.4f, gain %.4f (>= 0.02)", d, g,
                d - g);
  detail = buf;
  return d - g >= 0.02;
}

// --- criterion 6: sensitivity regime -------------------------------------------------

bool criterion_sensitivity(std::string& detail) {
  auto global = base_config(Method::Sir, RunMode::Global, 1, PredictorKind::DependentNormal, 1000,
                            100, 100, 60);
  const double g = mean_trace_correlation(run_experiment(global));

  auto hetero = global;
  hetero.mode = RunMode::ApproxHeterogeneous;
  hetero.partition = PartitionKind::HeterogeneousEqual;
  hetero.workers = 5;
  int failures_equal = 0;
  const double d = mean_trace_correlation(run_experiment(hetero), &failures_equal);

  auto unequal = hetero;
  unequal.partition = PartitionKind::HeterogeneousUnequal;  // smallest shard: 50 < p
  int failures_unequal = 0;
  ResultTable utable = run_experiment(unequal);
  mean_trace_correlation(utable, &failures_unequal);

  char buf[180];
  std::snprintf(buf, sizeof(buf),
                "approx-hetero %.4f vs global %.4f (>= g-0.005); aborts equal/unequal %d/%d",
                d, g, failures_equal, failures_unequal);
  detail = buf;
  return d >= g - 0.005 && failures_equal == 0 && failures_unequal == 0;
}

// --- criterion 7: communication ledger ------------------------------------------------

bool criterion_ledger(std::string& detail) {
  bool ok = true;
  std::uint64_t reference_count = 0;
  for (const auto& [p, slices, s] : std::vector<std::tuple<int, int, int>>{
           {10, 10, 5}, {7, 9, 4}, {3, 4, 2}}) {
    Dataset data =
        simulate(p >= 4 ? 1 : 3, PredictorKind::StandardNormal, 60 * s, p, 70 + p);
    auto shards = partition(data, PartitionScheme::homogeneous_equal(s), 70);

    ProtocolOptions options;
    options.mode = ProtocolMode::Exact;
    options.slices = slices;
    options.master_rule = KRule::fixed(1);
    ProtocolResult exact = run_protocol(shards, options);
    const auto su = static_cast<std::uint64_t>(s);
    ok = ok &&
         exact.ledger.scalars(Direction::Up, MsgType::Round1) == su * round1_scalars(p) &&
         exact.ledger.scalars(Direction::Up, MsgType::Round2) == su * round2_scalars(p, slices) &&
         exact.ledger.scalars(Direction::Down, MsgType::Broadcast1) ==
             su * broadcast1_scalars(p, slices);
    if (p == 10 && s == 5)
      reference_count = exact.ledger.scalars(Direction::Up, MsgType::Round1);

    options.mode = ProtocolMode::ApproxHomogeneous;
    options.local_rule = KRule::fixed(2);
    options.master_rule = KRule::fixed(2);
    ProtocolResult homo = run_protocol(shards, options);
    std::uint64_t expected_eigen = 0;
    for (const auto& shard : shards) {
      (void)shard;
      expected_eigen += eigen_scalars(p, std::min(2, p));
    }
    ok = ok && homo.ledger.scalars(Direction::Up, MsgType::EigenMsg) == expected_eigen;

    options.mode = ProtocolMode::ApproxHeterogeneous;
    ProtocolResult hetero = run_protocol(shards, options);
    ok = ok &&
         hetero.ledger.scalars(Direction::Up, MsgType::Round1) == su * round1_scalars(p) &&
         hetero.ledger.scalars(Direction::Up, MsgType::Round2) == su * round2_scalars(p, slices) &&
         hetero.ledger.scalars(Direction::Up, MsgType::EigenMsg) == expected_eigen;

    // ledger totals equal the sum of their records
    std::uint64_t up = 0;
    for (const auto& r : hetero.ledger.records)
      if (r.direction == Direction::Up) up += r.scalars;
    ok = ok && up == hetero.ledger.scalars(Direction::Up);
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "closed forms hold on 3 grids; round-1 uplink S=5,p=10: %llu (= 65)",
                static_cast<unsigned long long>(reference_count));
  detail = buf;
  return ok && reference_count == 65;
}

// --- criterion 8: timing properties --------------------------------------------------

bool criterion_timing(std::string& detail) {
  TimingConfig sweep;
  sweep.n_values = {100000};
  sweep.p_values = {100};
  sweep.s_values = {5};
  sweep.method = Method::Sir;
  sweep.dist_mode = RunMode::Exact;
  auto rows = timing_sweep(sweep);
  if (rows.size() != 1 || rows[0].skipped) {
    detail = "sweep point skipped (budget)";
    return false;
  }
  const double global_1e5 = rows[0].global_seconds;
  const double dist_1e5 = rows[0].dist_sim_parallel_seconds;

  // linearity in n at fixed p: median of three timings at each size
  auto time_global = [](Eigen::Index n) {
    Dataset data = simulate(1, PredictorKind::StandardNormal, n, 100, 80);
    std::vector<double> times;
    for (int r = 0; r < 3; ++r) {
      const auto t0 = Clock::now();
      fit_global(data, Method::Sir, 10, 1, SliceStrategy::EqualWidth);
      times.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
    }
    std::sort(times.begin(), times.end());
    return times[1];
  };
  const double t1 = time_global(100000);
  const double t2 = time_global(200000);
  const double ratio = t2 / t1;

  char buf[180];
  std::snprintf(buf, sizeof(buf),
                "dist %.3fs < global %.3fs at n=1e5,p=100; global 2e5/1e5 ratio %.2f in [1.6,2.6]",
                dist_1e5, global_1e5, ratio);
  detail = buf;
  return dist_1e5 < global_1e5 && ratio >= 1.6 && ratio <= 2.6;
}

// --- criterion 9: metric oracles -------------------------------------------------------

MatrixXd random_full_rank(int p, int k, Rng& rng) {
  while (true) {
    MatrixXd m(p, k);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < k; ++j) m(i, j) = rng.normal();
    Eigen::ColPivHouseholderQR<MatrixXd> qr(m);
    if (qr.rank() == k) return m;
  }
}

bool criterion_metric_oracles(std::string& detail) {
  Rng rng(90, 9);
  double worst_tc = 0.0, worst_r2 = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + static_cast<int>(rng.below(2));
    MatrixXd b = random_full_rank(7, d, rng);
    MatrixXd bhat = random_full_rank(7, d, rng);

    MatrixXd pa = b * (b.transpose() * b).inverse() * b.transpose();
    MatrixXd pb = bhat * (bhat.transpose() * bhat).inverse() * bhat.transpose();
    double tr = 0.0;
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 7; ++j) tr += pa(i, j) * pb(j, i);
    worst_tc = std::max(worst_tc, std::abs(trace_correlation(b, bhat) - tr / d));

    MatrixXd half = random_full_rank(7, 7, rng);
    MatrixXd sigma = half.transpose() * half + 0.5 * MatrixXd::Identity(7, 7);
    VectorXd beta = random_full_rank(7, 1, rng).col(0);
    const double denom = beta.dot(sigma * beta);
    double best = 0.0;
    const int steps = 40000;
    for (int t = 0; t < steps; ++t) {
      const double angle = std::numbers::pi * t / steps;
      VectorXd v = d == 1 ? VectorXd(b.col(0))
                          : VectorXd(std::cos(angle) * b.col(0) + std::sin(angle) * b.col(1));
      const double vs = v.dot(sigma * v);
      const double c = beta.dot(sigma * v);
      best = std::max(best, c * c / (denom * vs));
      if (d == 1) break;
    }
    worst_r2 = std::max(worst_r2, std::abs(r_squared(beta, b, sigma) - best));
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "50 instances; worst |tc err| %.2e, |r2 err| %.2e (<= 1e-6)",
                worst_tc, worst_r2);
  detail = buf;
  return worst_tc <= 1e-6 && worst_r2 <= 1e-6;
}

// --- criterion 10: protocol round trips ---------------------------------------------------

bool criterion_roundtrip(std::string& detail) {
  Rng rng(2024, 99);
  auto random_vec = [&](Eigen::Index m) {
    VectorXd v(m);
    for (Eigen::Index i = 0; i < m; ++i) v(i) = rng.normal();
    return v;
  };
  auto random_mat = [&](Eigen::Index r, Eigen::Index c) {
    MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
    return m;
  };

  // both transports carry encoded frames; verify identity through each
  TcpListener listener(0);
  auto client = tcp_connect("127.0.0.1", listener.port());
  auto server = listener.accept_one();
  ChannelPair inproc = make_inproc_pair();

  bool ok = true;
  auto push_both = [&](const Frame& frame) {
    inproc.worker_end->send(frame);
    Frame via_queue = inproc.master_end->recv();
    client->send(frame);
    Frame via_tcp = server->recv();
    ok = ok && encode_frame(via_queue) == encode_frame(frame) &&
         encode_frame(via_tcp) == encode_frame(frame);
  };

  for (int i = 0; i < 1000 && ok; ++i) {
    Round1Msg r1;
    r1.worker_id = static_cast<std::uint32_t>(rng.below(100));
    r1.n_s = rng.below(10000) + 1;
    r1.y_min = rng.normal();
    r1.y_max = r1.y_min + std::abs(rng.normal());
    r1.xbar = random_vec(1 + static_cast<Eigen::Index>(rng.below(9)));
    push_both(r1.to_frame());
    ok = ok && Round1Msg::from_frame(r1.to_frame()).xbar == r1.xbar;

    Broadcast1 b;
    const auto slices = 2 + static_cast<Eigen::Index>(rng.below(9));
    b.grid.resize(slices + 1);
    b.grid(0) = rng.normal();
    for (Eigen::Index j = 1; j <= slices; ++j)
      b.grid(j) = b.grid(j - 1) + std::abs(rng.normal()) + 1e-9;
    b.xbar_global = random_vec(1 + static_cast<Eigen::Index>(rng.below(9)));
    push_both(b.to_frame());

    Round2Msg r2;
    const auto p = 1 + static_cast<Eigen::Index>(rng.below(7));
    r2.worker_id = static_cast<std::uint32_t>(rng.below(100));
    r2.slice_counts.resize(static_cast<std::size_t>(slices));
    r2.n_s = 0;
    for (auto& c : r2.slice_counts) {
      c = rng.below(40);
      r2.n_s += c;
    }
    r2.slice_sums = random_mat(slices, p);
    r2.scatter = random_mat(p, p);
    push_both(r2.to_frame());

    EigenPayload e;
    const auto k = 1 + static_cast<Eigen::Index>(rng.below(p));
    e.worker_id = static_cast<std::uint32_t>(rng.below(100));
    e.n_s = rng.below(10000) + 1;
    e.method = static_cast<Method>(rng.below(3));
    e.eigenvalues = random_vec(k);
    std::sort(e.eigenvalues.data(), e.eigenvalues.data() + k, std::greater<double>());
    e.eigenvectors = random_mat(p, k);
    push_both(e.to_frame());
  }

  // identical experiments over both transports produce identical estimates
  Dataset data = simulate(1, PredictorKind::StandardNormal, 400, 8, 91);
  auto shards = partition(data, PartitionScheme::heterogeneous_unequal(5), 91);
  for (auto mode :
       {ProtocolMode::Exact, ProtocolMode::ApproxHomogeneous, ProtocolMode::ApproxHeterogeneous}) {
    ProtocolOptions options;
    options.mode = mode;
    options.slices = 10;
    options.local_rule = KRule::fixed(1);
    options.master_rule = KRule::fixed(1);
    ProtocolResult a = run_protocol(shards, options);
    options.transport = TransportKind::Tcp;
    ProtocolResult b2 = run_protocol(shards, options);
    ok = ok && (a.estimate.beta - b2.estimate.beta).cwiseAbs().maxCoeff() == 0.0 &&
         a.ledger.bytes(Direction::Up) == b2.ledger.bytes(Direction::Up);
  }

  detail = ok ? "4000 frames identical over queue and TCP; estimates byte-identical"
              : "mismatch detected";
  return ok;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "exact distributed SIR equals pooled SIR", criterion_exactness},
      {2, "Model 1 trace-correlation anchors (global, approx-homogeneous)", criterion_model1},
      {3, "Model 4 SAVE anchors (global, approx-homogeneous)", criterion_save},
      {4, "Model 6 DR anchor (global)", criterion_dr},
      {5, "heterogeneous aggregation beats global (Model 3, dependent)",
       criterion_heterogeneity_benefit},
      {6, "sensitivity regime p=100 (no aborts, parity with global)", criterion_sensitivity},
      {7, "communication ledger closed forms", criterion_ledger},
      {8, "timing: distributed speedup and linear scaling", criterion_timing},
      {9, "metric closed forms match dense oracles", criterion_metric_oracles},
      {10, "wire round-trip and transport equivalence", criterion_roundtrip},
  };

  int failures = 0;
  for (auto& c : criteria) {
    const auto t0 = Clock::now();
    std::string detail;
    bool pass = false;
    try {
      pass = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("[%s] criterion %2d (%5.1fs): %s — %s\n", pass ? "PASS" : "FAIL", c.id, seconds,
                c.label, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  if (failures == 0)
    std::printf("all %zu criteria passed\n", criteria.size());
  else
    std::printf("%d criteria FAILED\n", failures);
  return failures;
}
