#include "dsdr/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

namespace dsdr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename Msg>
std::vector<Msg> sorted_by_worker(std::vector<Msg> msgs) {
  std::sort(msgs.begin(), msgs.end(),
            [](const Msg& a, const Msg& b) { return a.worker_id < b.worker_id; });
  for (std::size_t i = 1; i < msgs.size(); ++i)
    if (msgs[i].worker_id == msgs[i - 1].worker_id) throw DuplicateWorker();
  return msgs;
}

}  // namespace

int select_k(const VectorXd& descending_values, const KRule& rule, int p) {
  if (rule.kind == KRule::Kind::FixedK) {
    if (rule.k < 1) throw Error("K rule: fixed K must be >= 1");
    return std::min(rule.k, p);
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < descending_values.size(); ++i)
    total += std::max(descending_values(i), 0.0);
  if (total <= 0.0) return 1;
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < descending_values.size(); ++i) {
    cumulative += std::max(descending_values(i), 0.0);
    if (cumulative / total >= rule.alpha) return static_cast<int>(i) + 1;
  }
  return static_cast<int>(descending_values.size());
}

// --- exact path ---------------------------------------------------------------

Round1Msg edsir_worker_round1(const Dataset& shard, std::uint32_t worker_id) {
  if (shard.n() < 1) throw EmptyShard();
  shard.validate();
  Round1Msg msg;
  msg.worker_id = worker_id;
  msg.n_s = static_cast<std::uint64_t>(shard.n());
  msg.y_min = shard.y.minCoeff();
  msg.y_max = shard.y.maxCoeff();
  msg.xbar = shard.x.colwise().mean();
  return msg;
}

Broadcast1 edsir_master_round1(const std::vector<Round1Msg>& raw, int slices) {
  if (raw.empty()) throw Error("round 1: no messages");
  auto msgs = sorted_by_worker(raw);
  const auto p = msgs.front().xbar.size();
  double y_min = msgs.front().y_min;
  double y_max = msgs.front().y_max;
  std::uint64_t n = 0;
  for (const auto& m : msgs) {
    if (m.xbar.size() != p) throw DimensionMismatch();
    if (m.n_s < 1) throw EmptyShard();
    y_min = std::min(y_min, m.y_min);
    y_max = std::max(y_max, m.y_max);
    n += m.n_s;
  }
  Broadcast1 b;
  b.grid = make_slice_grid(y_min, y_max, slices).grid;
  b.xbar_global = VectorXd::Zero(p);
  for (const auto& m : msgs)
    b.xbar_global += (static_cast<double>(m.n_s) / static_cast<double>(n)) * m.xbar;
  return b;
}

Round2Msg edsir_worker_round2(const Dataset& shard, const Broadcast1& broadcast,
                              std::uint32_t worker_id) {
  if (shard.n() < 1) throw EmptyShard();
  SliceSpec spec = broadcast.spec();
  SliceStats stats = slice_statistics(shard, broadcast.xbar_global, spec);
  Round2Msg msg;
  msg.worker_id = worker_id;
  msg.n_s = static_cast<std::uint64_t>(shard.n());
  msg.slice_counts.assign(static_cast<std::size_t>(stats.counts.size()), 0);
  for (Eigen::Index h = 0; h < stats.counts.size(); ++h)
    msg.slice_counts[static_cast<std::size_t>(h)] = static_cast<std::uint64_t>(stats.counts(h));
  msg.slice_sums = std::move(stats.sums);
  msg.scatter = std::move(stats.scatter);
  return msg;
}

FinalizeResult edsir_finalize_detail(const std::vector<Round2Msg>& raw, const KRule& k_rule) {
  if (raw.empty()) throw Error("finalize: no messages");
  auto msgs = sorted_by_worker(raw);
  const auto p = msgs.front().scatter.rows();
  const auto slices = static_cast<Eigen::Index>(msgs.front().slice_counts.size());

  std::uint64_t n = 0;
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(slices), 0);
  MatrixXd sums = MatrixXd::Zero(slices, p);
  MatrixXd scatter = MatrixXd::Zero(p, p);
  for (const auto& m : msgs) {
    if (m.scatter.rows() != p || m.slice_sums.cols() != p ||
        static_cast<Eigen::Index>(m.slice_counts.size()) != slices)
      throw DimensionMismatch();
    std::uint64_t shard_total = 0;
    for (std::size_t h = 0; h < m.slice_counts.size(); ++h) {
      counts[h] += m.slice_counts[h];
      shard_total += m.slice_counts[h];
    }
    if (shard_total != m.n_s) throw ProtocolViolation("slice counts do not sum to shard size");
    sums += m.slice_sums;
    scatter += m.scatter;
    n += m.n_s;
  }
  if (n < 2) throw Error("finalize: need at least two observations overall");

  MatrixXd kernel = MatrixXd::Zero(p, p);
  for (Eigen::Index h = 0; h < slices; ++h) {
    const auto nh = counts[static_cast<std::size_t>(h)];
    if (nh == 0) continue;
    VectorXd m = sums.row(h).transpose() / static_cast<double>(nh);
    kernel.noalias() += (static_cast<double>(nh) / static_cast<double>(n)) * (m * m.transpose());
  }
  MatrixXd sigma = scatter / static_cast<double>(n - 1);

  EigenPair all = top_k_eigen(kernel, static_cast<int>(p));
  const int k = select_k(all.values, k_rule, static_cast<int>(p));

  FinalizeResult out;
  out.estimate.method = Method::Sir;
  out.estimate.mode = EstimateMode::ExactDistributed;
  out.estimate.params.slices = static_cast<int>(slices);
  out.estimate.params.k = k;
  out.estimate.params.workers = static_cast<int>(msgs.size());
  out.estimate.eigenvalues = all.values.head(k);
  out.estimate.beta = sir_directions(all.vectors.leftCols(k), sigma);
  out.kernel = std::move(kernel);
  out.sigma = std::move(sigma);
  return out;
}

SdrEstimate edsir_finalize(const std::vector<Round2Msg>& msgs, int k) {
  return edsir_finalize_detail(msgs, KRule::fixed(k)).estimate;
}

// --- approximate path -----------------------------------------------------------

namespace {

// Zero-information payload for shards too small to estimate anything;
// canonical basis columns keep the orthonormality contract.
EigenPayload degenerate_payload(Eigen::Index p, Method method, int k, std::uint32_t worker_id,
                                std::uint64_t n_s) {
  EigenPayload payload;
  payload.worker_id = worker_id;
  payload.n_s = n_s;
  payload.method = method;
  payload.eigenvalues = VectorXd::Zero(k);
  payload.eigenvectors = MatrixXd::Identity(p, p).leftCols(k);
  return payload;
}

MatrixXd orthonormalized(const MatrixXd& directions) {
  Eigen::HouseholderQR<MatrixXd> qr(directions);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(directions.rows(), directions.cols());
  // fix the QR sign ambiguity, then the canonical rule
  MatrixXd r = qr.matrixQR().topRows(directions.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < q.cols(); ++c)
    if (r(c, c) < 0.0) q.col(c) = -q.col(c);
  canonicalize_signs(q);
  return q;
}

}  // namespace

EigenPayload approx_local(const Dataset& shard, Method method, int slices, const KRule& k_rule,
                          const Standardization& standardization, std::uint32_t worker_id) {
  if (shard.n() < 1) throw EmptyShard();
  shard.validate();
  const auto n = shard.n();
  const auto p = shard.p();
  const int fallback_k =
      k_rule.kind == KRule::Kind::FixedK ? std::min(k_rule.k, static_cast<int>(p)) : 1;

  if (standardization.kind == Standardization::Kind::FromBroadcast) {
    const Broadcast1& b = *standardization.broadcast;
    SliceSpec spec = b.spec();
    // Sigma-scale kernel: globally centered, globally sliced, no local inverse.
    MatrixXd kernel;
    if (method == Method::Sir) {
      SliceStats stats = slice_statistics(shard, b.xbar_global, spec);
      kernel = sir_kernel(stats, n).v;
    } else {
      if (n < 2) return degenerate_payload(p, method, fallback_k, worker_id,
                                           static_cast<std::uint64_t>(n));
      MatrixXd sigma_s = sample_covariance(shard.x);
      MatrixXd w = inverse_sqrt_auto(sigma_s);
      MatrixXd half = sqrt_psd(sigma_s);
      MatrixXd z = (shard.x.rowwise() - b.xbar_global.transpose()) * w;
      MatrixXd m = method == Method::Save
                       ? save_kernel({z, shard.y}, VectorXd::Zero(p), spec,
                                     MatrixXd::Identity(p, p))
                             .v
                       : dr_kernel(z, spec, shard.y, /*check_standardized=*/false).v;
      kernel = half * m * half;
      kernel = 0.5 * (kernel + kernel.transpose().eval());
    }
    EigenPair all = top_k_eigen(kernel, static_cast<int>(p));
    const int k = select_k(all.values, k_rule, static_cast<int>(p));
    EigenPayload payload;
    payload.worker_id = worker_id;
    payload.n_s = static_cast<std::uint64_t>(n);
    payload.method = method;
    payload.eigenvalues = all.values.head(k);
    payload.eigenvectors = all.vectors.leftCols(k);
    return payload;
  }

  // Local standardization: the shard produces its own direction estimates.
  if (n < 2 || shard.y.minCoeff() == shard.y.maxCoeff())
    return degenerate_payload(p, method, fallback_k, worker_id, static_cast<std::uint64_t>(n));

  SliceSpec spec = standardization.strategy == SliceStrategy::EqualWidth
                       ? make_slice_grid(shard.y.minCoeff(), shard.y.maxCoeff(), slices)
                       : make_quantile_grid(shard.y, slices);

  // All three kernels are solved on the shard's whitened scale and only the
  // selected eigenvectors are mapped back by W. Selecting on the raw kernel
  // and applying the inverse covariance afterwards amplifies sampling noise
  // quadratically once n_s is within a small factor of p.
  Whitened wh = whiten(shard);
  KernelMatrix kern = [&] {
    switch (method) {
      case Method::Sir: {
        SliceStats stats = slice_statistics({wh.z, shard.y}, VectorXd::Zero(p), spec);
        return sir_kernel(stats, n);
      }
      case Method::Save:
        return save_kernel({wh.z, shard.y}, VectorXd::Zero(p), spec, MatrixXd::Identity(p, p));
      default:
        return dr_kernel(wh.z, spec, shard.y);
    }
  }();
  EigenPair all = top_k_eigen(kern.v, static_cast<int>(p));
  const int k = select_k(all.values, k_rule, static_cast<int>(p));
  VectorXd values = all.values.head(k);
  MatrixXd directions = wh.w * all.vectors.leftCols(k);

  EigenPayload payload;
  payload.worker_id = worker_id;
  payload.n_s = static_cast<std::uint64_t>(n);
  payload.method = method;
  payload.eigenvalues = std::move(values);
  payload.eigenvectors = orthonormalized(directions);
  return payload;
}

MatrixXd approx_aggregate(const std::vector<EigenPayload>& raw, Aggregation aggregation) {
  if (raw.empty()) throw Error("approx_aggregate: no payloads");
  auto payloads = sorted_by_worker(raw);
  const auto p = payloads.front().eigenvectors.rows();
  std::uint64_t n = 0;
  for (const auto& m : payloads) {
    if (m.eigenvectors.rows() != p || m.eigenvectors.cols() != m.eigenvalues.size())
      throw DimensionMismatch();
    n += m.n_s;
  }
  MatrixXd vt = MatrixXd::Zero(p, p);
  for (const auto& m : payloads) {
    const double weight = static_cast<double>(m.n_s) / static_cast<double>(n);
    if (aggregation == Aggregation::SpectrumWeighted) {
      vt.noalias() +=
          weight * (m.eigenvectors * m.eigenvalues.asDiagonal() * m.eigenvectors.transpose());
    } else {
      vt.noalias() += (weight / static_cast<double>(m.k())) *
                      (m.eigenvectors * m.eigenvectors.transpose());
    }
  }
  return 0.5 * (vt + vt.transpose().eval());
}

SdrEstimate approx_master(const std::vector<EigenPayload>& payloads, const KRule& kg_rule,
                          Aggregation aggregation, const std::optional<MatrixXd>& pooled_sigma) {
  MatrixXd vt = approx_aggregate(payloads, aggregation);
  const auto p = vt.rows();

  SdrEstimate est;
  est.method = payloads.front().method;
  est.mode = EstimateMode::ApproxDistributed;
  est.params.workers = static_cast<int>(payloads.size());

  if (pooled_sigma) {
    MatrixXd w = inverse_sqrt_auto(*pooled_sigma);
    MatrixXd m = w * vt * w;
    m = 0.5 * (m + m.transpose().eval());
    EigenPair all = top_k_eigen(m, static_cast<int>(p));
    const int k = select_k(all.values, kg_rule, static_cast<int>(p));
    est.params.k = k;
    est.eigenvalues = all.values.head(k);
    est.beta = w * all.vectors.leftCols(k);
    normalize_directions(est.beta);
  } else {
    EigenPair all = top_k_eigen(vt, static_cast<int>(p));
    const int k = select_k(all.values, kg_rule, static_cast<int>(p));
    est.params.k = k;
    est.eigenvalues = all.values.head(k);
    est.beta = all.vectors.leftCols(k);
  }
  return est;
}

// --- orchestration ----------------------------------------------------------------

namespace {

struct WorkerOutcome {
  double compute_seconds = 0.0;
  std::exception_ptr error;
};

void run_worker(const Dataset& shard, std::uint32_t worker_id, const ProtocolOptions& options,
                Channel& channel, WorkerOutcome& outcome) {
  try {
    const auto mode = options.mode;
    if (mode == ProtocolMode::Exact || mode == ProtocolMode::ApproxHeterogeneous) {
      auto t0 = Clock::now();
      Round1Msg r1 = edsir_worker_round1(shard, worker_id);
      outcome.compute_seconds += seconds_since(t0);
      channel.send(r1.to_frame());

      Frame reply = channel.recv();
      if (reply.type == MsgType::ErrorMsg) return;  // master aborted; exit quietly
      Broadcast1 broadcast = Broadcast1::from_frame(reply);

      if (mode == ProtocolMode::Exact) {
        t0 = Clock::now();
        Round2Msg r2 = edsir_worker_round2(shard, broadcast, worker_id);
        outcome.compute_seconds += seconds_since(t0);
        channel.send(r2.to_frame());
      } else {
        t0 = Clock::now();
        Round2Msg r2 = edsir_worker_round2(shard, broadcast, worker_id);
        EigenPayload payload =
            approx_local(shard, options.method, options.slices, options.local_rule,
                         Standardization::from_broadcast(broadcast), worker_id);
        outcome.compute_seconds += seconds_since(t0);
        channel.send(r2.to_frame());
        channel.send(payload.to_frame());
      }
    } else {
      auto t0 = Clock::now();
      EigenPayload payload =
          approx_local(shard, options.method, options.slices, options.local_rule,
                       Standardization::local(options.local_strategy), worker_id);
      outcome.compute_seconds += seconds_since(t0);
      channel.send(payload.to_frame());
    }
  } catch (const std::exception& e) {
    outcome.error = std::current_exception();
    try {
      channel.send(ErrorMsg{1, e.what()}.to_frame());
    } catch (...) {
    }
  }
}

Frame recv_checked(Channel& channel, CommLedger& ledger, MsgType expected) {
  Frame frame = channel.recv();
  ledger.add(Direction::Up, frame);
  if (frame.type == MsgType::ErrorMsg) {
    ErrorMsg err = ErrorMsg::from_frame(frame);
    throw ProtocolViolation("worker reported: " + err.text);
  }
  if (frame.type != expected)
    throw ProtocolViolation("unexpected message type for the current protocol state");
  return frame;
}

ProtocolResult run_master(const std::vector<Channel*>& channels, const ProtocolOptions& options,
                          ProtocolTiming& timing) {
  ProtocolResult result;
  CommLedger& ledger = result.ledger;
  const auto s = channels.size();

  if (options.mode == ProtocolMode::Exact || options.mode == ProtocolMode::ApproxHeterogeneous) {
    std::vector<Round1Msg> round1;
    round1.reserve(s);
    for (auto* ch : channels)
      round1.push_back(Round1Msg::from_frame(recv_checked(*ch, ledger, MsgType::Round1)));

    auto t0 = Clock::now();
    Broadcast1 broadcast = edsir_master_round1(round1, options.slices);
    timing.master_seconds += seconds_since(t0);

    Frame down = broadcast.to_frame();
    for (auto* ch : channels) {
      ch->send(down);
      ledger.add(Direction::Down, down);
    }

    if (options.mode == ProtocolMode::Exact) {
      std::vector<Round2Msg> round2;
      round2.reserve(s);
      for (auto* ch : channels)
        round2.push_back(Round2Msg::from_frame(recv_checked(*ch, ledger, MsgType::Round2)));
      t0 = Clock::now();
      FinalizeResult fin = edsir_finalize_detail(round2, options.master_rule);
      timing.master_seconds += seconds_since(t0);
      result.estimate = std::move(fin.estimate);
    } else {
      std::vector<Round2Msg> round2;
      std::vector<EigenPayload> payloads;
      round2.reserve(s);
      payloads.reserve(s);
      for (auto* ch : channels) {
        round2.push_back(Round2Msg::from_frame(recv_checked(*ch, ledger, MsgType::Round2)));
        payloads.push_back(EigenPayload::from_frame(recv_checked(*ch, ledger, MsgType::EigenMsg)));
      }
      t0 = Clock::now();
      std::optional<MatrixXd> pooled;
      if (options.pooled_correction) {
        auto sorted = sorted_by_worker(round2);
        const auto p = sorted.front().scatter.rows();
        MatrixXd scatter = MatrixXd::Zero(p, p);
        std::uint64_t n = 0;
        for (const auto& m : sorted) {
          scatter += m.scatter;
          n += m.n_s;
        }
        if (n < 2) throw Error("pooled correction needs at least two observations");
        pooled = scatter / static_cast<double>(n - 1);
      }
      result.estimate =
          approx_master(payloads, options.master_rule, options.aggregation, pooled);
      timing.master_seconds += seconds_since(t0);
    }
  } else {
    std::vector<EigenPayload> payloads;
    payloads.reserve(s);
    for (auto* ch : channels)
      payloads.push_back(EigenPayload::from_frame(recv_checked(*ch, ledger, MsgType::EigenMsg)));
    auto t0 = Clock::now();
    result.estimate = approx_master(payloads, options.master_rule, options.aggregation);
    timing.master_seconds += seconds_since(t0);
  }
  return result;
}

}  // namespace

ProtocolResult run_protocol(const std::vector<Dataset>& shards, const ProtocolOptions& options) {
  if (shards.empty()) throw Error("run_protocol: need at least one shard");
  if (options.mode == ProtocolMode::Exact && options.method != Method::Sir)
    throw ConfigError("exact mode supports SIR only");
  for (const auto& shard : shards)
    if (shard.n() < 1) throw EmptyShard();

  const auto s = shards.size();
  const auto wall_start = Clock::now();
  ProtocolTiming timing;
  std::vector<WorkerOutcome> outcomes(s);

  // On a master-side failure, push an error frame down every channel so
  // workers blocked on a broadcast wake up and exit.
  auto abort_workers = [](const std::vector<Channel*>& ends) {
    const Frame frame = ErrorMsg{2, "master aborted"}.to_frame();
    for (auto* ch : ends) {
      try {
        ch->send(frame);
      } catch (...) {
      }
    }
  };

  ProtocolResult result;
  if (options.transport == TransportKind::InProcess) {
    std::vector<ChannelPair> pairs(s);
    for (auto& pair : pairs) pair = make_inproc_pair();

    std::vector<std::thread> workers;
    workers.reserve(s);
    for (std::size_t i = 0; i < s; ++i)
      workers.emplace_back(run_worker, std::cref(shards[i]), static_cast<std::uint32_t>(i),
                           std::cref(options), std::ref(*pairs[i].worker_end),
                           std::ref(outcomes[i]));

    std::vector<Channel*> ends;
    ends.reserve(s);
    for (auto& pair : pairs) ends.push_back(pair.master_end.get());
    std::exception_ptr master_error;
    try {
      result = run_master(ends, options, timing);
    } catch (...) {
      master_error = std::current_exception();
      abort_workers(ends);
    }
    for (auto& w : workers) w.join();
    for (auto& o : outcomes)
      if (o.error) std::rethrow_exception(o.error);
    if (master_error) std::rethrow_exception(master_error);
  } else {
    TcpListener listener(options.tcp_port);
    const int port = listener.port();

    std::vector<std::unique_ptr<Channel>> worker_channels(s);
    std::vector<std::thread> workers;
    workers.reserve(s);
    for (std::size_t i = 0; i < s; ++i)
      workers.emplace_back([&, i] {
        try {
          worker_channels[i] = tcp_connect("127.0.0.1", port);
          run_worker(shards[i], static_cast<std::uint32_t>(i), options, *worker_channels[i],
                     outcomes[i]);
        } catch (...) {
          outcomes[i].error = std::current_exception();
        }
      });

    // Workers identify themselves with their first frame; the master keeps the
    // accept order and lets the aggregation sort by worker id.
    std::vector<std::unique_ptr<Channel>> accepted;
    accepted.reserve(s);
    for (std::size_t i = 0; i < s; ++i) accepted.push_back(listener.accept_one());
    std::vector<Channel*> ends;
    ends.reserve(s);
    for (auto& ch : accepted) ends.push_back(ch.get());
    std::exception_ptr master_error;
    try {
      result = run_master(ends, options, timing);
    } catch (...) {
      master_error = std::current_exception();
      abort_workers(ends);
    }
    for (auto& w : workers) w.join();
    for (auto& o : outcomes)
      if (o.error) std::rethrow_exception(o.error);
    if (master_error) std::rethrow_exception(master_error);
  }

  for (const auto& o : outcomes)
    timing.worker_seconds_max = std::max(timing.worker_seconds_max, o.compute_seconds);
  timing.wall_seconds = seconds_since(wall_start);
  result.timing = timing;
  result.estimate.params.workers = static_cast<int>(s);
  result.estimate.params.slices = options.slices;
  return result;
}

}  // namespace dsdr
