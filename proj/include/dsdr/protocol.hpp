#pragma once

#include <optional>

#include "dsdr/estimate.hpp"
#include "dsdr/messages.hpp"
#include "dsdr/simgen.hpp"
#include "dsdr/transport.hpp"

namespace dsdr {

// Number of leading eigenpairs to keep: a fixed count, or the smallest count
// whose cumulative share of the nonnegative spectrum reaches alpha.
struct KRule {
  enum class Kind { FixedK, VarianceThreshold };
  Kind kind = Kind::FixedK;
  int k = 1;
  double alpha = 0.9;

  static KRule fixed(int k) { return {Kind::FixedK, k, 0.0}; }
  static KRule threshold(double alpha) { return {Kind::VarianceThreshold, 0, alpha}; }
};

int select_k(const VectorXd& descending_values, const KRule& rule, int p);

// --- exact two-round estimation (SIR only) ---------------------------------

Round1Msg edsir_worker_round1(const Dataset& shard, std::uint32_t worker_id);

Broadcast1 edsir_master_round1(const std::vector<Round1Msg>& msgs, int slices);

Round2Msg edsir_worker_round2(const Dataset& shard, const Broadcast1& broadcast,
                              std::uint32_t worker_id);

struct FinalizeResult {
  SdrEstimate estimate;
  MatrixXd kernel;  // pooled slice-mean kernel
  MatrixXd sigma;   // pooled sample covariance (divisor n-1)
};

FinalizeResult edsir_finalize_detail(const std::vector<Round2Msg>& msgs, const KRule& k_rule);
SdrEstimate edsir_finalize(const std::vector<Round2Msg>& msgs, int k);

// --- one-shot approximate estimation ----------------------------------------

// Local: the shard stands alone (own mean, own grid, own whitening); the
// payload carries an orthonormal basis of the shard's estimated directions.
// FromBroadcast: globally uniform centering and slicing from the pre-round;
// the payload carries eigenpairs of the shard's uncorrected kernel so the
// master can apply the pooled correction.
struct Standardization {
  enum class Kind { Local, FromBroadcast };
  Kind kind = Kind::Local;
  SliceStrategy strategy = SliceStrategy::EqualWidth;  // Local grids
  std::optional<Broadcast1> broadcast;

  static Standardization local(SliceStrategy strategy = SliceStrategy::EqualWidth) {
    return {Kind::Local, strategy, std::nullopt};
  }
  static Standardization from_broadcast(Broadcast1 b) {
    return {Kind::FromBroadcast, SliceStrategy::EqualWidth, std::move(b)};
  }
};

EigenPayload approx_local(const Dataset& shard, Method method, int slices, const KRule& k_rule,
                          const Standardization& standardization, std::uint32_t worker_id);

enum class Aggregation { SpectrumWeighted, BasisOnly };

// Weighted reconstruction sum_s (n_s/n) Vtilde_s with Vtilde_s = U Lambda U^T
// (SpectrumWeighted) or U U^T / K_s (BasisOnly).
MatrixXd approx_aggregate(const std::vector<EigenPayload>& payloads, Aggregation aggregation);

// Final directions from the aggregated matrix. Without pooled_sigma the
// estimate is the top eigenvectors of the aggregate; with pooled_sigma the
// eigenproblem is solved on the pooled-whitened scale and back-transformed.
SdrEstimate approx_master(const std::vector<EigenPayload>& payloads, const KRule& kg_rule,
                          Aggregation aggregation,
                          const std::optional<MatrixXd>& pooled_sigma = std::nullopt);

// --- orchestration -----------------------------------------------------------

enum class ProtocolMode { Exact, ApproxHomogeneous, ApproxHeterogeneous };
enum class TransportKind { InProcess, Tcp };

struct ProtocolOptions {
  ProtocolMode mode = ProtocolMode::Exact;
  Method method = Method::Sir;
  int slices = 10;
  KRule local_rule = KRule::fixed(1);
  KRule master_rule = KRule::fixed(1);
  Aggregation aggregation = Aggregation::SpectrumWeighted;
  SliceStrategy local_strategy = SliceStrategy::EqualWidth;
  // Heterogeneous mode: pool worker scatter and solve on the pooled-whitened
  // scale. Off reproduces the one-shot aggregation with global centering only.
  bool pooled_correction = true;
  TransportKind transport = TransportKind::InProcess;
  int tcp_port = 0;  // 0 picks an ephemeral port
};

struct ProtocolTiming {
  double worker_seconds_max = 0.0;  // slowest worker's total compute
  double master_seconds = 0.0;      // master aggregation compute
  double wall_seconds = 0.0;        // end-to-end wall clock
  double simulated_parallel_seconds() const { return worker_seconds_max + master_seconds; }
};

struct ProtocolResult {
  SdrEstimate estimate;
  CommLedger ledger;
  ProtocolTiming timing;
};

ProtocolResult run_protocol(const std::vector<Dataset>& shards, const ProtocolOptions& options);

}  // namespace dsdr
