#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dsdr/dataset.hpp"

namespace dsdr {

// Deterministic generator: a standard-pinned engine keyed by (seed, stream)
// through a splitmix64 mix, with explicit bit-to-double conversion so a given
// key always produces the same values. Distinct streams are independent and
// replayable in isolation.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double uniform();          // in (0, 1]
  double normal();           // N(0,1), Box-Muller pair with cached spare
  std::uint64_t below(std::uint64_t bound);  // uniform in [0, bound), unbiased

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

enum class PredictorKind { StandardNormal, HeterogeneousNormal, DependentNormal };

struct PredictorMode {
  PredictorKind kind = PredictorKind::StandardNormal;
  int p = 10;
};

const char* predictor_kind_name(PredictorKind k);

// Population mean and covariance of a predictor mode.
VectorXd predictor_mean(const PredictorMode& mode);
MatrixXd predictor_covariance(const PredictorMode& mode);

MatrixXd gen_predictors(const PredictorMode& mode, Eigen::Index n, std::uint64_t seed);

// Response models 1..8; sigma is the noise scale (0.5 in the reference
// design). Model 7 has multiplicative noise.
VectorXd gen_response(int model_id, const MatrixXd& x, double sigma, std::uint64_t seed);

int structural_dim(int model_id);
int min_dimension(int model_id);
MatrixXd true_basis(int model_id, int p);

enum class PartitionKind { HomogeneousEqual, HeterogeneousEqual, HeterogeneousUnequal };

struct PartitionScheme {
  PartitionKind kind = PartitionKind::HomogeneousEqual;
  int workers = 5;
  std::vector<double> proportions;  // unequal only; defaults to the 5-worker reference split

  static PartitionScheme homogeneous_equal(int workers);
  static PartitionScheme heterogeneous_equal(int workers);
  static PartitionScheme heterogeneous_unequal(int workers, std::vector<double> proportions = {});
};

const char* partition_kind_name(PartitionKind k);

// Shard sizes implied by a scheme; every size >= 1 or EmptyShard is thrown.
std::vector<Eigen::Index> shard_sizes(const PartitionScheme& scheme, Eigen::Index n);

std::vector<Dataset> partition(const Dataset& data, const PartitionScheme& scheme,
                               std::uint64_t seed);

}  // namespace dsdr
