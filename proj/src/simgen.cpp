#include "dsdr/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "dsdr/linalg.hpp"

namespace dsdr {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (stream * 0xD6E8FEB86659FD93ULL);
  splitmix64(s);
  return splitmix64(s);
}

constexpr std::uint64_t kStreamPredictors = 1;
constexpr std::uint64_t kStreamResponse = 2;
constexpr std::uint64_t kStreamPartition = 3;

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : engine_(derive_key(seed, stream)) {}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw Error("Rng::below: bound must be positive");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % bound;
}

const char* predictor_kind_name(PredictorKind k) {
  switch (k) {
    case PredictorKind::StandardNormal: return "standard";
    case PredictorKind::HeterogeneousNormal: return "hetero";
    case PredictorKind::DependentNormal: return "dependent";
  }
  return "?";
}

VectorXd predictor_mean(const PredictorMode& mode) {
  VectorXd mu = VectorXd::Zero(mode.p);
  if (mode.kind == PredictorKind::HeterogeneousNormal)
    for (int j = 0; j < mode.p; ++j) mu(j) = static_cast<double>(j % 5 + 1);
  return mu;
}

MatrixXd predictor_covariance(const PredictorMode& mode) {
  const int p = mode.p;
  if (mode.kind != PredictorKind::DependentNormal) return MatrixXd::Identity(p, p);
  MatrixXd sigma(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) sigma(i, j) = i == j ? 0.8 : std::pow(0.5, std::abs(i - j));
  return sigma;
}

MatrixXd gen_predictors(const PredictorMode& mode, Eigen::Index n, std::uint64_t seed) {
  if (n < 1 || mode.p < 1) throw Error("gen_predictors: n and p must be positive");
  Rng rng(seed, kStreamPredictors);
  MatrixXd g(n, mode.p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < mode.p; ++j) g(i, j) = rng.normal();

  if (mode.kind == PredictorKind::DependentNormal) {
    MatrixXd factor = sqrt_psd(predictor_covariance(mode));
    g = g * factor;  // rows ~ N(0, factor^2)
  }
  if (mode.kind == PredictorKind::HeterogeneousNormal)
    g.rowwise() += predictor_mean(mode).transpose();
  return g;
}

int structural_dim(int model_id) {
  switch (model_id) {
    case 1: case 4: case 5: return 1;
    case 2: case 3: case 6: case 7: case 8: return 2;
    default: throw Error("model id must be in 1..8");
  }
}

int min_dimension(int model_id) {
  switch (model_id) {
    case 1: case 2: return 4;
    case 3: case 4: case 5: return 2;
    case 6: case 7: case 8: return 6;
    default: throw Error("model id must be in 1..8");
  }
}

VectorXd gen_response(int model_id, const MatrixXd& x, double sigma, std::uint64_t seed) {
  const auto n = x.rows();
  const auto p = x.cols();
  if (p < min_dimension(model_id)) throw InsufficientDimension();

  Rng rng(seed, kStreamResponse);
  VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double eps = rng.normal();
    double v = 0.0;
    switch (model_id) {
      case 1:
        v = x(i, 0) + x(i, 1) + x(i, 2) + x(i, 3) + sigma * eps;
        break;
      case 2:
        v = (x(i, 0) + x(i, 1)) + std::exp(x(i, 2) + x(i, 3)) + sigma * eps;
        break;
      case 3:
        v = x(i, 0) / (0.5 + (x(i, 1) + 1.5) * (x(i, 1) + 1.5)) + sigma * eps;
        break;
      case 4: {
        const double t = std::numbers::sqrt2 * x(i, 0) + std::numbers::sqrt2 * x(i, 1);
        v = t * t + sigma * eps;
        break;
      }
      case 5: {
        const double t = x(i, 0) + x(i, 1) + 1.0;
        v = t * t + sigma * eps;
        break;
      }
      case 6: {
        const double a = x(i, 0) + x(i, 1) + x(i, 2);
        const double b = x(i, 0) + x(i, 4) + 3.0 * x(i, 5);
        v = 0.4 * a * a + std::sqrt(std::abs(b)) + sigma * eps;
        break;
      }
      case 7: {
        const double a = x(i, 0) + x(i, 1) + x(i, 2);
        const double b = x(i, 0) + x(i, 4) + 3.0 * x(i, 5);
        v = 0.3 * std::sin(b / 4.0) + (1.0 + a * a) * sigma * eps;
        break;
      }
      case 8: {
        const double a = x(i, 0) + x(i, 1) + x(i, 2);
        const double b = x(i, 0) + x(i, 4) + 3.0 * x(i, 5);
        v = 0.4 * a * a + 3.0 * std::sin(b / 4.0) + sigma * eps;
        break;
      }
      default:
        throw Error("model id must be in 1..8");
    }
    y(i) = v;
  }
  return y;
}

MatrixXd true_basis(int model_id, int p) {
  if (p < min_dimension(model_id)) throw InsufficientDimension();
  const int d = structural_dim(model_id);
  MatrixXd b = MatrixXd::Zero(p, d);
  switch (model_id) {
    case 1:
      b(0, 0) = b(1, 0) = b(2, 0) = b(3, 0) = 0.5;
      break;
    case 2:
      b(2, 0) = b(3, 0) = 1.0 / std::numbers::sqrt2;
      b(0, 1) = b(1, 1) = 1.0 / std::numbers::sqrt2;
      break;
    case 3:
      b(0, 0) = 1.0;
      b(1, 1) = 1.0;
      break;
    case 4:
    case 5:
      b(0, 0) = b(1, 0) = 1.0 / std::numbers::sqrt2;
      break;
    case 6:
    case 7:
    case 8: {
      const double s3 = 1.0 / std::sqrt(3.0);
      const double s11 = 1.0 / std::sqrt(11.0);
      b(0, 0) = b(1, 0) = b(2, 0) = s3;
      b(0, 1) = s11;
      b(4, 1) = s11;
      b(5, 1) = 3.0 * s11;
      break;
    }
    default:
      throw Error("model id must be in 1..8");
  }
  return b;
}

PartitionScheme PartitionScheme::homogeneous_equal(int workers) {
  return {PartitionKind::HomogeneousEqual, workers, {}};
}
PartitionScheme PartitionScheme::heterogeneous_equal(int workers) {
  return {PartitionKind::HeterogeneousEqual, workers, {}};
}
PartitionScheme PartitionScheme::heterogeneous_unequal(int workers,
                                                       std::vector<double> proportions) {
  PartitionScheme s{PartitionKind::HeterogeneousUnequal, workers, std::move(proportions)};
  if (s.proportions.empty()) {
    if (workers == 5) {
      s.proportions = {0.05, 0.30, 0.10, 0.40, 0.15};
    } else {
      // deterministic unequal split: weights 1..S normalized
      s.proportions.resize(static_cast<std::size_t>(workers));
      const double total = workers * (workers + 1) / 2.0;
      for (int i = 0; i < workers; ++i) s.proportions[static_cast<std::size_t>(i)] = (i + 1) / total;
    }
  }
  return s;
}

const char* partition_kind_name(PartitionKind k) {
  switch (k) {
    case PartitionKind::HomogeneousEqual: return "homo-equal";
    case PartitionKind::HeterogeneousEqual: return "hetero-equal";
    case PartitionKind::HeterogeneousUnequal: return "hetero-unequal";
  }
  return "?";
}

std::vector<Eigen::Index> shard_sizes(const PartitionScheme& scheme, Eigen::Index n) {
  const int s = scheme.workers;
  if (s < 1) throw Error("partition: need at least one worker");
  if (n < s) throw EmptyShard();
  std::vector<Eigen::Index> sizes(static_cast<std::size_t>(s));
  if (scheme.kind == PartitionKind::HeterogeneousUnequal) {
    const auto& props = scheme.proportions;
    if (static_cast<int>(props.size()) != s)
      throw Error("partition: proportions must match worker count");
    double sum = std::accumulate(props.begin(), props.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9 || *std::min_element(props.begin(), props.end()) <= 0.0)
      throw Error("partition: proportions must be positive and sum to 1");
    Eigen::Index used = 0;
    for (int i = 0; i + 1 < s; ++i) {
      sizes[static_cast<std::size_t>(i)] =
          static_cast<Eigen::Index>(std::llround(props[static_cast<std::size_t>(i)] * static_cast<double>(n)));
      used += sizes[static_cast<std::size_t>(i)];
    }
    sizes[static_cast<std::size_t>(s - 1)] = n - used;  // last shard absorbs rounding residue
  } else {
    const Eigen::Index base = n / s;
    const Eigen::Index rem = n % s;
    for (int i = 0; i < s; ++i)
      sizes[static_cast<std::size_t>(i)] = base + (i < rem ? 1 : 0);
  }
  for (auto v : sizes)
    if (v < 1) throw EmptyShard();
  return sizes;
}

std::vector<Dataset> partition(const Dataset& data, const PartitionScheme& scheme,
                               std::uint64_t seed) {
  data.validate();
  const Eigen::Index n = data.n();
  auto sizes = shard_sizes(scheme, n);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  if (scheme.kind == PartitionKind::HomogeneousEqual) {
    Rng rng(seed, kStreamPartition);
    for (Eigen::Index i = n - 1; i > 0; --i) {
      const auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(i) + 1));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
  } else {
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return data.y(a) > data.y(b); });
  }

  std::vector<Dataset> shards;
  shards.reserve(sizes.size());
  Eigen::Index pos = 0;
  for (auto size : sizes) {
    Dataset shard;
    shard.x.resize(size, data.p());
    shard.y.resize(size);
    for (Eigen::Index r = 0; r < size; ++r) {
      shard.x.row(r) = data.x.row(order[static_cast<std::size_t>(pos + r)]);
      shard.y(r) = data.y(order[static_cast<std::size_t>(pos + r)]);
    }
    pos += size;
    shards.push_back(std::move(shard));
  }
  return shards;
}

}  // namespace dsdr
