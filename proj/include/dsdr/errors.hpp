#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dsdr {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- numerical core ---
class DegenerateRange : public Error { using Error::Error; public: DegenerateRange() : Error("degenerate response range: y_min >= y_max") {} };
class InvalidSliceCount : public Error { using Error::Error; public: InvalidSliceCount() : Error("slice count H must be >= 2") {} };
class OutOfRange : public Error { using Error::Error; public: OutOfRange() : Error("response value outside the slice grid") {} };
class SingularCovariance : public Error { using Error::Error; public: SingularCovariance() : Error("covariance matrix is numerically singular") {} };
class NonSymmetric : public Error { using Error::Error; public: NonSymmetric() : Error("matrix asymmetry exceeds tolerance") {} };
class ConvergenceFailure : public Error { using Error::Error; public: ConvergenceFailure() : Error("eigensolver failed to converge") {} };
class NotStandardized : public Error { using Error::Error; public: NotStandardized() : Error("input is not standardized (nonzero mean or non-identity covariance)") {} };
class RankDeficient : public Error { using Error::Error; public: RankDeficient() : Error("matrix does not have full column rank") {} };
class InsufficientDimension : public Error { using Error::Error; public: InsufficientDimension() : Error("predictor dimension too small for this model") {} };

// --- protocol ---
class EmptyShard : public Error { using Error::Error; public: EmptyShard() : Error("shard contains no observations") {} };
class DimensionMismatch : public Error { using Error::Error; public: DimensionMismatch() : Error("inconsistent dimensions across messages") {} };
class DuplicateWorker : public Error { using Error::Error; public: DuplicateWorker() : Error("duplicate worker id in message set") {} };
class TransportFailure : public Error {
 public:
  explicit TransportFailure(const std::string& what, std::size_t frame_offset = 0)
      : Error(what), frame_offset_(frame_offset) {}
  std::size_t frame_offset() const { return frame_offset_; }
 private:
  std::size_t frame_offset_ = 0;
};
class ProtocolViolation : public Error { using Error::Error; };

// --- metrics / harness ---
class InsufficientRepetitions : public Error { using Error::Error; public: InsufficientRepetitions() : Error("need at least 2 repetitions for a sample standard deviation") {} };
class MetricOutOfRange : public Error { using Error::Error; };

// --- I/O ---
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t col)
      : Error(what + " (row " + std::to_string(row) + ", column " + std::to_string(col) + ")"),
        row_(row), col_(col) {}
  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }
 private:
  std::size_t row_ = 0, col_ = 0;
};
class NonNumericCell : public ParseError { public: using ParseError::ParseError; };
class MissingColumn : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };
class BudgetExceeded : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };

}  // namespace dsdr
