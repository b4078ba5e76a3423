#pragma once

#include <cstdint>
#include <vector>

#include "dsdr/kernels.hpp"
#include "dsdr/slicing.hpp"

namespace dsdr {

// Frame layout: "DSDR" | version 0x01 | type byte | payload length (u32 LE) |
// payload. Payload integers are little-endian; reals are IEEE-754 binary64
// little-endian; matrices travel row-major. Each payload begins with two u32
// dimension/header fields, after which every field occupies an 8-byte slot.
enum class MsgType : std::uint8_t {
  Round1 = 0x01,
  Broadcast1 = 0x02,
  Round2 = 0x03,
  EigenMsg = 0x04,
  ErrorMsg = 0x7F,
};

constexpr std::uint8_t kProtocolVersion = 0x01;
constexpr std::size_t kFrameHeaderBytes = 10;  // magic(4) + version + type + length(4)

struct Frame {
  MsgType type = MsgType::ErrorMsg;
  std::vector<std::uint8_t> payload;

  std::size_t frame_bytes() const { return kFrameHeaderBytes + payload.size(); }
  // 8-byte payload slots after the two u32 header fields; 0 for error frames.
  std::uint64_t scalar_count() const;
};

std::vector<std::uint8_t> encode_frame(const Frame& frame);
// Decodes one frame from a byte buffer; `offset` advances past it. Malformed
// input throws TransportFailure carrying the offending offset.
Frame decode_frame(const std::vector<std::uint8_t>& bytes, std::size_t& offset);

// --- message types -------------------------------------------------------

// Worker -> master, round 1: response range and predictor mean.
struct Round1Msg {
  std::uint32_t worker_id = 0;
  std::uint64_t n_s = 0;
  double y_min = 0.0;
  double y_max = 0.0;
  VectorXd xbar;  // p

  Frame to_frame() const;
  static Round1Msg from_frame(const Frame& frame);
};

// Master -> workers: the slice grid and the global mean.
struct Broadcast1 {
  VectorXd grid;         // H+1
  VectorXd xbar_global;  // p

  int slice_count() const { return static_cast<int>(grid.size()) - 1; }
  SliceSpec spec() const { return SliceSpec{grid}; }

  Frame to_frame() const;
  static Broadcast1 from_frame(const Frame& frame);
};

// Worker -> master, round 2: per-slice counts and sums of globally-centered
// predictors plus the raw scatter about the global mean.
struct Round2Msg {
  std::uint32_t worker_id = 0;
  std::uint64_t n_s = 0;
  std::vector<std::uint64_t> slice_counts;  // H
  MatrixXd slice_sums;                      // H x p
  MatrixXd scatter;                         // p x p

  Frame to_frame() const;
  static Round2Msg from_frame(const Frame& frame);
};

// Worker -> master, one-shot path: leading eigenpairs of the local kernel.
struct EigenPayload {
  std::uint32_t worker_id = 0;
  std::uint64_t n_s = 0;
  Method method = Method::Sir;
  VectorXd eigenvalues;   // K_s, descending
  MatrixXd eigenvectors;  // p x K_s, orthonormal columns

  int k() const { return static_cast<int>(eigenvalues.size()); }

  Frame to_frame() const;
  static EigenPayload from_frame(const Frame& frame);
};

struct ErrorMsg {
  std::uint32_t code = 0;
  std::string text;

  Frame to_frame() const;
  static ErrorMsg from_frame(const Frame& frame);
};

// --- communication accounting --------------------------------------------

enum class Direction { Up, Down };

struct LedgerRecord {
  Direction direction = Direction::Up;
  MsgType type = MsgType::Round1;
  std::uint64_t payload_bytes = 0;
  std::uint64_t frame_bytes = 0;
  std::uint64_t scalars = 0;
};

struct CommLedger {
  std::vector<LedgerRecord> records;

  void add(Direction direction, const Frame& frame);
  std::uint64_t bytes(Direction d) const;
  std::uint64_t scalars(Direction d) const;
  std::uint64_t scalars(Direction d, MsgType t) const;
  std::uint64_t messages(Direction d, MsgType t) const;
};

// Closed-form payload scalar counts per message type.
std::uint64_t round1_scalars(int p);
std::uint64_t broadcast1_scalars(int p, int slices);
std::uint64_t round2_scalars(int p, int slices);
std::uint64_t eigen_scalars(int p, int k);

}  // namespace dsdr
