#include "dsdr/messages.hpp"

#include <cstring>

namespace dsdr {

namespace {

constexpr std::uint8_t kMagic[4] = {'D', 'S', 'D', 'R'};

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void matrix_row_major(const MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& in, std::size_t base_offset)
      : in_(in), pos_(0), base_(base_offset) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  MatrixXd matrix_row_major(Eigen::Index rows, Eigen::Index cols) {
    MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = f64();
    return m;
  }
  std::size_t remaining() const { return in_.size() - pos_; }
  void expect_consumed() const {
    if (pos_ != in_.size())
      throw TransportFailure("payload length does not match message contents", base_ + pos_);
  }

 private:
  void need(std::size_t bytes) const {
    if (pos_ + bytes > in_.size())
      throw TransportFailure("truncated payload", base_ + pos_);
  }
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_;
  std::size_t base_;
};

void check_type(const Frame& frame, MsgType expected) {
  if (frame.type != expected)
    throw ProtocolViolation(std::string("unexpected message type 0x") +
                            std::to_string(static_cast<int>(frame.type)));
}

}  // namespace

std::uint64_t Frame::scalar_count() const {
  if (type == MsgType::ErrorMsg) return 0;
  if (payload.size() < 8) return 0;
  return (payload.size() - 8) / 8;
}

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
  std::vector<std::uint8_t> out;
  out.reserve(kFrameHeaderBytes + frame.payload.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kProtocolVersion);
  out.push_back(static_cast<std::uint8_t>(frame.type));
  Writer w(out);
  w.u32(static_cast<std::uint32_t>(frame.payload.size()));
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

Frame decode_frame(const std::vector<std::uint8_t>& bytes, std::size_t& offset) {
  if (bytes.size() - offset < kFrameHeaderBytes)
    throw TransportFailure("truncated frame header", offset);
  if (std::memcmp(bytes.data() + offset, kMagic, 4) != 0)
    throw TransportFailure("bad frame magic", offset);
  if (bytes[offset + 4] != kProtocolVersion)
    throw TransportFailure("unsupported protocol version", offset + 4);
  const auto type = static_cast<MsgType>(bytes[offset + 5]);
  switch (type) {
    case MsgType::Round1:
    case MsgType::Broadcast1:
    case MsgType::Round2:
    case MsgType::EigenMsg:
    case MsgType::ErrorMsg:
      break;
    default:
      throw TransportFailure("unknown message type", offset + 5);
  }
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i)
    len |= static_cast<std::uint32_t>(bytes[offset + 6 + i]) << (8 * i);
  if (bytes.size() - offset - kFrameHeaderBytes < len)
    throw TransportFailure("truncated frame payload", offset + kFrameHeaderBytes);
  Frame frame;
  frame.type = type;
  frame.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset + kFrameHeaderBytes),
                       bytes.begin() + static_cast<std::ptrdiff_t>(offset + kFrameHeaderBytes + len));
  offset += kFrameHeaderBytes + len;
  return frame;
}

// --- Round1 ----------------------------------------------------------------

Frame Round1Msg::to_frame() const {
  Frame f;
  f.type = MsgType::Round1;
  Writer w(f.payload);
  w.u32(static_cast<std::uint32_t>(xbar.size()));
  w.u32(worker_id);
  w.u64(n_s);
  w.f64(y_min);
  w.f64(y_max);
  for (Eigen::Index i = 0; i < xbar.size(); ++i) w.f64(xbar(i));
  return f;
}

Round1Msg Round1Msg::from_frame(const Frame& frame) {
  check_type(frame, MsgType::Round1);
  Reader r(frame.payload, kFrameHeaderBytes);
  Round1Msg m;
  const auto p = static_cast<Eigen::Index>(r.u32());
  m.worker_id = r.u32();
  m.n_s = r.u64();
  m.y_min = r.f64();
  m.y_max = r.f64();
  m.xbar.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) m.xbar(i) = r.f64();
  r.expect_consumed();
  return m;
}

// --- Broadcast1 --------------------------------------------------------------

Frame Broadcast1::to_frame() const {
  Frame f;
  f.type = MsgType::Broadcast1;
  Writer w(f.payload);
  w.u32(static_cast<std::uint32_t>(xbar_global.size()));
  w.u32(static_cast<std::uint32_t>(grid.size() - 1));
  for (Eigen::Index i = 0; i < grid.size(); ++i) w.f64(grid(i));
  for (Eigen::Index i = 0; i < xbar_global.size(); ++i) w.f64(xbar_global(i));
  return f;
}

Broadcast1 Broadcast1::from_frame(const Frame& frame) {
  check_type(frame, MsgType::Broadcast1);
  Reader r(frame.payload, kFrameHeaderBytes);
  Broadcast1 m;
  const auto p = static_cast<Eigen::Index>(r.u32());
  const auto slices = static_cast<Eigen::Index>(r.u32());
  m.grid.resize(slices + 1);
  for (Eigen::Index i = 0; i <= slices; ++i) m.grid(i) = r.f64();
  m.xbar_global.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) m.xbar_global(i) = r.f64();
  r.expect_consumed();
  return m;
}

// --- Round2 ----------------------------------------------------------------

Frame Round2Msg::to_frame() const {
  Frame f;
  f.type = MsgType::Round2;
  Writer w(f.payload);
  w.u32(static_cast<std::uint32_t>(slice_sums.cols()));
  w.u32(static_cast<std::uint32_t>(slice_counts.size()));
  w.u64(worker_id);
  w.u64(n_s);
  for (auto c : slice_counts) w.u64(c);
  w.matrix_row_major(slice_sums);
  w.matrix_row_major(scatter);
  return f;
}

Round2Msg Round2Msg::from_frame(const Frame& frame) {
  check_type(frame, MsgType::Round2);
  Reader r(frame.payload, kFrameHeaderBytes);
  Round2Msg m;
  const auto p = static_cast<Eigen::Index>(r.u32());
  const auto slices = static_cast<Eigen::Index>(r.u32());
  m.worker_id = static_cast<std::uint32_t>(r.u64());
  m.n_s = r.u64();
  m.slice_counts.resize(static_cast<std::size_t>(slices));
  for (auto& c : m.slice_counts) c = r.u64();
  m.slice_sums = r.matrix_row_major(slices, p);
  m.scatter = r.matrix_row_major(p, p);
  r.expect_consumed();
  return m;
}

// --- EigenPayload ------------------------------------------------------------

Frame EigenPayload::to_frame() const {
  Frame f;
  f.type = MsgType::EigenMsg;
  Writer w(f.payload);
  w.u32(static_cast<std::uint32_t>(eigenvectors.rows()));
  w.u32(static_cast<std::uint32_t>(eigenvalues.size()));
  w.u64(worker_id);
  w.u64(n_s);
  w.u64(static_cast<std::uint64_t>(method));
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) w.f64(eigenvalues(i));
  w.matrix_row_major(eigenvectors);
  return f;
}

EigenPayload EigenPayload::from_frame(const Frame& frame) {
  check_type(frame, MsgType::EigenMsg);
  Reader r(frame.payload, kFrameHeaderBytes);
  EigenPayload m;
  const auto p = static_cast<Eigen::Index>(r.u32());
  const auto k = static_cast<Eigen::Index>(r.u32());
  m.worker_id = static_cast<std::uint32_t>(r.u64());
  m.n_s = r.u64();
  const auto method_tag = r.u64();
  if (method_tag > 2) throw TransportFailure("bad method tag", kFrameHeaderBytes + 16);
  m.method = static_cast<Method>(method_tag);
  m.eigenvalues.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) m.eigenvalues(i) = r.f64();
  m.eigenvectors = r.matrix_row_major(p, k);
  r.expect_consumed();
  return m;
}

// --- ErrorMsg ----------------------------------------------------------------

Frame ErrorMsg::to_frame() const {
  Frame f;
  f.type = MsgType::ErrorMsg;
  Writer w(f.payload);
  w.u32(code);
  f.payload.insert(f.payload.end(), text.begin(), text.end());
  return f;
}

ErrorMsg ErrorMsg::from_frame(const Frame& frame) {
  check_type(frame, MsgType::ErrorMsg);
  if (frame.payload.size() < 4) throw TransportFailure("truncated error payload", kFrameHeaderBytes);
  ErrorMsg m;
  m.code = 0;
  for (int i = 0; i < 4; ++i)
    m.code |= static_cast<std::uint32_t>(frame.payload[static_cast<std::size_t>(i)]) << (8 * i);
  m.text.assign(frame.payload.begin() + 4, frame.payload.end());
  return m;
}

// --- ledger ------------------------------------------------------------------

void CommLedger::add(Direction direction, const Frame& frame) {
  records.push_back({direction, frame.type, frame.payload.size(), frame.frame_bytes(),
                     frame.scalar_count()});
}

std::uint64_t CommLedger::bytes(Direction d) const {
  std::uint64_t total = 0;
  for (const auto& r : records)
    if (r.direction == d) total += r.frame_bytes;
  return total;
}

std::uint64_t CommLedger::scalars(Direction d) const {
  std::uint64_t total = 0;
  for (const auto& r : records)
    if (r.direction == d) total += r.scalars;
  return total;
}

std::uint64_t CommLedger::scalars(Direction d, MsgType t) const {
  std::uint64_t total = 0;
  for (const auto& r : records)
    if (r.direction == d && r.type == t) total += r.scalars;
  return total;
}

std::uint64_t CommLedger::messages(Direction d, MsgType t) const {
  std::uint64_t total = 0;
  for (const auto& r : records)
    if (r.direction == d && r.type == t) ++total;
  return total;
}

std::uint64_t round1_scalars(int p) { return static_cast<std::uint64_t>(p) + 3; }
std::uint64_t broadcast1_scalars(int p, int slices) {
  return static_cast<std::uint64_t>(slices) + 1 + static_cast<std::uint64_t>(p);
}
std::uint64_t round2_scalars(int p, int slices) {
  const auto pp = static_cast<std::uint64_t>(p);
  const auto hh = static_cast<std::uint64_t>(slices);
  return 2 + hh + hh * pp + pp * pp;
}
std::uint64_t eigen_scalars(int p, int k) {
  const auto pp = static_cast<std::uint64_t>(p);
  const auto kk = static_cast<std::uint64_t>(k);
  return 3 + kk + kk * pp;
}

}  // namespace dsdr
