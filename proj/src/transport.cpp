#include "dsdr/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace dsdr {

namespace {

class ByteQueue {
 public:
  void push(std::vector<std::uint8_t> bytes) {
    {
      std::lock_guard lock(mutex_);
      queue_.push_back(std::move(bytes));
    }
    cv_.notify_one();
  }
  std::vector<std::uint8_t> pop() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return !queue_.empty(); });
    auto bytes = std::move(queue_.front());
    queue_.pop_front();
    return bytes;
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::vector<std::uint8_t>> queue_;
};

class InProcChannel : public Channel {
 public:
  InProcChannel(std::shared_ptr<ByteQueue> out, std::shared_ptr<ByteQueue> in)
      : out_(std::move(out)), in_(std::move(in)) {}

  void send(const Frame& frame) override { out_->push(encode_frame(frame)); }

  Frame recv() override {
    auto bytes = in_->pop();
    std::size_t offset = 0;
    Frame frame = decode_frame(bytes, offset);
    if (offset != bytes.size()) throw TransportFailure("trailing bytes after frame", offset);
    return frame;
  }

 private:
  std::shared_ptr<ByteQueue> out_;
  std::shared_ptr<ByteQueue> in_;
};

void write_all(int fd, const std::uint8_t* data, std::size_t size) {
  std::size_t sent = 0;
  while (sent < size) {
    const ssize_t r = ::send(fd, data + sent, size - sent, MSG_NOSIGNAL);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw TransportFailure(std::string("send failed: ") + std::strerror(errno), sent);
    }
    sent += static_cast<std::size_t>(r);
  }
}

void read_exact(int fd, std::uint8_t* data, std::size_t size, std::size_t frame_offset) {
  std::size_t got = 0;
  while (got < size) {
    const ssize_t r = ::recv(fd, data + got, size - got, 0);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw TransportFailure(std::string("recv failed: ") + std::strerror(errno),
                             frame_offset + got);
    }
    if (r == 0) throw TransportFailure("connection closed mid-frame", frame_offset + got);
    got += static_cast<std::size_t>(r);
  }
}

}  // namespace

ChannelPair make_inproc_pair() {
  auto up = std::make_shared<ByteQueue>();
  auto down = std::make_shared<ByteQueue>();
  ChannelPair pair;
  pair.master_end = std::make_unique<InProcChannel>(down, up);
  pair.worker_end = std::make_unique<InProcChannel>(up, down);
  return pair;
}

TcpChannel::TcpChannel(int fd) : fd_(fd) {
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

TcpChannel::~TcpChannel() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpChannel::send(const Frame& frame) {
  const auto bytes = encode_frame(frame);
  write_all(fd_, bytes.data(), bytes.size());
}

Frame TcpChannel::recv() {
  std::vector<std::uint8_t> bytes(kFrameHeaderBytes);
  read_exact(fd_, bytes.data(), kFrameHeaderBytes, 0);
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(bytes[6 + i]) << (8 * i);
  bytes.resize(kFrameHeaderBytes + len);
  read_exact(fd_, bytes.data() + kFrameHeaderBytes, len, kFrameHeaderBytes);
  std::size_t offset = 0;
  return decode_frame(bytes, offset);
}

TcpListener::TcpListener(int port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw TransportFailure(std::string("socket failed: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    const int err = errno;
    ::close(fd_);
    fd_ = -1;
    throw TransportFailure(std::string("bind failed: ") + std::strerror(err));
  }
  if (::listen(fd_, 64) < 0) {
    const int err = errno;
    ::close(fd_);
    fd_ = -1;
    throw TransportFailure(std::string("listen failed: ") + std::strerror(err));
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Channel> TcpListener::accept_one() {
  pollfd pfd{fd_, POLLIN, 0};
  const int ready = ::poll(&pfd, 1, 60 * 1000);
  if (ready < 0) throw TransportFailure(std::string("poll failed: ") + std::strerror(errno));
  if (ready == 0) throw TransportFailure("timed out waiting for a worker connection");
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) throw TransportFailure(std::string("accept failed: ") + std::strerror(errno));
  return std::make_unique<TcpChannel>(fd);
}

std::unique_ptr<Channel> tcp_connect(const std::string& host, int port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw TransportFailure(std::string("socket failed: ") + std::strerror(errno));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw TransportFailure("bad host address: " + host);
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    const int err = errno;
    ::close(fd);
    throw TransportFailure(std::string("connect failed: ") + std::strerror(err));
  }
  return std::make_unique<TcpChannel>(fd);
}

}  // namespace dsdr
