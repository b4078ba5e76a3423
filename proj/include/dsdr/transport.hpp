#pragma once

#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>

#include "dsdr/messages.hpp"

namespace dsdr {

// Bidirectional, message-oriented channel. Both implementations move encoded
// frame bytes, so the wire encoding is exercised regardless of transport.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send(const Frame& frame) = 0;
  virtual Frame recv() = 0;  // blocks until one frame is available
};

struct ChannelPair {
  std::unique_ptr<Channel> master_end;
  std::unique_ptr<Channel> worker_end;
};

// Two ordered byte-queues carrying encoded frames between threads.
ChannelPair make_inproc_pair();

// TCP channel over a connected socket; one framed message per send.
class TcpChannel : public Channel {
 public:
  explicit TcpChannel(int fd);
  ~TcpChannel() override;
  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

  void send(const Frame& frame) override;
  Frame recv() override;

 private:
  int fd_ = -1;
};

class TcpListener {
 public:
  explicit TcpListener(int port);  // port 0 binds an ephemeral port
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  int port() const { return port_; }
  std::unique_ptr<Channel> accept_one();

 private:
  int fd_ = -1;
  int port_ = 0;
};

std::unique_ptr<Channel> tcp_connect(const std::string& host, int port);

}  // namespace dsdr
