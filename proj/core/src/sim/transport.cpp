// Copyright 2026 The Forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "forge/sim/transport.hpp"

#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

#include "forge/errors.hpp"

namespace forge::sim {

namespace {

struct Mailbox {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::vector<std::uint8_t>> frames;
  bool closed = false;
};

class InProcessLink : public Link {
 public:
  InProcessLink(std::shared_ptr<Mailbox> in, std::shared_ptr<Mailbox> out)
      : in_(std::move(in)), out_(std::move(out)) {}

  ~InProcessLink() override {
    std::lock_guard lock(out_->mu);
    out_->closed = true;
    out_->cv.notify_all();
  }

  void send(const WireMessage& m) override {
    auto frame = encode_message(m);
    std::lock_guard lock(out_->mu);
    if (out_->closed) throw ProtocolError("send on closed link");
    out_->frames.push_back(std::move(frame));
    out_->cv.notify_all();
  }

  WireMessage receive(std::chrono::milliseconds timeout) override {
    std::unique_lock lock(in_->mu);
    if (!in_->cv.wait_for(lock, timeout, [&] { return !in_->frames.empty() || in_->closed; })) {
      throw TimeoutError("no message within " + std::to_string(timeout.count()) + " ms");
    }
    if (in_->frames.empty()) throw ProtocolError("peer closed the link");
    auto frame = std::move(in_->frames.front());
    in_->frames.pop_front();
    lock.unlock();
    return decode_message(frame);
  }

 private:
  std::shared_ptr<Mailbox> in_, out_;
};

class SocketLink : public Link {
 public:
  explicit SocketLink(int fd) : fd_(fd) {}
  ~SocketLink() override { ::close(fd_); }

  void send(const WireMessage& m) override {
    const auto frame = encode_message(m);
    std::size_t off = 0;
    while (off < frame.size()) {
      const ssize_t n = ::send(fd_, frame.data() + off, frame.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(std::string("socket send: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  WireMessage receive(std::chrono::milliseconds timeout) override {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    std::uint8_t buf[65536];
    while (true) {
      if (auto m = reader_.pop()) return std::move(*m);
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) {
        throw TimeoutError("no message within " + std::to_string(timeout.count()) + " ms");
      }
      pollfd pfd{fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(std::string("socket poll: ") + std::strerror(errno));
      }
      if (ready == 0) continue;
      const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(std::string("socket recv: ") + std::strerror(errno));
      }
      if (n == 0) {
        if (reader_.buffered() > 0) throw ProtocolError("peer closed mid-frame");
        throw ProtocolError("peer closed the link");
      }
      reader_.push({buf, static_cast<std::size_t>(n)});
    }
  }

 private:
  int fd_;
  FrameReader reader_;
};

}  // namespace

LinkPair make_inprocess_link() {
  auto a = std::make_shared<Mailbox>();
  auto b = std::make_shared<Mailbox>();
  return {std::make_unique<InProcessLink>(a, b), std::make_unique<InProcessLink>(b, a)};
}

LinkPair make_socket_link() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
    throw Error(std::string("socketpair: ") + std::strerror(errno));
  }
  return {std::make_unique<SocketLink>(fds[0]), std::make_unique<SocketLink>(fds[1])};
}

LinkPair make_link(TransportKind kind) {
  return kind == TransportKind::kSocket ? make_socket_link() : make_inprocess_link();
}

}  // namespace forge::sim
