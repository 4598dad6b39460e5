#pragma once

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <memory>
#include <ostream>
#include <regex>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/eval/client.hpp"

namespace forge::eval {

// Newline-delimited JSON over a byte stream. The server speaks first:
//   {"protocol":1,"vocab_hash":"...","vocab_size":13,"max_batch":64}
// Requests:  {"id":7,"tokens":[1,4,...]}  or  {"batch":[{"id":7,"tokens":[...]},...]}
// Responses: one line per request item, in request order:
//   {"id":7,"logits":[...]}  or  {"id":7,"error":"..."}
inline constexpr int kProtocolVersion = 1;

struct Handshake {
  int protocol = kProtocolVersion;
  std::string vocab_hash;
  int vocab_size = 0;
  std::size_t max_batch = 1;

  std::string to_line() const {
    nlohmann::ordered_json j;
    j["protocol"] = protocol;
    j["vocab_hash"] = vocab_hash;
    j["vocab_size"] = vocab_size;
    j["max_batch"] = max_batch;
    return j.dump();
  }

  static Handshake from_line(const std::string& line) {
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ProtocolError("handshake is not a json object", line);
    try {
      Handshake h;
      h.protocol = j.at("protocol").get<int>();
      h.vocab_hash = j.at("vocab_hash").get<std::string>();
      h.vocab_size = j.at("vocab_size").get<int>();
      h.max_batch = j.at("max_batch").get<std::size_t>();
      if (h.protocol != kProtocolVersion) {
        throw ProtocolError("unsupported protocol version " + std::to_string(h.protocol), line);
      }
      if (h.vocab_size <= 0 || h.max_batch == 0) throw ProtocolError("handshake sizes must be positive", line);
      return h;
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError(std::string("bad handshake: ") + e.what(), line);
    }
  }
};

/// A bidirectional line channel.
class LineIo {
 public:
  virtual ~LineIo() = default;
  /// False at end of stream.
  virtual bool read_line(std::string& line) = 0;
  virtual void write_line(const std::string& line) = 0;
};

class StreamLineIo : public LineIo {
 public:
  StreamLineIo(std::istream& in, std::ostream& out) : in_(in), out_(out) {}

  bool read_line(std::string& line) override {
    if (!std::getline(in_, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  void write_line(const std::string& line) override {
    out_ << line << '\n';
    out_.flush();
    if (!out_) throw TransportError("output stream failed");
  }

 private:
  std::istream& in_;
  std::ostream& out_;
};

/// Line channel over file descriptors. Owns and closes them.
class FdLineIo : public LineIo {
 public:
  FdLineIo(int read_fd, int write_fd) : read_fd_(read_fd), write_fd_(write_fd) {}
  FdLineIo(const FdLineIo&) = delete;
  FdLineIo& operator=(const FdLineIo&) = delete;
  ~FdLineIo() override {
    close_write();
    if (read_fd_ >= 0) ::close(read_fd_);
  }

  bool read_line(std::string& line) override {
    for (;;) {
      const auto nl = buffer_.find('\n', scanned_);
      if (nl != std::string::npos) {
        line.assign(buffer_, 0, nl);
        buffer_.erase(0, nl + 1);
        scanned_ = 0;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
      }
      scanned_ = buffer_.size();
      char chunk[65536];
      const ssize_t got = ::read(read_fd_, chunk, sizeof chunk);
      if (got < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("read failed: ") + std::strerror(errno));
      }
      if (got == 0) {
        if (buffer_.empty()) return false;
        line.swap(buffer_);
        buffer_.clear();
        scanned_ = 0;
        return true;
      }
      buffer_.append(chunk, static_cast<std::size_t>(got));
    }
  }

  void write_line(const std::string& line) override {
    std::string data = line;
    data.push_back('\n');
    std::size_t sent = 0;
    while (sent < data.size()) {
      const ssize_t n = send_or_write(write_fd_, data.data() + sent, data.size() - sent);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("write failed: ") + std::strerror(errno));
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  /// Signals end of input to the peer.
  void close_write() {
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    if (write_fd_ == read_fd_ && write_fd_ >= 0) ::shutdown(write_fd_, SHUT_WR);
    write_fd_ = -1;
  }

 private:
  static ssize_t send_or_write(int fd, const char* data, std::size_t size) {
    // MSG_NOSIGNAL keeps a closed socket from raising SIGPIPE; pipes fall back to write.
    const ssize_t n = ::send(fd, data, size, MSG_NOSIGNAL);
    if (n < 0 && errno == ENOTSOCK) return ::write(fd, data, size);
    return n;
  }

  int read_fd_;
  int write_fd_;
  std::string buffer_;
  std::size_t scanned_ = 0;
};

/// Client side of the protocol over any line channel.
class WireClient : public ModelClient {
 public:
  explicit WireClient(std::unique_ptr<LineIo> io) : io_(std::move(io)) {
    std::string line;
    if (!io_->read_line(line)) throw TransportError("model closed the stream before the handshake");
    hello_ = Handshake::from_line(line);
  }

  int protocol_version() const override { return hello_.protocol; }
  int vocab_size() const override { return hello_.vocab_size; }
  std::string vocab_hash() const override { return hello_.vocab_hash; }
  std::size_t batch_limit() const override { return hello_.max_batch; }

  std::vector<Logits> logits(const std::vector<Prefix>& prefixes) override {
    if (prefixes.empty()) return {};
    if (prefixes.size() > hello_.max_batch) throw std::invalid_argument("batch exceeds the model's max_batch");
    const std::int64_t first = next_id_;
    nlohmann::json request;
    if (prefixes.size() == 1) {
      request = {{"id", next_id_++}, {"tokens", prefixes.front()}};
    } else {
      auto items = nlohmann::json::array();
      for (const auto& p : prefixes) items.push_back({{"id", next_id_++}, {"tokens", p}});
      request = {{"batch", std::move(items)}};
    }
    io_->write_line(request.dump());

    std::vector<Logits> out(prefixes.size());
    for (std::size_t k = 0; k < prefixes.size(); ++k) {
      std::string line;
      if (!io_->read_line(line)) throw TransportError("model closed the stream mid-batch");
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j["id"].is_number_integer()) {
        throw ProtocolError("malformed response line", line);
      }
      const std::int64_t id = j["id"].get<std::int64_t>();
      if (id != first + static_cast<std::int64_t>(k)) throw ProtocolError("response id out of order", line);
      if (j.contains("error")) throw ProtocolError("model reported an error: " + j["error"].dump(), line);
      if (!j.contains("logits") || !j["logits"].is_array()) throw ProtocolError("response has no logits", line);
      try {
        out[k] = j["logits"].get<Logits>();
      } catch (const nlohmann::json::exception&) {
        throw ProtocolError("logits must be numbers", line);
      }
    }
    return out;
  }

 protected:
  std::unique_ptr<LineIo> io_;
  Handshake hello_;
  std::int64_t next_id_ = 0;
};

/// Runs `sh -c command` and talks to it over its stdin/stdout.
class SubprocessClient : public WireClient {
 public:
  explicit SubprocessClient(const std::string& command) : WireClient(spawn(command, pid_)) {}

  ~SubprocessClient() override {
    io_.reset();  // closes the child's stdin
    if (pid_ > 0) {
      int status = 0;
      while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
      }
    }
  }

 private:
  static std::unique_ptr<LineIo> spawn(const std::string& command, pid_t& pid) {
    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) throw TransportError("pipe failed");
    if (::pipe2(from_child, O_CLOEXEC) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw TransportError("pipe failed");
    }
    pid = ::fork();
    if (pid < 0) {
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
      throw TransportError("fork failed");
    }
    if (pid == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    // A child that dies early must surface as a write error, not kill us.
    ::signal(SIGPIPE, SIG_IGN);
    return std::make_unique<FdLineIo>(from_child[0], to_child[1]);
  }

  pid_t pid_ = -1;
};

struct HostPort {
  std::string host;
  std::string port;
};

/// "tcp://host:port" or "host:port"; nullopt for anything else.
inline std::optional<HostPort> parse_address(const std::string& spec) {
  static const std::regex re(R"(^(?:tcp://)?([A-Za-z0-9.\-]+|\[[0-9A-Fa-f:]+\]):([0-9]{1,5})$)");
  std::smatch m;
  if (!std::regex_match(spec, m, re)) return std::nullopt;
  std::string host = m[1];
  if (host.front() == '[') host = host.substr(1, host.size() - 2);
  return HostPort{host, m[2]};
}

class TcpClient : public WireClient {
 public:
  explicit TcpClient(const HostPort& address) : WireClient(dial(address)) {}

 private:
  static std::unique_ptr<LineIo> dial(const HostPort& a) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* found = nullptr;
    if (const int rc = ::getaddrinfo(a.host.c_str(), a.port.c_str(), &hints, &found); rc != 0) {
      throw TransportError("cannot resolve " + a.host + ": " + ::gai_strerror(rc));
    }
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(found, ::freeaddrinfo);
    for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
      const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        return std::make_unique<FdLineIo>(fd, fd);
      }
      ::close(fd);
    }
    throw TransportError("cannot connect to " + a.host + ":" + a.port);
  }
};

/// A TCP address when `spec` looks like one, otherwise a shell command.
inline std::unique_ptr<ModelClient> connect_model(const std::string& spec) {
  if (const auto addr = parse_address(spec)) return std::make_unique<TcpClient>(*addr);
  return std::make_unique<SubprocessClient>(spec);
}

/// Answers requests on `io` with `backend` until the peer closes the stream.
/// Bad requests get an error line carrying their id; the session continues.
inline void serve_protocol(LineIo& io, ModelClient& backend) {
  io.write_line(Handshake{kProtocolVersion, backend.vocab_hash(), backend.vocab_size(), backend.batch_limit()}.to_line());
  const auto error_line = [](const nlohmann::json& id, const std::string& what) {
    return nlohmann::json{{"id", id}, {"error", what}}.dump();
  };
  std::string line;
  while (io.read_line(line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      io.write_line(error_line(nullptr, "request is not a json object"));
      continue;
    }
    std::vector<nlohmann::json> items;
    if (j.contains("batch")) {
      if (!j["batch"].is_array()) {
        io.write_line(error_line(nullptr, "batch must be an array"));
        continue;
      }
      items.assign(j["batch"].begin(), j["batch"].end());
    } else {
      items.push_back(j);
    }

    std::vector<std::string> errors(items.size());
    std::vector<Prefix> prefixes;
    for (std::size_t k = 0; k < items.size(); ++k) {
      const auto& item = items[k];
      try {
        if (!item.is_object() || !item.contains("id") || !item["id"].is_number_integer()) {
          throw std::invalid_argument("request needs an integer id");
        }
        if (!item.contains("tokens") || !item["tokens"].is_array()) throw std::invalid_argument("request needs tokens");
        Prefix p;
        for (const auto& t : item["tokens"]) {
          if (!t.is_number_integer() || t.get<std::int64_t>() < 0 || t.get<std::int64_t>() >= backend.vocab_size()) {
            throw std::invalid_argument("token outside the vocabulary");
          }
          p.push_back(static_cast<Token>(t.get<int>()));
        }
        if (p.empty() || p.front() != codec::kBos) throw std::invalid_argument("prefix must begin with BOS");
        prefixes.push_back(std::move(p));
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
    std::vector<Logits> answers;
    std::string batch_error;
    try {
      answers = request_logits(backend, prefixes);
    } catch (const std::exception& e) {
      batch_error = e.what();
    }
    std::size_t next = 0;
    for (std::size_t k = 0; k < items.size(); ++k) {
      const nlohmann::json id = items[k].is_object() && items[k].contains("id") ? items[k]["id"] : nlohmann::json();
      if (!errors[k].empty()) {
        io.write_line(error_line(id, errors[k]));
      } else if (!batch_error.empty()) {
        io.write_line(error_line(id, batch_error));
        ++next;
      } else {
        io.write_line(nlohmann::json{{"id", id}, {"logits", answers[next++]}}.dump());
      }
    }
  }
}

/// Listening TCP socket that serves one connection at a time.
class TcpListener {
 public:
  explicit TcpListener(const std::string& host = "127.0.0.1", int port = 0) {
    fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd_ < 0) throw TransportError("socket failed");
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
      ::close(fd_);
      throw TransportError("listen host must be an IPv4 address: " + host);
    }
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 4) != 0) {
      const std::string why = std::strerror(errno);
      ::close(fd_);
      throw TransportError("cannot listen on " + host + ":" + std::to_string(port) + ": " + why);
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
  }
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;
  ~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
  }

  int port() const { return port_; }

  /// Accepts one connection and serves it to completion.
  void serve_one(ModelClient& backend) {
    int conn = -1;
    do {
      conn = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
    } while (conn < 0 && errno == EINTR);
    if (conn < 0) throw TransportError("accept failed");
    int one = 1;
    ::setsockopt(conn, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    FdLineIo io(conn, conn);
    try {
      serve_protocol(io, backend);
    } catch (const TransportError&) {
      // peer went away; keep listening
    }
  }

 private:
  int fd_ = -1;
  int port_ = 0;
};

}  // namespace forge::eval
