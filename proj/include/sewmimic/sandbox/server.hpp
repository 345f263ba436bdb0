#pragma once

// Loopback WebSocket server (one thread and one Session per connection) and
// a small blocking client. POSIX sockets only.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <list>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include "sewmimic/sandbox/session.hpp"
#include "sewmimic/sandbox/websocket.hpp"

namespace sewmimic::sandbox {

inline constexpr std::uint16_t kDefaultPort = 8765;

/// Port from an explicit flag, else SEW_SANDBOX_PORT, else the default.
inline std::uint16_t resolve_port(std::optional<int> flag, const char* env = std::getenv("SEW_SANDBOX_PORT")) {
    auto check = [](long v, const std::string& from) {
        if (v < 0 || v > 65535) throw ParseError(from + ": port out of range");
        return static_cast<std::uint16_t>(v);
    };
    if (flag) return check(*flag, "--port");
    if (env && *env) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0') throw ParseError("SEW_SANDBOX_PORT: not an integer");
        return check(v, "SEW_SANDBOX_PORT");
    }
    return kDefaultPort;
}

namespace detail {

inline bool send_all(int fd, std::string_view data) {
    while (!data.empty()) {
        const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

/// Reads more bytes into `buf`; false on EOF, error or stop request.
inline bool read_more(int fd, std::string& buf, const std::atomic<bool>* stop = nullptr) {
    char chunk[8192];
    for (;;) {
        if (stop && stop->load()) return false;
        pollfd p{fd, POLLIN, 0};
        const int r = ::poll(&p, 1, 100);
        if (r < 0 && errno == EINTR) continue;
        if (r < 0) return false;
        if (r == 0) continue;
        const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        buf.append(chunk, static_cast<std::size_t>(n));
        return true;
    }
}

inline std::string content_type(const std::filesystem::path& p) {
    const std::string ext = p.extension().string();
    if (ext == ".html") return "text/html; charset=utf-8";
    if (ext == ".js" || ext == ".mjs") return "text/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".json") return "application/json";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".png") return "image/png";
    return "application/octet-stream";
}

inline std::string http_response(int code, const std::string& reason, const std::string& type, const std::string& body) {
    std::ostringstream o;
    o << "HTTP/1.1 " << code << ' ' << reason << "\r\nContent-Type: " << type << "\r\nContent-Length: " << body.size()
      << "\r\nConnection: close\r\n\r\n"
      << body;
    return o.str();
}

/// Static file under `root`, or nullopt when missing or outside it.
inline std::optional<std::filesystem::path> resolve_asset(const std::filesystem::path& root, std::string target) {
    namespace fs = std::filesystem;
    if (auto q = target.find('?'); q != std::string::npos) target.resize(q);
    if (target.empty() || target == "/") target = "/index.html";
    if (target.find("..") != std::string::npos) return std::nullopt;
    std::error_code ec;
    const fs::path base = fs::weakly_canonical(root, ec);
    const fs::path p = fs::weakly_canonical(base / fs::path(target).relative_path(), ec);
    if (ec) return std::nullopt;
    const auto rel = p.lexically_relative(base);
    if (rel.empty() || *rel.begin() == "..") return std::nullopt;
    if (!fs::is_regular_file(p, ec)) return std::nullopt;
    return p;
}

}  // namespace detail

struct ServerOptions {
    std::uint16_t port = kDefaultPort;  // 0 picks a free port
    std::optional<std::filesystem::path> assets;  // serve static UI files (dev mode)
};

class Server {
public:
    using SessionFactory = std::function<Session()>;

    Server(SessionFactory factory, ServerOptions opt) : factory_(std::move(factory)), opt_(std::move(opt)) {}
    ~Server() { stop(); }
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds 127.0.0.1 and returns the port in use.
    std::uint16_t listen() {
        listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (listen_fd_ < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
        const int one = 1;
        ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = htons(opt_.port);
        if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
            const std::string msg = std::strerror(errno);
            ::close(listen_fd_);
            listen_fd_ = -1;
            throw std::runtime_error("bind to port " + std::to_string(opt_.port) + ": " + msg);
        }
        ::listen(listen_fd_, 16);
        socklen_t len = sizeof addr;
        ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
        port_ = ntohs(addr.sin_port);
        return port_;
    }

    /// Accept loop; returns after stop().
    void run() {
        while (!stop_.load()) {
            pollfd p{listen_fd_, POLLIN, 0};
            const int r = ::poll(&p, 1, 100);
            if (r <= 0) continue;
            const int fd = ::accept(listen_fd_, nullptr, nullptr);
            if (fd < 0) continue;
            const int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            std::lock_guard lock(mutex_);
            workers_.emplace_back([this, fd] { serve(fd); });
        }
    }

    void start() { accept_thread_ = std::thread([this] { run(); }); }

    void stop() {
        stop_.store(true);
        if (accept_thread_.joinable()) accept_thread_.join();
        std::list<std::thread> workers;
        {
            std::lock_guard lock(mutex_);
            workers.swap(workers_);
        }
        for (auto& t : workers) {
            if (t.joinable()) t.join();
        }
        if (listen_fd_ >= 0) {
            ::close(listen_fd_);
            listen_fd_ = -1;
        }
    }

    std::uint16_t port() const { return port_; }

private:
    void serve(int fd) {
        std::string buf;
        std::size_t head_end = std::string::npos;
        while ((head_end = buf.find("\r\n\r\n")) == std::string::npos) {
            if (buf.size() > 65536 || !detail::read_more(fd, buf, &stop_)) {
                ::close(fd);
                return;
            }
        }
        const auto req = ws::parse_request(std::string_view(buf).substr(0, head_end + 4));
        buf.erase(0, head_end + 4);
        if (!req) {
            detail::send_all(fd, detail::http_response(400, "Bad Request", "text/plain", "bad request\n"));
        } else if (ws::is_upgrade(*req)) {
            if (detail::send_all(fd, ws::handshake_response(*req))) websocket(fd, std::move(buf));
        } else if (req->method == "GET" && opt_.assets) {
            if (auto path = detail::resolve_asset(*opt_.assets, req->target)) {
                std::ifstream in(*path, std::ios::binary);
                std::ostringstream body;
                body << in.rdbuf();
                detail::send_all(fd, detail::http_response(200, "OK", detail::content_type(*path), body.str()));
            } else {
                detail::send_all(fd, detail::http_response(404, "Not Found", "text/plain", "not found\n"));
            }
        } else {
            detail::send_all(fd, detail::http_response(404, "Not Found", "text/plain", "websocket endpoint only\n"));
        }
        ::close(fd);
    }

    void websocket(int fd, std::string buf) {
        Session session = factory_();
        ws::MessageAssembler assembler;
        auto send_text = [&](const json& j) { return detail::send_all(fd, ws::encode({true, ws::Opcode::text, j.dump()})); };
        if (!send_text(session.hello())) return;
        for (;;) {
            const ws::Decoded d = ws::decode(buf);
            if (d.status == ws::DecodeStatus::incomplete) {
                if (!detail::read_more(fd, buf, &stop_)) return;
                continue;
            }
            bool proto_error = d.status == ws::DecodeStatus::error || !d.masked;
            std::optional<ws::Frame> msg;
            if (!proto_error) {
                buf.erase(0, d.consumed);
                msg = assembler.push(d.frame, &proto_error);
            }
            if (proto_error) {
                detail::send_all(fd, ws::encode({true, ws::Opcode::close, std::string("\x03\xea", 2)}));
                return;
            }
            if (!msg) continue;
            switch (msg->opcode) {
                case ws::Opcode::text:
                    if (!send_text(session.handle_text(msg->payload))) return;
                    break;
                case ws::Opcode::binary:
                    if (!send_text(json{{"type", "error"},
                                        {"protocol_version", kProtocolVersion},
                                        {"seq", nullptr},
                                        {"code", "bad_message"},
                                        {"message", "binary frames are not supported"}}))
                        return;
                    break;
                case ws::Opcode::ping:
                    if (!detail::send_all(fd, ws::encode({true, ws::Opcode::pong, msg->payload}))) return;
                    break;
                case ws::Opcode::close:
                    detail::send_all(fd, ws::encode({true, ws::Opcode::close, msg->payload.substr(0, 2)}));
                    return;
                default:
                    break;
            }
        }
    }

    SessionFactory factory_;
    ServerOptions opt_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stop_{false};
    std::thread accept_thread_;
    std::mutex mutex_;
    std::list<std::thread> workers_;
};

/// Blocking loopback client for tests and smoke checks.
class Client {
public:
    explicit Client(std::uint16_t port, const std::string& target = "/") {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = htons(port);
        if (fd_ < 0 || ::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
            throw std::runtime_error("connect: " + std::string(std::strerror(errno)));
        }
        const int one = 1;
        ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        const std::string key = "dGhlIHNhbXBsZSBub25jZQ==";
        detail::send_all(fd_, "GET " + target + " HTTP/1.1\r\nHost: 127.0.0.1\r\nUpgrade: websocket\r\n"
                                "Connection: Upgrade\r\nSec-WebSocket-Key: " + key +
                                "\r\nSec-WebSocket-Version: 13\r\n\r\n");
        std::size_t end;
        while ((end = buf_.find("\r\n\r\n")) == std::string::npos) {
            if (!detail::read_more(fd_, buf_)) throw std::runtime_error("handshake: connection closed");
        }
        const std::string head = buf_.substr(0, end);
        buf_.erase(0, end + 4);
        if (head.rfind("HTTP/1.1 101", 0) != 0 || head.find(ws::accept_key(key)) == std::string::npos) {
            throw std::runtime_error("handshake rejected: " + head);
        }
    }
    ~Client() {
        if (fd_ >= 0) ::close(fd_);
    }
    Client(const Client&) = delete;
    Client& operator=(const Client&) = delete;

    void send_raw(const ws::Frame& f) { detail::send_all(fd_, ws::encode_masked(f, static_cast<std::uint32_t>(rng_()))); }
    void send(const json& j) { send_raw({true, ws::Opcode::text, j.dump()}); }

    /// Next complete frame from the server.
    ws::Frame receive_frame() {
        for (;;) {
            const ws::Decoded d = ws::decode(buf_);
            if (d.status == ws::DecodeStatus::ok) {
                buf_.erase(0, d.consumed);
                return d.frame;
            }
            if (d.status == ws::DecodeStatus::error) throw std::runtime_error("bad frame from server");
            if (!detail::read_more(fd_, buf_)) throw std::runtime_error("connection closed");
        }
    }

    json receive() {
        for (;;) {
            ws::Frame f = receive_frame();
            if (f.opcode == ws::Opcode::text) return json::parse(f.payload);
            if (f.opcode == ws::Opcode::close) throw std::runtime_error("server closed the connection");
        }
    }

    json request(const json& j) {
        send(j);
        return receive();
    }

private:
    int fd_ = -1;
    std::string buf_;
    std::mt19937 rng_{12345};
};

}  // namespace sewmimic::sandbox
