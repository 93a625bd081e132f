#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstdint>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace flowgate {

struct NetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {
inline std::string errno_text(const std::string& what) {
    return what + ": " + std::strerror(errno);
}
}  // namespace detail

// Move-only RAII wrapper over one connected TCP socket.
class TcpSocket {
public:
    TcpSocket() = default;
    explicit TcpSocket(int fd) : fd_(fd) {}
    TcpSocket(TcpSocket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
    TcpSocket& operator=(TcpSocket&& other) noexcept {
        if (this != &other) {
            close();
            fd_ = std::exchange(other.fd_, -1);
        }
        return *this;
    }
    TcpSocket(const TcpSocket&) = delete;
    TcpSocket& operator=(const TcpSocket&) = delete;
    ~TcpSocket() { close(); }

    static std::optional<TcpSocket> connect(const std::string& host, uint16_t port) {
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) return std::nullopt;
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
            ::close(fd);
            return std::nullopt;
        }
        if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
            ::close(fd);
            return std::nullopt;
        }
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        return TcpSocket(fd);
    }

    bool valid() const { return fd_ >= 0; }

    bool send_all(const uint8_t* data, size_t len) {
        size_t sent = 0;
        while (sent < len) {
            ssize_t n = ::send(fd_, data + sent, len - sent, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) continue;
                return false;
            }
            sent += static_cast<size_t>(n);
        }
        return true;
    }
    bool send_all(const std::vector<uint8_t>& data) { return send_all(data.data(), data.size()); }

    // Returns bytes read; 0 means orderly EOF, -1 means error.
    ssize_t recv_some(uint8_t* buf, size_t cap) {
        while (true) {
            ssize_t n = ::recv(fd_, buf, cap, 0);
            if (n < 0 && errno == EINTR) continue;
            return n;
        }
    }

    void shutdown() {
        if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
    }

    void close() {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

    int fd() const { return fd_; }

private:
    int fd_ = -1;
};

// Listening socket; port 0 binds an ephemeral port (see local_port()).
// shutdown() from another thread unblocks a pending accept().
class TcpListener {
public:
    TcpListener() = default;
    TcpListener(TcpListener&& other) noexcept
        : fd_(std::exchange(other.fd_, -1)), port_(other.port_) {}
    TcpListener& operator=(TcpListener&& other) noexcept {
        if (this != &other) {
            close();
            fd_ = std::exchange(other.fd_, -1);
            port_ = other.port_;
        }
        return *this;
    }
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;
    ~TcpListener() { close(); }

    static TcpListener bind(const std::string& host, uint16_t port) {
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw NetError(detail::errno_text("socket"));
        int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
            ::close(fd);
            throw NetError("bad listen address: " + host);
        }
        if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
            std::string why = detail::errno_text("bind " + host + ":" + std::to_string(port));
            ::close(fd);
            throw NetError(why);
        }
        if (::listen(fd, 8) != 0) {
            std::string why = detail::errno_text("listen");
            ::close(fd);
            throw NetError(why);
        }
        sockaddr_in bound{};
        socklen_t len = sizeof(bound);
        if (::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len) != 0) {
            std::string why = detail::errno_text("getsockname");
            ::close(fd);
            throw NetError(why);
        }
        TcpListener listener;
        listener.fd_ = fd;
        listener.port_ = ntohs(bound.sin_port);
        return listener;
    }

    std::optional<TcpSocket> accept() {
        while (true) {
            int fd = ::accept(fd_, nullptr, nullptr);
            if (fd >= 0) {
                int one = 1;
                ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
                return TcpSocket(fd);
            }
            if (errno == EINTR) continue;
            return std::nullopt;  // listener shut down or closed
        }
    }

    uint16_t local_port() const { return port_; }
    bool valid() const { return fd_ >= 0; }

    void shutdown() {
        if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
    }

    void close() {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

private:
    int fd_ = -1;
    uint16_t port_ = 0;
};

}  // namespace flowgate
