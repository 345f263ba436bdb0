#pragma once

// Minimal RFC 6455 pieces: the opening handshake and frame codec. Enough
// for text messages, ping/pong and close; no extensions.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>
#include <openssl/sha.h>

namespace sewmimic::sandbox::ws {

enum class Opcode : std::uint8_t { continuation = 0x0, text = 0x1, binary = 0x2, close = 0x8, ping = 0x9, pong = 0xA };

struct HttpRequest {
    std::string method;
    std::string target;
    std::vector<std::pair<std::string, std::string>> headers;  // names lower-cased

    std::optional<std::string> header(std::string_view name) const {
        for (const auto& [k, v] : headers) {
            if (k == name) return v;
        }
        return std::nullopt;
    }
};

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

/// Parses a request head (everything up to and including the blank line).
inline std::optional<HttpRequest> parse_request(std::string_view head) {
    HttpRequest r;
    std::size_t pos = head.find("\r\n");
    if (pos == std::string_view::npos) return std::nullopt;
    const std::string_view line = head.substr(0, pos);
    const auto sp1 = line.find(' ');
    const auto sp2 = line.rfind(' ');
    if (sp1 == std::string_view::npos || sp2 == sp1) return std::nullopt;
    r.method = std::string(line.substr(0, sp1));
    r.target = std::string(line.substr(sp1 + 1, sp2 - sp1 - 1));
    std::size_t start = pos + 2;
    while (start < head.size()) {
        const auto end = head.find("\r\n", start);
        if (end == std::string_view::npos || end == start) break;
        const std::string_view h = head.substr(start, end - start);
        const auto colon = h.find(':');
        if (colon == std::string_view::npos) return std::nullopt;
        r.headers.emplace_back(lower(std::string(h.substr(0, colon))), trim(h.substr(colon + 1)));
        start = end + 2;
    }
    return r;
}

inline bool header_has_token(const std::optional<std::string>& value, std::string_view token) {
    if (!value) return false;
    const std::string v = lower(*value);
    std::size_t start = 0;
    while (start <= v.size()) {
        auto end = v.find(',', start);
        if (end == std::string::npos) end = v.size();
        if (trim(std::string_view(v).substr(start, end - start)) == token) return true;
        start = end + 1;
    }
    return false;
}

inline bool is_upgrade(const HttpRequest& r) {
    return r.method == "GET" && header_has_token(r.header("upgrade"), "websocket") &&
           header_has_token(r.header("connection"), "upgrade") && r.header("sec-websocket-key").has_value();
}

/// Sec-WebSocket-Accept for a client key.
inline std::string accept_key(const std::string& key) {
    const std::string src = key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
    unsigned char digest[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char*>(src.data()), src.size(), digest);
    unsigned char out[4 * ((SHA_DIGEST_LENGTH + 2) / 3) + 1];
    const int n = EVP_EncodeBlock(out, digest, SHA_DIGEST_LENGTH);
    return std::string(reinterpret_cast<char*>(out), static_cast<std::size_t>(n));
}

inline std::string handshake_response(const HttpRequest& r) {
    return "HTTP/1.1 101 Switching Protocols\r\n"
           "Upgrade: websocket\r\n"
           "Connection: Upgrade\r\n"
           "Sec-WebSocket-Accept: " +
           accept_key(*r.header("sec-websocket-key")) + "\r\n\r\n";
}

struct Frame {
    bool fin = true;
    Opcode opcode = Opcode::text;
    std::string payload;
};

/// Server-to-client frames are never masked.
inline std::string encode(const Frame& f) {
    std::string out;
    out.push_back(static_cast<char>((f.fin ? 0x80 : 0x00) | static_cast<std::uint8_t>(f.opcode)));
    const std::uint64_t n = f.payload.size();
    if (n < 126) {
        out.push_back(static_cast<char>(n));
    } else if (n <= 0xFFFF) {
        out.push_back(static_cast<char>(126));
        out.push_back(static_cast<char>((n >> 8) & 0xFF));
        out.push_back(static_cast<char>(n & 0xFF));
    } else {
        out.push_back(static_cast<char>(127));
        for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<char>((n >> s) & 0xFF));
    }
    out += f.payload;
    return out;
}

/// Client-side encoding (masked), used by tests and the smoke client.
inline std::string encode_masked(const Frame& f, std::uint32_t mask) {
    std::string out;
    out.push_back(static_cast<char>((f.fin ? 0x80 : 0x00) | static_cast<std::uint8_t>(f.opcode)));
    const std::uint64_t n = f.payload.size();
    if (n < 126) {
        out.push_back(static_cast<char>(0x80 | n));
    } else if (n <= 0xFFFF) {
        out.push_back(static_cast<char>(0x80 | 126));
        out.push_back(static_cast<char>((n >> 8) & 0xFF));
        out.push_back(static_cast<char>(n & 0xFF));
    } else {
        out.push_back(static_cast<char>(0x80 | 127));
        for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<char>((n >> s) & 0xFF));
    }
    const unsigned char m[4] = {static_cast<unsigned char>(mask >> 24), static_cast<unsigned char>(mask >> 16),
                                static_cast<unsigned char>(mask >> 8), static_cast<unsigned char>(mask)};
    out.append(reinterpret_cast<const char*>(m), 4);
    for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<char>(f.payload[i] ^ static_cast<char>(m[i % 4])));
    return out;
}

enum class DecodeStatus { ok, incomplete, error };

struct Decoded {
    DecodeStatus status = DecodeStatus::incomplete;
    Frame frame;
    std::size_t consumed = 0;
    bool masked = false;
};

/// Decodes one frame from the front of `buf`.
inline Decoded decode(std::string_view buf, std::uint64_t max_payload = std::uint64_t{1} << 24) {
    Decoded d;
    if (buf.size() < 2) return d;
    const auto b0 = static_cast<std::uint8_t>(buf[0]);
    const auto b1 = static_cast<std::uint8_t>(buf[1]);
    if (b0 & 0x70) {
        d.status = DecodeStatus::error;  // reserved bits without an extension
        return d;
    }
    d.frame.fin = (b0 & 0x80) != 0;
    d.frame.opcode = static_cast<Opcode>(b0 & 0x0F);
    d.masked = (b1 & 0x80) != 0;
    std::uint64_t n = b1 & 0x7F;
    std::size_t pos = 2;
    if (n == 126) {
        if (buf.size() < 4) return d;
        n = (static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf[2])) << 8) | static_cast<std::uint8_t>(buf[3]);
        pos = 4;
    } else if (n == 127) {
        if (buf.size() < 10) return d;
        n = 0;
        for (std::size_t i = 2; i < 10; ++i) n = (n << 8) | static_cast<std::uint8_t>(buf[i]);
        pos = 10;
    }
    if (n > max_payload) {
        d.status = DecodeStatus::error;
        return d;
    }
    unsigned char mask[4] = {0, 0, 0, 0};
    if (d.masked) {
        if (buf.size() < pos + 4) return d;
        for (std::size_t i = 0; i < 4; ++i) mask[i] = static_cast<unsigned char>(buf[pos + i]);
        pos += 4;
    }
    if (buf.size() < pos + n) return d;
    d.frame.payload.resize(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < n; ++i) {
        d.frame.payload[i] = static_cast<char>(static_cast<unsigned char>(buf[pos + i]) ^ mask[i % 4]);
    }
    d.consumed = pos + static_cast<std::size_t>(n);
    d.status = DecodeStatus::ok;
    return d;
}

/// Reassembles fragmented messages. Control frames pass straight through.
class MessageAssembler {
public:
    /// Returns a complete frame (data message or control frame) when one is ready.
    std::optional<Frame> push(Frame f, bool* protocol_error) {
        *protocol_error = false;
        const auto op = static_cast<std::uint8_t>(f.opcode);
        if (op & 0x8) {
            if (!f.fin || f.payload.size() > 125) *protocol_error = true;
            return f;
        }
        if (f.opcode == Opcode::continuation) {
            if (!in_progress_) {
                *protocol_error = true;
                return std::nullopt;
            }
            partial_.payload += f.payload;
            if (!f.fin) return std::nullopt;
        } else {
            if (in_progress_) {
                *protocol_error = true;
                return std::nullopt;
            }
            if (f.fin) return f;
            partial_ = std::move(f);
            in_progress_ = true;
            return std::nullopt;
        }
        in_progress_ = false;
        partial_.fin = true;
        return std::move(partial_);
    }

private:
    Frame partial_;
    bool in_progress_ = false;
};

}  // namespace sewmimic::sandbox::ws
