#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace aqkg {

using Digest256 = std::array<std::uint8_t, 32>;

/// SHA-256 over a byte buffer (OpenSSL-backed).
Digest256 sha256(std::span<const std::uint8_t> data);

std::string to_hex(std::span<const std::uint8_t> data);

}  // namespace aqkg
