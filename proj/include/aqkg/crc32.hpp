#pragma once

#include <cstdint>
#include <span>

namespace aqkg {

/// CRC-32 (IEEE 802.3): reflected polynomial 0xEDB88320, init and final XOR
/// all-ones. crc32_bits consumes an arbitrary bit sequence one bit at a
/// time; feeding each byte LSB-first reproduces the standard byte-oriented
/// checksum, so the two functions agree on whole bytes.
std::uint32_t crc32_bits(std::span<const std::uint8_t> bits);
std::uint32_t crc32_bytes(std::span<const std::uint8_t> bytes);

}  // namespace aqkg
