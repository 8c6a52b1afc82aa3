#include "aqkg/crc32.hpp"

namespace aqkg {
namespace {

constexpr std::uint32_t kPoly = 0xEDB88320u;

inline std::uint32_t step(std::uint32_t crc, std::uint32_t bit) {
  crc ^= bit;
  return (crc >> 1) ^ (kPoly & (0u - (crc & 1u)));
}

}  // namespace

std::uint32_t crc32_bits(std::span<const std::uint8_t> bits) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::uint8_t b : bits) crc = step(crc, b & 1u);
  return crc ^ 0xFFFFFFFFu;
}

std::uint32_t crc32_bytes(std::span<const std::uint8_t> bytes) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::uint8_t byte : bytes)
    for (int i = 0; i < 8; ++i) crc = step(crc, (byte >> i) & 1u);
  return crc ^ 0xFFFFFFFFu;
}

}  // namespace aqkg
