#include "aqkg/complexity.hpp"

#include <string>

namespace aqkg {

double normalized_complexity(std::span<const int> block, std::size_t expected_len) {
  if (block.size() != expected_len) {
    throw ValidationError("normalized_complexity: block has " +
                          std::to_string(block.size()) + " samples, expected " +
                          std::to_string(expected_len));
  }
  return static_cast<double>(lz76(block)) / static_cast<double>(expected_len);
}

}  // namespace aqkg
