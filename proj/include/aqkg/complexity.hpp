#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "aqkg/errors.hpp"

namespace aqkg {

/// Number of components in the exhaustive Lempel-Ziv (LZ76) decomposition of
/// a symbol sequence. Each component is the shortest substring starting at
/// its position that does not occur in the sequence prefix ending one symbol
/// earlier; the final component may run off the end without becoming novel.
///
/// Implemented as the classic two-pointer scan over candidate copy origins;
/// the test suite checks it against a literal substring-search oracle.
template <std::equality_comparable T>
std::size_t lz76(std::span<const T> seq) {
  const std::size_t n = seq.size();
  if (n == 0) throw ValidationError("lz76: empty sequence");

  std::size_t components = 1;  // first component is always seq[0]
  std::size_t prefix = 1;      // symbols already decomposed
  while (prefix < n) {
    std::size_t longest_match = 0;
    bool suffix_reproducible = false;
    for (std::size_t origin = 0; origin < prefix; ++origin) {
      std::size_t k = 0;
      while (prefix + k < n && seq[origin + k] == seq[prefix + k]) ++k;
      if (prefix + k == n) {  // copies cover the rest of the sequence
        suffix_reproducible = true;
        break;
      }
      longest_match = std::max(longest_match, k);
    }
    ++components;
    if (suffix_reproducible) break;
    prefix += longest_match + 1;
  }
  return components;
}

inline std::size_t lz76(std::string_view seq) {
  return lz76(std::span<const char>(seq.data(), seq.size()));
}

inline std::size_t lz76(const std::vector<int>& seq) {
  return lz76(std::span<const int>(seq));
}

/// LZ76 component count divided by the diversity-block length; the
/// randomness estimate driving parameter selection. Throws unless the block
/// has exactly the expected length.
double normalized_complexity(std::span<const int> block, std::size_t expected_len);

}  // namespace aqkg
