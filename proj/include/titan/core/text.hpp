#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace titan::core {

// Edit distance (insert/delete/substitute, unit costs).
int levenshtein(std::string_view a, std::string_view b);

// Closest candidate to `word` by edit distance, or empty when nothing is
// within max_distance.
std::string closest_match(std::string_view word,
                          const std::vector<std::string>& candidates,
                          int max_distance = 5);

}  // namespace titan::core
