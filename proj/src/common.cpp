#include "metaphor/common.hpp"

#include <algorithm>
#include <cstdio>
#include <vector>

namespace metaphor {

std::string ContentHash::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(state_));
  return std::string(buf);
}

std::string hash_hex(std::string_view text) {
  ContentHash h;
  h.update(text);
  return h.hex();
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  std::vector<std::size_t> prev(nb + 1);
  std::vector<std::size_t> cur(nb + 1);
  for (std::size_t j = 0; j <= nb; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= na; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= nb; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[nb];
}

}  // namespace metaphor
