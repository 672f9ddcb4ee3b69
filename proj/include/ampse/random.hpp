#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace ampse {

using Engine = std::mt19937_64;

/// Independent substream keyed by (seed, k0, k1, ...).
///
/// Every stream is seeded from the full key through std::seed_seq, so values
/// drawn from one stream never depend on how many draws other streams made.
/// This is what lets blocks, batches and trials be generated in any order.
inline Engine make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys = {}) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * (keys.size() + 1) + 1);
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  words.push_back(static_cast<std::uint32_t>(keys.size()));
  for (auto k : keys) push(k);
  std::seed_seq seq(words.begin(), words.end());
  return Engine(seq);
}

}  // namespace ampse
