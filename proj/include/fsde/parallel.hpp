#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace fsde {

/// SplitMix64 finaliser. Used to derive independent substream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of substream `stream` under `master`. Pure, so results do not depend
/// on the order in which substreams are consumed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return mix64(mix64(master) ^ mix64(stream + 0x632BE59BD9B4E019ULL));
}

/// Number of worker threads used by parallel_for. Reads FSDE_THREADS, else
/// hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, count). Each index writes only its own output
/// slot, so the result is independent of scheduling. Nested calls from a
/// worker run inline.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace fsde
