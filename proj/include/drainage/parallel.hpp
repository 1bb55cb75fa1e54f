#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace drainage {

// splitmix64 finaliser; also the building block for seed derivation.
std::uint64_t mix64(std::uint64_t z);

// Seed for replicate `index` of stream `stream` under `master`. Replicates never
// share generator state, so results do not depend on how work is scheduled.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t stream = 0);

// Worker count: explicit value if > 0, else DRAINAGE_WORKERS, else hardware threads.
unsigned resolve_workers(unsigned requested);

// Runs body(i) for i in [0, count). Each index is handled exactly once; callers
// write into slot i of a preallocated vector and reduce afterwards in index order.
// The first exception thrown by any body is rethrown on the calling thread.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(mix64(seed ^ 0x6a09e667f3bcc909ULL)); }

} // namespace drainage
