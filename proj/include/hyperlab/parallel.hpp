#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace hyperlab {

// Caps worker threads for every parallel loop; results never depend on it.
void set_thread_count(int threads);
int thread_count();

// Runs body(i) for i in [0, count). Each index writes only its own output slot.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

// Independent substream for (seed, stream) pairs.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);

}  // namespace hyperlab
