#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace marcast {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Independent stream seed for a task identified by (master, indices...).
/// Results keyed this way do not depend on how tasks are scheduled.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master,
                                                  std::initializer_list<std::uint64_t> indices) noexcept {
    std::uint64_t h = mix64(master);
    for (std::uint64_t i : indices) h = mix64(h ^ mix64(i + 0x632BE59BD9B4E019ull));
    return h;
}

}  // namespace marcast
