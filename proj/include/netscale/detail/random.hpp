#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace netscale {

using Rng = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a; stable across platforms, unlike std::hash.
constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

/// Mix a base seed with any number of integer or string components into a new seed.
/// Used so that parallel tasks (network, model, draw) get independent streams that
/// do not depend on scheduling order.
constexpr std::uint64_t derive_seed(std::uint64_t seed) noexcept { return detail::splitmix64(seed); }

template <typename... Rest>
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view head, Rest... rest) noexcept;
template <typename... Rest>
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t head, Rest... rest) noexcept;

template <typename... Rest>
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view head, Rest... rest) noexcept {
    return derive_seed(detail::splitmix64(seed ^ detail::fnv1a(head)), rest...);
}

template <typename... Rest>
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t head, Rest... rest) noexcept {
    return derive_seed(detail::splitmix64(seed ^ detail::splitmix64(head + 0x632be59bd9b4e019ULL)), rest...);
}

}  // namespace netscale
