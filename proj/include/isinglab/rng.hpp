#pragma once

#include <cstdint>
#include <random>

namespace isinglab {

using Engine = std::mt19937_64;

// splitmix64 finalizer; used to derive independent replica seeds
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    return splitmix64(splitmix64(master) + splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline double uniform01(Engine& g)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(g);
}

inline double exponential(Engine& g, double rate)
{
    return std::exponential_distribution<double>(rate)(g);
}

inline std::size_t uniform_index(Engine& g, std::size_t n)
{
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(g);
}

// FNV-1a, 64 bit
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL)
{
    auto p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace isinglab
