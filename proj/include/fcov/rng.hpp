#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fcov {

// Counter-based seed splitting (splitmix64 over master + index * golden
// gamma). Replication i of a Monte Carlo loop always derives its stream
// from (master, i), so results do not depend on scheduling order.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t index)
{
    std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b)
{
    return split_seed(split_seed(master, a), b);
}

inline std::mt19937_64 make_engine(std::uint64_t seed)
{
    return std::mt19937_64(seed);
}

// A fixed vector of +/-1 signs together with the seed that produced it.
struct RademacherDraw {
    std::vector<double> signs;
    std::uint64_t seed = 0;

    static RademacherDraw generate(int n, std::uint64_t seed);
};

inline RademacherDraw RademacherDraw::generate(int n, std::uint64_t seed)
{
    RademacherDraw d;
    d.seed = seed;
    d.signs.resize(static_cast<std::size_t>(n));
    auto eng = make_engine(seed);
    for (int i = 0; i < n; ++i)
        d.signs[static_cast<std::size_t>(i)] = ((eng() >> 32) & 1u) ? 1.0 : -1.0;
    return d;
}

} // namespace fcov
