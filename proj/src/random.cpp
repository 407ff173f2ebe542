/*
 * SPDX-License-Identifier: GPL-2.0-only
 */
#include "rifa/random.hpp"

#include <limits>

namespace rifa
{

std::uint64_t
SplitMix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomStream
RandomStream::Derive(std::uint64_t seed, std::uint64_t streamId)
{
    return RandomStream(SplitMix64(SplitMix64(seed) ^ SplitMix64(streamId + 0x632be59bd9b4e019ULL)));
}

std::uint64_t
RandomStream::UniformIndex(std::uint64_t n)
{
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - (max % n);
    std::uint64_t r = m_engine();
    while (r >= limit)
    {
        r = m_engine();
    }
    return r % n;
}

} // namespace rifa
