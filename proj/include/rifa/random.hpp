/*
 * SPDX-License-Identifier: GPL-2.0-only
 */
#pragma once

#include <cstdint>
#include <random>

namespace rifa
{

std::uint64_t SplitMix64(std::uint64_t x);

/**
 * Seeded random stream. Distributions are derived from raw 64-bit draws so
 * that results do not depend on the standard library's distribution code.
 */
class RandomStream
{
  public:
    explicit RandomStream(std::uint64_t seed = 0)
        : m_engine(seed)
    {
    }

    /// Independent substream for (seed, streamId).
    static RandomStream Derive(std::uint64_t seed, std::uint64_t streamId);

    std::uint64_t NextBits()
    {
        return m_engine();
    }

    /// Uniform on [0, 1).
    double Uniform01()
    {
        return static_cast<double>(m_engine() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0, 1).
    double UniformOpen01()
    {
        return (static_cast<double>(m_engine() >> 11) + 0.5) * 0x1.0p-53;
    }

    double Uniform(double lo, double hi)
    {
        return lo + (hi - lo) * Uniform01();
    }

    /// Unbiased integer on [0, n). n must be positive.
    std::uint64_t UniformIndex(std::uint64_t n);

  private:
    std::mt19937_64 m_engine;
};

} // namespace rifa
