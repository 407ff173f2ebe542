/*
 * SPDX-License-Identifier: GPL-2.0-only
 */

/*
 * Pheromone trails as a Polya urn: proportional path selection, fixed-quantum
 * deposits, and the closed forms describing where the urn ends up.
 */
#pragma once

#include "rifa/random.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace rifa
{

using PathId = std::uint64_t;

/**
 * Per-path pheromone intensities with a constant deposit quantum. Intensities
 * are kept strictly positive. An optional decay factor in (0, 1] scales every
 * intensity before each deposit; 1.0 leaves the urn dynamics untouched.
 */
class PheromoneTable
{
  public:
    explicit PheromoneTable(double depositQuantum, double decay = 1.0);

    /// Paths numbered 0..n-1 with the given initial intensities.
    PheromoneTable(std::span<const double> intensities, double depositQuantum);

    void AddPath(PathId id, double intensity);
    bool Contains(PathId id) const;
    double Intensity(PathId id) const;
    double Total() const;
    double Share(PathId id) const;
    double DepositQuantum() const
    {
        return m_quantum;
    }
    double Decay() const
    {
        return m_decay;
    }
    std::size_t Size() const
    {
        return m_intensities.size();
    }
    bool Empty() const
    {
        return m_intensities.empty();
    }
    const std::map<PathId, double>& Intensities() const
    {
        return m_intensities;
    }

    /// In-place deposit of one quantum on `id`. Throws InvalidArgument for unknown paths.
    void Deposit(PathId id);

    bool operator==(const PheromoneTable&) const = default;

  private:
    std::map<PathId, double> m_intensities;
    double m_quantum;
    double m_decay;
};

/// Draws a path with probability proportional to its intensity.
PathId SelectPath(const PheromoneTable& table, RandomStream& rng);

/// Proportional draw restricted to `subset`; every id must be in the table.
PathId SelectPath(const PheromoneTable& table, std::span<const PathId> subset, RandomStream& rng);

PheromoneTable Deposit(PheromoneTable table, PathId id);

/// Number of selections per path, aligned with the table's path order.
struct CountVector
{
    std::vector<std::uint64_t> counts;

    std::uint64_t Total() const;
};

/**
 * Probability of one particular draw sequence with the given per-path
 * counts, starting from `initial`:
 *   Gamma(S) / Gamma(b + S) * prod_d Gamma(a_d + c_d/t) / Gamma(c_d/t),
 * with S = sum_d c_d/t and b = sum_d a_d.
 */
double UrnSequenceProbability(const PheromoneTable& initial, const CountVector& counts);

/// Probability of reaching `counts` after b draws (any order); sums to 1 over all vectors of total b.
double UrnProbability(const PheromoneTable& initial, const CountVector& counts);

/// Stirling's form sqrt(2 pi (b-1)) ((b-1)/e)^(b-1) of Gamma(b). Requires b > 1.
double StirlingGamma(double b);

/// Dirichlet(C_1/t, ..., C_n/t) density at `shares` (Beta for two paths).
double LimitingDensity(std::span<const double> shares, const PheromoneTable& initial);

/// Stable 64-bit identifier of a node sequence.
PathId PathFingerprint(std::span<const std::uint32_t> path);

} // namespace rifa
