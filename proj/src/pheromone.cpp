/*
 * SPDX-License-Identifier: GPL-2.0-only
 */
#include "rifa/pheromone.hpp"

#include "rifa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace rifa
{

PheromoneTable::PheromoneTable(double depositQuantum, double decay)
    : m_quantum(depositQuantum),
      m_decay(decay)
{
    if (!(depositQuantum > 0.0))
    {
        throw InvalidArgument("PheromoneTable: deposit quantum must be positive");
    }
    if (!(decay > 0.0 && decay <= 1.0))
    {
        throw InvalidArgument("PheromoneTable: decay must lie in (0, 1]");
    }
}

PheromoneTable::PheromoneTable(std::span<const double> intensities, double depositQuantum)
    : PheromoneTable(depositQuantum)
{
    for (std::size_t i = 0; i < intensities.size(); ++i)
    {
        AddPath(i, intensities[i]);
    }
}

void
PheromoneTable::AddPath(PathId id, double intensity)
{
    if (!(intensity > 0.0))
    {
        throw InvalidArgument("PheromoneTable: intensities must be positive");
    }
    m_intensities[id] = intensity;
}

bool
PheromoneTable::Contains(PathId id) const
{
    return m_intensities.contains(id);
}

double
PheromoneTable::Intensity(PathId id) const
{
    auto it = m_intensities.find(id);
    if (it == m_intensities.end())
    {
        throw InvalidArgument("PheromoneTable: unknown path");
    }
    return it->second;
}

double
PheromoneTable::Total() const
{
    double sum = 0.0;
    for (const auto& [id, c] : m_intensities)
    {
        sum += c;
    }
    return sum;
}

double
PheromoneTable::Share(PathId id) const
{
    return Intensity(id) / Total();
}

void
PheromoneTable::Deposit(PathId id)
{
    auto it = m_intensities.find(id);
    if (it == m_intensities.end())
    {
        throw InvalidArgument("Deposit: unknown path");
    }
    if (m_decay != 1.0)
    {
        for (auto& [other, c] : m_intensities)
        {
            c *= m_decay;
        }
    }
    it->second += m_quantum;
}

PathId
SelectPath(const PheromoneTable& table, RandomStream& rng)
{
    if (table.Empty())
    {
        throw InvalidState("SelectPath: empty pheromone table");
    }
    const double u = rng.Uniform01() * table.Total();
    double acc = 0.0;
    PathId last = 0;
    for (const auto& [id, c] : table.Intensities())
    {
        acc += c;
        last = id;
        if (u < acc)
        {
            return id;
        }
    }
    return last;
}

PathId
SelectPath(const PheromoneTable& table, std::span<const PathId> subset, RandomStream& rng)
{
    if (subset.empty())
    {
        throw InvalidState("SelectPath: empty candidate set");
    }
    if (subset.size() == 1)
    {
        return subset.front();
    }
    double total = 0.0;
    for (PathId id : subset)
    {
        total += table.Intensity(id);
    }
    const double u = rng.Uniform01() * total;
    double acc = 0.0;
    for (PathId id : subset)
    {
        acc += table.Intensity(id);
        if (u < acc)
        {
            return id;
        }
    }
    return subset.back();
}

PheromoneTable
Deposit(PheromoneTable table, PathId id)
{
    table.Deposit(id);
    return table;
}

std::uint64_t
CountVector::Total() const
{
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

namespace
{

double
LogUrnSequence(const PheromoneTable& initial, const CountVector& counts)
{
    if (counts.counts.size() != initial.Size())
    {
        throw InvalidArgument("UrnProbability: count vector dimension mismatch");
    }
    const double t = initial.DepositQuantum();
    const double b = static_cast<double>(counts.Total());
    double sumAlpha = 0.0;
    double logProduct = 0.0;
    std::size_t i = 0;
    for (const auto& [id, c] : initial.Intensities())
    {
        const double alpha = c / t;
        const double a = static_cast<double>(counts.counts[i++]);
        sumAlpha += alpha;
        logProduct += std::lgamma(a + alpha) - std::lgamma(alpha);
    }
    return std::lgamma(sumAlpha) - std::lgamma(b + sumAlpha) + logProduct;
}

} // namespace

double
UrnSequenceProbability(const PheromoneTable& initial, const CountVector& counts)
{
    return std::exp(LogUrnSequence(initial, counts));
}

double
UrnProbability(const PheromoneTable& initial, const CountVector& counts)
{
    const double logSeq = LogUrnSequence(initial, counts);
    // log of the multinomial coefficient b! / prod a_d!
    double logCoeff = std::lgamma(static_cast<double>(counts.Total()) + 1.0);
    for (std::uint64_t a : counts.counts)
    {
        logCoeff -= std::lgamma(static_cast<double>(a) + 1.0);
    }
    return std::exp(logCoeff + logSeq);
}

double
StirlingGamma(double b)
{
    if (!(b > 1.0))
    {
        throw DomainError("StirlingGamma: requires b > 1");
    }
    const double m = b - 1.0;
    return std::exp(0.5 * std::log(2.0 * std::numbers::pi * m) + m * (std::log(m) - 1.0));
}

double
LimitingDensity(std::span<const double> shares, const PheromoneTable& initial)
{
    if (shares.size() != initial.Size() || shares.size() < 2)
    {
        throw InvalidArgument("LimitingDensity: share vector dimension mismatch");
    }
    double sum = 0.0;
    for (double x : shares)
    {
        if (!(x > 0.0 && x < 1.0))
        {
            throw InvalidArgument("LimitingDensity: shares must lie in (0, 1)");
        }
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9)
    {
        throw InvalidArgument("LimitingDensity: shares must sum to 1");
    }

    const double t = initial.DepositQuantum();
    double sumAlpha = 0.0;
    double logDensity = 0.0;
    std::size_t i = 0;
    for (const auto& [id, c] : initial.Intensities())
    {
        const double alpha = c / t;
        sumAlpha += alpha;
        logDensity += (alpha - 1.0) * std::log(shares[i++]) - std::lgamma(alpha);
    }
    return std::exp(logDensity + std::lgamma(sumAlpha));
}

PathId
PathFingerprint(std::span<const std::uint32_t> path)
{
    // FNV-1a over the node ids.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint32_t node : path)
    {
        for (int k = 0; k < 4; ++k)
        {
            h ^= (node >> (8 * k)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

} // namespace rifa
