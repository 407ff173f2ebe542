/*
 * SPDX-License-Identifier: GPL-2.0-only
 */
#include "rifa/errors.hpp"
#include "rifa/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rifa
{

namespace
{

// Remaining lifetimes are capped so that infinite links can take part in min-max scaling.
constexpr double kLifetimeCap = 1.0e6;

double
CappedLifetime(const RouteEntry& r, double now)
{
    return std::min(r.RemainingLifetime(now), kLifetimeCap);
}

double
Normalize(double v, double lo, double hi)
{
    return hi > lo ? (v - lo) / (hi - lo) : 1.0;
}

} // namespace

std::string_view
ToString(Protocol protocol)
{
    switch (protocol)
    {
    case Protocol::Rifa:
        return "rifa";
    case Protocol::BaselineFlood:
        return "baseline-flood";
    case Protocol::BaselineMinHop:
        return "baseline-minhop";
    }
    return "?";
}

std::optional<Protocol>
ParseProtocol(std::string_view name)
{
    for (Protocol p : {Protocol::Rifa, Protocol::BaselineFlood, Protocol::BaselineMinHop})
    {
        if (ToString(p) == name)
        {
            return p;
        }
    }
    return std::nullopt;
}

ProtocolTraits
TraitsFor(Protocol protocol, bool failurePrediction)
{
    ProtocolTraits t;
    switch (protocol)
    {
    case Protocol::Rifa:
        t.energyGate = true;
        t.hellos = true;
        t.multipathReplies = true;
        t.disjointRoutes = true;
        t.intermediateReplies = true;
        t.priorityScoring = true;
        t.routeExpiry = true;
        t.prediction = failurePrediction;
        break;
    case Protocol::BaselineFlood:
        break;
    case Protocol::BaselineMinHop:
        t.multipathReplies = true;
        break;
    }
    return t;
}

std::string_view
ToString(Zone zone)
{
    switch (zone)
    {
    case Zone::Inner:
        return "inner";
    case Zone::Middle:
        return "middle";
    case Zone::Outer:
        return "outer";
    }
    return "?";
}

Zone
ClassifyZone(double distance, double tr)
{
    if (distance < tr / 3.0)
    {
        return Zone::Inner;
    }
    if (distance < 2.0 * tr / 3.0)
    {
        return Zone::Middle;
    }
    return Zone::Outer;
}

bool
LinkFailureImminent(const NeighborEntry& entry, double now, double margin)
{
    if (std::isinf(entry.linkExpiryEstimate))
    {
        return false;
    }
    return entry.linkExpiryEstimate - (now - entry.lastHelloTime) <= margin;
}

RouteEntry
RouteEntry::FromPath(NodePath path,
                     double lifetime,
                     double minResidual,
                     double now,
                     std::uint32_t sequence)
{
    if (path.size() < 2)
    {
        throw InvalidArgument("RouteEntry: a route needs at least two nodes");
    }
    RouteEntry e;
    e.hopCount = static_cast<std::uint32_t>(path.size() - 1);
    e.id = PathFingerprint(path);
    e.path = std::move(path);
    e.pathLifetime = lifetime;
    e.minResidualEnergy = minResidual;
    e.discoveredAt = now;
    e.sequence = sequence;
    return e;
}

CandidateBounds
ComputeBounds(std::span<const RouteEntry* const> candidates, double now)
{
    CandidateBounds b;
    b.minLifetime = b.minEnergy = std::numeric_limits<double>::infinity();
    b.maxLifetime = b.maxEnergy = -std::numeric_limits<double>::infinity();
    for (const RouteEntry* r : candidates)
    {
        const double life = CappedLifetime(*r, now);
        b.minLifetime = std::min(b.minLifetime, life);
        b.maxLifetime = std::max(b.maxLifetime, life);
        b.minEnergy = std::min(b.minEnergy, r->minResidualEnergy);
        b.maxEnergy = std::max(b.maxEnergy, r->minResidualEnergy);
    }
    return b;
}

RouteFactors
NormalizedFactors(const RouteEntry& entry, const CandidateBounds& bounds, double now)
{
    RouteFactors f;
    f.lifetime = Normalize(CappedLifetime(entry, now), bounds.minLifetime, bounds.maxLifetime);
    f.energy = Normalize(entry.minResidualEnergy, bounds.minEnergy, bounds.maxEnergy);
    f.inverseHops = 1.0 / static_cast<double>(std::max<std::uint32_t>(1, entry.hopCount));
    return f;
}

double
RoutePriority(const RouteFactors& factors, const OpiWeights& weights)
{
    return weights.lifetime * factors.lifetime + weights.energy * factors.energy +
           weights.hops * factors.inverseHops;
}

double
RoutePriority(const RouteEntry& entry,
              const OpiWeights& weights,
              const CandidateBounds& bounds,
              double now)
{
    return RoutePriority(NormalizedFactors(entry, bounds, now), weights);
}

std::vector<RouteEntry>&
RoutingTable::RoutesTo(NodeId destination)
{
    return m_routes[destination];
}

const std::vector<RouteEntry>*
RoutingTable::Find(NodeId destination) const
{
    auto it = m_routes.find(destination);
    return it == m_routes.end() ? nullptr : &it->second;
}

InstallResult
RoutingTable::InstallDisjoint(NodeId destination, RouteEntry entry)
{
    auto& list = m_routes[destination];
    InstallResult result;
    for (auto& r : list)
    {
        if (r.path == entry.path)
        {
            if (entry.sequence >= r.sequence)
            {
                const bool inUse = r.inUse;
                r = std::move(entry);
                r.inUse = inUse;
            }
            result.outcome = InstallOutcome::Duplicate;
            return result;
        }
    }
    for (const auto& r : list)
    {
        if (SharesDirectedLink(r.path, entry.path) && r.sequence >= entry.sequence)
        {
            result.outcome = InstallOutcome::RejectedOverlap;
            return result;
        }
    }
    auto overlapping = [&](const RouteEntry& r) { return SharesDirectedLink(r.path, entry.path); };
    for (const auto& r : list)
    {
        if (overlapping(r))
        {
            result.evicted.push_back(r);
        }
    }
    std::erase_if(list, overlapping);
    list.push_back(std::move(entry));
    return result;
}

InstallResult
RoutingTable::InstallReplace(NodeId destination, RouteEntry entry)
{
    auto& list = m_routes[destination];
    InstallResult result;
    for (const auto& r : list)
    {
        if (r.sequence >= entry.sequence)
        {
            result.outcome = InstallOutcome::Duplicate;
            return result;
        }
    }
    result.evicted = std::move(list);
    list.clear();
    list.push_back(std::move(entry));
    return result;
}

InstallResult
RoutingTable::InstallAppend(NodeId destination, RouteEntry entry)
{
    auto& list = m_routes[destination];
    InstallResult result;
    for (auto& r : list)
    {
        if (r.path == entry.path)
        {
            r.discoveredAt = entry.discoveredAt;
            r.sequence = std::max(r.sequence, entry.sequence);
            r.minResidualEnergy = entry.minResidualEnergy;
            result.outcome = InstallOutcome::Duplicate;
            return result;
        }
    }
    list.push_back(std::move(entry));
    return result;
}

std::vector<RemovedRoute>
RoutingTable::RemoveLink(NodeId from, NodeId to)
{
    std::vector<RemovedRoute> removed;
    for (auto& [dest, list] : m_routes)
    {
        for (const auto& r : list)
        {
            if (ContainsLink(r.path, from, to))
            {
                removed.push_back({dest, r});
            }
        }
        std::erase_if(list, [&](const RouteEntry& r) { return ContainsLink(r.path, from, to); });
    }
    return removed;
}

std::vector<RemovedRoute>
RoutingTable::PruneExpired(double now)
{
    std::vector<RemovedRoute> removed;
    for (auto& [dest, list] : m_routes)
    {
        for (const auto& r : list)
        {
            if (!r.IsLive(now))
            {
                removed.push_back({dest, r});
            }
        }
        std::erase_if(list, [&](const RouteEntry& r) { return !r.IsLive(now); });
    }
    return removed;
}

bool
RoutingTable::HasLiveRoute(NodeId destination, double now) const
{
    const auto* list = Find(destination);
    if (list == nullptr)
    {
        return false;
    }
    return std::any_of(list->begin(), list->end(), [&](const RouteEntry& r) { return r.IsLive(now); });
}

bool
RoutingTable::IsMutuallyDisjoint(NodeId destination) const
{
    const auto* list = Find(destination);
    if (list == nullptr)
    {
        return true;
    }
    for (std::size_t i = 0; i < list->size(); ++i)
    {
        for (std::size_t j = i + 1; j < list->size(); ++j)
        {
            if (SharesDirectedLink((*list)[i].path, (*list)[j].path))
            {
                return false;
            }
        }
    }
    return true;
}

bool
RoutingTable::SeenRreq(NodeId source, std::uint32_t sequence) const
{
    return m_seenRreqs.contains({source, sequence});
}

void
RoutingTable::MarkRreq(NodeId source, std::uint32_t sequence, double now)
{
    SeqKey key{source, sequence};
    m_seenRreqs[key] = now;
    m_seenOrder.emplace_back(now, key);
}

bool
RoutingTable::RrepAnswered(NodeId source, std::uint32_t sequence, PathId path) const
{
    return m_rrepsAnswered.contains({source, sequence, path});
}

void
RoutingTable::MarkAnswered(NodeId source, std::uint32_t sequence, PathId path, double now)
{
    AnswerKey key{source, sequence, path};
    m_rrepsAnswered[key] = now;
    m_answerOrder.emplace_back(now, key);
}

void
RoutingTable::PruneDedupe(double now, double lifetime)
{
    const double cutoff = now - lifetime;
    while (!m_seenOrder.empty() && m_seenOrder.front().first < cutoff)
    {
        auto it = m_seenRreqs.find(m_seenOrder.front().second);
        if (it != m_seenRreqs.end() && it->second < cutoff)
        {
            m_seenRreqs.erase(it);
        }
        m_seenOrder.pop_front();
    }
    while (!m_answerOrder.empty() && m_answerOrder.front().first < cutoff)
    {
        auto it = m_rrepsAnswered.find(m_answerOrder.front().second);
        if (it != m_rrepsAnswered.end() && it->second < cutoff)
        {
            m_rrepsAnswered.erase(it);
        }
        m_answerOrder.pop_front();
    }
}

RouteEntry&
SelectRoute(RoutingTable& table,
            NodeId destination,
            double now,
            SelectionPolicy policy,
            const OpiWeights& weights,
            const PheromoneTable* pheromones,
            RandomStream& rng)
{
    auto& list = table.RoutesTo(destination);
    std::vector<RouteEntry*> live;
    for (auto& r : list)
    {
        if (r.IsLive(now))
        {
            live.push_back(&r);
        }
    }
    if (live.empty())
    {
        throw NoRoute("SelectRoute: no live route");
    }

    RouteEntry* best = live.front();
    if (policy == SelectionPolicy::MinHop)
    {
        for (RouteEntry* r : live)
        {
            if (r->hopCount < best->hopCount)
            {
                best = r;
            }
        }
    }
    else
    {
        std::vector<const RouteEntry*> view(live.begin(), live.end());
        const CandidateBounds bounds = ComputeBounds(view, now);
        double top = -std::numeric_limits<double>::infinity();
        for (RouteEntry* r : live)
        {
            r->priorityScore = RoutePriority(*r, weights, bounds, now);
            top = std::max(top, r->priorityScore);
        }
        const double tol = 1e-12 * std::max(1.0, std::abs(top));
        std::vector<RouteEntry*> tied;
        for (RouteEntry* r : live)
        {
            if (r->priorityScore >= top - tol)
            {
                tied.push_back(r);
            }
        }
        best = tied.front();
        if (tied.size() > 1 && pheromones != nullptr)
        {
            std::vector<PathId> ids;
            bool known = true;
            for (RouteEntry* r : tied)
            {
                ids.push_back(r->id);
                known = known && pheromones->Contains(r->id);
            }
            if (known)
            {
                const PathId chosen = SelectPath(*pheromones, ids, rng);
                for (RouteEntry* r : tied)
                {
                    if (r->id == chosen)
                    {
                        best = r;
                        break;
                    }
                }
            }
        }
    }
    for (auto& r : list)
    {
        r.inUse = false;
    }
    best->inUse = true;
    return *best;
}

} // namespace rifa
