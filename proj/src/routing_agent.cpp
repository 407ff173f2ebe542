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

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRerrHoldoff = 1.0;

} // namespace

std::string_view
ToString(ActionKind kind)
{
    switch (kind)
    {
    case ActionKind::Discard:
        return "discard";
    case ActionKind::UpdateReverseRoute:
        return "update-reverse-route";
    case ActionKind::OriginateRreq:
        return "originate-rreq";
    case ActionKind::ForwardRreq:
        return "forward-rreq";
    case ActionKind::SendRrep:
        return "send-rrep";
    case ActionKind::ForwardRrep:
        return "forward-rrep";
    case ActionKind::InstallRoute:
        return "install-route";
    case ActionKind::RejectRoute:
        return "reject-route";
    case ActionKind::EvictRoute:
        return "evict-route";
    case ActionKind::DepositPheromone:
        return "deposit-pheromone";
    case ActionKind::SendData:
        return "send-data";
    case ActionKind::ForwardData:
        return "forward-data";
    case ActionKind::DeliverData:
        return "deliver-data";
    case ActionKind::BufferData:
        return "buffer-data";
    case ActionKind::DropData:
        return "drop-data";
    case ActionKind::SendRerr:
        return "send-rerr";
    case ActionKind::ForwardRerr:
        return "forward-rerr";
    case ActionKind::SendWarning:
        return "send-warning";
    case ActionKind::ForwardWarning:
        return "forward-warning";
    case ActionKind::SwitchRoute:
        return "switch-route";
    case ActionKind::UpsertNeighbor:
        return "upsert-neighbor";
    case ActionKind::EvictNeighbor:
        return "evict-neighbor";
    case ActionKind::ScheduleDiscoveryTimeout:
        return "schedule-timeout";
    }
    return "?";
}

bool
IsTransmission(ActionKind kind)
{
    switch (kind)
    {
    case ActionKind::OriginateRreq:
    case ActionKind::ForwardRreq:
    case ActionKind::SendRrep:
    case ActionKind::ForwardRrep:
    case ActionKind::SendData:
    case ActionKind::ForwardData:
    case ActionKind::SendRerr:
    case ActionKind::ForwardRerr:
    case ActionKind::SendWarning:
    case ActionKind::ForwardWarning:
        return true;
    default:
        return false;
    }
}

std::string_view
ToString(Reason reason)
{
    switch (reason)
    {
    case Reason::None:
        return "-";
    case Reason::Malformed:
        return "malformed";
    case Reason::OwnPacket:
        return "own-packet";
    case Reason::DangerLevel:
        return "danger-level";
    case Reason::Duplicate:
        return "duplicate";
    case Reason::NotDisjoint:
        return "not-disjoint";
    case Reason::NotOnPath:
        return "not-on-path";
    case Reason::NoReverseRoute:
        return "no-reverse-route";
    case Reason::NoUnusedAlternative:
        return "no-unused-alternative";
    case Reason::UnknownRoute:
        return "unknown-route";
    case Reason::BufferFull:
        return "buffer-full";
    case Reason::BufferTimeout:
        return "buffer-timeout";
    case Reason::LinkBreak:
        return "link-break";
    case Reason::Expired:
        return "expired";
    case Reason::Predicted:
        return "predicted";
    }
    return "?";
}

RoutingAgent::RoutingAgent(NodeId self, RoutingConfig config, RandomStream rng)
    : m_self(self),
      m_config(config),
      m_traits(TraitsFor(config.protocol, config.failurePrediction)),
      m_rng(rng),
      m_lastActivity(-kInf)
{
}

Action
RoutingAgent::Make(ActionKind kind, const NodeContext& ctx) const
{
    Action a;
    a.kind = kind;
    a.residual = ctx.energy.residual;
    a.threshold = ctx.energy.dangerThreshold;
    return a;
}

std::uint64_t
RoutingAgent::NextUid()
{
    return (static_cast<std::uint64_t>(m_self) << 40) | ++m_uidCounter;
}

Action
RoutingAgent::Transmit(ActionKind kind,
                       const NodeContext& ctx,
                       ControlPacket pkt,
                       NodeId nextHop,
                       double delay)
{
    pkt.senderKinematics = ctx.kinematics;
    if (pkt.uid == 0)
    {
        pkt.uid = NextUid();
    }
    if (pkt.kind != PacketKind::Data)
    {
        pkt.payloadSize = WireSize(pkt);
    }
    Action a = Make(kind, ctx);
    a.nextHop = nextHop;
    a.delay = delay;
    a.sequence = pkt.sequence;
    a.peer = pkt.destination;
    a.packet = std::make_shared<const ControlPacket>(std::move(pkt));
    return a;
}

double
RoutingAgent::LinkLifetime(const NodeContext& ctx, const NodeKinematics& sender) const
{
    if (!m_traits.routeExpiry)
    {
        return kInf;
    }
    if (Distance(ctx.kinematics, sender) > m_config.tr)
    {
        return 0.0;
    }
    return LinkExpiryTime(ctx.kinematics, sender, m_config.tr);
}

const PheromoneTable*
RoutingAgent::Pheromones(NodeId destination) const
{
    auto it = m_pheromones.find(destination);
    return it == m_pheromones.end() ? nullptr : &it->second;
}

bool
RoutingAgent::DiscoveryPending(NodeId destination) const
{
    auto it = m_discovery.find(destination);
    return it != m_discovery.end() && it->second.pending;
}

bool
RoutingAgent::IsActive(double now) const
{
    return now - m_lastActivity <= m_config.activeRouteTimeout;
}

void
RoutingAgent::PruneState(double now)
{
    if (now - m_lastPrune < 1.0)
    {
        return;
    }
    m_lastPrune = now;
    const double cutoff = now - m_config.dedupeLifetime;
    m_table.PruneDedupe(now, m_config.dedupeLifetime);
    std::erase_if(m_answered, [&](const auto& kv) { return kv.second.time < cutoff; });
    std::erase_if(m_rrepLinksUsed, [&](const auto& kv) { return kv.second.time < cutoff; });
    std::erase_if(m_warned, [&](const auto& kv) { return kv.second < cutoff; });
    std::erase_if(m_rerrSent, [&](const auto& kv) { return kv.second < cutoff; });
}

Actions
RoutingAgent::HandlePacket(const NodeContext& ctx, const ControlPacket& pkt)
{
    switch (pkt.kind)
    {
    case PacketKind::Hello:
        return HandleHello(ctx, pkt);
    case PacketKind::Rreq:
        return HandleRreq(ctx, pkt);
    case PacketKind::Rrep:
        return HandleRrep(ctx, pkt);
    case PacketKind::Rerr:
        return HandleRerr(ctx, pkt);
    case PacketKind::LinkWarning:
        return HandleLinkWarning(ctx, pkt);
    case PacketKind::Data:
        return HandleData(ctx, pkt);
    }
    return {};
}

Actions
RoutingAgent::HandleHello(const NodeContext& ctx, const ControlPacket& pkt)
{
    const NodeKinematics sender = Extrapolate(pkt.senderKinematics, ctx.now - pkt.originTimestamp);
    const double d = Distance(ctx.kinematics, sender);

    NeighborEntry& e = m_neighbors[pkt.source];
    e.neighbor = pkt.source;
    e.lastHelloTime = ctx.now;
    e.kinematicsAtHello = sender;
    e.linkExpiryEstimate = d > m_config.tr ? 0.0 : LinkExpiryTime(ctx.kinematics, sender, m_config.tr);
    e.zone = ClassifyZone(d, m_config.tr);
    switch (e.zone)
    {
    case Zone::Inner:
        ++m_counters.zoneInner;
        break;
    case Zone::Middle:
        ++m_counters.zoneMiddle;
        break;
    case Zone::Outer:
        ++m_counters.zoneOuter;
        break;
    }

    Action a = Make(ActionKind::UpsertNeighbor, ctx);
    a.peer = pkt.source;
    return {a};
}

Actions
RoutingAgent::HandleRreq(const NodeContext& ctx, const ControlPacket& pkt)
{
    Actions out;
    PruneState(ctx.now);
    const auto discard = [&](Reason why) {
        Action a = Make(ActionKind::Discard, ctx);
        a.reason = why;
        a.peer = pkt.source;
        a.sequence = pkt.sequence;
        out.push_back(std::move(a));
    };

    if (pkt.traversedPath.empty() || HasLoop(pkt.traversedPath))
    {
        ++m_counters.malformed;
        discard(Reason::Malformed);
        return out;
    }
    if (pkt.source == m_self || IndexOf(pkt.traversedPath, m_self) >= 0)
    {
        discard(Reason::OwnPacket);
        return out;
    }
    if (m_traits.energyGate && Classify(ctx.energy) == EnergyLevel::Danger)
    {
        ++m_counters.dangerDiscards;
        discard(Reason::DangerLevel);
        return out;
    }

    const double minLet = std::min(pkt.minLinkExpiry, LinkLifetime(ctx, pkt.senderKinematics));
    const double minEnergy = std::min(pkt.minResidualEnergy, ctx.energy.residual);
    NodePath path = pkt.traversedPath;
    path.push_back(m_self);

    if (pkt.destination == m_self)
    {
        AnswerAsDestination(ctx, pkt, std::move(path), minEnergy, minLet, out);
        return out;
    }

    if (!m_table.SeenRreq(pkt.source, pkt.sequence))
    {
        NodePath reverse(path.rbegin(), path.rend());
        m_reverseRoutes[pkt.source] = reverse;
        Action a = Make(ActionKind::UpdateReverseRoute, ctx);
        a.peer = pkt.source;
        a.sequence = pkt.sequence;
        a.path = std::move(reverse);
        out.push_back(std::move(a));
    }

    if (m_traits.intermediateReplies && TryCachedReply(ctx, pkt, path, minEnergy, minLet, out))
    {
        m_table.MarkRreq(pkt.source, pkt.sequence, ctx.now);
        return out;
    }

    if (m_table.SeenRreq(pkt.source, pkt.sequence))
    {
        ++m_counters.duplicateRreqs;
        discard(Reason::Duplicate);
        return out;
    }
    m_table.MarkRreq(pkt.source, pkt.sequence, ctx.now);

    ControlPacket fwd = pkt;
    fwd.traversedPath = std::move(path);
    fwd.minResidualEnergy = minEnergy;
    fwd.minLinkExpiry = minLet;
    const double jitter = m_config.rreqJitter > 0.0 ? m_rng.Uniform(0.0, m_config.rreqJitter) : 0.0;
    out.push_back(Transmit(ActionKind::ForwardRreq, ctx, std::move(fwd), kBroadcast, jitter));
    ++m_counters.rreqForwarded;
    return out;
}

void
RoutingAgent::AnswerAsDestination(const NodeContext& ctx,
                                  const ControlPacket& pkt,
                                  NodePath path,
                                  double minEnergy,
                                  double minLet,
                                  Actions& out)
{
    const NodeId prev = path[path.size() - 2];
    Answered& st = m_answered[{pkt.source, pkt.sequence}];
    st.time = ctx.now;

    Reason refuse = Reason::None;
    if (!m_traits.multipathReplies)
    {
        if (!st.paths.empty())
        {
            refuse = Reason::Duplicate;
        }
    }
    else if (st.neighbors.contains(prev))
    {
        refuse = Reason::Duplicate;
    }
    else if (m_traits.disjointRoutes)
    {
        for (const auto& p : st.paths)
        {
            if (SharesDirectedLink(p, path))
            {
                refuse = Reason::NotDisjoint;
                break;
            }
        }
    }
    if (refuse != Reason::None)
    {
        if (refuse == Reason::Duplicate)
        {
            ++m_counters.duplicateRreqs;
        }
        Action a = Make(ActionKind::Discard, ctx);
        a.reason = refuse;
        a.peer = pkt.source;
        a.sequence = pkt.sequence;
        out.push_back(std::move(a));
        return;
    }

    st.neighbors.insert(prev);
    st.paths.push_back(path);
    m_table.MarkRreq(pkt.source, pkt.sequence, ctx.now);

    ControlPacket rrep;
    rrep.kind = PacketKind::Rrep;
    rrep.source = pkt.source;
    rrep.destination = m_self;
    rrep.sequence = pkt.sequence;
    rrep.traversedPath = std::move(path);
    rrep.minResidualEnergy = minEnergy;
    rrep.minLinkExpiry = minLet;
    rrep.originTimestamp = ctx.now;
    Action a = Transmit(ActionKind::SendRrep, ctx, std::move(rrep), prev);
    a.peer = pkt.source;
    out.push_back(std::move(a));
    ++m_counters.rrepOriginated;
}

bool
RoutingAgent::TryCachedReply(const NodeContext& ctx,
                             const ControlPacket& pkt,
                             const NodePath& prefix,
                             double minEnergy,
                             double minLet,
                             Actions& out)
{
    const auto* routes = m_table.Find(pkt.destination);
    if (routes == nullptr)
    {
        return false;
    }
    for (const RouteEntry& r : *routes)
    {
        if (!r.IsLive(ctx.now) || r.path.front() != m_self)
        {
            continue;
        }
        NodePath combined = prefix;
        combined.insert(combined.end(), r.path.begin() + 1, r.path.end());
        if (HasLoop(combined))
        {
            continue;
        }
        if (m_table.RrepAnswered(pkt.source, pkt.sequence, r.id))
        {
            continue;
        }
        m_table.MarkAnswered(pkt.source, pkt.sequence, r.id, ctx.now);

        ControlPacket rrep;
        rrep.kind = PacketKind::Rrep;
        rrep.source = pkt.source;
        rrep.destination = pkt.destination;
        rrep.sequence = pkt.sequence;
        rrep.traversedPath = std::move(combined);
        rrep.minResidualEnergy = std::min(minEnergy, r.minResidualEnergy);
        rrep.minLinkExpiry = std::min(minLet, r.RemainingLifetime(ctx.now));
        rrep.originTimestamp = ctx.now;
        const NodeId prev = prefix[prefix.size() - 2];
        Action a = Transmit(ActionKind::SendRrep, ctx, std::move(rrep), prev);
        a.peer = pkt.source;
        a.path = r.path;
        out.push_back(std::move(a));
        ++m_counters.rrepOriginated;
        return true;
    }
    return false;
}

void
RoutingAgent::DepositOnTraversal(const NodeContext& ctx, const ControlPacket& pkt, int index, Actions& out)
{
    if (!m_traits.priorityScoring)
    {
        return;
    }
    std::span<const NodeId> suffix(pkt.traversedPath.begin() + index, pkt.traversedPath.end());
    const PathId id = PathFingerprint(suffix);
    auto [it, inserted] = m_pheromones.try_emplace(
        pkt.destination,
        PheromoneTable(m_config.depositQuantum, m_config.pheromoneDecay));
    if (!it->second.Contains(id))
    {
        it->second.AddPath(id, m_config.pheromoneInitial);
    }
    it->second.Deposit(id);

    Action a = Make(ActionKind::DepositPheromone, ctx);
    a.peer = pkt.destination;
    a.path.assign(suffix.begin(), suffix.end());
    out.push_back(std::move(a));
}

Actions
RoutingAgent::HandleRrep(const NodeContext& ctx, const ControlPacket& pkt)
{
    Actions out;
    PruneState(ctx.now);
    const auto discard = [&](Reason why) {
        ++m_counters.rrepDiscarded;
        Action a = Make(ActionKind::Discard, ctx);
        a.reason = why;
        a.peer = pkt.source;
        a.sequence = pkt.sequence;
        out.push_back(std::move(a));
    };

    if (HasLoop(pkt.traversedPath))
    {
        ++m_counters.malformed;
        discard(Reason::Malformed);
        return out;
    }
    const int index = IndexOf(pkt.traversedPath, m_self);
    if (index < 0)
    {
        discard(Reason::NotOnPath);
        return out;
    }
    if (index == 0)
    {
        if (pkt.source != m_self)
        {
            discard(Reason::NotOnPath);
            return out;
        }
        DepositOnTraversal(ctx, pkt, index, out);
        InstallAtSource(ctx, pkt, out);
        return out;
    }
    if (!m_table.SeenRreq(pkt.source, pkt.sequence))
    {
        ++m_counters.noReverseRoute;
        discard(Reason::NoReverseRoute);
        return out;
    }

    const NodeId next = pkt.traversedPath[index - 1];
    if (m_traits.disjointRoutes)
    {
        Answered& used = m_rrepLinksUsed[{pkt.source, pkt.sequence}];
        used.time = ctx.now;
        if (used.neighbors.contains(next))
        {
            discard(Reason::NoUnusedAlternative);
            return out;
        }
        used.neighbors.insert(next);
    }

    DepositOnTraversal(ctx, pkt, index, out);
    if (m_traits.intermediateReplies)
    {
        CacheForwardRoute(ctx, pkt, index, out);
    }
    Action a = Transmit(ActionKind::ForwardRrep, ctx, pkt, next);
    a.peer = pkt.source;
    out.push_back(std::move(a));
    ++m_counters.rrepForwarded;
    return out;
}

void
RoutingAgent::CacheForwardRoute(const NodeContext& ctx, const ControlPacket& pkt, int index, Actions& out)
{
    NodePath suffix(pkt.traversedPath.begin() + index, pkt.traversedPath.end());
    if (suffix.size() < 2 || !(pkt.minLinkExpiry > 0.0))
    {
        return;
    }
    RouteEntry e = RouteEntry::FromPath(std::move(suffix),
                                        pkt.minLinkExpiry,
                                        pkt.minResidualEnergy,
                                        ctx.now,
                                        pkt.sequence);
    NodePath installed = e.path;
    InstallResult r = m_table.InstallDisjoint(pkt.destination, std::move(e));
    for (auto& ev : r.evicted)
    {
        Action a = Make(ActionKind::EvictRoute, ctx);
        a.peer = pkt.destination;
        a.reason = Reason::NotDisjoint;
        a.path = std::move(ev.path);
        out.push_back(std::move(a));
    }
    if (r.outcome == InstallOutcome::Installed)
    {
        Action a = Make(ActionKind::InstallRoute, ctx);
        a.peer = pkt.destination;
        a.sequence = pkt.sequence;
        a.path = std::move(installed);
        out.push_back(std::move(a));
    }
}

void
RoutingAgent::InstallAtSource(const NodeContext& ctx, const ControlPacket& pkt, Actions& out)
{
    const NodeId dest = pkt.destination;
    const double lifetime = m_traits.routeExpiry ? pkt.minLinkExpiry : kInf;
    if (!(lifetime > 0.0))
    {
        Action a = Make(ActionKind::RejectRoute, ctx);
        a.peer = dest;
        a.reason = Reason::Expired;
        a.path = pkt.traversedPath;
        out.push_back(std::move(a));
        ++m_counters.routesRejected;
        return;
    }

    RouteEntry e = RouteEntry::FromPath(pkt.traversedPath, lifetime, pkt.minResidualEnergy, ctx.now, pkt.sequence);
    InstallResult r;
    switch (m_config.protocol)
    {
    case Protocol::Rifa:
        r = m_table.InstallDisjoint(dest, std::move(e));
        break;
    case Protocol::BaselineFlood:
        r = m_table.InstallReplace(dest, std::move(e));
        break;
    case Protocol::BaselineMinHop:
        r = m_table.InstallAppend(dest, std::move(e));
        break;
    }
    for (auto& ev : r.evicted)
    {
        Action a = Make(ActionKind::EvictRoute, ctx);
        a.peer = dest;
        a.reason = Reason::NotDisjoint;
        a.path = std::move(ev.path);
        out.push_back(std::move(a));
    }
    if (r.outcome != InstallOutcome::Installed)
    {
        Action a = Make(ActionKind::RejectRoute, ctx);
        a.peer = dest;
        a.reason = r.outcome == InstallOutcome::RejectedOverlap ? Reason::NotDisjoint : Reason::Duplicate;
        a.path = pkt.traversedPath;
        out.push_back(std::move(a));
        ++m_counters.routesRejected;
        if (r.outcome == InstallOutcome::Duplicate)
        {
            Flush(ctx, dest, out);
        }
        return;
    }

    Action a = Make(ActionKind::InstallRoute, ctx);
    a.peer = dest;
    a.sequence = pkt.sequence;
    a.path = pkt.traversedPath;
    out.push_back(std::move(a));
    ++m_counters.routesInstalled;

    auto& routes = m_table.RoutesTo(dest);
    for (const auto& r : routes)
    {
        if (r.warned)
        {
            Action ev = Make(ActionKind::EvictRoute, ctx);
            ev.peer = dest;
            ev.reason = Reason::Predicted;
            ev.path = r.path;
            out.push_back(std::move(ev));
        }
    }
    std::erase_if(routes, [](const RouteEntry& r) { return r.warned; });

    auto it = m_discovery.find(dest);
    if (it != m_discovery.end())
    {
        it->second.pending = false;
    }
    Flush(ctx, dest, out);
}

RouteEntry&
RoutingAgent::Choose(NodeId destination, double now)
{
    const SelectionPolicy policy = m_traits.priorityScoring ? SelectionPolicy::Priority : SelectionPolicy::MinHop;
    return SelectRoute(m_table, destination, now, policy, m_config.weights, Pheromones(destination), m_rng);
}

bool
RoutingAgent::HasUsableRoute(NodeId destination, double now) const
{
    return m_table.HasLiveRoute(destination, now);
}

void
RoutingAgent::PruneRoutes(const NodeContext& ctx, Actions& out)
{
    if (!m_traits.routeExpiry)
    {
        return;
    }
    for (auto& removed : m_table.PruneExpired(ctx.now))
    {
        Action a = Make(ActionKind::EvictRoute, ctx);
        a.peer = removed.destination;
        a.reason = Reason::Expired;
        a.path = std::move(removed.entry.path);
        out.push_back(std::move(a));
    }
}

bool
RoutingAgent::TrySend(const NodeContext& ctx, ControlPacket& data, Actions& out)
{
    PruneRoutes(ctx, out);
    if (!HasUsableRoute(data.destination, ctx.now))
    {
        return false;
    }
    const RouteEntry& route = Choose(data.destination, ctx.now);
    data.traversedPath = route.path;
    const NodeId next = route.path[1];
    m_flows[next][m_self] = FlowUse{ctx.now, route.path};
    m_lastActivity = ctx.now;
    out.push_back(Transmit(ActionKind::SendData, ctx, data, next));
    return true;
}

bool
RoutingAgent::HasBuffered(NodeId destination) const
{
    return std::any_of(m_buffer.begin(), m_buffer.end(), [&](const Buffered& b) {
        return b.packet.destination == destination;
    });
}

void
RoutingAgent::PurgeBuffer(const NodeContext& ctx, Actions& out)
{
    while (!m_buffer.empty() && ctx.now - m_buffer.front().enqueued > m_config.sendBufferTimeout)
    {
        Action a = Make(ActionKind::DropData, ctx);
        a.reason = Reason::BufferTimeout;
        a.peer = m_buffer.front().packet.destination;
        a.packet = std::make_shared<const ControlPacket>(std::move(m_buffer.front().packet));
        out.push_back(std::move(a));
        ++m_counters.dataDropped;
        m_buffer.pop_front();
    }
}

void
RoutingAgent::Flush(const NodeContext& ctx, NodeId destination, Actions& out)
{
    PurgeBuffer(ctx, out);
    for (auto it = m_buffer.begin(); it != m_buffer.end();)
    {
        if (it->packet.destination != destination)
        {
            ++it;
            continue;
        }
        if (!TrySend(ctx, it->packet, out))
        {
            break;
        }
        it = m_buffer.erase(it);
    }
}

void
RoutingAgent::Originate(const NodeContext& ctx, NodeId destination, Actions& out)
{
    Discovery& d = m_discovery[destination];
    d.sequence = ++m_sequence;

    ControlPacket rreq;
    rreq.kind = PacketKind::Rreq;
    rreq.source = m_self;
    rreq.destination = destination;
    rreq.sequence = d.sequence;
    rreq.traversedPath = {m_self};
    rreq.minResidualEnergy = ctx.energy.residual;
    rreq.minLinkExpiry = kInf;
    rreq.originTimestamp = ctx.now;
    m_table.MarkRreq(m_self, d.sequence, ctx.now);
    out.push_back(Transmit(ActionKind::OriginateRreq, ctx, std::move(rreq), kBroadcast));
    ++m_counters.rreqOriginated;

    Action t = Make(ActionKind::ScheduleDiscoveryTimeout, ctx);
    t.peer = destination;
    t.sequence = d.sequence;
    t.delay = d.backoff;
    out.push_back(std::move(t));
}

void
RoutingAgent::EnsureDiscovery(const NodeContext& ctx, NodeId destination, Actions& out)
{
    Discovery& d = m_discovery[destination];
    if (d.pending)
    {
        return;
    }
    d.pending = true;
    d.backoff = m_config.discoveryTimeout;
    Originate(ctx, destination, out);
}

Actions
RoutingAgent::SendData(const NodeContext& ctx, ControlPacket data)
{
    Actions out;
    PruneState(ctx.now);
    data.source = m_self;
    m_lastActivity = ctx.now;
    m_lastSentTo[data.destination] = ctx.now;
    PurgeBuffer(ctx, out);
    if (!HasBuffered(data.destination) && TrySend(ctx, data, out))
    {
        return out;
    }
    if (m_buffer.size() >= m_config.sendBufferCapacity)
    {
        Action a = Make(ActionKind::DropData, ctx);
        a.reason = Reason::BufferFull;
        a.peer = m_buffer.front().packet.destination;
        a.packet = std::make_shared<const ControlPacket>(std::move(m_buffer.front().packet));
        out.push_back(std::move(a));
        ++m_counters.dataDropped;
        m_buffer.pop_front();
    }
    const NodeId dest = data.destination;
    Action a = Make(ActionKind::BufferData, ctx);
    a.peer = dest;
    out.push_back(std::move(a));
    m_buffer.push_back(Buffered{std::move(data), ctx.now});
    if (HasUsableRoute(dest, ctx.now))
    {
        Flush(ctx, dest, out);
    }
    else
    {
        EnsureDiscovery(ctx, dest, out);
    }
    return out;
}

Actions
RoutingAgent::OnDiscoveryTimeout(const NodeContext& ctx, NodeId destination, std::uint32_t sequence)
{
    Actions out;
    auto it = m_discovery.find(destination);
    if (it == m_discovery.end() || !it->second.pending || it->second.sequence != sequence)
    {
        return out;
    }
    PurgeBuffer(ctx, out);
    PruneRoutes(ctx, out);
    Discovery& d = it->second;
    if (HasUnwarnedRoute(destination, ctx.now))
    {
        d.pending = false;
        Flush(ctx, destination, out);
        return out;
    }
    if (!WantsRoute(destination, ctx.now))
    {
        d.pending = false;
        return out;
    }
    d.backoff = std::min(2.0 * d.backoff, m_config.maxDiscoveryTimeout);
    Originate(ctx, destination, out);
    return out;
}

Actions
RoutingAgent::HandleData(const NodeContext& ctx, const ControlPacket& pkt)
{
    Actions out;
    const int index = IndexOf(pkt.traversedPath, m_self);
    if (index < 0)
    {
        Action a = Make(ActionKind::Discard, ctx);
        a.reason = Reason::NotOnPath;
        out.push_back(std::move(a));
        return out;
    }
    m_lastActivity = ctx.now;
    if (static_cast<std::size_t>(index) + 1 == pkt.traversedPath.size())
    {
        Action a = Make(ActionKind::DeliverData, ctx);
        a.peer = pkt.source;
        a.packet = std::make_shared<const ControlPacket>(pkt);
        out.push_back(std::move(a));
        return out;
    }
    const NodeId next = pkt.traversedPath[index + 1];
    m_flows[next][pkt.source] = FlowUse{ctx.now, pkt.traversedPath};
    out.push_back(Transmit(ActionKind::ForwardData, ctx, pkt, next));
    return out;
}

void
RoutingAgent::RemoveLinkRoutes(const NodeContext& ctx, NodeId from, NodeId to, Reason why, Actions& out)
{
    for (auto& removed : m_table.RemoveLink(from, to))
    {
        Action a = Make(ActionKind::EvictRoute, ctx);
        a.peer = removed.destination;
        a.reason = why;
        a.path = std::move(removed.entry.path);
        out.push_back(std::move(a));
    }
}

void
RoutingAgent::ReactToLinkLoss(const NodeContext& ctx, NodeId destination, Actions& out)
{
    PruneRoutes(ctx, out);
    if (HasUsableRoute(destination, ctx.now))
    {
        const RouteEntry& r = Choose(destination, ctx.now);
        Action a = Make(ActionKind::SwitchRoute, ctx);
        a.peer = destination;
        a.path = r.path;
        out.push_back(std::move(a));
        ++m_counters.routeSwitches;
        Flush(ctx, destination, out);
        return;
    }
    if (WantsRoute(destination, ctx.now))
    {
        EnsureDiscovery(ctx, destination, out);
    }
}

bool
RoutingAgent::WantsRoute(NodeId destination, double now) const
{
    auto last = m_lastSentTo.find(destination);
    const bool recentTraffic = last != m_lastSentTo.end() && now - last->second <= m_config.activeRouteTimeout;
    return recentTraffic || HasBuffered(destination);
}

bool
RoutingAgent::HasUnwarnedRoute(NodeId destination, double now) const
{
    const auto* list = m_table.Find(destination);
    return list != nullptr &&
           std::any_of(list->begin(), list->end(), [&](const RouteEntry& r) { return !r.warned && r.IsLive(now); });
}

bool
RoutingAgent::WarnRoutes(const NodeContext& ctx, NodeId from, NodeId to, double remaining, Actions& out)
{
    // Routes through the doomed link are dropped when a disjoint survivor
    // exists. Otherwise they keep carrying data until the predicted break
    // while a fresh discovery runs, and the first new route replaces them.
    bool affected = false;
    std::vector<NodeId> destinations;
    for (const auto& [dest, list] : m_table.All())
    {
        destinations.push_back(dest);
    }
    for (NodeId dest : destinations)
    {
        auto& routes = m_table.RoutesTo(dest);
        bool hit = false;
        bool survivor = false;
        for (const auto& r : routes)
        {
            if (ContainsLink(r.path, from, to))
            {
                hit = true;
            }
            else if (!r.warned && r.IsLive(ctx.now))
            {
                survivor = true;
            }
        }
        if (!hit)
        {
            continue;
        }
        affected = true;
        if (survivor)
        {
            for (const auto& r : routes)
            {
                if (ContainsLink(r.path, from, to))
                {
                    Action a = Make(ActionKind::EvictRoute, ctx);
                    a.peer = dest;
                    a.reason = Reason::Predicted;
                    a.path = r.path;
                    out.push_back(std::move(a));
                }
            }
            std::erase_if(routes, [&](const RouteEntry& r) { return ContainsLink(r.path, from, to); });
            ReactToLinkLoss(ctx, dest, out);
            continue;
        }
        for (auto& r : routes)
        {
            if (ContainsLink(r.path, from, to))
            {
                r.warned = true;
                r.pathLifetime = std::min(r.pathLifetime, ctx.now + remaining - r.discoveredAt);
            }
        }
        PruneRoutes(ctx, out);
        if (WantsRoute(dest, ctx.now))
        {
            EnsureDiscovery(ctx, dest, out);
        }
    }
    return affected;
}

Actions
RoutingAgent::OnUnicastFailure(const NodeContext& ctx, const ControlPacket& pkt, NodeId nextHop)
{
    Actions out;
    if (m_neighbors.erase(nextHop) > 0)
    {
        Action a = Make(ActionKind::EvictNeighbor, ctx);
        a.peer = nextHop;
        a.reason = Reason::LinkBreak;
        out.push_back(std::move(a));
    }
    m_flows.erase(nextHop);
    RemoveLinkRoutes(ctx, m_self, nextHop, Reason::LinkBreak, out);

    if (pkt.kind != PacketKind::Data)
    {
        Action a = Make(ActionKind::Discard, ctx);
        a.reason = Reason::LinkBreak;
        a.peer = nextHop;
        out.push_back(std::move(a));
        return out;
    }

    Action drop = Make(ActionKind::DropData, ctx);
    drop.reason = Reason::LinkBreak;
    drop.peer = pkt.destination;
    drop.packet = std::make_shared<const ControlPacket>(pkt);
    out.push_back(std::move(drop));
    ++m_counters.dataDropped;

    if (pkt.source == m_self)
    {
        ReactToLinkLoss(ctx, pkt.destination, out);
        return out;
    }
    const int index = IndexOf(pkt.traversedPath, m_self);
    if (index <= 0)
    {
        return out;
    }
    const auto key = std::make_pair(pkt.source, nextHop);
    auto sent = m_rerrSent.find(key);
    if (sent != m_rerrSent.end() && ctx.now - sent->second < kRerrHoldoff)
    {
        return out;
    }
    m_rerrSent[key] = ctx.now;

    ControlPacket rerr;
    rerr.kind = PacketKind::Rerr;
    rerr.source = m_self;
    rerr.destination = pkt.source;
    rerr.traversedPath = pkt.traversedPath;
    rerr.linkFrom = m_self;
    rerr.linkTo = nextHop;
    rerr.originTimestamp = ctx.now;
    out.push_back(Transmit(ActionKind::SendRerr, ctx, std::move(rerr), pkt.traversedPath[index - 1]));
    ++m_counters.rerrSent;
    return out;
}

Actions
RoutingAgent::HandleRerr(const NodeContext& ctx, const ControlPacket& pkt)
{
    Actions out;
    RemoveLinkRoutes(ctx, pkt.linkFrom, pkt.linkTo, Reason::LinkBreak, out);
    if (pkt.destination == m_self)
    {
        if (!pkt.traversedPath.empty())
        {
            ReactToLinkLoss(ctx, pkt.traversedPath.back(), out);
        }
        return out;
    }
    const int index = IndexOf(pkt.traversedPath, m_self);
    if (index <= 0)
    {
        Action a = Make(ActionKind::Discard, ctx);
        a.reason = Reason::NotOnPath;
        out.push_back(std::move(a));
        return out;
    }
    out.push_back(Transmit(ActionKind::ForwardRerr, ctx, pkt, pkt.traversedPath[index - 1]));
    return out;
}

Actions
RoutingAgent::HandleLinkWarning(const NodeContext& ctx, const ControlPacket& pkt)
{
    Actions out;
    if (pkt.destination == m_self)
    {
        if (!WarnRoutes(ctx, pkt.linkFrom, pkt.linkTo, pkt.minLinkExpiry, out))
        {
            ++m_counters.unknownWarnings;
            Action a = Make(ActionKind::Discard, ctx);
            a.reason = Reason::UnknownRoute;
            a.peer = pkt.source;
            out.push_back(std::move(a));
        }
        return out;
    }
    RemoveLinkRoutes(ctx, pkt.linkFrom, pkt.linkTo, Reason::Predicted, out);
    const int index = IndexOf(pkt.traversedPath, m_self);
    if (index <= 0)
    {
        Action a = Make(ActionKind::Discard, ctx);
        a.reason = Reason::NotOnPath;
        out.push_back(std::move(a));
        return out;
    }
    out.push_back(Transmit(ActionKind::ForwardWarning, ctx, pkt, pkt.traversedPath[index - 1]));
    return out;
}

std::vector<ControlPacket>
RoutingAgent::PredictLinkFailure(const NodeContext& ctx, const NeighborEntry& entry, double margin) const
{
    std::vector<ControlPacket> warnings;
    if (!LinkFailureImminent(entry, ctx.now, margin))
    {
        return warnings;
    }
    auto it = m_flows.find(entry.neighbor);
    if (it == m_flows.end())
    {
        return warnings;
    }
    for (const auto& [source, use] : it->second)
    {
        if (ctx.now - use.lastSeen > m_config.activeRouteTimeout)
        {
            continue;
        }
        ControlPacket w;
        w.kind = PacketKind::LinkWarning;
        w.source = m_self;
        w.destination = source;
        w.traversedPath = use.path;
        w.linkFrom = m_self;
        w.linkTo = entry.neighbor;
        w.minLinkExpiry = std::max(0.0, entry.linkExpiryEstimate - (ctx.now - entry.lastHelloTime));
        w.originTimestamp = ctx.now;
        warnings.push_back(std::move(w));
    }
    return warnings;
}

Actions
RoutingAgent::CheckLinks(const NodeContext& ctx)
{
    Actions out;
    if (!m_traits.prediction)
    {
        return out;
    }
    for (auto it = m_flows.begin(); it != m_flows.end();)
    {
        std::erase_if(it->second, [&](const auto& kv) {
            return ctx.now - kv.second.lastSeen > m_config.activeRouteTimeout;
        });
        it = it->second.empty() ? m_flows.erase(it) : std::next(it);
    }

    std::vector<ControlPacket> warnings;
    for (const auto& [next, sources] : m_flows)
    {
        auto n = m_neighbors.find(next);
        if (n == m_neighbors.end())
        {
            continue;
        }
        for (auto& w : PredictLinkFailure(ctx, n->second, m_config.warningMargin))
        {
            warnings.push_back(std::move(w));
        }
    }

    const double holdoff = m_config.warningMargin + m_config.helloInterval;
    for (auto& w : warnings)
    {
        const auto key = std::make_pair(w.destination, w.linkTo);
        auto prev = m_warned.find(key);
        if (prev != m_warned.end() && ctx.now - prev->second < holdoff)
        {
            continue;
        }
        m_warned[key] = ctx.now;
        ++m_counters.warningsEmitted;

        if (w.destination == m_self)
        {
            // Our own first hop: no packet needed.
            Action a = Make(ActionKind::SendWarning, ctx);
            a.nextHop = m_self;
            a.peer = w.linkTo;
            a.reason = Reason::Predicted;
            a.path = w.traversedPath;
            out.push_back(std::move(a));
            WarnRoutes(ctx, m_self, w.linkTo, w.minLinkExpiry, out);
            continue;
        }
        const int index = IndexOf(w.traversedPath, m_self);
        if (index <= 0)
        {
            continue;
        }
        const NodeId back = w.traversedPath[index - 1];
        out.push_back(Transmit(ActionKind::SendWarning, ctx, std::move(w), back));
    }
    return out;
}

Actions
RoutingAgent::ExpireNeighbors(const NodeContext& ctx)
{
    Actions out;
    const double limit = 2.0 * m_config.helloInterval;
    for (auto it = m_neighbors.begin(); it != m_neighbors.end();)
    {
        if (ctx.now - it->second.lastHelloTime > limit)
        {
            Action a = Make(ActionKind::EvictNeighbor, ctx);
            a.peer = it->first;
            a.reason = Reason::Expired;
            out.push_back(std::move(a));
            it = m_neighbors.erase(it);
        }
        else
        {
            ++it;
        }
    }
    return out;
}

std::optional<ControlPacket>
RoutingAgent::MakeHello(const NodeContext& ctx)
{
    if (!m_traits.hellos || !IsActive(ctx.now))
    {
        return std::nullopt;
    }
    ControlPacket hello;
    hello.kind = PacketKind::Hello;
    hello.source = m_self;
    hello.destination = kBroadcast;
    hello.senderKinematics = ctx.kinematics;
    hello.originTimestamp = ctx.now;
    hello.uid = NextUid();
    hello.payloadSize = WireSize(hello);
    return hello;
}

} // namespace rifa
