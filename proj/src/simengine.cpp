/*
 * SPDX-License-Identifier: GPL-2.0-only
 */
#include "rifa/simengine.hpp"

#include "rifa/errors.hpp"

#include <bit>
#include <cmath>

namespace rifa
{

namespace
{

constexpr std::uint64_t kTrafficStream = 2;
constexpr std::uint64_t kChannelStream = 3;
constexpr std::uint64_t kTimerStream = 4;
constexpr std::uint64_t kMobilityStream = 0x100000;
constexpr std::uint64_t kRoutingStream = 0x200000;
constexpr std::uint64_t kDataUidBit = 1ULL << 63;
constexpr double kMobilityTick = 1.0;

std::uint64_t
HashText(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text)
    {
        h = (h ^ c) * 0x100000001b3ULL;
    }
    return h;
}

NodeKinematics
AdvanceScripted(NodeKinematics kin,
                double from,
                double to,
                const std::vector<VelocityChange>& turns,
                std::size_t& next)
{
    while (next < turns.size() && turns[next].time <= to)
    {
        const VelocityChange& turn = turns[next++];
        if (turn.time > from)
        {
            kin = Extrapolate(kin, turn.time - from);
            from = turn.time;
        }
        kin.speed = turn.speed;
        kin.heading = turn.heading;
    }
    return to > from ? Extrapolate(kin, to - from) : kin;
}

} // namespace

std::string_view
ToString(EventKind kind)
{
    switch (kind)
    {
    case EventKind::PacketDelivery:
        return "packet-delivery";
    case EventKind::HelloTimer:
        return "hello-timer";
    case EventKind::MobilityTick:
        return "mobility-tick";
    case EventKind::TrafficTick:
        return "traffic-tick";
    case EventKind::NeighborExpiryCheck:
        return "neighbor-expiry";
    case EventKind::LinkCheck:
        return "link-check";
    case EventKind::RouteTimeout:
        return "route-timeout";
    case EventKind::DeferredSend:
        return "deferred-send";
    case EventKind::LinkFailure:
        return "link-failure";
    case EventKind::SimEnd:
        return "sim-end";
    }
    return "?";
}

const Event&
EventQueue::Schedule(Event event)
{
    event.sequence = m_next++;
    m_heap.push(std::move(event));
    return m_heap.top();
}

Event
EventQueue::Pop()
{
    if (m_heap.empty())
    {
        throw InvalidState("EventQueue::Pop on empty queue");
    }
    Event e = m_heap.top();
    m_heap.pop();
    return e;
}

struct Simulator::Node
{
    Node(NodeId id, const RoutingConfig& config, RandomStream routingRng, RandomStream mobilityRng)
        : rng(mobilityRng),
          agent(id, config, routingRng)
    {
    }

    MobilityStep mob;
    double updatedAt{0.0};
    MobilityMode mode{MobilityMode::Waypoint};
    std::vector<VelocityChange> turns;
    std::size_t nextTurn{0};
    RandomStream rng;
    EnergyState energy;
    bool dead{false};
    RoutingAgent agent;
};

Simulator::Simulator(const Scenario& scenario, SimulatorOptions options)
    : m_scenario(scenario),
      m_options(std::move(options)),
      m_metrics(m_options.keepDebitList),
      m_channelRng(RandomStream::Derive(scenario.seed, kChannelStream)),
      m_timerRng(RandomStream::Derive(scenario.seed, kTimerStream))
{
    ValidateScenario(m_scenario);
    const auto* topo = m_options.topology ? &*m_options.topology : nullptr;
    if (topo != nullptr && topo->nodes.size() != m_scenario.nodeCount)
    {
        throw InvalidArgument("topology override must list node_count nodes");
    }
    if (topo != nullptr && !topo->residuals.empty() && topo->residuals.size() != m_scenario.nodeCount)
    {
        throw InvalidArgument("topology override must give one residual per node");
    }
    if (topo != nullptr && !topo->turns.empty() && topo->mobility != MobilityMode::Scripted)
    {
        throw InvalidArgument("velocity changes need scripted mobility");
    }

    const RoutingConfig config = m_scenario.MakeRoutingConfig();
    const bool still = m_scenario.speedRange.max == 0.0;
    m_nodes.reserve(m_scenario.nodeCount);
    for (NodeId i = 0; i < m_scenario.nodeCount; ++i)
    {
        auto node = std::make_unique<Node>(i,
                                           config,
                                           RandomStream::Derive(m_scenario.seed, kRoutingStream + i),
                                           RandomStream::Derive(m_scenario.seed, kMobilityStream + i));
        if (topo == nullptr)
        {
            node->mob = StartWaypoint(m_scenario.area, m_scenario.speedRange, node->rng);
            node->mode = still ? MobilityMode::Static : MobilityMode::Waypoint;
            if (still)
            {
                node->mob.kinematics.speed = 0.0;
            }
        }
        else
        {
            const NodeKinematics& k = topo->nodes[i];
            if (!m_scenario.area.Contains(k.x, k.y))
            {
                throw InvalidArgument("topology override places a node outside the area");
            }
            node->mode = topo->mobility;
            if (topo->mobility == MobilityMode::Waypoint)
            {
                node->mob = StartWaypointAt(k.x, k.y, m_scenario.area, m_scenario.speedRange, node->rng);
            }
            else
            {
                node->mob.kinematics = k;
                if (topo->mobility == MobilityMode::Static)
                {
                    node->mob.kinematics.speed = 0.0;
                }
                for (const auto& turn : topo->turns)
                {
                    if (turn.node == i)
                    {
                        node->turns.push_back(turn);
                    }
                }
                std::stable_sort(node->turns.begin(), node->turns.end(), [](const auto& a, const auto& b) {
                    return a.time < b.time;
                });
            }
        }
        node->energy = MakeEnergyState(m_scenario.initialEnergy, m_scenario.dangerFraction);
        if (topo != nullptr && !topo->residuals.empty())
        {
            const double r = topo->residuals[i];
            if (r < 0.0 || r > node->energy.initial)
            {
                throw InvalidArgument("topology residual outside [0, initial_energy]");
            }
            node->energy.residual = r;
            node->dead = node->energy.IsDead();
        }
        m_nodes.push_back(std::move(node));
    }

    Schedule(m_scenario.simDuration, EventKind::SimEnd, 0);
    Schedule(std::min(kMobilityTick, m_scenario.simDuration), EventKind::MobilityTick, 0);
    ScheduleTimers();
    SetupTraffic();
}

Simulator::~Simulator() = default;

std::size_t
Simulator::NodeCount() const
{
    return m_nodes.size();
}

const RoutingAgent&
Simulator::Agent(NodeId node) const
{
    return m_nodes.at(node)->agent;
}

const EnergyState&
Simulator::Energy(NodeId node) const
{
    return m_nodes.at(node)->energy;
}

NodeKinematics
Simulator::Kinematics(NodeId node) const
{
    const Node& n = *m_nodes.at(node);
    if (n.updatedAt >= m_now)
    {
        return n.mob.kinematics;
    }
    const double dt = m_now - n.updatedAt;
    switch (n.mode)
    {
    case MobilityMode::Static:
        break;
    case MobilityMode::Waypoint: {
        RandomStream rng = n.rng;
        return AdvanceWaypoint(n.mob.kinematics,
                               n.mob.waypoint,
                               dt,
                               m_scenario.area,
                               m_scenario.speedRange,
                               m_scenario.pauseRange,
                               rng)
            .kinematics;
    }
    case MobilityMode::Scripted: {
        std::size_t next = n.nextTurn;
        return AdvanceScripted(n.mob.kinematics, n.updatedAt, m_now, n.turns, next);
    }
    }
    return n.mob.kinematics;
}

void
Simulator::Schedule(double time,
                    EventKind kind,
                    NodeId subject,
                    std::shared_ptr<const ControlPacket> payload,
                    NodeId sender,
                    std::uint64_t aux)
{
    if (time < m_now)
    {
        throw InvariantViolation("event scheduled in the past");
    }
    Event e;
    e.time = time;
    e.kind = kind;
    e.subject = subject;
    e.payload = std::move(payload);
    e.sender = sender;
    e.aux = aux;
    m_queue.Schedule(std::move(e));
}

void
Simulator::ScheduleTimers()
{
    const ProtocolTraits traits = TraitsFor(m_scenario.protocol, m_scenario.failurePrediction);
    if (!traits.hellos)
    {
        return;
    }
    const double ti = m_scenario.helloInterval;
    for (NodeId i = 0; i < m_nodes.size(); ++i)
    {
        const double phase = m_timerRng.Uniform(0.0, ti);
        Schedule(phase, EventKind::HelloTimer, i);
        Schedule(phase + ti, EventKind::NeighborExpiryCheck, i);
        if (traits.prediction)
        {
            Schedule(m_timerRng.Uniform(0.0, ti / 2.0), EventKind::LinkCheck, i);
        }
    }
}

void
Simulator::SetupTraffic()
{
    if (m_options.topology && m_options.topology->flows)
    {
        m_flows = *m_options.topology->flows;
        for (const auto& f : m_flows)
        {
            if (f.source >= m_nodes.size() || f.destination >= m_nodes.size() || f.source == f.destination)
            {
                throw InvalidArgument("flow endpoints must be distinct existing nodes");
            }
        }
    }
    else
    {
        RandomStream rng = RandomStream::Derive(m_scenario.seed, kTrafficStream);
        const std::uint32_t count = m_scenario.EffectiveFlowCount();
        const std::uint32_t burst =
            m_scenario.fileSizeKb > 0.0
                ? static_cast<std::uint32_t>(std::ceil(m_scenario.fileSizeKb * 1024.0 / m_scenario.packetSize))
                : 0;
        const auto n = static_cast<std::uint64_t>(m_nodes.size());
        for (std::uint32_t f = 0; f < count; ++f)
        {
            FlowSpec spec;
            spec.source = static_cast<NodeId>(rng.UniformIndex(n));
            auto dst = static_cast<NodeId>(rng.UniformIndex(n - 1));
            spec.destination = dst >= spec.source ? dst + 1 : dst;
            spec.start = 1.0 + rng.Uniform(0.0, 4.0);
            spec.stop = m_scenario.simDuration - 1.0;
            spec.packets = burst;
            m_flows.push_back(spec);
        }
    }
    m_flowSent.assign(m_flows.size(), 0);
    for (std::size_t f = 0; f < m_flows.size(); ++f)
    {
        const FlowSpec& spec = m_flows[f];
        if (spec.start <= spec.stop || spec.packets > 0)
        {
            if (spec.start < m_scenario.simDuration)
            {
                Schedule(spec.start, EventKind::TrafficTick, spec.source, nullptr, kNoNode, f);
            }
        }
    }
}

void
Simulator::UpdatePosition(NodeId id)
{
    Node& n = *m_nodes[id];
    if (n.updatedAt >= m_now)
    {
        return;
    }
    const double dt = m_now - n.updatedAt;
    switch (n.mode)
    {
    case MobilityMode::Static:
        break;
    case MobilityMode::Waypoint:
        n.mob = AdvanceWaypoint(n.mob.kinematics,
                                n.mob.waypoint,
                                dt,
                                m_scenario.area,
                                m_scenario.speedRange,
                                m_scenario.pauseRange,
                                n.rng);
        break;
    case MobilityMode::Scripted:
        n.mob.kinematics = AdvanceScripted(n.mob.kinematics, n.updatedAt, m_now, n.turns, n.nextTurn);
        if (!m_scenario.area.Contains(n.mob.kinematics.x, n.mob.kinematics.y))
        {
            throw InvariantViolation("scripted node left the simulation area");
        }
        break;
    }
    n.updatedAt = m_now;
}

NodeContext
Simulator::Context(NodeId id)
{
    UpdatePosition(id);
    const Node& n = *m_nodes[id];
    return NodeContext{id, m_now, n.mob.kinematics, n.energy};
}

void
Simulator::Digest(std::uint64_t value)
{
    for (int i = 0; i < 8; ++i)
    {
        m_digest = (m_digest ^ ((value >> (8 * i)) & 0xff)) * 0x100000001b3ULL;
    }
}

void
Simulator::Log(NodeId id,
               std::string_view event,
               const ControlPacket* packet,
               NodeId peer,
               NodeId nextHop,
               std::string_view reason,
               const NodePath* path)
{
    Digest(std::bit_cast<std::uint64_t>(m_now));
    Digest(id);
    Digest(HashText(event));
    Digest((static_cast<std::uint64_t>(peer) << 32) | nextHop);
    if (packet != nullptr)
    {
        Digest(packet->uid);
    }
    if (m_options.sink == nullptr)
    {
        return;
    }
    const Node& n = *m_nodes[id];
    LogRecord r;
    r.time = m_now;
    r.node = id;
    r.event = event;
    r.packet = packet;
    r.peer = peer;
    r.nextHop = nextHop;
    r.reason = reason;
    r.residual = n.energy.residual;
    r.threshold = n.energy.dangerThreshold;
    const NodeKinematics k = Kinematics(id);
    r.x = k.x;
    r.y = k.y;
    r.path = path;
    m_options.sink->Record(r);
}

void
Simulator::Charge(NodeId id, DebitKind kind, double basis)
{
    Node& n = *m_nodes[id];
    if (n.dead)
    {
        return;
    }
    const double taken = ApplyDebit(n.energy, kind, basis, m_scenario.radioCosts);
    m_metrics.RecordDebit(id, taken);
    if (n.energy.IsDead())
    {
        n.dead = true;
        Log(id, "died", nullptr);
    }
}

void
Simulator::Send(NodeId sender, const std::shared_ptr<const ControlPacket>& pkt, NodeId nextHop)
{
    if (m_nodes[sender]->dead)
    {
        return;
    }
    UpdatePosition(sender);
    Charge(sender, DebitKind::Tx, PacketUnits(pkt->payloadSize));
    if (pkt->kind == PacketKind::Data)
    {
        ++m_dataTx;
    }
    else
    {
        ++m_controlTx;
    }
    Log(sender, "tx", pkt.get(), kNoNode, nextHop);

    const double tr = m_scenario.channel.tr;
    const double loss = m_scenario.channel.lossProbability;
    const double arrival = m_now + m_scenario.channel.perHopLatency;
    const NodeKinematics& from = m_nodes[sender]->mob.kinematics;

    const auto offer = [&](NodeId to) {
        if (m_channelRng.Uniform01() < loss)
        {
            Log(to, "lost", pkt.get(), sender);
            return;
        }
        Log(to, "air", pkt.get(), sender);
        Schedule(arrival, EventKind::PacketDelivery, to, pkt, sender);
    };

    if (nextHop == kBroadcast)
    {
        for (NodeId j = 0; j < m_nodes.size(); ++j)
        {
            if (j == sender || m_nodes[j]->dead)
            {
                continue;
            }
            UpdatePosition(j);
            if (Distance(from, m_nodes[j]->mob.kinematics) <= tr)
            {
                offer(j);
            }
        }
        return;
    }

    bool reachable = nextHop < m_nodes.size() && !m_nodes[nextHop]->dead;
    if (reachable)
    {
        UpdatePosition(nextHop);
        reachable = Distance(from, m_nodes[nextHop]->mob.kinematics) <= tr;
    }
    if (!reachable)
    {
        Schedule(arrival, EventKind::LinkFailure, sender, pkt, kNoNode, nextHop);
        return;
    }
    offer(nextHop);
}

void
Simulator::Execute(NodeId id, const Actions& actions)
{
    for (const Action& a : actions)
    {
        const bool tx = IsTransmission(a.kind) && a.packet != nullptr;
        Log(id,
            ToString(a.kind),
            a.packet.get(),
            a.peer,
            tx ? a.nextHop : kNoNode,
            a.reason == Reason::None ? std::string_view{} : ToString(a.reason),
            a.path.empty() ? nullptr : &a.path);
        if (m_nodes[id]->dead)
        {
            continue;
        }
        if (tx)
        {
            if (a.delay > 0.0)
            {
                Schedule(m_now + a.delay, EventKind::DeferredSend, id, a.packet, kNoNode, a.nextHop);
            }
            else
            {
                Send(id, a.packet, a.nextHop);
            }
        }
        else if (a.kind == ActionKind::ScheduleDiscoveryTimeout)
        {
            Schedule(m_now + a.delay,
                     EventKind::RouteTimeout,
                     id,
                     nullptr,
                     kNoNode,
                     (static_cast<std::uint64_t>(a.peer) << 32) | a.sequence);
        }
        else if (a.kind == ActionKind::DeliverData && a.packet != nullptr)
        {
            m_metrics.RecordReceived(a.packet->uid, m_now);
        }
    }
}

void
Simulator::Generate(std::size_t f)
{
    const FlowSpec& spec = m_flows[f];
    Node& src = *m_nodes[spec.source];
    if (src.dead)
    {
        return;
    }
    ControlPacket data;
    data.kind = PacketKind::Data;
    data.source = spec.source;
    data.destination = spec.destination;
    data.payloadSize = m_scenario.packetSize;
    data.originTimestamp = m_now;
    data.uid = kDataUidBit | (static_cast<std::uint64_t>(f) << 32) | m_flowSent[f];
    ++m_flowSent[f];
    m_metrics.RecordSent(data.uid, m_now);
    Log(spec.source, "app-send", &data, spec.destination);
    const NodeContext ctx = Context(spec.source);
    Execute(spec.source, src.agent.SendData(ctx, std::move(data)));

    const double next = m_now + 1.0 / m_scenario.cbrRate;
    const bool more = spec.packets > 0 ? m_flowSent[f] < spec.packets : next <= spec.stop;
    if (more && next < m_scenario.simDuration)
    {
        Schedule(next, EventKind::TrafficTick, spec.source, nullptr, kNoNode, f);
    }
}

void
Simulator::Dispatch(const Event& e)
{
    const double ti = m_scenario.helloInterval;
    switch (e.kind)
    {
    case EventKind::PacketDelivery: {
        if (m_nodes[e.subject]->dead)
        {
            return;
        }
        Charge(e.subject, DebitKind::Rx, PacketUnits(e.payload->payloadSize));
        if (m_nodes[e.subject]->dead)
        {
            return;
        }
        const NodeContext ctx = Context(e.subject);
        Log(e.subject, "rx", e.payload.get(), e.sender);
        Execute(e.subject, m_nodes[e.subject]->agent.HandlePacket(ctx, *e.payload));
        return;
    }
    case EventKind::HelloTimer: {
        Node& n = *m_nodes[e.subject];
        if (n.dead)
        {
            return;
        }
        if (auto hello = n.agent.MakeHello(Context(e.subject)))
        {
            Send(e.subject, std::make_shared<const ControlPacket>(std::move(*hello)), kBroadcast);
        }
        Schedule(m_now + ti, EventKind::HelloTimer, e.subject);
        return;
    }
    case EventKind::NeighborExpiryCheck: {
        Node& n = *m_nodes[e.subject];
        if (n.dead)
        {
            return;
        }
        Execute(e.subject, n.agent.ExpireNeighbors(Context(e.subject)));
        Schedule(m_now + ti, EventKind::NeighborExpiryCheck, e.subject);
        return;
    }
    case EventKind::LinkCheck: {
        Node& n = *m_nodes[e.subject];
        if (n.dead)
        {
            return;
        }
        Execute(e.subject, n.agent.CheckLinks(Context(e.subject)));
        Schedule(m_now + ti / 2.0, EventKind::LinkCheck, e.subject);
        return;
    }
    case EventKind::MobilityTick: {
        const double idle = m_now - m_lastIdle;
        m_lastIdle = m_now;
        for (NodeId i = 0; i < m_nodes.size(); ++i)
        {
            UpdatePosition(i);
            if (idle > 0.0)
            {
                Charge(i, DebitKind::Idle, idle);
            }
        }
        if (m_now + kMobilityTick <= m_scenario.simDuration)
        {
            Schedule(m_now + kMobilityTick, EventKind::MobilityTick, 0);
        }
        return;
    }
    case EventKind::TrafficTick:
        Generate(static_cast<std::size_t>(e.aux));
        return;
    case EventKind::RouteTimeout: {
        Node& n = *m_nodes[e.subject];
        if (n.dead)
        {
            return;
        }
        const auto dest = static_cast<NodeId>(e.aux >> 32);
        const auto seq = static_cast<std::uint32_t>(e.aux & 0xffffffffU);
        Execute(e.subject, n.agent.OnDiscoveryTimeout(Context(e.subject), dest, seq));
        return;
    }
    case EventKind::DeferredSend:
        Send(e.subject, e.payload, static_cast<NodeId>(e.aux));
        return;
    case EventKind::LinkFailure: {
        Node& n = *m_nodes[e.subject];
        if (n.dead)
        {
            return;
        }
        const auto next = static_cast<NodeId>(e.aux);
        Log(e.subject, "link-fail", e.payload.get(), next);
        Execute(e.subject, n.agent.OnUnicastFailure(Context(e.subject), *e.payload, next));
        return;
    }
    case EventKind::SimEnd: {
        const double idle = m_now - m_lastIdle;
        m_lastIdle = m_now;
        for (NodeId i = 0; i < m_nodes.size(); ++i)
        {
            UpdatePosition(i);
            if (idle > 0.0)
            {
                Charge(i, DebitKind::Idle, idle);
            }
        }
        m_finished = true;
        return;
    }
    }
}

MetricsReport
Simulator::Run()
{
    if (m_finished)
    {
        throw InvalidState("Simulator::Run called twice");
    }
    while (!m_queue.Empty() && !m_finished)
    {
        const Event e = m_queue.Pop();
        m_now = e.time;
        ++m_events;
        Dispatch(e);
    }
    return BuildReport();
}

MetricsReport
Simulator::BuildReport()
{
    MetricsReport r;
    r.protocol = std::string(ToString(m_scenario.protocol));
    r.seed = m_scenario.seed;
    r.nodeCount = m_scenario.nodeCount;
    r.simDuration = m_scenario.simDuration;
    r.flowCount = static_cast<std::uint32_t>(m_flows.size());
    r.packetsSent = m_metrics.PacketsSent();
    r.packetsReceived = m_metrics.PacketsReceived();
    r.pdrPercent = Pdr(m_metrics);
    r.e2edMs = E2edMs(m_metrics);
    r.ledgerJoules = m_metrics.DebitTotal();
    r.controlTransmissions = m_controlTx;
    r.dataTransmissions = m_dataTx;
    r.eventsProcessed = m_events;
    r.eventDigest = m_digest;

    std::vector<EnergyState> energies;
    energies.reserve(m_nodes.size());
    for (const auto& n : m_nodes)
    {
        energies.push_back(n->energy);
        r.residuals.push_back(n->energy.residual);
        if (n->dead)
        {
            ++r.deadNodes;
        }
        const RoutingCounters& c = n->agent.Counters();
        r.routesDiscovered += c.routesInstalled;
        r.rreqOriginated += c.rreqOriginated;
        r.warningsEmitted += c.warningsEmitted;
        r.rerrSent += c.rerrSent;
        r.routeSwitches += c.routeSwitches;
        r.dataDropped += c.dataDropped;
        r.dangerDiscards += c.dangerDiscards;
        r.zoneInner += c.zoneInner;
        r.zoneMiddle += c.zoneMiddle;
        r.zoneOuter += c.zoneOuter;
    }
    r.econsJoules = NetworkEnergyConsumed(energies);
    return r;
}

MetricsReport
RunScenario(const Scenario& scenario, SimulatorOptions options)
{
    Simulator sim(scenario, std::move(options));
    return sim.Run();
}

} // namespace rifa
