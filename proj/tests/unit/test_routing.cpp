/*
 * SPDX-License-Identifier: GPL-2.0-only
 */
#include "rifa/errors.hpp"
#include "rifa/routing.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace rifa;

namespace
{

constexpr NodeId S = 0;
constexpr NodeId A = 1;
constexpr NodeId B = 2;
constexpr NodeId C = 3;
constexpr NodeId D = 9;

const double kInf = std::numeric_limits<double>::infinity();

RoutingConfig
Config(Protocol protocol = Protocol::Rifa, bool prediction = true)
{
    RoutingConfig c;
    c.protocol = protocol;
    c.failurePrediction = prediction;
    return c;
}

NodeContext
Ctx(NodeId self, double now, double residual = 100.0, NodeKinematics kin = {})
{
    NodeContext ctx;
    ctx.self = self;
    ctx.now = now;
    ctx.kinematics = kin;
    ctx.energy = MakeEnergyState(100.0, 0.2);
    ctx.energy.residual = residual;
    return ctx;
}

ControlPacket
Rreq(NodePath path, NodeId dest, std::uint32_t seq = 1)
{
    ControlPacket p;
    p.kind = PacketKind::Rreq;
    p.source = path.front();
    p.destination = dest;
    p.sequence = seq;
    p.traversedPath = std::move(path);
    p.minResidualEnergy = 100.0;
    p.minLinkExpiry = kInf;
    return p;
}

ControlPacket
Rrep(NodePath path, std::uint32_t seq = 1, double let = 10.0, double energy = 50.0)
{
    ControlPacket p;
    p.kind = PacketKind::Rrep;
    p.source = path.front();
    p.destination = path.back();
    p.sequence = seq;
    p.traversedPath = std::move(path);
    p.minResidualEnergy = energy;
    p.minLinkExpiry = let;
    return p;
}

ControlPacket
Hello(NodeId from, NodeKinematics kin, double now)
{
    ControlPacket p;
    p.kind = PacketKind::Hello;
    p.source = from;
    p.destination = kBroadcast;
    p.senderKinematics = kin;
    p.originTimestamp = now;
    return p;
}

ControlPacket
Data(NodeId dest)
{
    ControlPacket p;
    p.kind = PacketKind::Data;
    p.destination = dest;
    p.payloadSize = 512;
    return p;
}

ControlPacket
Notice(PacketKind kind, NodeId reporter, NodePath dataPath, NodeId from, NodeId to)
{
    ControlPacket p;
    p.kind = kind;
    p.source = reporter;
    p.destination = dataPath.front();
    p.traversedPath = std::move(dataPath);
    p.linkFrom = from;
    p.linkTo = to;
    p.minLinkExpiry = 1.0;
    return p;
}

std::size_t
Count(const Actions& actions, ActionKind kind)
{
    return std::count_if(actions.begin(), actions.end(), [&](const Action& a) { return a.kind == kind; });
}

const Action*
First(const Actions& actions, ActionKind kind)
{
    auto it = std::find_if(actions.begin(), actions.end(), [&](const Action& a) { return a.kind == kind; });
    return it == actions.end() ? nullptr : &*it;
}

RouteEntry
Route(NodePath path, double lifetime, double energy, double now = 0.0, std::uint32_t seq = 1)
{
    return RouteEntry::FromPath(std::move(path), lifetime, energy, now, seq);
}

} // namespace

TEST_CASE("hello inserts a neighbor and stationary links never expire")
{
    RoutingAgent agent(A, Config(), RandomStream(1));
    const NodeContext ctx = Ctx(A, 1.0, 100.0, {100.0, 100.0, 0.0, 0.0});
    const Actions out = agent.HandleHello(ctx, Hello(B, {150.0, 100.0, 0.0, 0.0}, 1.0));
    REQUIRE(Count(out, ActionKind::UpsertNeighbor) == 1);
    const NeighborEntry& e = agent.Neighbors().at(B);
    CHECK(std::isinf(e.linkExpiryEstimate));
    CHECK(e.zone == Zone::Inner);
    CHECK_FALSE(LinkFailureImminent(e, 1000.0, 1.5));

    CHECK(agent.ExpireNeighbors(Ctx(A, 3.0)).empty());
    const Actions gone = agent.ExpireNeighbors(Ctx(A, 3.01));
    REQUIRE(Count(gone, ActionKind::EvictNeighbor) == 1);
    CHECK(gone.front().peer == B);
    CHECK(agent.Neighbors().empty());
}

TEST_CASE("zones split the range in thirds")
{
    CHECK(ClassifyZone(0.0, 300.0) == Zone::Inner);
    CHECK(ClassifyZone(99.9, 300.0) == Zone::Inner);
    CHECK(ClassifyZone(100.0, 300.0) == Zone::Middle);
    CHECK(ClassifyZone(200.0, 300.0) == Zone::Outer);
}

TEST_CASE("danger nodes discard route requests exactly once")
{
    RoutingAgent agent(A, Config(), RandomStream(1));
    const Actions out = agent.HandleRreq(Ctx(A, 1.0, 10.0), Rreq({S}, D));
    REQUIRE(out.size() == 1);
    CHECK(out.front().kind == ActionKind::Discard);
    CHECK(out.front().reason == Reason::DangerLevel);
    CHECK(out.front().residual == 10.0);
    CHECK(out.front().threshold == 20.0);
    CHECK(agent.Counters().dangerDiscards == 1);
}

TEST_CASE("baselines forward regardless of energy")
{
    for (Protocol p : {Protocol::BaselineFlood, Protocol::BaselineMinHop})
    {
        RoutingAgent agent(A, Config(p), RandomStream(1));
        const Actions out = agent.HandleRreq(Ctx(A, 1.0, 10.0), Rreq({S}, D));
        CHECK(Count(out, ActionKind::ForwardRreq) == 1);
        CHECK(Count(out, ActionKind::Discard) == 0);
    }
}

TEST_CASE("forwarded requests extend the path and the minima")
{
    RoutingAgent agent(A, Config(), RandomStream(1));
    const NodeContext ctx = Ctx(A, 1.0, 70.0, {100.0, 100.0, 0.0, 0.0});
    ControlPacket req = Rreq({S}, D);
    req.senderKinematics = NodeKinematics{0.0, 100.0, 20.0, 0.0};
    const Actions out = agent.HandleRreq(ctx, req);
    const Action* fwd = First(out, ActionKind::ForwardRreq);
    REQUIRE(fwd != nullptr);
    CHECK(fwd->packet->traversedPath == NodePath{S, A});
    CHECK(fwd->packet->minResidualEnergy == 70.0);
    // Mover starts 100 m behind, passes and leaves 200 m ahead: 300 m at 20 m/s.
    CHECK(fwd->packet->minLinkExpiry == doctest::Approx(15.0));
    CHECK(fwd->delay >= 0.0);
    CHECK(fwd->delay <= agent.Config().rreqJitter);
}

TEST_CASE("duplicate requests are discarded")
{
    RoutingAgent agent(A, Config(), RandomStream(1));
    CHECK(Count(agent.HandleRreq(Ctx(A, 1.0), Rreq({S}, D)), ActionKind::ForwardRreq) == 1);
    const Actions again = agent.HandleRreq(Ctx(A, 1.1), Rreq({S, B}, D));
    CHECK(Count(again, ActionKind::ForwardRreq) == 0);
    const Action* d = First(again, ActionKind::Discard);
    REQUIRE(d != nullptr);
    CHECK(d->reason == Reason::Duplicate);

    const Actions own = agent.HandleRreq(Ctx(A, 1.2), Rreq({S, A, B}, D, 2));
    REQUIRE(First(own, ActionKind::Discard) != nullptr);
    CHECK(First(own, ActionKind::Discard)->reason == Reason::OwnPacket);
}

TEST_CASE("destination answers once per neighbor with link-disjoint paths")
{
    RoutingAgent agent(D, Config(), RandomStream(1));
    const Actions first = agent.HandleRreq(Ctx(D, 1.0), Rreq({S, A}, D));
    const Action* rrep = First(first, ActionKind::SendRrep);
    REQUIRE(rrep != nullptr);
    CHECK(rrep->nextHop == A);
    CHECK(rrep->packet->traversedPath == NodePath{S, A, D});

    CHECK(Count(agent.HandleRreq(Ctx(D, 1.0), Rreq({S, B}, D)), ActionKind::SendRrep) == 1);

    const Actions viaA = agent.HandleRreq(Ctx(D, 1.0), Rreq({S, C, A}, D));
    REQUIRE(First(viaA, ActionKind::Discard) != nullptr);
    CHECK(First(viaA, ActionKind::Discard)->reason == Reason::Duplicate);

    const Actions shared = agent.HandleRreq(Ctx(D, 1.0), Rreq({S, A, C}, D));
    REQUIRE(First(shared, ActionKind::Discard) != nullptr);
    CHECK(First(shared, ActionKind::Discard)->reason == Reason::NotDisjoint);
}

TEST_CASE("baseline destination answers only the first copy")
{
    RoutingAgent agent(D, Config(Protocol::BaselineFlood), RandomStream(1));
    CHECK(Count(agent.HandleRreq(Ctx(D, 1.0), Rreq({S, A}, D)), ActionKind::SendRrep) == 1);
    CHECK(Count(agent.HandleRreq(Ctx(D, 1.0), Rreq({S, B}, D)), ActionKind::SendRrep) == 0);
}

TEST_CASE("reply at the source installs one route and deposits pheromone")
{
    RoutingAgent agent(S, Config(), RandomStream(1));
    const Actions out = agent.HandleRrep(Ctx(S, 2.0), Rrep({S, A, D}));
    CHECK(Count(out, ActionKind::InstallRoute) == 1);
    CHECK(Count(out, ActionKind::DepositPheromone) == 1);
    const auto* routes = agent.Table().Find(D);
    REQUIRE(routes != nullptr);
    REQUIRE(routes->size() == 1);
    CHECK(routes->front().path == NodePath{S, A, D});
    CHECK(routes->front().hopCount == 2);
    CHECK(routes->front().pathLifetime == 10.0);
    CHECK(routes->front().ExpiresAt() == 12.0);
    CHECK(routes->front().minResidualEnergy == 50.0);

    const PheromoneTable* ph = agent.Pheromones(D);
    REQUIRE(ph != nullptr);
    const NodePath p{S, A, D};
    CHECK(ph->Intensity(PathFingerprint(p)) == 2.0);

    const Actions overlap = agent.HandleRrep(Ctx(S, 2.0), Rrep({S, A, B, D}));
    REQUIRE(First(overlap, ActionKind::RejectRoute) != nullptr);
    CHECK(First(overlap, ActionKind::RejectRoute)->reason == Reason::NotDisjoint);
    CHECK(agent.Table().Find(D)->size() == 1);

    CHECK(Count(agent.HandleRrep(Ctx(S, 2.0), Rrep({S, C, D})), ActionKind::InstallRoute) == 1);
    CHECK(agent.Table().Find(D)->size() == 2);
    CHECK(agent.Table().IsMutuallyDisjoint(D));

    const Actions expired = agent.HandleRrep(Ctx(S, 2.0), Rrep({S, B, D}, 1, 0.0));
    REQUIRE(First(expired, ActionKind::RejectRoute) != nullptr);
    CHECK(First(expired, ActionKind::RejectRoute)->reason == Reason::Expired);
}

TEST_CASE("intermediate reply handling")
{
    RoutingAgent agent(A, Config(), RandomStream(1));
    const Actions orphan = agent.HandleRrep(Ctx(A, 1.0), Rrep({S, A, D}));
    REQUIRE(First(orphan, ActionKind::Discard) != nullptr);
    CHECK(First(orphan, ActionKind::Discard)->reason == Reason::NoReverseRoute);

    agent.HandleRreq(Ctx(A, 1.0), Rreq({S}, D));
    const Actions out = agent.HandleRrep(Ctx(A, 1.1), Rrep({S, A, D}));
    const Action* fwd = First(out, ActionKind::ForwardRrep);
    REQUIRE(fwd != nullptr);
    CHECK(fwd->nextHop == S);
    REQUIRE(First(out, ActionKind::DepositPheromone) != nullptr);
    CHECK(First(out, ActionKind::DepositPheromone)->path == NodePath{A, D});
    CHECK(Count(out, ActionKind::InstallRoute) == 1);

    // The cached suffix now answers a later request from another source.
    const Actions cached = agent.HandleRreq(Ctx(A, 1.5), Rreq({C}, D, 7));
    const Action* reply = First(cached, ActionKind::SendRrep);
    REQUIRE(reply != nullptr);
    CHECK(reply->packet->traversedPath == NodePath{C, A, D});
    CHECK(Count(cached, ActionKind::ForwardRreq) == 0);
}

TEST_CASE("priority of normalized factors")
{
    const OpiWeights w;
    CHECK(RoutePriority(RouteFactors{1.0, 1.0, 1.0}, w) == doctest::Approx(1.0));
    CHECK(RoutePriority(RouteFactors{0.0, 0.0, 0.25}, w) == doctest::Approx(0.05));
    CHECK(RoutePriority(RouteFactors{0.9, 0.4, 0.5}, w) == doctest::Approx(0.36 + 0.16 + 0.1));

    const RouteEntry a = Route({S, A, D}, 10.0, 80.0);
    const RouteEntry b = Route({S, B, C, A, D}, 20.0, 40.0);
    const std::vector<const RouteEntry*> both{&a, &b};
    const CandidateBounds bounds = ComputeBounds(both, 0.0);
    const RouteFactors fa = NormalizedFactors(a, bounds, 0.0);
    const RouteFactors fb = NormalizedFactors(b, bounds, 0.0);
    CHECK(fa.lifetime == 0.0);
    CHECK(fa.energy == 1.0);
    CHECK(fa.inverseHops == 0.5);
    CHECK(fb.lifetime == 1.0);
    CHECK(fb.energy == 0.0);
    CHECK(fb.inverseHops == 0.25);

    const std::vector<const RouteEntry*> one{&a};
    const RouteFactors solo = NormalizedFactors(a, ComputeBounds(one, 0.0), 0.0);
    CHECK(solo.lifetime == 1.0);
    CHECK(solo.energy == 1.0);
}

TEST_CASE("selection picks the highest priority and honours expiry")
{
    RandomStream rng(1);
    const OpiWeights w;

    RoutingTable single;
    single.InstallDisjoint(D, Route({S, A, D}, 5.0, 60.0));
    CHECK(SelectRoute(single, D, 1.0, SelectionPolicy::Priority, w, nullptr, rng).path == NodePath{S, A, D});
    CHECK(single.Find(D)->front().inUse);
    CHECK_THROWS_AS(SelectRoute(single, D, 5.0, SelectionPolicy::Priority, w, nullptr, rng), NoRoute);
    CHECK_THROWS_AS(SelectRoute(single, C, 1.0, SelectionPolicy::Priority, w, nullptr, rng), NoRoute);

    RoutingTable hops;
    hops.InstallDisjoint(D, Route({S, A, B, C, D}, 10.0, 60.0));
    hops.InstallDisjoint(D, Route({S, 5, D}, 10.0, 60.0));
    CHECK(SelectRoute(hops, D, 1.0, SelectionPolicy::Priority, w, nullptr, rng).hopCount == 2);

    RoutingTable tradeoff;
    tradeoff.InstallDisjoint(D, Route({S, A, D}, 30.0, 20.0));
    tradeoff.InstallDisjoint(D, Route({S, B, D}, 10.0, 90.0));
    tradeoff.InstallDisjoint(D, Route({S, C, 6, D}, 25.0, 85.0));
    // 0.4 * 15/20 + 0.4 * 65/70 + 0.2 / 3 beats both two-hop routes.
    CHECK(SelectRoute(tradeoff, D, 0.0, SelectionPolicy::Priority, w, nullptr, rng).path == NodePath{S, C, 6, D});
    CHECK(SelectRoute(tradeoff, D, 0.0, SelectionPolicy::MinHop, w, nullptr, rng).hopCount == 2);
}

TEST_CASE("ties are broken in proportion to pheromone")
{
    RoutingTable table;
    RouteEntry r1 = Route({S, A, D}, 10.0, 60.0);
    RouteEntry r2 = Route({S, B, D}, 10.0, 60.0);
    PheromoneTable ph(1.0);
    ph.AddPath(r1.id, 3.0);
    ph.AddPath(r2.id, 1.0);
    const PathId first = r1.id;
    table.InstallDisjoint(D, std::move(r1));
    table.InstallDisjoint(D, std::move(r2));

    RandomStream rng(42);
    constexpr int draws = 100000;
    int hits = 0;
    for (int i = 0; i < draws; ++i)
    {
        hits += SelectRoute(table, D, 1.0, SelectionPolicy::Priority, OpiWeights{}, &ph, rng).id == first ? 1 : 0;
    }
    CHECK(std::abs(static_cast<double>(hits) / draws - 0.75) <= 0.01);
}

TEST_CASE("the chosen route is invariant under positive weight scaling")
{
    RandomStream gen(5);
    for (int trial = 0; trial < 200; ++trial)
    {
        RoutingTable table;
        const int n = 2 + static_cast<int>(gen.UniformIndex(4));
        for (int k = 0; k < n; ++k)
        {
            NodePath path{S};
            const int mids = 1 + static_cast<int>(gen.UniformIndex(4));
            for (int m = 0; m < mids; ++m)
            {
                path.push_back(static_cast<NodeId>(100 + 10 * k + m));
            }
            path.push_back(D);
            table.InstallDisjoint(D, Route(path, gen.Uniform(1.0, 50.0), gen.Uniform(20.0, 100.0)));
        }
        const OpiWeights w{gen.Uniform01(), gen.Uniform01(), gen.Uniform01()};
        const double k = gen.Uniform(0.1, 10.0);
        const OpiWeights scaled{k * w.lifetime, k * w.energy, k * w.hops};
        RandomStream r1(1);
        RandomStream r2(1);
        const PathId a = SelectRoute(table, D, 0.0, SelectionPolicy::Priority, w, nullptr, r1).id;
        const PathId b = SelectRoute(table, D, 0.0, SelectionPolicy::Priority, scaled, nullptr, r2).id;
        CHECK(a == b);
    }
}

TEST_CASE("failure prediction threshold")
{
    NeighborEntry still;
    still.linkExpiryEstimate = kInf;
    CHECK_FALSE(LinkFailureImminent(still, 1e9, 3.0));

    NeighborEntry e;
    e.lastHelloTime = 10.0;
    e.linkExpiryEstimate = 2.0;
    CHECK(LinkFailureImminent(e, 10.0, 3.0));
    e.linkExpiryEstimate = 10.0;
    CHECK_FALSE(LinkFailureImminent(e, 10.0, 1.5));
    CHECK_FALSE(LinkFailureImminent(e, 18.4, 1.5));
    CHECK(LinkFailureImminent(e, 18.5, 1.5));
}

TEST_CASE("a forwarding node warns the source of a failing next hop")
{
    RoutingAgent agent(A, Config(), RandomStream(1));
    const NodeKinematics here{100.0, 100.0, 0.0, 0.0};
    ControlPacket data = Data(D);
    data.source = S;
    data.traversedPath = {S, A, D};
    REQUIRE(Count(agent.HandleData(Ctx(A, 5.0, 100.0, here), data), ActionKind::ForwardData) == 1);

    // D sits 190 m away moving off at 20 m/s: half a second left.
    agent.HandleHello(Ctx(A, 5.0, 100.0, here), Hello(D, {290.0, 100.0, 20.0, 0.0}, 5.0));
    const Actions out = agent.CheckLinks(Ctx(A, 5.0, 100.0, here));
    const Action* w = First(out, ActionKind::SendWarning);
    REQUIRE(w != nullptr);
    CHECK(w->nextHop == S);
    CHECK(w->packet->destination == S);
    CHECK(w->packet->linkFrom == A);
    CHECK(w->packet->linkTo == D);
    CHECK(w->packet->minLinkExpiry == doctest::Approx(0.5));
    CHECK(agent.CheckLinks(Ctx(A, 5.1, 100.0, here)).empty());

    RoutingAgent quiet(A, Config(Protocol::Rifa, false), RandomStream(1));
    quiet.HandleData(Ctx(A, 5.0, 100.0, here), data);
    quiet.HandleHello(Ctx(A, 5.0, 100.0, here), Hello(D, {290.0, 100.0, 20.0, 0.0}, 5.0));
    CHECK(quiet.CheckLinks(Ctx(A, 5.0, 100.0, here)).empty());
}

TEST_CASE("a warning with a disjoint backup switches without a new discovery")
{
    RoutingAgent agent(S, Config(), RandomStream(1));
    agent.HandleRrep(Ctx(S, 1.0), Rrep({S, A, D}));
    agent.HandleRrep(Ctx(S, 1.0), Rrep({S, B, D}));
    const Actions out =
        agent.HandleLinkWarning(Ctx(S, 2.0), Notice(PacketKind::LinkWarning, A, {S, A, D}, A, D));
    CHECK(Count(out, ActionKind::SwitchRoute) == 1);
    CHECK(First(out, ActionKind::SwitchRoute)->path == NodePath{S, B, D});
    CHECK(Count(out, ActionKind::OriginateRreq) == 0);
    REQUIRE(agent.Table().Find(D)->size() == 1);
    CHECK(agent.Table().Find(D)->front().path == NodePath{S, B, D});
}

TEST_CASE("a warning without a backup starts a fresh discovery")
{
    RoutingAgent agent(S, Config(), RandomStream(1));
    const Actions first = agent.SendData(Ctx(S, 1.0), Data(D));
    REQUIRE(First(first, ActionKind::OriginateRreq) != nullptr);
    const std::uint32_t seq = First(first, ActionKind::OriginateRreq)->sequence;
    const Actions installed = agent.HandleRrep(Ctx(S, 1.1), Rrep({S, A, D}, seq));
    CHECK(Count(installed, ActionKind::SendData) == 1);

    const Actions out =
        agent.HandleLinkWarning(Ctx(S, 2.0), Notice(PacketKind::LinkWarning, A, {S, A, D}, A, D));
    const Action* rreq = First(out, ActionKind::OriginateRreq);
    REQUIRE(rreq != nullptr);
    CHECK(rreq->sequence == seq + 1);
    CHECK(agent.DiscoveryPending(D));
    // The doomed route keeps carrying data until the predicted break.
    REQUIRE(agent.Table().Find(D)->size() == 1);
    CHECK(agent.Table().Find(D)->front().warned);
    CHECK(agent.Table().Find(D)->front().ExpiresAt() == doctest::Approx(3.0));

    const Actions replaced = agent.HandleRrep(Ctx(S, 2.1), Rrep({S, B, D}, seq + 1));
    CHECK(Count(replaced, ActionKind::InstallRoute) == 1);
    const Action* ev = First(replaced, ActionKind::EvictRoute);
    REQUIRE(ev != nullptr);
    CHECK(ev->reason == Reason::Predicted);
    REQUIRE(agent.Table().Find(D)->size() == 1);
    CHECK(agent.Table().Find(D)->front().path == NodePath{S, B, D});
}

TEST_CASE("a route error follows the same recovery")
{
    RoutingAgent backed(S, Config(), RandomStream(1));
    backed.HandleRrep(Ctx(S, 1.0), Rrep({S, A, D}));
    backed.HandleRrep(Ctx(S, 1.0), Rrep({S, B, D}));
    const Actions sw = backed.HandleRerr(Ctx(S, 2.0), Notice(PacketKind::Rerr, A, {S, A, D}, A, D));
    CHECK(Count(sw, ActionKind::SwitchRoute) == 1);
    CHECK(Count(sw, ActionKind::OriginateRreq) == 0);

    RoutingAgent bare(S, Config(), RandomStream(1));
    const std::uint32_t seq = First(bare.SendData(Ctx(S, 1.0), Data(D)), ActionKind::OriginateRreq)->sequence;
    bare.HandleRrep(Ctx(S, 1.1), Rrep({S, A, D}, seq));
    const Actions out = bare.HandleRerr(Ctx(S, 2.0), Notice(PacketKind::Rerr, A, {S, A, D}, A, D));
    REQUIRE(First(out, ActionKind::OriginateRreq) != nullptr);
    CHECK(First(out, ActionKind::OriginateRreq)->sequence == seq + 1);
    CHECK(bare.Table().Find(D)->empty());
}

TEST_CASE("warnings about unknown routes are discarded")
{
    RoutingAgent agent(S, Config(), RandomStream(1));
    const Actions out =
        agent.HandleLinkWarning(Ctx(S, 2.0), Notice(PacketKind::LinkWarning, A, {S, A, D}, A, D));
    REQUIRE(out.size() == 1);
    CHECK(out.front().reason == Reason::UnknownRoute);
    CHECK(agent.Counters().unknownWarnings == 1);
}

TEST_CASE("a failed unicast at a relay reports back along the path")
{
    RoutingAgent agent(A, Config(), RandomStream(1));
    ControlPacket data = Data(D);
    data.source = S;
    data.traversedPath = {S, A, D};
    const Actions out = agent.OnUnicastFailure(Ctx(A, 3.0), data, D);
    CHECK(Count(out, ActionKind::DropData) == 1);
    const Action* rerr = First(out, ActionKind::SendRerr);
    REQUIRE(rerr != nullptr);
    CHECK(rerr->nextHop == S);
    CHECK(rerr->packet->linkFrom == A);
    CHECK(rerr->packet->linkTo == D);
    // Held off for a second per (source, next hop).
    CHECK(Count(agent.OnUnicastFailure(Ctx(A, 3.5), data, D), ActionKind::SendRerr) == 0);
}

TEST_CASE("buffered data waits for discovery and times out")
{
    RoutingConfig cfg = Config();
    cfg.sendBufferCapacity = 2;
    RoutingAgent agent(S, cfg, RandomStream(1));
    CHECK(Count(agent.SendData(Ctx(S, 1.0), Data(D)), ActionKind::OriginateRreq) == 1);
    CHECK(Count(agent.SendData(Ctx(S, 1.1), Data(D)), ActionKind::OriginateRreq) == 0);
    const Actions full = agent.SendData(Ctx(S, 1.2), Data(D));
    REQUIRE(First(full, ActionKind::DropData) != nullptr);
    CHECK(First(full, ActionKind::DropData)->reason == Reason::BufferFull);
    CHECK(agent.BufferedPackets() == 2);

    const Actions late = agent.OnDiscoveryTimeout(Ctx(S, 40.0), D, 1);
    CHECK(Count(late, ActionKind::DropData) == 2);
    CHECK(agent.BufferedPackets() == 0);
    CHECK_FALSE(agent.DiscoveryPending(D));
}

TEST_CASE("route entries need two nodes")
{
    CHECK_THROWS_AS(RouteEntry::FromPath({S}, 1.0, 1.0, 0.0, 1), InvalidArgument);
}
