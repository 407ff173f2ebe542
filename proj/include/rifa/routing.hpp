/*
 * SPDX-License-Identifier: GPL-2.0-only
 */

/*
 * Per-node routing state machines. One agent class covers the three
 * protocols; ProtocolTraits switches the RIFA behaviours (energy gate,
 * disjoint multipath replies, lifetime-scored selection, failure
 * prediction) on or off.
 */
#pragma once

#include "rifa/energy.hpp"
#include "rifa/mobility.hpp"
#include "rifa/packet.hpp"
#include "rifa/pheromone.hpp"
#include "rifa/random.hpp"

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <tuple>
#include <vector>

namespace rifa
{

enum class Protocol
{
    Rifa,
    BaselineFlood,
    BaselineMinHop,
};

std::string_view ToString(Protocol protocol);
std::optional<Protocol> ParseProtocol(std::string_view name);

/// Weights of the optimal-path score over lifetime, residual energy and inverse hop count.
struct OpiWeights
{
    double lifetime{0.4};
    double energy{0.4};
    double hops{0.2};

    bool operator==(const OpiWeights&) const = default;
};

struct ProtocolTraits
{
    bool energyGate{false};
    bool hellos{false};
    bool multipathReplies{false};
    bool disjointRoutes{false};
    bool intermediateReplies{false};
    bool priorityScoring{false};
    bool routeExpiry{false};
    bool prediction{false};
};

ProtocolTraits TraitsFor(Protocol protocol, bool failurePrediction);

struct RoutingConfig
{
    Protocol protocol{Protocol::Rifa};
    double tr{200.0};
    double helloInterval{1.0};
    double warningMargin{1.5};
    OpiWeights weights;
    double depositQuantum{1.0};
    double pheromoneInitial{1.0};
    double pheromoneDecay{1.0};
    bool failurePrediction{true};
    std::size_t sendBufferCapacity{64};
    double sendBufferTimeout{30.0};
    double discoveryTimeout{0.5};
    double maxDiscoveryTimeout{10.0};
    double dedupeLifetime{30.0};
    double activeRouteTimeout{3.0};
    double rreqJitter{0.01};
};

enum class Zone
{
    Inner,
    Middle,
    Outer,
};

std::string_view ToString(Zone zone);

/// Thirds of the transmission range: Inner < tr/3 <= Middle < 2tr/3 <= Outer.
Zone ClassifyZone(double distance, double tr);

struct NeighborEntry
{
    NodeId neighbor{kNoNode};
    double lastHelloTime{0.0};
    NodeKinematics kinematicsAtHello;
    double linkExpiryEstimate{0.0};
    Zone zone{Zone::Inner};
};

/// Predicted residual link life at `now` is at most `margin`.
bool LinkFailureImminent(const NeighborEntry& entry, double now, double margin);

struct RouteEntry
{
    NodePath path;
    std::uint32_t hopCount{0};
    double pathLifetime{0.0};
    double minResidualEnergy{0.0};
    double priorityScore{0.0};
    bool inUse{false};
    /// A hop on the path is predicted to break; kept only until a replacement arrives.
    bool warned{false};
    double discoveredAt{0.0};
    std::uint32_t sequence{0};
    PathId id{0};

    static RouteEntry FromPath(NodePath path,
                               double lifetime,
                               double minResidual,
                               double now,
                               std::uint32_t sequence);

    double ExpiresAt() const
    {
        return discoveredAt + pathLifetime;
    }
    double RemainingLifetime(double now) const
    {
        return ExpiresAt() - now;
    }
    bool IsLive(double now) const
    {
        return now < ExpiresAt();
    }
};

/// Normalized score inputs; each lies in [0, 1].
struct RouteFactors
{
    double lifetime{0.0};
    double energy{0.0};
    double inverseHops{0.0};
};

/// Min/max of remaining lifetime and residual energy over a candidate set.
struct CandidateBounds
{
    double minLifetime{0.0};
    double maxLifetime{0.0};
    double minEnergy{0.0};
    double maxEnergy{0.0};
};

CandidateBounds ComputeBounds(std::span<const RouteEntry* const> candidates, double now);
RouteFactors NormalizedFactors(const RouteEntry& entry, const CandidateBounds& bounds, double now);
double RoutePriority(const RouteFactors& factors, const OpiWeights& weights);
double RoutePriority(const RouteEntry& entry,
                     const OpiWeights& weights,
                     const CandidateBounds& bounds,
                     double now);

enum class InstallOutcome
{
    Installed,
    Duplicate,
    RejectedOverlap,
};

struct InstallResult
{
    InstallOutcome outcome{InstallOutcome::Installed};
    std::vector<RouteEntry> evicted;
};

struct RemovedRoute
{
    NodeId destination;
    RouteEntry entry;
};

class RoutingTable
{
  public:
    std::vector<RouteEntry>& RoutesTo(NodeId destination);
    const std::vector<RouteEntry>* Find(NodeId destination) const;
    const std::map<NodeId, std::vector<RouteEntry>>& All() const
    {
        return m_routes;
    }

    /**
     * Keeps the list for `destination` link-disjoint. A route from a newer
     * discovery round evicts overlapping older routes; otherwise an
     * overlapping newcomer is rejected.
     */
    InstallResult InstallDisjoint(NodeId destination, RouteEntry entry);
    /// Single-route policy: a newer round replaces everything.
    InstallResult InstallReplace(NodeId destination, RouteEntry entry);
    /// No disjointness; identical paths are ignored.
    InstallResult InstallAppend(NodeId destination, RouteEntry entry);

    std::vector<RemovedRoute> RemoveLink(NodeId from, NodeId to);
    std::vector<RemovedRoute> PruneExpired(double now);
    bool HasLiveRoute(NodeId destination, double now) const;
    bool IsMutuallyDisjoint(NodeId destination) const;

    bool SeenRreq(NodeId source, std::uint32_t sequence) const;
    void MarkRreq(NodeId source, std::uint32_t sequence, double now);
    bool RrepAnswered(NodeId source, std::uint32_t sequence, PathId path) const;
    void MarkAnswered(NodeId source, std::uint32_t sequence, PathId path, double now);
    /// Drops dedupe records older than `lifetime`.
    void PruneDedupe(double now, double lifetime);
    std::size_t SeenCount() const
    {
        return m_seenRreqs.size();
    }

  private:
    using SeqKey = std::pair<NodeId, std::uint32_t>;
    using AnswerKey = std::tuple<NodeId, std::uint32_t, PathId>;

    std::map<NodeId, std::vector<RouteEntry>> m_routes;
    std::map<SeqKey, double> m_seenRreqs;
    std::map<AnswerKey, double> m_rrepsAnswered;
    std::deque<std::pair<double, SeqKey>> m_seenOrder;
    std::deque<std::pair<double, AnswerKey>> m_answerOrder;
};

enum class SelectionPolicy
{
    Priority,
    MinHop,
};

/**
 * Picks the best live route to `destination` and marks it in use. Priority
 * ties (within 1e-12) are broken by a pheromone-proportional draw. Throws
 * NoRoute when nothing is live.
 */
RouteEntry& SelectRoute(RoutingTable& table,
                        NodeId destination,
                        double now,
                        SelectionPolicy policy,
                        const OpiWeights& weights,
                        const PheromoneTable* pheromones,
                        RandomStream& rng);

enum class ActionKind
{
    Discard,
    UpdateReverseRoute,
    OriginateRreq,
    ForwardRreq,
    SendRrep,
    ForwardRrep,
    InstallRoute,
    RejectRoute,
    EvictRoute,
    DepositPheromone,
    SendData,
    ForwardData,
    DeliverData,
    BufferData,
    DropData,
    SendRerr,
    ForwardRerr,
    SendWarning,
    ForwardWarning,
    SwitchRoute,
    UpsertNeighbor,
    EvictNeighbor,
    ScheduleDiscoveryTimeout,
};

std::string_view ToString(ActionKind kind);
bool IsTransmission(ActionKind kind);

enum class Reason
{
    None,
    Malformed,
    OwnPacket,
    DangerLevel,
    Duplicate,
    NotDisjoint,
    NotOnPath,
    NoReverseRoute,
    NoUnusedAlternative,
    UnknownRoute,
    BufferFull,
    BufferTimeout,
    LinkBreak,
    Expired,
    Predicted,
};

std::string_view ToString(Reason reason);

struct Action
{
    ActionKind kind{ActionKind::Discard};
    std::shared_ptr<const ControlPacket> packet;
    NodeId nextHop{kBroadcast};
    double delay{0.0};
    Reason reason{Reason::None};
    /// Destination for route events and timeouts, neighbor for neighbor events.
    NodeId peer{kNoNode};
    std::uint32_t sequence{0};
    /// Residual energy of the acting node when the action was taken.
    double residual{0.0};
    double threshold{0.0};
    NodePath path;
};

using Actions = std::vector<Action>;

/// What an agent may know about its own node at the current instant.
struct NodeContext
{
    NodeId self{0};
    double now{0.0};
    NodeKinematics kinematics;
    EnergyState energy;
};

struct RoutingCounters
{
    std::uint64_t malformed{0};
    std::uint64_t duplicateRreqs{0};
    std::uint64_t dangerDiscards{0};
    std::uint64_t noReverseRoute{0};
    std::uint64_t unknownWarnings{0};
    std::uint64_t rreqOriginated{0};
    std::uint64_t rreqForwarded{0};
    std::uint64_t rrepOriginated{0};
    std::uint64_t rrepForwarded{0};
    std::uint64_t rrepDiscarded{0};
    std::uint64_t routesInstalled{0};
    std::uint64_t routesRejected{0};
    std::uint64_t rerrSent{0};
    std::uint64_t warningsEmitted{0};
    std::uint64_t routeSwitches{0};
    std::uint64_t dataDropped{0};
    std::uint64_t zoneInner{0};
    std::uint64_t zoneMiddle{0};
    std::uint64_t zoneOuter{0};
};

class RoutingAgent
{
  public:
    RoutingAgent(NodeId self, RoutingConfig config, RandomStream rng);

    Protocol GetProtocol() const
    {
        return m_config.protocol;
    }
    const ProtocolTraits& Traits() const
    {
        return m_traits;
    }
    const RoutingConfig& Config() const
    {
        return m_config;
    }

    /// Dispatches on the packet kind.
    Actions HandlePacket(const NodeContext& ctx, const ControlPacket& pkt);

    Actions HandleHello(const NodeContext& ctx, const ControlPacket& pkt);
    Actions HandleRreq(const NodeContext& ctx, const ControlPacket& pkt);
    Actions HandleRrep(const NodeContext& ctx, const ControlPacket& pkt);
    Actions HandleRerr(const NodeContext& ctx, const ControlPacket& pkt);
    Actions HandleLinkWarning(const NodeContext& ctx, const ControlPacket& pkt);
    Actions HandleData(const NodeContext& ctx, const ControlPacket& pkt);

    /// Application hands a fresh data packet to the source.
    Actions SendData(const NodeContext& ctx, ControlPacket data);

    /// Link layer reports that a unicast to `nextHop` could not be delivered.
    Actions OnUnicastFailure(const NodeContext& ctx, const ControlPacket& pkt, NodeId nextHop);

    Actions OnDiscoveryTimeout(const NodeContext& ctx, NodeId destination, std::uint32_t sequence);

    /// Periodic failure-prediction pass over next hops carrying data.
    Actions CheckLinks(const NodeContext& ctx);

    /// Evicts neighbors silent for more than two Hello intervals.
    Actions ExpireNeighbors(const NodeContext& ctx);

    /// A Hello beacon when this node takes part in an active route.
    std::optional<ControlPacket> MakeHello(const NodeContext& ctx);

    /// One LinkWarning per data source whose traffic crosses the failing link.
    std::vector<ControlPacket> PredictLinkFailure(const NodeContext& ctx,
                                                  const NeighborEntry& entry,
                                                  double margin) const;

    bool IsActive(double now) const;

    const std::map<NodeId, NeighborEntry>& Neighbors() const
    {
        return m_neighbors;
    }
    RoutingTable& Table()
    {
        return m_table;
    }
    const RoutingTable& Table() const
    {
        return m_table;
    }
    const PheromoneTable* Pheromones(NodeId destination) const;
    const RoutingCounters& Counters() const
    {
        return m_counters;
    }
    std::size_t BufferedPackets() const
    {
        return m_buffer.size();
    }
    bool DiscoveryPending(NodeId destination) const;

  private:
    struct Buffered
    {
        ControlPacket packet;
        double enqueued;
    };

    struct Discovery
    {
        std::uint32_t sequence{0};
        double backoff{0.0};
        bool pending{false};
    };

    struct FlowUse
    {
        double lastSeen{0.0};
        NodePath path;
    };

    struct Answered
    {
        std::set<NodeId> neighbors;
        std::vector<NodePath> paths;
        double time{0.0};
    };

    using SeqKey = std::pair<NodeId, std::uint32_t>;

    Action Make(ActionKind kind, const NodeContext& ctx) const;
    Action Transmit(ActionKind kind,
                    const NodeContext& ctx,
                    ControlPacket pkt,
                    NodeId nextHop,
                    double delay = 0.0);
    std::uint64_t NextUid();

    void AnswerAsDestination(const NodeContext& ctx,
                             const ControlPacket& pkt,
                             NodePath path,
                             double minEnergy,
                             double minLet,
                             Actions& out);
    bool TryCachedReply(const NodeContext& ctx,
                        const ControlPacket& pkt,
                        const NodePath& prefix,
                        double minEnergy,
                        double minLet,
                        Actions& out);
    void InstallAtSource(const NodeContext& ctx, const ControlPacket& pkt, Actions& out);
    void CacheForwardRoute(const NodeContext& ctx, const ControlPacket& pkt, int index, Actions& out);
    void DepositOnTraversal(const NodeContext& ctx, const ControlPacket& pkt, int index, Actions& out);

    bool TrySend(const NodeContext& ctx, ControlPacket& data, Actions& out);
    void Flush(const NodeContext& ctx, NodeId destination, Actions& out);
    void PurgeBuffer(const NodeContext& ctx, Actions& out);
    bool HasBuffered(NodeId destination) const;
    void EnsureDiscovery(const NodeContext& ctx, NodeId destination, Actions& out);
    void Originate(const NodeContext& ctx, NodeId destination, Actions& out);
    void PruneRoutes(const NodeContext& ctx, Actions& out);
    void RemoveLinkRoutes(const NodeContext& ctx, NodeId from, NodeId to, Reason why, Actions& out);
    void ReactToLinkLoss(const NodeContext& ctx, NodeId destination, Actions& out);
    bool WarnRoutes(const NodeContext& ctx, NodeId from, NodeId to, double remaining, Actions& out);
    bool WantsRoute(NodeId destination, double now) const;
    bool HasUnwarnedRoute(NodeId destination, double now) const;
    bool HasUsableRoute(NodeId destination, double now) const;
    RouteEntry& Choose(NodeId destination, double now);
    double LinkLifetime(const NodeContext& ctx, const NodeKinematics& sender) const;
    void PruneState(double now);

    NodeId m_self;
    RoutingConfig m_config;
    ProtocolTraits m_traits;
    RandomStream m_rng;

    RoutingTable m_table;
    std::map<NodeId, NeighborEntry> m_neighbors;
    std::map<NodeId, PheromoneTable> m_pheromones;
    std::map<NodeId, NodePath> m_reverseRoutes;
    std::map<SeqKey, Answered> m_answered;
    std::map<SeqKey, Answered> m_rrepLinksUsed;
    std::map<NodeId, std::map<NodeId, FlowUse>> m_flows;
    std::map<std::pair<NodeId, NodeId>, double> m_warned;
    std::map<std::pair<NodeId, NodeId>, double> m_rerrSent;
    std::map<NodeId, Discovery> m_discovery;
    std::map<NodeId, double> m_lastSentTo;
    std::deque<Buffered> m_buffer;

    std::uint32_t m_sequence{0};
    std::uint64_t m_uidCounter{0};
    double m_lastActivity;
    double m_lastPrune{0.0};
    RoutingCounters m_counters;
};

} // namespace rifa
