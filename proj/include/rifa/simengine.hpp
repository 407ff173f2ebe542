/*
 * SPDX-License-Identifier: GPL-2.0-only
 */
#pragma once

#include "rifa/report.hpp"
#include "rifa/routing.hpp"
#include "rifa/scenario.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <queue>
#include <vector>

namespace rifa
{

enum class EventKind : std::uint8_t
{
    PacketDelivery,
    HelloTimer,
    MobilityTick,
    TrafficTick,
    NeighborExpiryCheck,
    LinkCheck,
    RouteTimeout,
    DeferredSend,
    LinkFailure,
    SimEnd,
};

std::string_view ToString(EventKind kind);

struct Event
{
    double time{0.0};
    std::uint64_t sequence{0};
    EventKind kind{EventKind::SimEnd};
    NodeId subject{0};
    std::shared_ptr<const ControlPacket> payload;
    NodeId sender{kNoNode};
    std::uint64_t aux{0};
};

/// Min-queue on (time, sequence); sequence is assignment order.
class EventQueue
{
  public:
    const Event& Schedule(Event event);
    Event Pop();
    const Event& Top() const
    {
        return m_heap.top();
    }
    bool Empty() const
    {
        return m_heap.empty();
    }
    std::size_t Size() const
    {
        return m_heap.size();
    }

  private:
    struct Later
    {
        bool operator()(const Event& a, const Event& b) const
        {
            if (a.time != b.time)
            {
                return a.time > b.time;
            }
            return a.sequence > b.sequence;
        }
    };

    std::priority_queue<Event, std::vector<Event>, Later> m_heap;
    std::uint64_t m_next{0};
};

struct FlowSpec
{
    NodeId source{0};
    NodeId destination{0};
    double start{0.0};
    double stop{0.0};
    /// Zero means constant rate until `stop`.
    std::uint32_t packets{0};
};

enum class MobilityMode
{
    Waypoint,
    Static,
    /// Constant velocity from the given kinematics, changed only by `turns`.
    Scripted,
};

/// A scripted node takes a new speed and heading at `time`.
struct VelocityChange
{
    NodeId node{0};
    double time{0.0};
    double speed{0.0};
    double heading{0.0};
};

/// Test fixtures: fixed placement, energies and flows instead of random ones.
struct TopologyOverride
{
    std::vector<NodeKinematics> nodes;
    MobilityMode mobility{MobilityMode::Static};
    /// Scripted mobility only.
    std::vector<VelocityChange> turns;
    /// Starting residual per node; empty keeps every battery full.
    std::vector<double> residuals;
    std::optional<std::vector<FlowSpec>> flows;
};

struct SimulatorOptions
{
    EventSink* sink{nullptr};
    bool keepDebitList{false};
    std::optional<TopologyOverride> topology;
};

/**
 * One deterministic run. Agents never see each other; every interaction
 * goes through the event queue and the unit-disk channel.
 */
class Simulator
{
  public:
    /// Validates the scenario before anything is scheduled.
    explicit Simulator(const Scenario& scenario, SimulatorOptions options = {});
    ~Simulator();

    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    MetricsReport Run();

    double Now() const
    {
        return m_now;
    }
    std::size_t NodeCount() const;
    const RoutingAgent& Agent(NodeId node) const;
    const EnergyState& Energy(NodeId node) const;
    /// Position and velocity at Now(); reading it never perturbs the run.
    NodeKinematics Kinematics(NodeId node) const;
    const MetricsAccumulator& Metrics() const
    {
        return m_metrics;
    }
    const std::vector<FlowSpec>& Flows() const
    {
        return m_flows;
    }

  private:
    struct Node;

    void Dispatch(const Event& event);
    void UpdatePosition(NodeId node);
    NodeContext Context(NodeId node);
    void Execute(NodeId node, const Actions& actions);
    void Send(NodeId sender, const std::shared_ptr<const ControlPacket>& pkt, NodeId nextHop);
    void Charge(NodeId node, DebitKind kind, double basis);
    void Log(NodeId node,
             std::string_view event,
             const ControlPacket* packet,
             NodeId peer = kNoNode,
             NodeId nextHop = kNoNode,
             std::string_view reason = {},
             const NodePath* path = nullptr);
    void Digest(std::uint64_t value);
    void ScheduleTimers();
    void SetupTraffic();
    void Generate(std::size_t flow);
    void Schedule(double time,
                  EventKind kind,
                  NodeId subject,
                  std::shared_ptr<const ControlPacket> payload = nullptr,
                  NodeId sender = kNoNode,
                  std::uint64_t aux = 0);
    MetricsReport BuildReport();

    Scenario m_scenario;
    SimulatorOptions m_options;
    std::vector<std::unique_ptr<Node>> m_nodes;
    std::vector<FlowSpec> m_flows;
    std::vector<std::uint32_t> m_flowSent;
    EventQueue m_queue;
    MetricsAccumulator m_metrics;
    RandomStream m_channelRng;
    RandomStream m_timerRng;
    double m_now{0.0};
    double m_lastIdle{0.0};
    bool m_finished{false};
    std::uint64_t m_digest{0xcbf29ce484222325ULL};
    std::uint64_t m_events{0};
    std::uint64_t m_controlTx{0};
    std::uint64_t m_dataTx{0};
};

/// Convenience wrapper: construct, run, report.
MetricsReport RunScenario(const Scenario& scenario, SimulatorOptions options = {});

} // namespace rifa
