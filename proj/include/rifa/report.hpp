/*
 * SPDX-License-Identifier: GPL-2.0-only
 */
#pragma once

#include "rifa/packet.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rifa
{

struct PacketTimes
{
    double sent{0.0};
    std::optional<double> received;
};

struct DebitRecord
{
    NodeId node{0};
    double joules{0.0};
};

/**
 * Data-plane counters and the energy debit ledger of one run. Only the
 * first reception of a packet id counts.
 */
class MetricsAccumulator
{
  public:
    explicit MetricsAccumulator(bool keepDebitList = false)
        : m_keepDebits(keepDebitList)
    {
    }

    void RecordSent(std::uint64_t packetId, double time);
    /// Returns false for unknown or already-received ids.
    bool RecordReceived(std::uint64_t packetId, double time);
    void RecordDebit(NodeId node, double joules);

    std::uint64_t PacketsSent() const
    {
        return m_sent;
    }
    std::uint64_t PacketsReceived() const
    {
        return m_received;
    }
    const std::map<std::uint64_t, PacketTimes>& Times() const
    {
        return m_times;
    }
    double DebitTotal() const
    {
        return m_debitTotal;
    }
    const std::vector<DebitRecord>& Debits() const
    {
        return m_debits;
    }
    /// Sum of (received - sent) over delivered packets, in seconds.
    double DelaySum() const
    {
        return m_delaySum;
    }

  private:
    bool m_keepDebits;
    std::uint64_t m_sent{0};
    std::uint64_t m_received{0};
    double m_delaySum{0.0};
    double m_debitTotal{0.0};
    std::map<std::uint64_t, PacketTimes> m_times;
    std::vector<DebitRecord> m_debits;
};

/// 100 * Npr / Nps, or nothing when no packet was sent.
std::optional<double> Pdr(const MetricsAccumulator& acc);
/// Mean receive-minus-send delay in milliseconds, or nothing when nothing arrived.
std::optional<double> E2edMs(const MetricsAccumulator& acc);

struct MetricsReport
{
    std::string protocol;
    std::uint64_t seed{0};
    std::uint32_t nodeCount{0};
    double simDuration{0.0};
    std::uint32_t flowCount{0};
    std::uint64_t packetsSent{0};
    std::uint64_t packetsReceived{0};
    std::optional<double> pdrPercent;
    std::optional<double> e2edMs;
    double econsJoules{0.0};
    double ledgerJoules{0.0};
    std::uint64_t routesDiscovered{0};
    std::uint64_t rreqOriginated{0};
    std::uint64_t warningsEmitted{0};
    std::uint64_t rerrSent{0};
    std::uint64_t routeSwitches{0};
    std::uint64_t controlTransmissions{0};
    std::uint64_t dataTransmissions{0};
    std::uint64_t dataDropped{0};
    std::uint64_t dangerDiscards{0};
    std::uint64_t zoneInner{0};
    std::uint64_t zoneMiddle{0};
    std::uint64_t zoneOuter{0};
    std::uint32_t deadNodes{0};
    std::uint64_t eventsProcessed{0};
    std::uint64_t eventDigest{0};
    std::vector<double> residuals;
};

/// `key = value` lines in a fixed order; absent metrics print as `no-data`.
std::string SerializeReport(const MetricsReport& report);

/// One structured log line per engine event or agent action.
struct LogRecord
{
    double time{0.0};
    NodeId node{0};
    std::string_view event;
    /// Packet involved, if any.
    const ControlPacket* packet{nullptr};
    NodeId peer{kNoNode};
    NodeId nextHop{kNoNode};
    std::string_view reason;
    double residual{0.0};
    double threshold{0.0};
    double x{0.0};
    double y{0.0};
    const NodePath* path{nullptr};
};

class EventSink
{
  public:
    virtual ~EventSink() = default;
    virtual void Record(const LogRecord& record) = 0;
};

std::string FormatLogRecord(const LogRecord& record);

/// Writes FormatLogRecord lines to a stream.
class StreamSink : public EventSink
{
  public:
    explicit StreamSink(std::ostream& os)
        : m_os(os)
    {
    }
    void Record(const LogRecord& record) override;

  private:
    std::ostream& m_os;
};

} // namespace rifa
