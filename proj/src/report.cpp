/*
 * SPDX-License-Identifier: GPL-2.0-only
 */
#include "rifa/report.hpp"

#include <cstdio>
#include <ostream>

namespace rifa
{

namespace
{

void
AppendF(std::string& out, const char* fmt, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    out += buf;
}

void
AppendKey(std::string& out, std::string_view key, std::string_view value)
{
    out.append(key).append(" = ").append(value).push_back('\n');
}

void
AppendKey(std::string& out, std::string_view key, std::uint64_t value)
{
    AppendKey(out, key, std::to_string(value));
}

void
AppendReal(std::string& out, std::string_view key, double value)
{
    std::string v;
    AppendF(v, "%.9f", value);
    AppendKey(out, key, v);
}

void
AppendOptional(std::string& out, std::string_view key, const std::optional<double>& value)
{
    if (value)
    {
        AppendReal(out, key, *value);
    }
    else
    {
        AppendKey(out, key, "no-data");
    }
}

void
AppendPath(std::string& out, const NodePath& path)
{
    for (std::size_t i = 0; i < path.size(); ++i)
    {
        if (i > 0)
        {
            out.push_back('-');
        }
        out += std::to_string(path[i]);
    }
}

std::string
NodeName(NodeId id)
{
    if (id == kBroadcast)
    {
        return "*";
    }
    if (id == kNoNode)
    {
        return "-";
    }
    return std::to_string(id);
}

} // namespace

void
MetricsAccumulator::RecordSent(std::uint64_t packetId, double time)
{
    auto [it, inserted] = m_times.try_emplace(packetId, PacketTimes{time, std::nullopt});
    if (inserted)
    {
        ++m_sent;
    }
}

bool
MetricsAccumulator::RecordReceived(std::uint64_t packetId, double time)
{
    auto it = m_times.find(packetId);
    if (it == m_times.end() || it->second.received)
    {
        return false;
    }
    it->second.received = time;
    ++m_received;
    m_delaySum += time - it->second.sent;
    return true;
}

void
MetricsAccumulator::RecordDebit(NodeId node, double joules)
{
    m_debitTotal += joules;
    if (m_keepDebits)
    {
        m_debits.push_back(DebitRecord{node, joules});
    }
}

std::optional<double>
Pdr(const MetricsAccumulator& acc)
{
    if (acc.PacketsSent() == 0)
    {
        return std::nullopt;
    }
    return 100.0 * static_cast<double>(acc.PacketsReceived()) / static_cast<double>(acc.PacketsSent());
}

std::optional<double>
E2edMs(const MetricsAccumulator& acc)
{
    if (acc.PacketsReceived() == 0)
    {
        return std::nullopt;
    }
    return 1000.0 * acc.DelaySum() / static_cast<double>(acc.PacketsReceived());
}

std::string
SerializeReport(const MetricsReport& r)
{
    std::string out;
    AppendKey(out, "protocol", r.protocol);
    AppendKey(out, "seed", r.seed);
    AppendKey(out, "node_count", r.nodeCount);
    AppendReal(out, "sim_duration", r.simDuration);
    AppendKey(out, "flow_count", r.flowCount);
    AppendKey(out, "packets_sent", r.packetsSent);
    AppendKey(out, "packets_received", r.packetsReceived);
    AppendOptional(out, "pdr_percent", r.pdrPercent);
    AppendOptional(out, "e2ed_ms", r.e2edMs);
    AppendReal(out, "econs_joules", r.econsJoules);
    AppendReal(out, "ledger_joules", r.ledgerJoules);
    AppendKey(out, "routes_discovered", r.routesDiscovered);
    AppendKey(out, "rreq_originated", r.rreqOriginated);
    AppendKey(out, "warnings_emitted", r.warningsEmitted);
    AppendKey(out, "rerr_sent", r.rerrSent);
    AppendKey(out, "route_switches", r.routeSwitches);
    AppendKey(out, "control_transmissions", r.controlTransmissions);
    AppendKey(out, "data_transmissions", r.dataTransmissions);
    AppendKey(out, "data_dropped", r.dataDropped);
    AppendKey(out, "danger_discards", r.dangerDiscards);
    AppendKey(out, "zone_inner", r.zoneInner);
    AppendKey(out, "zone_middle", r.zoneMiddle);
    AppendKey(out, "zone_outer", r.zoneOuter);
    AppendKey(out, "dead_nodes", r.deadNodes);
    AppendKey(out, "events_processed", r.eventsProcessed);
    char digest[32];
    std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(r.eventDigest));
    AppendKey(out, "event_digest", digest);
    std::string residuals;
    for (std::size_t i = 0; i < r.residuals.size(); ++i)
    {
        if (i > 0)
        {
            residuals.push_back(',');
        }
        AppendF(residuals, "%.6f", r.residuals[i]);
    }
    AppendKey(out, "residuals", residuals);
    return out;
}

std::string
FormatLogRecord(const LogRecord& r)
{
    std::string out;
    AppendF(out, "t=%.9f", r.time);
    out += " node=" + std::to_string(r.node);
    out += " ev=";
    out.append(r.event);
    if (r.packet != nullptr)
    {
        const ControlPacket& p = *r.packet;
        out += " pkt=";
        out.append(ToString(p.kind));
        out += " src=" + NodeName(p.source);
        out += " dst=" + NodeName(p.destination);
        out += " seq=" + std::to_string(p.sequence);
        out += " uid=" + std::to_string(p.uid);
        out += " size=" + std::to_string(p.payloadSize);
        if (!p.traversedPath.empty())
        {
            out += " trail=";
            AppendPath(out, p.traversedPath);
        }
        if (p.kind == PacketKind::Rreq || p.kind == PacketKind::Rrep)
        {
            AppendF(out, " minE=%.9f", p.minResidualEnergy);
            AppendF(out, " minLet=%.9f", p.minLinkExpiry);
        }
        if (p.linkFrom != kNoNode)
        {
            out += " link=" + NodeName(p.linkFrom) + ">" + NodeName(p.linkTo);
        }
    }
    if (r.peer != kNoNode)
    {
        out += " peer=" + NodeName(r.peer);
    }
    if (r.nextHop != kNoNode)
    {
        out += " hop=" + NodeName(r.nextHop);
    }
    if (!r.reason.empty())
    {
        out += " reason=";
        out.append(r.reason);
    }
    if (r.path != nullptr && !r.path->empty())
    {
        out += " path=";
        AppendPath(out, *r.path);
    }
    AppendF(out, " res=%.9f", r.residual);
    AppendF(out, " thr=%.9f", r.threshold);
    AppendF(out, " x=%.6f", r.x);
    AppendF(out, " y=%.6f", r.y);
    return out;
}

void
StreamSink::Record(const LogRecord& record)
{
    m_os << FormatLogRecord(record) << '\n';
}

} // namespace rifa
