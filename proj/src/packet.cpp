/*
 * SPDX-License-Identifier: GPL-2.0-only
 */
#include "rifa/packet.hpp"

#include <algorithm>

namespace rifa
{

std::string_view
ToString(PacketKind kind)
{
    switch (kind)
    {
    case PacketKind::Rreq:
        return "RREQ";
    case PacketKind::Rrep:
        return "RREP";
    case PacketKind::Rerr:
        return "RERR";
    case PacketKind::Hello:
        return "HELLO";
    case PacketKind::LinkWarning:
        return "WARN";
    case PacketKind::Data:
        return "DATA";
    }
    return "?";
}

bool
HasLoop(std::span<const NodeId> path)
{
    for (std::size_t i = 0; i < path.size(); ++i)
    {
        for (std::size_t j = i + 1; j < path.size(); ++j)
        {
            if (path[i] == path[j])
            {
                return true;
            }
        }
    }
    return false;
}

int
IndexOf(std::span<const NodeId> path, NodeId node)
{
    auto it = std::find(path.begin(), path.end(), node);
    return it == path.end() ? -1 : static_cast<int>(it - path.begin());
}

bool
ContainsLink(std::span<const NodeId> path, NodeId from, NodeId to)
{
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
    {
        if (path[i] == from && path[i + 1] == to)
        {
            return true;
        }
    }
    return false;
}

bool
SharesDirectedLink(std::span<const NodeId> a, std::span<const NodeId> b)
{
    for (std::size_t i = 0; i + 1 < a.size(); ++i)
    {
        if (ContainsLink(b, a[i], a[i + 1]))
        {
            return true;
        }
    }
    return false;
}

std::uint32_t
WireSize(const ControlPacket& pkt)
{
    constexpr std::uint32_t kHeader = 24;
    constexpr std::uint32_t kPerNode = 4;
    const auto pathBytes = static_cast<std::uint32_t>(pkt.traversedPath.size()) * kPerNode;
    switch (pkt.kind)
    {
    case PacketKind::Hello:
        // header plus position, speed and heading
        return kHeader + 16;
    case PacketKind::Data:
        return pkt.payloadSize;
    default:
        return kHeader + pathBytes;
    }
}

} // namespace rifa
