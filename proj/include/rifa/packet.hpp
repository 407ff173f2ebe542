/*
 * SPDX-License-Identifier: GPL-2.0-only
 */
#pragma once

#include "rifa/mobility.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace rifa
{

using NodeId = std::uint32_t;
using NodePath = std::vector<NodeId>;

inline constexpr NodeId kBroadcast = std::numeric_limits<NodeId>::max();
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max() - 1;

enum class PacketKind : std::uint8_t
{
    Rreq,
    Rrep,
    Rerr,
    Hello,
    LinkWarning,
    Data,
};

std::string_view ToString(PacketKind kind);

/**
 * One packet on the air. Source-routed: RREP, RERR, LinkWarning and Data
 * carry the full node path and each hop locates itself in it.
 *
 * For RREQ/RREP `source` is the route requester and `destination` the
 * requested node. For RERR/LinkWarning `source` is the reporting node,
 * `destination` the data source being notified, `traversedPath` the data
 * path and (linkFrom, linkTo) the failing directed link.
 */
struct ControlPacket
{
    PacketKind kind{PacketKind::Data};
    NodeId source{kNoNode};
    NodeId destination{kNoNode};
    std::uint32_t sequence{0};
    std::uint64_t uid{0};
    NodePath traversedPath;
    double minResidualEnergy{std::numeric_limits<double>::infinity()};
    double minLinkExpiry{std::numeric_limits<double>::infinity()};
    std::uint32_t payloadSize{0};
    double originTimestamp{0.0};
    NodeKinematics senderKinematics;
    NodeId linkFrom{kNoNode};
    NodeId linkTo{kNoNode};
};

/// True when the path visits some node twice.
bool HasLoop(std::span<const NodeId> path);

/// Position of `node` in `path`, or -1.
int IndexOf(std::span<const NodeId> path, NodeId node);

/// True when some directed link (u, v) appears in both paths.
bool SharesDirectedLink(std::span<const NodeId> a, std::span<const NodeId> b);

/// True when the directed link from -> to appears in the path.
bool ContainsLink(std::span<const NodeId> path, NodeId from, NodeId to);

/// Bytes on the air: fixed header, 4 bytes per carried node id, plus payload for data.
std::uint32_t WireSize(const ControlPacket& pkt);

} // namespace rifa
