/*
 * SPDX-License-Identifier: GPL-2.0-only
 */

/*
 * Node kinematics, random-waypoint movement and link-lifetime geometry for
 * constant-velocity unit-disk links.
 */
#pragma once

#include "rifa/random.hpp"

namespace rifa
{

struct AreaSpec
{
    double width{1200.0};
    double height{1200.0};

    bool Contains(double x, double y) const
    {
        return x >= 0.0 && x <= width && y >= 0.0 && y <= height;
    }
};

/// Closed interval [min, max].
struct ValueRange
{
    double min{0.0};
    double max{0.0};

    bool operator==(const ValueRange&) const = default;
};

/// Position (m), speed (m/s) and heading (rad, [0, 2pi)) of a node.
struct NodeKinematics
{
    double x{0.0};
    double y{0.0};
    double speed{0.0};
    double heading{0.0};

    double VelocityX() const;
    double VelocityY() const;
};

enum class WaypointPhase
{
    Moving,
    Paused,
};

struct WaypointState
{
    double targetX{0.0};
    double targetY{0.0};
    double pauseRemaining{0.0};
    WaypointPhase phase{WaypointPhase::Moving};
};

struct MobilityStep
{
    NodeKinematics kinematics;
    WaypointState waypoint;
};

/// Uniform random placement followed by the first travel leg.
MobilityStep StartWaypoint(const AreaSpec& area, const ValueRange& speeds, RandomStream& rng);

/// Places a node at (x, y) and starts its first travel leg.
MobilityStep StartWaypointAt(double x,
                             double y,
                             const AreaSpec& area,
                             const ValueRange& speeds,
                             RandomStream& rng);

/**
 * Advances a random-waypoint node by dt seconds. A step that spans several
 * legs consumes them in order: arrival draws a pause, an expired pause draws
 * a new target and speed. Throws InvalidArgument for dt <= 0 and
 * InvariantViolation when the node starts outside the area.
 */
MobilityStep AdvanceWaypoint(const NodeKinematics& kin,
                             const WaypointState& wp,
                             double dt,
                             const AreaSpec& area,
                             const ValueRange& speeds,
                             const ValueRange& pauses,
                             RandomStream& rng);

/// Position after dt seconds at constant velocity.
NodeKinematics Extrapolate(const NodeKinematics& kin, double dt);

double Distance(const NodeKinematics& a, const NodeKinematics& b);

/// Magnitude of the velocity of p relative to q.
double RelativeSpeed(const NodeKinematics& p, const NodeKinematics& q);

/**
 * Time until two constant-velocity nodes first drift beyond range tr.
 * Returns +infinity for zero relative velocity. Throws NotANeighbor when the
 * pair is already out of range.
 */
double LinkExpiryTime(const NodeKinematics& p, const NodeKinematics& q, double tr);

/// Distance travelled along the relative-velocity ray before the link breaks.
double RemainingDistance(const NodeKinematics& p, const NodeKinematics& q, double tr);

} // namespace rifa
