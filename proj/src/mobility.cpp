/*
 * SPDX-License-Identifier: GPL-2.0-only
 */
#include "rifa/mobility.hpp"

#include "rifa/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace rifa
{

namespace
{

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double
NormalizeHeading(double heading)
{
    double h = std::fmod(heading, kTwoPi);
    if (h < 0.0)
    {
        h += kTwoPi;
    }
    if (h >= kTwoPi)
    {
        h = 0.0;
    }
    return h;
}

// Strictly inside the area, so no boundary rule is needed.
void
DrawLeg(NodeKinematics& kin,
        WaypointState& wp,
        const AreaSpec& area,
        const ValueRange& speeds,
        RandomStream& rng)
{
    wp.targetX = area.width * rng.UniformOpen01();
    wp.targetY = area.height * rng.UniformOpen01();
    wp.pauseRemaining = 0.0;
    wp.phase = WaypointPhase::Moving;
    kin.speed = rng.Uniform(speeds.min, speeds.max);
    kin.heading = NormalizeHeading(std::atan2(wp.targetY - kin.y, wp.targetX - kin.x));
}

} // namespace

double
NodeKinematics::VelocityX() const
{
    return speed * std::cos(heading);
}

double
NodeKinematics::VelocityY() const
{
    return speed * std::sin(heading);
}

MobilityStep
StartWaypoint(const AreaSpec& area, const ValueRange& speeds, RandomStream& rng)
{
    const double x = area.width * rng.UniformOpen01();
    const double y = area.height * rng.UniformOpen01();
    return StartWaypointAt(x, y, area, speeds, rng);
}

MobilityStep
StartWaypointAt(double x,
                double y,
                const AreaSpec& area,
                const ValueRange& speeds,
                RandomStream& rng)
{
    MobilityStep step;
    step.kinematics.x = x;
    step.kinematics.y = y;
    DrawLeg(step.kinematics, step.waypoint, area, speeds, rng);
    return step;
}

MobilityStep
AdvanceWaypoint(const NodeKinematics& kin,
                const WaypointState& wp,
                double dt,
                const AreaSpec& area,
                const ValueRange& speeds,
                const ValueRange& pauses,
                RandomStream& rng)
{
    if (!(dt > 0.0))
    {
        throw InvalidArgument("AdvanceWaypoint: dt must be positive");
    }
    if (!area.Contains(kin.x, kin.y))
    {
        throw InvariantViolation("AdvanceWaypoint: node outside simulation area");
    }

    MobilityStep s{kin, wp};
    double left = dt;
    // A zero-length leg with zero pause could otherwise spin forever.
    int guard = 0;
    while (left > 0.0 && guard++ < 1000000)
    {
        if (s.waypoint.phase == WaypointPhase::Paused)
        {
            if (s.waypoint.pauseRemaining > left)
            {
                s.waypoint.pauseRemaining -= left;
                left = 0.0;
                break;
            }
            left -= s.waypoint.pauseRemaining;
            DrawLeg(s.kinematics, s.waypoint, area, speeds, rng);
            continue;
        }

        const double dx = s.waypoint.targetX - s.kinematics.x;
        const double dy = s.waypoint.targetY - s.kinematics.y;
        const double remaining = std::hypot(dx, dy);
        const double reach = s.kinematics.speed * left;
        if (reach < remaining)
        {
            const double f = reach / remaining;
            s.kinematics.x += dx * f;
            s.kinematics.y += dy * f;
            left = 0.0;
            break;
        }

        // Arrival: consume the travel time, then pause or start a new leg.
        if (s.kinematics.speed > 0.0)
        {
            left -= remaining / s.kinematics.speed;
        }
        else
        {
            left = 0.0;
        }
        s.kinematics.x = s.waypoint.targetX;
        s.kinematics.y = s.waypoint.targetY;
        const double pause = rng.Uniform(pauses.min, pauses.max);
        if (pause > 0.0)
        {
            s.waypoint.phase = WaypointPhase::Paused;
            s.waypoint.pauseRemaining = pause;
            s.kinematics.speed = 0.0;
        }
        else
        {
            DrawLeg(s.kinematics, s.waypoint, area, speeds, rng);
        }
    }
    return s;
}

NodeKinematics
Extrapolate(const NodeKinematics& kin, double dt)
{
    NodeKinematics out = kin;
    out.x += kin.VelocityX() * dt;
    out.y += kin.VelocityY() * dt;
    return out;
}

double
Distance(const NodeKinematics& a, const NodeKinematics& b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

double
RelativeSpeed(const NodeKinematics& p, const NodeKinematics& q)
{
    return std::hypot(p.VelocityX() - q.VelocityX(), p.VelocityY() - q.VelocityY());
}

double
LinkExpiryTime(const NodeKinematics& p, const NodeKinematics& q, double tr)
{
    if (Distance(p, q) > tr)
    {
        throw NotANeighbor("LinkExpiryTime: nodes are out of range");
    }
    const double dvx = p.VelocityX() - q.VelocityX();
    const double dx = p.x - q.x;
    const double dvy = p.VelocityY() - q.VelocityY();
    const double dy = p.y - q.y;

    const double denom = dvx * dvx + dvy * dvy;
    if (denom == 0.0)
    {
        return std::numeric_limits<double>::infinity();
    }
    const double cross = dvx * dy - dx * dvy;
    // Rounding can push the discriminant just below zero for pairs at the rim.
    const double disc = std::max(0.0, denom * tr * tr - cross * cross);
    const double t = (-(dvx * dx + dvy * dy) + std::sqrt(disc)) / denom;
    return std::max(0.0, t);
}

double
RemainingDistance(const NodeKinematics& p, const NodeKinematics& q, double tr)
{
    const double let = LinkExpiryTime(p, q, tr);
    if (std::isinf(let))
    {
        return let;
    }
    return RelativeSpeed(p, q) * let;
}

} // namespace rifa
