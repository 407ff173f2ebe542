/*
 * SPDX-License-Identifier: GPL-2.0-only
 */
#include "rifa/errors.hpp"
#include "rifa/mobility.hpp"
#include "rifa/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace rifa;

namespace
{

constexpr double kTr = 200.0;
const AreaSpec kArea{1200.0, 1200.0};
const ValueRange kSpeeds{20.0, 25.0};
const ValueRange kPauses{0.0, 50.0};

NodeKinematics
RandomInRange(RandomStream& rng, NodeKinematics* partner)
{
    NodeKinematics p{rng.Uniform(0.0, 1200.0), rng.Uniform(0.0, 1200.0), rng.Uniform(20.0, 25.0),
                     rng.Uniform(0.0, 2.0 * std::numbers::pi)};
    const double rho = kTr * std::sqrt(rng.Uniform01());
    const double phi = rng.Uniform(0.0, 2.0 * std::numbers::pi);
    *partner = NodeKinematics{p.x + rho * std::cos(phi), p.y + rho * std::sin(phi), rng.Uniform(20.0, 25.0),
                              rng.Uniform(0.0, 2.0 * std::numbers::pi)};
    return p;
}

} // namespace

TEST_CASE("paused node keeps its position and counts the pause down")
{
    RandomStream rng(1);
    NodeKinematics kin{300.0, 400.0, 0.0, 0.0};
    WaypointState wp{500.0, 500.0, 5.0, WaypointPhase::Paused};
    const MobilityStep s = AdvanceWaypoint(kin, wp, 1.0, kArea, kSpeeds, kPauses, rng);
    CHECK(s.kinematics.x == 300.0);
    CHECK(s.kinematics.y == 400.0);
    CHECK(s.waypoint.phase == WaypointPhase::Paused);
    CHECK(s.waypoint.pauseRemaining == doctest::Approx(4.0));
}

TEST_CASE("moving node advances along its heading")
{
    RandomStream rng(1);
    NodeKinematics kin{0.0, 0.0, 20.0, 0.0};
    WaypointState wp{100.0, 0.0, 0.0, WaypointPhase::Moving};
    const MobilityStep s = AdvanceWaypoint(kin, wp, 1.0, kArea, kSpeeds, kPauses, rng);
    CHECK(s.kinematics.x == doctest::Approx(20.0));
    CHECK(s.kinematics.y == doctest::Approx(0.0));
    CHECK(s.waypoint.phase == WaypointPhase::Moving);
}

TEST_CASE("arrival draws a pause, an expired pause draws a new leg")
{
    RandomStream rng(7);
    NodeKinematics kin{0.0, 0.0, 20.0, 0.0};
    WaypointState wp{100.0, 0.0, 0.0, WaypointPhase::Moving};
    const ValueRange pauses{3.0, 3.0};
    MobilityStep s = AdvanceWaypoint(kin, wp, 5.0, kArea, kSpeeds, pauses, rng);
    CHECK(s.kinematics.x == doctest::Approx(100.0));
    CHECK(s.waypoint.phase == WaypointPhase::Paused);
    CHECK(s.waypoint.pauseRemaining == doctest::Approx(3.0));
    s = AdvanceWaypoint(s.kinematics, s.waypoint, 3.0, kArea, kSpeeds, pauses, rng);
    CHECK(s.waypoint.phase == WaypointPhase::Moving);
    CHECK(s.kinematics.speed >= kSpeeds.min);
    CHECK(s.kinematics.speed <= kSpeeds.max);
    CHECK(s.waypoint.targetX > 0.0);
    CHECK(s.waypoint.targetX < kArea.width);
}

TEST_CASE("waypoint preconditions")
{
    RandomStream rng(1);
    NodeKinematics kin{10.0, 10.0, 20.0, 0.0};
    WaypointState wp{100.0, 10.0, 0.0, WaypointPhase::Moving};
    CHECK_THROWS_AS(AdvanceWaypoint(kin, wp, 0.0, kArea, kSpeeds, kPauses, rng), InvalidArgument);
    CHECK_THROWS_AS(AdvanceWaypoint(kin, wp, -1.0, kArea, kSpeeds, kPauses, rng), InvalidArgument);
    NodeKinematics outside{-5.0, 10.0, 20.0, 0.0};
    CHECK_THROWS_AS(AdvanceWaypoint(outside, wp, 1.0, kArea, kSpeeds, kPauses, rng), InvariantViolation);
}

TEST_CASE("waypoint state invariants hold along a long trajectory")
{
    RandomStream rng(99);
    MobilityStep s = StartWaypoint(kArea, kSpeeds, rng);
    for (int i = 0; i < 20000; ++i)
    {
        s = AdvanceWaypoint(s.kinematics, s.waypoint, 0.37, kArea, kSpeeds, kPauses, rng);
        REQUIRE(kArea.Contains(s.kinematics.x, s.kinematics.y));
        REQUIRE(s.kinematics.heading >= 0.0);
        REQUIRE(s.kinematics.heading < 2.0 * std::numbers::pi);
        if (s.waypoint.phase == WaypointPhase::Paused)
        {
            REQUIRE(s.waypoint.pauseRemaining > 0.0);
            REQUIRE(s.kinematics.speed == 0.0);
        }
        else
        {
            REQUIRE(s.waypoint.pauseRemaining == 0.0);
            REQUIRE(s.kinematics.speed >= kSpeeds.min);
            REQUIRE(s.kinematics.speed <= kSpeeds.max);
            const double dx = s.waypoint.targetX - s.kinematics.x;
            const double dy = s.waypoint.targetY - s.kinematics.y;
            if (std::hypot(dx, dy) > 1.0)
            {
                REQUIRE(std::cos(std::atan2(dy, dx) - s.kinematics.heading) == doctest::Approx(1.0).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("identical seeds give identical trajectories")
{
    RandomStream a(2024);
    RandomStream b(2024);
    MobilityStep sa = StartWaypoint(kArea, kSpeeds, a);
    MobilityStep sb = StartWaypoint(kArea, kSpeeds, b);
    for (int i = 0; i < 5000; ++i)
    {
        sa = AdvanceWaypoint(sa.kinematics, sa.waypoint, 1.0, kArea, kSpeeds, kPauses, a);
        sb = AdvanceWaypoint(sb.kinematics, sb.waypoint, 1.0, kArea, kSpeeds, kPauses, b);
        REQUIRE(sa.kinematics.x == sb.kinematics.x);
        REQUIRE(sa.kinematics.y == sb.kinematics.y);
        REQUIRE(sa.kinematics.speed == sb.kinematics.speed);
    }
}

TEST_CASE("random waypoint mean position sits near the centre")
{
    RandomStream rng(5);
    MobilityStep s = StartWaypoint(kArea, kSpeeds, rng);
    double sx = 0.0;
    double sy = 0.0;
    constexpr int steps = 1000000;
    for (int i = 0; i < steps; ++i)
    {
        s = AdvanceWaypoint(s.kinematics, s.waypoint, 1.0, kArea, kSpeeds, kPauses, rng);
        sx += s.kinematics.x;
        sy += s.kinematics.y;
    }
    CHECK(std::abs(sx / steps - 600.0) < 0.05 * 1200.0);
    CHECK(std::abs(sy / steps - 600.0) < 0.05 * 1200.0);
}

TEST_CASE("distance")
{
    NodeKinematics a{0.0, 0.0, 0.0, 0.0};
    NodeKinematics b{3.0, 4.0, 0.0, 0.0};
    CHECK(Distance(a, b) == 5.0);
    CHECK(Distance(a, a) == 0.0);
    RandomStream rng(3);
    for (int i = 0; i < 100; ++i)
    {
        NodeKinematics q;
        const NodeKinematics p = RandomInRange(rng, &q);
        CHECK(Distance(p, q) == Distance(q, p));
    }
}

TEST_CASE("link expiry closed cases")
{
    const double inf = std::numeric_limits<double>::infinity();
    NodeKinematics still1{100.0, 100.0, 0.0, 0.0};
    NodeKinematics still2{150.0, 100.0, 0.0, 0.0};
    CHECK(LinkExpiryTime(still1, still2, kTr) == inf);
    CHECK(RemainingDistance(still1, still2, kTr) == inf);

    NodeKinematics mover{500.0, 500.0, 20.0, 0.0};
    NodeKinematics anchor{500.0, 500.0, 0.0, 0.0};
    CHECK(LinkExpiryTime(mover, anchor, kTr) == doctest::Approx(10.0));
    CHECK(RemainingDistance(mover, anchor, kTr) == doctest::Approx(200.0));
    CHECK(oracle::SteppedExitTime(mover, anchor, kTr, 1e-3, 1e6) == doctest::Approx(10.0).epsilon(1e-3));

    NodeKinematics far{800.0, 500.0, 0.0, 0.0};
    CHECK_THROWS_AS(LinkExpiryTime(mover, far, kTr), NotANeighbor);
    CHECK_THROWS_AS(RemainingDistance(mover, far, kTr), NotANeighbor);
}

TEST_CASE("link expiry properties over random in-range pairs")
{
    RandomStream rng(11);
    for (int i = 0; i < 2000; ++i)
    {
        NodeKinematics q;
        const NodeKinematics p = RandomInRange(rng, &q);
        const double t = LinkExpiryTime(p, q, kTr);
        REQUIRE(t >= 0.0);
        CHECK(LinkExpiryTime(q, p, kTr) == doctest::Approx(t).epsilon(1e-9));
        if (std::isinf(t))
        {
            continue;
        }
        CHECK(RemainingDistance(p, q, kTr) / RelativeSpeed(p, q) == doctest::Approx(t).epsilon(1e-6));
        const double slack = kTr * 1e-4;
        CHECK(Distance(Extrapolate(p, 0.999 * t), Extrapolate(q, 0.999 * t)) <= kTr + slack);
        const double after = 1.001 * t + 1e-3;
        CHECK(Distance(Extrapolate(p, after), Extrapolate(q, after)) > kTr - slack);
    }
}

TEST_CASE("link expiry agrees with the stepped oracle")
{
    const oracle::SuiteResult r = oracle::LetSuite(LinkExpiryTime);
    CHECK(r.cases == 1003);
    CHECK(r.passed);
}

TEST_CASE("the stepped oracle notices a sign error")
{
    const oracle::SuiteResult r = oracle::LetSuite(oracle::LinkExpiryTimeSignFlipped);
    CHECK_FALSE(r.passed);
}
