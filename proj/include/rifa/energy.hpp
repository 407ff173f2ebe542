/*
 * SPDX-License-Identifier: GPL-2.0-only
 */
#pragma once

#include <span>

namespace rifa
{

/// Batteries only drain; a node at zero residual is dead.
struct EnergyState
{
    double initial{100.0};
    double residual{100.0};
    double dangerThreshold{20.0};

    bool IsDead() const
    {
        return residual <= 0.0;
    }
    double Consumed() const
    {
        return initial - residual;
    }
};

EnergyState MakeEnergyState(double initial, double dangerFraction);

/// Costs per 512-byte packet unit and per idle second, in joules.
struct RadioCostModel
{
    double txPerPacket{0.02};
    double rxPerPacket{0.01};
    double idlePerSecond{0.001};

    bool operator==(const RadioCostModel&) const = default;
};

inline constexpr double kPacketCostUnitBytes = 512.0;

enum class EnergyLevel
{
    Danger,
    Normal,
};

enum class DebitKind
{
    Tx,
    Rx,
    Idle,
};

/// Danger iff residual < threshold; a residual exactly at the threshold is Normal.
EnergyLevel Classify(const EnergyState& state);

/// Joules charged for `basis` packet units (Tx/Rx) or seconds (Idle).
double DebitCost(DebitKind kind, double basis, const RadioCostModel& model);

/// Packet units for a packet of `bytes` bytes.
double PacketUnits(double bytes);

/// Residual reduced by the model cost, floored at zero. Throws InvalidState on a dead node.
EnergyState Debit(EnergyState state, DebitKind kind, double basis, const RadioCostModel& model);

/// In-place debit returning the joules actually removed.
double ApplyDebit(EnergyState& state, DebitKind kind, double basis, const RadioCostModel& model);

/// Sum over nodes of (initial - residual).
double NetworkEnergyConsumed(std::span<const EnergyState> nodes);

} // namespace rifa
