/*
 * SPDX-License-Identifier: GPL-2.0-only
 */
#include "rifa/energy.hpp"

#include "rifa/errors.hpp"

#include <algorithm>

namespace rifa
{

EnergyState
MakeEnergyState(double initial, double dangerFraction)
{
    if (!(initial > 0.0))
    {
        throw InvalidArgument("MakeEnergyState: initial energy must be positive");
    }
    return EnergyState{initial, initial, initial * dangerFraction};
}

EnergyLevel
Classify(const EnergyState& state)
{
    return state.residual < state.dangerThreshold ? EnergyLevel::Danger : EnergyLevel::Normal;
}

double
PacketUnits(double bytes)
{
    return bytes / kPacketCostUnitBytes;
}

double
DebitCost(DebitKind kind, double basis, const RadioCostModel& model)
{
    switch (kind)
    {
    case DebitKind::Tx:
        return model.txPerPacket * basis;
    case DebitKind::Rx:
        return model.rxPerPacket * basis;
    case DebitKind::Idle:
        return model.idlePerSecond * basis;
    }
    return 0.0;
}

double
ApplyDebit(EnergyState& state, DebitKind kind, double basis, const RadioCostModel& model)
{
    if (state.IsDead())
    {
        throw InvalidState("Debit: node is dead");
    }
    const double cost = DebitCost(kind, basis, model);
    const double taken = std::min(cost, state.residual);
    state.residual -= taken;
    if (state.residual < 0.0)
    {
        state.residual = 0.0;
    }
    return taken;
}

EnergyState
Debit(EnergyState state, DebitKind kind, double basis, const RadioCostModel& model)
{
    ApplyDebit(state, kind, basis, model);
    return state;
}

double
NetworkEnergyConsumed(std::span<const EnergyState> nodes)
{
    double total = 0.0;
    for (const auto& n : nodes)
    {
        total += n.initial - n.residual;
    }
    return total;
}

} // namespace rifa
