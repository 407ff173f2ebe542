# SPDX-License-Identifier: GPL-2.0-only
"""Deterministic MANET simulator for the RIFA routing protocol and its baselines."""

from ._rifa import (
    DomainError,
    NotANeighbor,
    ParseError,
    Scenario,
    ValidationError,
    link_expiry_time,
    run,
    stirling_gamma,
    urn_probability,
)

__all__ = [
    "DomainError",
    "NotANeighbor",
    "ParseError",
    "Scenario",
    "ValidationError",
    "link_expiry_time",
    "run",
    "stirling_gamma",
    "urn_probability",
]
