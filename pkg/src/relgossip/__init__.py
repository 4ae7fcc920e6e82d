"""Gossip networks fed by a reliable and an unreliable source.

Exact long-run unreliable fraction and version age from backward recursions
(:mod:`relgossip.solver`), checked against a seeded discrete-event simulator
(:mod:`relgossip.simulator`).
"""

from .model import (
    NO_PACKET,
    CorruptState,
    EventUpdate,
    FromR,
    FromU,
    Gossip,
    InvalidParameters,
    MergeOutcome,
    NetworkState,
    Packet,
    Params,
    Policy,
    Tag,
    accept_decision,
    age_of,
    apply_transition,
    merge_set,
)
from .simulator import SimConfig, SimEstimate, next_transition, run, run_replication
from .solver import (
    ChainResult,
    gossip_weight,
    large_gossip_limit,
    solve,
    solve_age_chain,
    solve_freshness_chain,
    solve_reliability_chain,
)

__version__ = "0.1.0"
