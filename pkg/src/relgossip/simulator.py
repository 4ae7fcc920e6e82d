"""Discrete-event Monte Carlo simulation of the two-source gossip network.

All Poisson processes are superposed into one clock: an exponential wait at
the total rate followed by a categorical pick of the transition. Every event
draws exactly four uniforms from a PCG64 stream seeded with the replication
seed, so the compiled engine and :func:`run_replication_reference` see the
same transitions for the same seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import _kernel
from .model import (
    EventUpdate,
    FromR,
    FromU,
    Gossip,
    InvalidParameters,
    NetworkState,
    Params,
    Policy,
    Transition,
    apply_transition,
)

BATCH_ROWS = 1 << 16
UNIFORMS_PER_EVENT = 4


@dataclass(frozen=True)
class SimConfig:
    params: Params
    horizon: float = 1e6
    warmup: Optional[float] = None  # defaults to 0.1% of the horizon
    seed: int = 0
    replications: int = 1

    def __post_init__(self) -> None:
        horizon = float(self.horizon)
        if not math.isfinite(horizon) or horizon <= 0:
            raise InvalidParameters(f"horizon must be positive, got {self.horizon!r}")
        warmup = horizon * 1e-3 if self.warmup is None else float(self.warmup)
        if not 0 <= warmup < horizon:
            raise InvalidParameters(f"warmup must lie in [0, horizon), got {warmup!r}")
        if int(self.replications) != self.replications or self.replications < 1:
            raise InvalidParameters("replications must be a positive integer")
        if int(self.seed) != self.seed or self.seed < 0:
            raise InvalidParameters("seed must be a nonnegative integer")
        object.__setattr__(self, "horizon", horizon)
        object.__setattr__(self, "warmup", warmup)
        object.__setattr__(self, "replications", int(self.replications))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def window(self) -> float:
        return self.horizon - self.warmup


@dataclass(frozen=True)
class SimEstimate:
    f_hat: float
    x1_hat: float
    f_stderr: float
    x1_stderr: float
    per_node_age: Tuple[float, ...]
    events_processed: int
    replications: int = 1
    seeds: Tuple[int, ...] = ()
    covered_time: float = 0.0
    per_replication_f: Tuple[float, ...] = field(default=(), repr=False)
    per_replication_x1: Tuple[float, ...] = field(default=(), repr=False)


def _thresholds(params: Params) -> np.ndarray:
    e = params.lambda_e
    eu = e + params.lambda_u
    eur = eu + params.lambda_r
    return np.array([e, eu, eur, params.total_rate], dtype=np.float64)


def decode_transition(params: Params, u: Sequence[float]) -> Tuple[float, Transition]:
    """Map one row of four uniforms to ``(waiting_time, transition)``."""
    rates = _thresholds(params)
    total = float(rates[3])
    if total <= 0:
        raise InvalidParameters("total transition rate is zero")
    n = params.n
    wait = -math.log1p(-u[0]) / total
    x = u[1] * total
    if n < 2 and x >= rates[2]:
        x = math.nextafter(float(rates[2]), 0.0)
    if x < rates[0]:
        return wait, EventUpdate()
    if x < rates[2]:
        target = min(int(u[2] * n), n - 1)
        return wait, (FromU(target) if x < rates[1] else FromR(target))
    source = min(int(u[2] * n), n - 1)
    target = min(int(u[3] * (n - 1)), n - 2)
    if target >= source:
        target += 1
    return wait, Gossip(source, target)


def next_transition(params: Params, rng: np.random.Generator) -> Tuple[float, Transition]:
    return decode_transition(params, rng.random(UNIFORMS_PER_EVENT))


def run_replication(config: SimConfig, seed: int) -> SimEstimate:
    """One replication on the compiled engine."""
    params = config.params
    n = params.n
    rates = _thresholds(params)
    if rates[3] <= 0:
        raise InvalidParameters("total transition rate is zero")
    policy = (
        _kernel.FRESHNESS_CODE if params.policy is Policy.FRESHNESS else _kernel.RELIABILITY_CODE
    )
    tags, versions, last_t, vint, acc, istate = _kernel.new_buffers(n)
    rng = np.random.default_rng(seed)
    while not istate[_kernel.DONE]:
        block = rng.random((BATCH_ROWS, UNIFORMS_PER_EVENT))
        _kernel.advance(
            block, rates, n, policy, config.warmup, config.horizon,
            tags, versions, last_t, vint, acc, istate,
        )
    _kernel.flush(versions, last_t, vint, config.warmup, config.horizon)

    window = config.window
    per_node = (acc[_kernel.VE_INT] - vint) / window
    return SimEstimate(
        f_hat=float(acc[_kernel.F_INT] / (n * window)),
        x1_hat=float(acc[_kernel.AGE_INT] / (n * window)),
        f_stderr=0.0,
        x1_stderr=0.0,
        per_node_age=tuple(float(v) for v in per_node),
        events_processed=int(istate[_kernel.EVENTS]),
        replications=1,
        seeds=(seed,),
        covered_time=float(acc[_kernel.COVERED]),
    )


def run_replication_reference(config: SimConfig, seed: int) -> SimEstimate:
    """Slow replication built on :func:`apply_transition`, for cross-checking."""
    params = config.params
    n = params.n
    warmup, horizon = config.warmup, config.horizon
    rng = np.random.default_rng(seed)
    state = NetworkState.initial(n)
    f_int = 0.0
    age_int = [0.0] * n
    covered = 0.0
    events = 0
    while True:
        wait, transition = next_transition(params, rng)
        t_next = state.clock + wait
        lo = max(state.clock, warmup)
        hi = min(t_next, horizon)
        if hi > lo:
            d = hi - lo
            covered += d
            f_int += state.unreliable_count() * d
            for i, age in enumerate(state.ages()):
                age_int[i] += age * d
        if t_next >= horizon:
            break
        events += 1
        state = apply_transition(state, transition, params.policy, clock=t_next)

    window = config.window
    per_node = tuple(v / window for v in age_int)
    return SimEstimate(
        f_hat=f_int / (n * window),
        x1_hat=sum(age_int) / (n * window),
        f_stderr=0.0,
        x1_stderr=0.0,
        per_node_age=per_node,
        events_processed=events,
        replications=1,
        seeds=(seed,),
        covered_time=covered,
    )


def _stderr(values: List[float]) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


def run(config: SimConfig) -> SimEstimate:
    """Pool ``config.replications`` replications seeded ``seed, seed+1, ...``."""
    reps = [run_replication(config, config.seed + r) for r in range(config.replications)]
    if len(reps) == 1:
        only = reps[0]
        return SimEstimate(
            **{**only.__dict__,
               "per_replication_f": (only.f_hat,),
               "per_replication_x1": (only.x1_hat,)}
        )
    count = len(reps)
    fs = [r.f_hat for r in reps]
    xs = [r.x1_hat for r in reps]
    n = config.params.n
    per_node = tuple(sum(r.per_node_age[i] for r in reps) / count for i in range(n))
    return SimEstimate(
        f_hat=sum(fs) / count,
        x1_hat=sum(xs) / count,
        f_stderr=_stderr(fs),
        x1_stderr=_stderr(xs),
        per_node_age=per_node,
        events_processed=sum(r.events_processed for r in reps),
        replications=count,
        seeds=tuple(s for r in reps for s in r.seeds),
        covered_time=sum(r.covered_time for r in reps) / count,
        per_replication_f=tuple(fs),
        per_replication_x1=tuple(xs),
    )
