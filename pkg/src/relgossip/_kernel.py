"""Compiled event loop for the gossip simulator.

Each event consumes one row of four uniforms ``(wait, category, idx_a,
idx_b)``; :mod:`relgossip.simulator` relies on this layout to replay the
same stream through the pure-Python reference engine.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# indices into the float accumulator array
CLOCK, F_INT, AGE_INT, VE_INT, COVERED = 0, 1, 2, 3, 4
N_ACC = 5
# indices into the integer state array
VE, N_UNREL, SUM_V, EVENTS, DONE = 0, 1, 2, 3, 4
N_ISTATE = 5

RELIABILITY_CODE, FRESHNESS_CODE = 0, 1


@njit(cache=True)
def _overlap(lo, hi, warmup, horizon):
    a = lo if lo > warmup else warmup
    b = hi if hi < horizon else horizon
    return b - a if b > a else 0.0


@njit(cache=True)
def keeps_incoming(tag_in, age_in, tag_res, age_res, policy):
    if policy == FRESHNESS_CODE:
        if age_in != age_res:
            return age_in < age_res
        return tag_in == 0 and tag_res == 1
    if tag_in == tag_res:
        return age_in < age_res
    if tag_in == 0:
        return age_in <= age_res + 1
    return age_res > age_in + 1


@njit(cache=True)
def advance(
    uniforms, rates, n, policy, warmup, horizon,
    tags, versions, last_t, vint, acc, istate,
):
    """Consume ``uniforms`` until exhausted or the horizon is reached.

    ``rates`` holds cumulative thresholds ``(e, e+u, e+u+r, total)``.
    Returns the number of rows consumed.
    """
    total = rates[3]
    for row in range(uniforms.shape[0]):
        clock = acc[CLOCK]
        t_next = clock - math.log1p(-uniforms[row, 0]) / total
        seg_end = t_next if t_next < horizon else horizon
        d = _overlap(clock, seg_end, warmup, horizon)
        if d > 0.0:
            ve = istate[VE]
            acc[F_INT] += istate[N_UNREL] * d
            acc[AGE_INT] += (n * ve - istate[SUM_V]) * d
            acc[VE_INT] += ve * d
            acc[COVERED] += d
        if t_next >= horizon:
            acc[CLOCK] = horizon
            istate[DONE] = 1
            return row + 1
        acc[CLOCK] = t_next
        istate[EVENTS] += 1

        x = uniforms[row, 1] * total
        if n < 2 and x >= rates[2]:
            x = np.nextafter(rates[2], 0.0)
        ve = istate[VE]
        if x < rates[0]:
            istate[VE] = ve + 1
            continue

        if x < rates[2]:
            target = min(int(uniforms[row, 2] * n), n - 1)
            if x >= rates[1]:
                new_tag, new_version = 0, ve
            elif keeps_incoming(1, 0, tags[target], ve - versions[target], policy):
                new_tag, new_version = 1, ve
            else:
                continue
        else:
            source = min(int(uniforms[row, 2] * n), n - 1)
            target = min(int(uniforms[row, 3] * (n - 1)), n - 2)
            if target >= source:
                target += 1
            if keeps_incoming(
                tags[source], ve - versions[source],
                tags[target], ve - versions[target], policy,
            ):
                new_tag, new_version = tags[source], versions[source]
            else:
                continue

        old_version = versions[target]
        if new_version != old_version:
            vint[target] += old_version * _overlap(last_t[target], t_next, warmup, horizon)
            last_t[target] = t_next
            istate[SUM_V] += new_version - old_version
            versions[target] = new_version
        istate[N_UNREL] += new_tag - tags[target]
        tags[target] = new_tag
    return uniforms.shape[0]


@njit(cache=True)
def flush(versions, last_t, vint, warmup, horizon):
    for i in range(versions.shape[0]):
        vint[i] += versions[i] * _overlap(last_t[i], horizon, warmup, horizon)
        last_t[i] = horizon


def new_buffers(n: int):
    tags = np.zeros(n, dtype=np.int64)
    versions = np.zeros(n, dtype=np.int64)
    last_t = np.zeros(n, dtype=np.float64)
    vint = np.zeros(n, dtype=np.float64)
    acc = np.zeros(N_ACC, dtype=np.float64)
    istate = np.zeros(N_ISTATE, dtype=np.int64)
    return tags, versions, last_t, vint, acc, istate
