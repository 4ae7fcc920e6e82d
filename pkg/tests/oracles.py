"""Independent oracles. Nothing here imports the package under test."""

from __future__ import annotations

from collections import deque

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import spsolve

RELIABLE, UNRELIABLE = 0, 1


def literal_keep_incoming(incoming, resident, policy):
    """The acceptance bullets spelled out case by case."""
    (s_in, x_in), (s_res, x_res) = incoming, resident
    if policy == "freshness":
        if x_in < x_res:
            return True
        if x_in > x_res:
            return False
        return s_in == RELIABLE and s_res == UNRELIABLE
    if s_in == UNRELIABLE and s_res == UNRELIABLE:
        return x_in < x_res
    if s_in == RELIABLE and s_res == RELIABLE:
        return x_in < x_res
    if s_in == RELIABLE and s_res == UNRELIABLE:
        return x_in <= x_res + 1
    # resident reliable keeps its packet while no more than one version staler
    return not (x_res <= x_in + 1)


def ctmc_oracle(n, lambda_e, lambda_u, lambda_r, lam, policy, cap):
    """Stationary unreliable fraction and mean age of the full network chain.

    State: per-node (tag, age) with ages capped at ``cap``. Returns
    ``(F, x1, mass_at_cap)``; the last value bounds the truncation error.
    """

    def step(state, j, packet):
        return state[:j] + (packet,) + state[j + 1:]

    def moves(state):
        yield lambda_e, tuple((s, min(x + 1, cap)) for s, x in state)
        for j in range(n):
            yield lambda_r / n, step(state, j, (RELIABLE, 0))
            fresh_u = (UNRELIABLE, 0)
            kept = fresh_u if literal_keep_incoming(fresh_u, state[j], policy) else state[j]
            yield lambda_u / n, step(state, j, kept)
        if n >= 2:
            for i in range(n):
                for j in range(n):
                    if i != j:
                        kept = state[i] if literal_keep_incoming(state[i], state[j], policy) else state[j]
                        yield lam / (n - 1), step(state, j, kept)

    start = tuple((RELIABLE, 0) for _ in range(n))
    index = {start: 0}
    order = [start]
    rows, cols, vals = [], [], []
    queue = deque([start])
    while queue:
        state = queue.popleft()
        i = index[state]
        for rate, nxt in moves(state):
            if rate == 0 or nxt == state:
                continue
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
                queue.append(nxt)
            j = index[nxt]
            rows += [i, i]
            cols += [j, i]
            vals += [rate, -rate]
    size = len(order)
    q = coo_matrix((vals, (rows, cols)), shape=(size, size)).tocsr()
    a = q.T.tolil()
    a[size - 1, :] = np.ones(size)
    rhs = np.zeros(size)
    rhs[-1] = 1.0
    pi = spsolve(a.tocsr(), rhs)
    unrel = np.array([sum(s for s, _ in st) for st in order]) / n
    age = np.array([sum(x for _, x in st) for st in order]) / n
    at_cap = np.array([any(x == cap for _, x in st) for st in order])
    return float(pi @ unrel), float(pi @ age), float(pi[at_cap].sum())
