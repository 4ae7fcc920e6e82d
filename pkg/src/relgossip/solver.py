"""Long-run expectations from the backward recursions over k-node subsets.

For a typical set of ``k`` nodes the recursions couple index ``k`` only to
``k + 1`` through the gossip weight ``k (n - k) lam / (n - 1)``, which vanishes
at ``k = n``. Every chain is therefore evaluated by a single backward sweep
starting at ``k = n``; no linear solve is involved.

Chain meanings (long-run expectations over a typical k-set ``A``):

- ``a[k]``: reliability status of ``A`` (1 = unreliable winner)
- ``b[k]``: reliability status of ``A`` merged with a fresh unreliable packet
- ``c[k]``: probability the freshest reliable packet in ``A`` has age 0
- ``d[k]``: probability the freshest reliable packet in ``A`` has age 1
- ``e[k]``: version age of ``A``

The freshness-first chains reuse ``a``, ``b`` and ``e``; ``c`` and ``d`` do not
appear there.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

from .model import InvalidParameters, Params, Policy


@dataclass(frozen=True)
class ChainResult:
    n: int
    policy: Policy
    a: Optional[Sequence[float]] = None
    b: Optional[Sequence[float]] = None
    c: Optional[Sequence[float]] = None
    d: Optional[Sequence[float]] = None
    e: Optional[Sequence[float]] = None

    @property
    def f_value(self) -> Optional[float]:
        return None if self.a is None else self.a[0]

    @property
    def x1_value(self) -> Optional[float]:
        return None if self.e is None else self.e[0]

    def at(self, chain: str, k: int) -> float:
        """Chain value at 1-based subset size ``k``."""
        values = getattr(self, chain)
        if values is None:
            raise KeyError(f"chain {chain!r} not computed for {self.policy.value}")
        return values[k - 1]


def gossip_weight(params: Params, k: int) -> float:
    n = params.n
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}, got {k}")
    if n == 1 or k == n:
        return 0.0
    return k * (n - k) * params.lam / (n - 1)


def _backward(n: int, step: Callable[[int, float], float]) -> List[float]:
    """Evaluate ``x[k] = step(k, x[k+1])`` for k = n..1 (1-based)."""
    out = [0.0] * n
    upper = 0.0  # never used: the weight is zero at k = n
    for k in range(n, 0, -1):
        out[k - 1] = step(k, upper)
        upper = out[k - 1]
    return out


def _require_source(params: Params) -> None:
    if params.lambda_u + params.lambda_r <= 0:
        raise InvalidParameters(
            "lambda_u and lambda_r are both zero: subset age and status are undefined"
        )


def _reliable_rate(params: Params) -> Callable[[int], float]:
    n = params.n

    def rate(k: int) -> float:
        return k * params.lambda_r / n

    return rate


def fresh_reliable_chain(params: Params) -> List[float]:
    """``c[k]``; shared by the reliability and the version-age computations."""
    le = params.lambda_e
    r = _reliable_rate(params)

    def step(k: int, c_next: float) -> float:
        w = gossip_weight(params, k)
        return (r(k) + c_next * w) / (le + r(k) + w)

    return _backward(params.n, step)


def _status_chains(params: Params, inject: Sequence[float]) -> tuple:
    """``b`` then ``a``; ``inject[k-1]`` is the event-driven inflow into ``b``."""
    n, le = params.n, params.lambda_e
    r = _reliable_rate(params)

    def b_step(k: int, b_next: float) -> float:
        w = gossip_weight(params, k)
        return (inject[k - 1] + b_next * w) / (le + r(k) + w)

    b = _backward(n, b_step)

    def a_step(k: int, a_next: float) -> float:
        w = gossip_weight(params, k)
        u = k * params.lambda_u / n
        return (b[k - 1] * u + a_next * w) / (u + r(k) + w)

    return b, _backward(n, a_step)


def _age_chain(params: Params, one_step_ahead: Optional[Sequence[float]]) -> List[float]:
    n, le = params.n, params.lambda_e
    r = _reliable_rate(params)

    def e_step(k: int, e_next: float) -> float:
        w = gossip_weight(params, k)
        u = k * params.lambda_u / n
        kept = 0.0 if one_step_ahead is None else one_step_ahead[k - 1] * u
        return (le + kept + e_next * w) / (u + r(k) + w)

    return _backward(n, e_step)


def solve_reliability_chain(params: Params, c: Optional[Sequence[float]] = None) -> ChainResult:
    """Unreliable fraction ``F = a[1]`` under reliability-first acceptance."""
    _require_source(params)
    if c is None:
        c = fresh_reliable_chain(params)
    le = params.lambda_e
    b, a = _status_chains(params, [(1.0 - ck) * le for ck in c])
    return ChainResult(params.n, Policy.RELIABILITY, a=a, b=b, c=list(c))


def solve_age_chain(params: Params, c: Optional[Sequence[float]] = None) -> ChainResult:
    """Version age ``x1 = e[1]`` under reliability-first acceptance."""
    _require_source(params)
    if c is None:
        c = fresh_reliable_chain(params)
    n, le = params.n, params.lambda_e
    r = _reliable_rate(params)

    def d_step(k: int, d_next: float) -> float:
        w = gossip_weight(params, k)
        return (c[k - 1] * le + d_next * w) / (le + r(k) + w)

    d = _backward(n, d_step)
    e = _age_chain(params, d)
    return ChainResult(n, Policy.RELIABILITY, c=list(c), d=d, e=e)


def solve_freshness_chain(params: Params) -> ChainResult:
    """``a``, ``b`` and ``e`` under freshness-first acceptance."""
    _require_source(params)
    b, a = _status_chains(params, [params.lambda_e] * params.n)
    e = _age_chain(params, None)
    return ChainResult(params.n, Policy.FRESHNESS, a=a, b=b, e=e)


def solve(params: Params) -> ChainResult:
    """All chains for ``params.policy``."""
    if params.policy is Policy.FRESHNESS:
        return solve_freshness_chain(params)
    c = fresh_reliable_chain(params)
    status = solve_reliability_chain(params, c)
    age = solve_age_chain(params, c)
    return ChainResult(
        params.n, Policy.RELIABILITY, a=status.a, b=status.b, c=c, d=age.d, e=age.e
    )


def large_gossip_limit(params: Params) -> float:
    """Unreliable fraction approached as the gossip rate grows without bound."""
    le, lu, lr = params.lambda_e, params.lambda_u, params.lambda_r
    if le + lr <= 0 or lu + lr <= 0:
        raise InvalidParameters("large-gossip limit needs lambda_e+lambda_r > 0 and lambda_u+lambda_r > 0")
    return (le / (le + lr)) ** 2 * lu / (lu + lr)
