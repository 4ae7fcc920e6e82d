from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relgossip import InvalidParameters, Params, Policy
from relgossip.solver import (
    fresh_reliable_chain,
    gossip_weight,
    large_gossip_limit,
    solve,
    solve_age_chain,
    solve_freshness_chain,
    solve_reliability_chain,
)

from oracles import ctmc_oracle

BASE = dict(lambda_e=2.0, lambda_u=5.0, lambda_r=1.0, lam=0.1)


def params(n=100, policy=Policy.RELIABILITY, **rates):
    return Params(n=n, policy=policy, **{**BASE, **rates})


def single_node_closed_forms(le, lu, lr):
    """Hand elimination of the recursions at n = 1, in exact arithmetic."""
    le, lu, lr = Fraction(le), Fraction(lu), Fraction(lr)
    c = lr / (le + lr)
    b = (1 - c) * le / (le + lr)
    a = b * lu / (lu + lr)
    d = c * le / (le + lr)
    e = (le + d * lu) / (lu + lr)
    b_bar = le / (le + lr)
    return dict(a=a, b=b, c=c, d=d, e=e, a_bar=b_bar * lu / (lu + lr), e_bar=le / (lu + lr))


def test_gossip_weight():
    assert gossip_weight(params(100, lam=0.1), 50) == pytest.approx(50 * 50 * 0.1 / 99)
    assert gossip_weight(params(1, lam=7.0), 1) == 0.0
    assert gossip_weight(params(10, lam=5.0), 10) == 0.0
    with pytest.raises(ValueError):
        gossip_weight(params(10), 11)


def test_single_node_values():
    exact = single_node_closed_forms(2, 5, 1)
    assert exact["a"] == Fraction(20, 54) and exact["e"] == Fraction(28, 54)
    assert exact["a_bar"] == Fraction(5, 9) and exact["e_bar"] == Fraction(1, 3)

    rel = solve(params(1))
    fresh = solve(params(1, Policy.FRESHNESS))
    for got, want in [
        (rel.c[0], exact["c"]), (rel.b[0], exact["b"]), (rel.a[0], exact["a"]),
        (rel.d[0], exact["d"]), (rel.e[0], exact["e"]),
        (fresh.a[0], exact["a_bar"]), (fresh.e[0], exact["e_bar"]),
        (fresh.b[0], Fraction(2, 3)),
    ]:
        assert got == pytest.approx(float(want), rel=1e-12, abs=0)


@pytest.mark.parametrize(
    "n,rates,policy,cap,tol_f,tol_x",
    [
        (2, BASE, "reliability", 40, 1e-12, 1e-12),
        (2, {**BASE, "lam": 3.0}, "reliability", 40, 1e-12, 1e-12),
        (2, {**BASE, "lam": 3.0}, "freshness", 40, 1e-12, 1e-12),
        (3, dict(lambda_e=1.0, lambda_u=4.0, lambda_r=2.0, lam=1.5), "reliability", 10, 1e-8, 1e-5),
        (3, dict(lambda_e=1.0, lambda_u=4.0, lambda_r=2.0, lam=1.5), "freshness", 10, 1e-8, 1e-5),
    ],
)
def test_recursions_match_full_network_chain(n, rates, policy, cap, tol_f, tol_x):
    f_exact, x_exact, tail = ctmc_oracle(
        n, rates["lambda_e"], rates["lambda_u"], rates["lambda_r"], rates["lam"], policy, cap
    )
    assert tail < 1e-5
    chains = solve(Params(n=n, policy=policy, **rates))
    assert abs(chains.f_value - f_exact) <= tol_f
    assert abs(chains.x1_value - x_exact) <= tol_x


@pytest.mark.parametrize("n", [1, 2, 7, 100])
def test_no_unreliable_source_means_no_unreliable_nodes(n):
    chains = solve(params(n, lambda_u=0.0))
    assert all(a == 0.0 for a in chains.a)


@pytest.mark.parametrize("n", [1, 2, 7, 100])
def test_no_reliable_source(n):
    chains = solve(params(n, lambda_r=0.0))
    assert all(c == 0.0 for c in chains.c)
    assert all(d == 0.0 for d in chains.d)
    assert all(b == 1.0 for b in chains.b)
    assert all(a == 1.0 for a in chains.a)


def test_zero_source_rates_rejected():
    for fn in (solve_reliability_chain, solve_age_chain, solve_freshness_chain, solve):
        with pytest.raises(InvalidParameters):
            fn(params(1, lambda_u=0.0, lambda_r=0.0))
    with pytest.raises(InvalidParameters):
        solve(params(30, Policy.FRESHNESS, lambda_u=0.0, lambda_r=0.0))


def test_shared_chain_is_identical():
    p = params(37)
    assert solve_reliability_chain(p).c == solve_age_chain(p).c == fresh_reliable_chain(p)
    full = solve(p)
    assert full.a == solve_reliability_chain(p).a
    assert full.e == solve_age_chain(p).e


def test_chain_result_accessors():
    r = solve(params(5))
    assert r.f_value == r.a[0] and r.x1_value == r.e[0]
    assert r.at("b", 5) == r.b[4]
    with pytest.raises(KeyError):
        solve(params(5, Policy.FRESHNESS)).at("c", 1)
    assert solve_reliability_chain(params(5)).x1_value is None


def test_large_sources():
    big_r = solve(params(100, lambda_r=1e6))
    assert big_r.e[0] < 1e-2
    assert big_r.a[0] < 1e-2
    big_u = solve(params(100, lambda_u=1e6))
    assert abs(big_u.e[0] - big_u.d[0]) <= 1e-3
    assert abs(big_u.a[0] - big_u.b[0]) <= 1e-3
    assert solve(params(100, Policy.FRESHNESS, lambda_u=1e6)).e[0] < 1e-3


def test_large_gossip_limit_values():
    assert large_gossip_limit(params()) == pytest.approx(10 / 27, rel=1e-15)
    assert large_gossip_limit(params(lambda_u=0.0)) == 0.0
    assert large_gossip_limit(params(lambda_r=0.0)) == 1.0


def test_limit_approached_monotonically():
    gaps = [abs(solve(params(100, lam=lam)).a[0] - large_gossip_limit(params()))
            for lam in (1e2, 1e3, 1e4)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] <= 5e-3


rate = st.floats(min_value=1e-3, max_value=100.0, allow_nan=False)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 200), rate, rate, rate, rate)
def test_ranges_and_policy_ordering(n, le, lu, lr, lam):
    rel = solve(Params(n, le, lu, lr, lam, Policy.RELIABILITY))
    fresh = solve(Params(n, le, lu, lr, lam, Policy.FRESHNESS))
    slack = 1e-12
    for chain in (rel.a, rel.b, rel.c, rel.d, fresh.a, fresh.b):
        assert all(-slack <= v <= 1 + slack for v in chain)
    assert all(v >= 0 for v in rel.e + fresh.e)
    for k in range(n):
        assert fresh.a[k] >= rel.a[k] - slack
        assert fresh.e[k] <= rel.e[k] * (1 + slack)
