"""Parameter sweeps written as flat CSV files.

One schema serves every sweep; simulation columns stay empty unless the
sweep was run with ``compare``.
"""

from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np

from .model import InvalidParameters, Params, Policy
from .simulator import SimConfig, run
from .solver import solve

CSV_COLUMNS = [
    "swept_param", "swept_value", "n", "lambda_e", "lambda_u", "lambda_r", "lambda",
    "policy", "f_solver", "x1_solver", "f_sim", "f_sim_stderr", "x1_sim",
    "x1_sim_stderr", "horizon", "warmup", "seed", "replications",
]

# CLI/CSV name -> Params attribute
SWEEPABLE = {
    "n": "n",
    "lambda": "lam",
    "lambda_e": "lambda_e",
    "lambda_u": "lambda_u",
    "lambda_r": "lambda_r",
}


def fmt(value: Optional[float]) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".12g")


def round12(value: float) -> float:
    """Round to what survives a trip through the CSV."""
    return float(fmt(float(value)))


def default_grid(swept: str) -> List[float]:
    if swept == "n":
        return [2, 5, 10, 20, 50, 100, 200]
    return [round12(v) for v in np.logspace(-2, 2, 9)]


def parse_grid(text: str, swept: str) -> List[float]:
    try:
        values = [float(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError as exc:
        raise InvalidParameters(f"cannot parse grid {text!r}") from exc
    return check_grid(values, swept)


def check_grid(values: Sequence[float], swept: str) -> List[float]:
    if swept not in SWEEPABLE:
        raise InvalidParameters(f"cannot sweep {swept!r}; choose from {sorted(SWEEPABLE)}")
    values = list(values)
    if not values:
        raise InvalidParameters("grid is empty")
    if any(v <= 0 for v in values):
        raise InvalidParameters("grid values must be positive")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise InvalidParameters("grid must be strictly increasing")
    if swept == "n":
        if any(v != int(v) for v in values):
            raise InvalidParameters("grid for n must hold integers")
        return [int(v) for v in values]
    return [round12(v) for v in values]


@dataclass(frozen=True)
class SweepSpec:
    swept: str
    grid: Sequence[float]
    base: Params
    policies: Sequence[Policy] = (Policy.RELIABILITY,)
    compare: bool = False
    horizon: float = 1e6
    warmup: Optional[float] = None
    seed: int = 0
    replications: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "grid", tuple(check_grid(self.grid, self.swept)))
        object.__setattr__(self, "policies", tuple(Policy(p) for p in self.policies))
        if not self.policies:
            raise InvalidParameters("no policy requested")
        # fail before any point is computed
        SimConfig(self.base, self.horizon, self.warmup, self.seed, self.replications)


@dataclass(frozen=True)
class SweepRow:
    swept_param: str
    swept_value: float
    params: Params
    f_solver: float
    x1_solver: float
    f_sim: Optional[float] = None
    f_sim_stderr: Optional[float] = None
    x1_sim: Optional[float] = None
    x1_sim_stderr: Optional[float] = None
    horizon: Optional[float] = None
    warmup: Optional[float] = None
    seed: Optional[int] = None
    replications: Optional[int] = None

    def as_record(self) -> Dict[str, str]:
        p = self.params
        return {
            "swept_param": self.swept_param,
            "swept_value": fmt(self.swept_value),
            "n": str(p.n),
            "lambda_e": fmt(p.lambda_e),
            "lambda_u": fmt(p.lambda_u),
            "lambda_r": fmt(p.lambda_r),
            "lambda": fmt(p.lam),
            "policy": p.policy.value,
            "f_solver": fmt(self.f_solver),
            "x1_solver": fmt(self.x1_solver),
            "f_sim": fmt(self.f_sim),
            "f_sim_stderr": fmt(self.f_sim_stderr),
            "x1_sim": fmt(self.x1_sim),
            "x1_sim_stderr": fmt(self.x1_sim_stderr),
            "horizon": fmt(self.horizon),
            "warmup": fmt(self.warmup),
            "seed": fmt(self.seed),
            "replications": fmt(self.replications),
        }


def evaluate_point(
    params: Params,
    swept: str = "",
    value: Optional[float] = None,
    sim: Optional[SimConfig] = None,
) -> SweepRow:
    chains = solve(params)
    row = dict(
        swept_param=swept,
        swept_value=value,
        params=params,
        f_solver=chains.f_value,
        x1_solver=chains.x1_value,
    )
    if sim is not None:
        est = run(sim)
        row.update(
            f_sim=est.f_hat,
            f_sim_stderr=est.f_stderr,
            x1_sim=est.x1_hat,
            x1_sim_stderr=est.x1_stderr,
            horizon=sim.horizon,
            warmup=sim.warmup,
            seed=sim.seed,
            replications=sim.replications,
        )
    return SweepRow(**row)


def iter_sweep(spec: SweepSpec) -> Iterable[SweepRow]:
    """Rows in grid order; policies vary fastest."""
    attr = SWEEPABLE[spec.swept]
    for value in spec.grid:
        for policy in spec.policies:
            params = spec.base.replace(**{attr: value, "policy": policy})
            sim = None
            if spec.compare:
                sim = SimConfig(params, spec.horizon, spec.warmup, spec.seed, spec.replications)
            yield evaluate_point(params, spec.swept, value, sim)


def write_rows(
    rows: Iterable[SweepRow],
    path: str,
    on_row: Optional[Callable[[SweepRow], None]] = None,
) -> int:
    """Stream rows into ``path`` atomically; nothing is left behind on failure."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".sweep-", suffix=".csv", dir=directory)
    count = 0
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow(row.as_record())
                count += 1
                if on_row is not None:
                    on_row(row)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return count


def read_rows(path: str) -> List[Dict[str, str]]:
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        return list(reader)


def params_from_record(record: Dict[str, str]) -> Params:
    return Params(
        n=int(record["n"]),
        lambda_e=float(record["lambda_e"]),
        lambda_u=float(record["lambda_u"]),
        lambda_r=float(record["lambda_r"]),
        lam=float(record["lambda"]),
        policy=Policy(record["policy"]),
    )
