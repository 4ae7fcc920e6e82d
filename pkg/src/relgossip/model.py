"""Packets, acceptance policies and merge semantics.

A node's packet is a ``(tag, version)`` pair. Ages are never stored: they are
derived against the global event version, so an event update ages every node
at once without touching any packet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Iterable, Optional, Tuple, Union


class InvalidParameters(ValueError):
    """Raised for rate/size combinations the model cannot handle."""


class CorruptState(RuntimeError):
    """A held packet claims a version newer than the event itself."""


class Tag(IntEnum):
    RELIABLE = 0
    UNRELIABLE = 1


class Policy(str, Enum):
    RELIABILITY = "reliability"
    FRESHNESS = "freshness"


@dataclass(frozen=True)
class Packet:
    tag: Tag
    version: int

    def __post_init__(self) -> None:
        if self.version < 0:
            raise CorruptState(f"negative version {self.version}")


@dataclass(frozen=True)
class Params:
    """Network size, the four Poisson rates and the acceptance policy.

    ``lam`` is the total gossip output of one node; it is split evenly over
    the ``n - 1`` other nodes.
    """

    n: int
    lambda_e: float
    lambda_u: float
    lambda_r: float
    lam: float
    policy: Policy = Policy.RELIABILITY

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise InvalidParameters(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "policy", Policy(self.policy))
        for name in ("lambda_e", "lambda_u", "lambda_r", "lam"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise InvalidParameters(f"{name} must be finite and >= 0, got {value!r}")
            object.__setattr__(self, name, value)
        if self.lambda_e <= 0:
            raise InvalidParameters("lambda_e must be > 0")

    @property
    def per_node_u(self) -> float:
        return self.lambda_u / self.n

    @property
    def per_node_r(self) -> float:
        return self.lambda_r / self.n

    @property
    def per_pair_gossip(self) -> float:
        """Rate of one ordered gossip pair; 0 for a single node."""
        return self.lam / (self.n - 1) if self.n >= 2 else 0.0

    @property
    def total_rate(self) -> float:
        gossip = self.n * self.lam if self.n >= 2 else 0.0
        return self.lambda_e + self.lambda_u + self.lambda_r + gossip

    def replace(self, **changes) -> "Params":
        values = {
            "n": self.n,
            "lambda_e": self.lambda_e,
            "lambda_u": self.lambda_u,
            "lambda_r": self.lambda_r,
            "lam": self.lam,
            "policy": self.policy,
        }
        values.update(changes)
        return Params(**values)


# (tag, age) pairs are what the acceptance rules compare.
Candidate = Tuple[Tag, int]


@dataclass(frozen=True)
class MergeOutcome:
    """Winner of a set merge. ``age is None`` is the empty-set outcome."""

    age: Optional[int]
    tag: Optional[Tag]

    @property
    def empty(self) -> bool:
        return self.age is None


NO_PACKET = MergeOutcome(age=None, tag=None)


def age_of(packet: Packet, event_version: int) -> int:
    if packet.version > event_version:
        raise CorruptState(
            f"packet version {packet.version} ahead of event version {event_version}"
        )
    return event_version - packet.version


def accept_decision(incoming: Candidate, resident: Candidate, policy: Policy) -> Candidate:
    """Return whichever of the two packets the receiving node keeps."""
    tag_in, age_in = incoming
    tag_res, age_res = resident
    if Policy(policy) is Policy.FRESHNESS:
        if age_in != age_res:
            return incoming if age_in < age_res else resident
        if tag_in == Tag.RELIABLE and tag_res == Tag.UNRELIABLE:
            return incoming
        return resident

    if tag_in == tag_res:
        return incoming if age_in < age_res else resident
    if tag_in == Tag.RELIABLE:
        # reliable newcomer tolerated up to one version staler
        return incoming if age_in <= age_res + 1 else resident
    return resident if age_res <= age_in + 1 else incoming


def merge_set(members: Iterable[Candidate], policy: Policy) -> MergeOutcome:
    """Age and tag of the packet that wins over a whole node set."""
    best_r: Optional[int] = None
    best_u: Optional[int] = None
    for tag, age in members:
        if tag == Tag.RELIABLE:
            best_r = age if best_r is None else min(best_r, age)
        else:
            best_u = age if best_u is None else min(best_u, age)
    if best_r is None and best_u is None:
        return NO_PACKET
    if best_r is None:
        return MergeOutcome(best_u, Tag.UNRELIABLE)
    if best_u is None:
        return MergeOutcome(best_r, Tag.RELIABLE)
    slack = 1 if Policy(policy) is Policy.RELIABILITY else 0
    if best_r <= best_u + slack:
        return MergeOutcome(best_r, Tag.RELIABLE)
    return MergeOutcome(best_u, Tag.UNRELIABLE)


@dataclass(frozen=True)
class EventUpdate:
    pass


@dataclass(frozen=True)
class FromU:
    target: int


@dataclass(frozen=True)
class FromR:
    target: int


@dataclass(frozen=True)
class Gossip:
    source: int
    target: int


Transition = Union[EventUpdate, FromU, FromR, Gossip]


@dataclass(frozen=True)
class NetworkState:
    event_version: int
    packets: Tuple[Packet, ...]
    clock: float = 0.0

    @classmethod
    def initial(cls, n: int) -> "NetworkState":
        return cls(0, tuple(Packet(Tag.RELIABLE, 0) for _ in range(n)), 0.0)

    @property
    def n(self) -> int:
        return len(self.packets)

    def ages(self) -> Tuple[int, ...]:
        return tuple(age_of(p, self.event_version) for p in self.packets)

    def unreliable_count(self) -> int:
        return sum(1 for p in self.packets if p.tag == Tag.UNRELIABLE)

    def candidate(self, node: int) -> Candidate:
        packet = self.packets[node]
        return packet.tag, age_of(packet, self.event_version)


def _check_index(state: NetworkState, index: int) -> None:
    if not 0 <= index < state.n:
        raise IndexError(f"node index {index} out of range for n={state.n}")


def apply_transition(
    state: NetworkState, transition: Transition, policy: Policy, clock: Optional[float] = None
) -> NetworkState:
    """Return the state after one instantaneous transition."""
    clock = state.clock if clock is None else clock
    if clock < state.clock:
        raise CorruptState("clock moved backwards")
    version = state.event_version

    if isinstance(transition, EventUpdate):
        return NetworkState(version + 1, state.packets, clock)

    if isinstance(transition, FromR):
        target = transition.target
        _check_index(state, target)
        new = Packet(Tag.RELIABLE, version)
    elif isinstance(transition, FromU):
        target = transition.target
        _check_index(state, target)
        tag, age = accept_decision((Tag.UNRELIABLE, 0), state.candidate(target), policy)
        new = Packet(tag, version - age)
    elif isinstance(transition, Gossip):
        target = transition.target
        _check_index(state, transition.source)
        _check_index(state, target)
        if transition.source == target:
            raise IndexError("a node cannot gossip to itself")
        tag, age = accept_decision(
            state.candidate(transition.source), state.candidate(target), policy
        )
        new = Packet(tag, version - age)
    else:
        raise TypeError(f"unknown transition {transition!r}")

    packets = list(state.packets)
    packets[target] = new
    return NetworkState(version, tuple(packets), clock)
