"""Seeded random generation of auction cases.

Each case draws, per bidder, an availability uniform on [1, Q] and a unit
seat cost, then prices size m at cost * sum(gamma^(i-1), i=1..m) rounded
half-up to micro-units: strictly increasing with diminishing marginals, so
every generated schedule carries the concave flag.

Streams are keyed by (seed, case, bidder) only, never by the bidder count,
so scenarios of different sizes share their common bidders: the K=5 batch
is a prefix of the K=100 batch for the same seed.  That is what makes the
paired-seed comparisons across K meaningful.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Union

from .core import (
    AuctionError,
    AuctionInstance,
    BidSchedule,
    Money,
    SeatBoundViolation,
    ServiceType,
    as_fraction,
    has_diminishing_marginals,
    is_strictly_increasing,
    round_half_up,
)

MICRO = 10**6

# Redraws per bidder before declaring the law degenerate (a gamma so extreme
# that micro-rounding can never produce a valid price curve).
MAX_DRAW_ATTEMPTS = 1000


class InvalidLaw(AuctionError):
    pass


class CostLaw(Enum):
    """Unit seat-cost distribution: uniform (0,1] or uniform (0,0.1] + 0.5."""

    LARGE_VARIATION = "large"
    SMALL_VARIATION = "small"

    @classmethod
    def from_token(cls, token: str) -> "CostLaw":
        try:
            return cls(token.strip().lower())
        except ValueError:
            raise InvalidLaw(f"unknown cost law {token!r}") from None


class RngStream:
    """A deterministic uniform stream, split off a seed by a string label.

    Distinct labels give independent sequences; the same (seed, label) pair
    always replays the same sequence.
    """

    def __init__(self, seed: int, stream_id: str):
        digest = hashlib.sha256(f"{seed}\x1f{stream_id}".encode()).digest()
        self._rng = random.Random(int.from_bytes(digest, "big"))
        self.seed = seed
        self.stream_id = stream_id

    def randint(self, lo: int, hi: int) -> int:
        return self._rng.randint(lo, hi)

    def uniform_open(self) -> float:
        """Uniform on (0, 1]: maps [0, 1) through 1 - u, so 0 is impossible."""
        return 1.0 - self._rng.random()

    def sample(self, population, k: int):
        return self._rng.sample(population, k)


def rng_stream(seed: int, stream_id: str) -> RngStream:
    return RngStream(seed, stream_id)


@dataclass(frozen=True)
class GenerationLaw:
    """How random cases are drawn; availability is always uniform on [1, Q]."""

    seed: int
    cost_law: CostLaw = CostLaw.LARGE_VARIATION
    gamma: Fraction = Fraction(4, 5)

    def __post_init__(self) -> None:
        object.__setattr__(self, "gamma", as_fraction(self.gamma))
        if not isinstance(self.cost_law, CostLaw):
            raise InvalidLaw(f"cost_law must be a CostLaw, got {self.cost_law!r}")
        if not (0 < self.gamma <= 1):
            raise InvalidLaw(f"gamma must lie in (0, 1], got {self.gamma}")
        if not (0 <= int(self.seed) < 2**64):
            raise InvalidLaw(f"seed must be an unsigned 64-bit integer, got {self.seed}")


def draw_cost_micros(stream: RngStream, cost_law: CostLaw) -> int:
    """One unit seat cost in micro-units, per the configured law."""
    if cost_law is CostLaw.LARGE_VARIATION:
        return stream.randint(1, MICRO)
    return MICRO // 2 + stream.randint(1, MICRO // 10)


def _geometric_sums(gamma: Fraction, capacity: int) -> list[Fraction]:
    sums = []
    term = Fraction(1)
    acc = Fraction(0)
    for _ in range(capacity):
        acc += term
        sums.append(acc)
        term *= gamma
    return sums


def _draw_schedule(
    stream: RngStream,
    bidder_id: str,
    capacity: int,
    law: GenerationLaw,
    sums: list[Fraction],
) -> BidSchedule:
    available = stream.randint(1, capacity)
    for _ in range(MAX_DRAW_ATTEMPTS):
        cost = draw_cost_micros(stream, law.cost_law)
        series = [round_half_up(cost * sums[m - 1]) for m in range(1, available + 1)]
        # Micro-rounding can collapse sub-micro marginals for tiny costs;
        # such draws are rejected so every emitted schedule validates.
        if is_strictly_increasing(series) and has_diminishing_marginals(series):
            prices = {m: Money(v) for m, v in enumerate(series, start=1)}
            return BidSchedule(
                bidder_id=bidder_id,
                available_seats=available,
                prices=prices,
                concave=True,
            )
    raise InvalidLaw(
        f"gamma {law.gamma} cannot produce valid micro-unit price curves"
    )


@dataclass(frozen=True)
class ScenarioBatch:
    """Generated bid schedules: one tuple of schedules per random case.

    A case is evaluated at every requested size and service type, so the
    batch stores the schedules and assembles instances on demand.
    """

    law: GenerationLaw
    bidder_count: int
    capacity: int
    case_count: int
    cases: tuple[tuple[BidSchedule, ...], ...]

    def instance(self, case: int, service: ServiceType, requested_seats: int) -> AuctionInstance:
        if not (1 <= requested_seats <= self.capacity):
            raise SeatBoundViolation(
                f"requested_seats {requested_seats} outside [1, {self.capacity}]"
            )
        return AuctionInstance(
            capacity=self.capacity,
            requested_seats=requested_seats,
            service=service,
            bids=self.cases[case],
        )

    def case_label(self, case: int) -> str:
        return (
            f"seed={self.law.seed} law={self.law.cost_law.value} "
            f"gamma={self.law.gamma} K={self.bidder_count} case={case}"
        )

    def digest(self) -> str:
        h = hashlib.sha256()
        for schedules in self.cases:
            for s in schedules:
                prices = ",".join(f"{m}:{s.prices[m].micros}" for m in sorted(s.prices))
                h.update(f"{s.bidder_id}|{s.available_seats}|{prices}\n".encode())
        return h.hexdigest()


def generate_batch(
    law: GenerationLaw, bidders: int, capacity: int, cases: int
) -> ScenarioBatch:
    """Draw ``cases`` independent cases of ``bidders`` schedules each."""
    if bidders < 1 or capacity < 1 or cases < 1:
        raise InvalidLaw("bidders, capacity, and cases must all be at least 1")
    sums = _geometric_sums(law.gamma, capacity)
    out = []
    for case in range(cases):
        schedules = []
        for j in range(bidders):
            stream = rng_stream(law.seed, f"case{case:04d}/bidder{j:04d}")
            schedules.append(_draw_schedule(stream, f"b{j:04d}", capacity, law, sums))
        out.append(tuple(schedules))
    return ScenarioBatch(
        law=law,
        bidder_count=bidders,
        capacity=capacity,
        case_count=cases,
        cases=tuple(out),
    )
