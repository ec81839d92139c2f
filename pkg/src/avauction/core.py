"""Domain types, validation, and exact money arithmetic for the seat auction.

Prices are kept as integer micro-units (10^-6 currency units) end to end so
that charge identities and tie-breaks can be checked with exact equality
instead of float tolerances.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Mapping, Sequence, Union

MICROS_PER_UNIT = 10**6


class AuctionError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(AuctionError):
    """An instance or money value violates a structural invariant."""


class SeatBoundViolation(ValidationError):
    pass


class NonMonotonePrices(ValidationError):
    pass


class NonConcavePrices(ValidationError):
    pass


class MissingPrice(ValidationError):
    pass


class DuplicateBidder(ValidationError):
    pass


class OversizedCombination(ValidationError):
    pass


class PrecisionLoss(ValidationError):
    pass


class NegativeAmount(ValidationError):
    pass


class UnknownBidder(AuctionError):
    pass


def round_half_up(value: Fraction) -> int:
    """Round a non-negative rational to the nearest integer, ties upward."""
    num, den = value.numerator, value.denominator
    return (2 * num + den) // (2 * den)


def as_fraction(value: Union[Fraction, int, str, float]) -> Fraction:
    """Coerce a ratio-like value to an exact Fraction.

    Floats are interpreted through their shortest decimal repr, so 0.1 means
    exactly 1/10 rather than the nearest binary double.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


_DECIMAL_RE = re.compile(r"^(\d+)(?:\.(\d*))?$|^\.(\d+)$")


@dataclass(frozen=True, order=True)
class Money:
    """A non-negative amount in integer micro-units.

    Addition and subtraction are exact; subtraction below zero raises, since
    bids and charges are non-negative by assumption.
    """

    micros: int

    def __post_init__(self) -> None:
        if not isinstance(self.micros, int):
            raise ValidationError(f"micros must be int, got {type(self.micros).__name__}")
        if self.micros < 0:
            raise NegativeAmount(f"negative amount: {self.micros} micros")

    @classmethod
    def zero(cls) -> "Money":
        return cls(0)

    @classmethod
    def from_decimal(cls, text: str) -> "Money":
        return money_from_decimal(text)

    def to_decimal(self) -> str:
        return money_to_decimal(self)

    def __add__(self, other: "Money") -> "Money":
        return Money(self.micros + other.micros)

    def __sub__(self, other: "Money") -> "Money":
        diff = self.micros - other.micros
        if diff < 0:
            raise NegativeAmount(f"{self.to_decimal()} - {other.to_decimal()} is negative")
        return Money(diff)

    def scaled(self, factor: Union[Fraction, int, str, float]) -> "Money":
        """Multiply by a non-negative ratio, rounding half-up to micro-units."""
        f = as_fraction(factor)
        if f < 0:
            raise NegativeAmount(f"negative scale factor {f}")
        return Money(round_half_up(self.micros * f))

    def __str__(self) -> str:
        return self.to_decimal()


def money_from_decimal(text: str) -> Money:
    """Parse a non-negative decimal string with at most 6 fractional digits."""
    text = text.strip()
    if text.startswith("-"):
        raise NegativeAmount(f"negative money literal {text!r}")
    m = _DECIMAL_RE.match(text)
    if m is None:
        raise ValidationError(f"not a decimal money literal: {text!r}")
    whole = m.group(1) or "0"
    frac = m.group(2) or m.group(3) or ""
    if len(frac) > 6:
        raise PrecisionLoss(f"{text!r} has more than 6 fractional digits")
    return Money(int(whole) * MICROS_PER_UNIT + int(frac.ljust(6, "0") or "0"))


def money_to_decimal(money: Money) -> str:
    """Render with exactly six fractional digits (lossless round trip)."""
    return f"{money.micros // MICROS_PER_UNIT}.{money.micros % MICROS_PER_UNIT:06d}"


class ServiceType(Enum):
    """The three ways a seat request may be fulfilled."""

    SPLITTABLE = "splittable"
    NON_SPLITTABLE = "nonsplittable"
    PRIVATE = "private"

    @classmethod
    def from_token(cls, token: str) -> "ServiceType":
        try:
            return cls(token.strip().lower())
        except ValueError:
            raise ValidationError(f"unknown service type {token!r}") from None


# Seats are homogeneous, so a combination of m seats is identified by m alone.
SeatCount = int


@dataclass(frozen=True)
class BidSchedule:
    """One bidder's price for each offerable seat-combination size.

    ``prices`` maps sizes 1..min(available_seats, capacity) to Money; sizes a
    bidder cannot offer are absent rather than priced with sentinels.  The
    same shape doubles as a valuation schedule when it holds true valuations.
    """

    bidder_id: str
    available_seats: int
    prices: Mapping[SeatCount, Money]
    concave: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "prices", dict(self.prices))

    def max_size(self, capacity: int) -> int:
        return min(self.available_seats, capacity)

    def price(self, size: SeatCount) -> Money:
        return self.prices[size]

    def offers(self, size: SeatCount) -> bool:
        return size in self.prices


ValuationSchedule = BidSchedule


@dataclass(frozen=True)
class AuctionInstance:
    """A single pricing problem: capacity, request, service, and all bids."""

    capacity: int
    requested_seats: int
    service: ServiceType
    bids: tuple[BidSchedule, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "bids", tuple(self.bids))

    def bidder_ids(self) -> tuple[str, ...]:
        return tuple(b.bidder_id for b in self.bids)

    def schedule(self, bidder_id: str) -> BidSchedule:
        for b in self.bids:
            if b.bidder_id == bidder_id:
                return b
        raise UnknownBidder(bidder_id)

    def with_service(self, service: ServiceType, requested_seats: int | None = None) -> "AuctionInstance":
        return AuctionInstance(
            capacity=self.capacity,
            requested_seats=self.requested_seats if requested_seats is None else requested_seats,
            service=service,
            bids=self.bids,
        )

    def without_bidder(self, bidder_id: str) -> "AuctionInstance":
        if bidder_id not in self.bidder_ids():
            raise UnknownBidder(bidder_id)
        return AuctionInstance(
            capacity=self.capacity,
            requested_seats=self.requested_seats,
            service=self.service,
            bids=tuple(b for b in self.bids if b.bidder_id != bidder_id),
        )


def is_strictly_increasing(values: Sequence[int]) -> bool:
    return all(a < b for a, b in zip(values, values[1:]))


def has_diminishing_marginals(values: Sequence[int]) -> bool:
    """True when consecutive price differences never increase with size."""
    diffs = [b - a for a, b in zip(values, values[1:])]
    return all(a >= b for a, b in zip(diffs, diffs[1:]))


def validate_schedule(schedule: BidSchedule, capacity: int) -> None:
    """Check one schedule against the instance capacity; raise on violation."""
    who = schedule.bidder_id
    if not (0 <= schedule.available_seats <= capacity):
        raise SeatBoundViolation(
            f"bidder {who}: available_seats {schedule.available_seats} outside [0, {capacity}]"
        )
    top = schedule.max_size(capacity)
    for size in schedule.prices:
        if not isinstance(size, int) or size < 1 or size > top:
            raise OversizedCombination(
                f"bidder {who}: price defined for size {size} outside 1..{top}"
            )
    for size in range(1, top + 1):
        if size not in schedule.prices:
            raise MissingPrice(f"bidder {who}: no price for size {size} (must cover 1..{top})")
    series = [schedule.prices[m].micros for m in range(1, top + 1)]
    if not is_strictly_increasing(series):
        raise NonMonotonePrices(f"bidder {who}: prices must strictly increase with size")
    if schedule.concave and not has_diminishing_marginals(series):
        raise NonConcavePrices(f"bidder {who}: flagged concave but marginals increase")


def validate_instance(raw: Union[AuctionInstance, Mapping]) -> AuctionInstance:
    """Validate an instance (or build one from a plain mapping) and return it.

    Raises a ValidationError subclass naming the first violated invariant.
    """
    instance = raw if isinstance(raw, AuctionInstance) else _instance_from_raw(raw)
    if instance.capacity < 1:
        raise SeatBoundViolation(f"capacity {instance.capacity} must be at least 1")
    if not (1 <= instance.requested_seats <= instance.capacity):
        raise SeatBoundViolation(
            f"requested_seats {instance.requested_seats} outside [1, {instance.capacity}]"
        )
    seen: set[str] = set()
    for schedule in instance.bids:
        if schedule.bidder_id in seen:
            raise DuplicateBidder(schedule.bidder_id)
        seen.add(schedule.bidder_id)
        validate_schedule(schedule, instance.capacity)
    return instance


def _coerce_money(value: Union[Money, str, int]) -> Money:
    if isinstance(value, Money):
        return value
    if isinstance(value, int):
        return Money(value)
    return money_from_decimal(value)


def _instance_from_raw(raw: Mapping) -> AuctionInstance:
    service = raw["service"]
    if not isinstance(service, ServiceType):
        service = ServiceType.from_token(str(service))
    bids = []
    for entry in raw.get("bids", ()):
        prices = {int(size): _coerce_money(price) for size, price in entry["prices"].items()}
        bids.append(
            BidSchedule(
                bidder_id=str(entry["bidder_id"]),
                available_seats=int(entry["available_seats"]),
                prices=prices,
                concave=bool(entry.get("concave", False)),
            )
        )
    return AuctionInstance(
        capacity=int(raw["capacity"]),
        requested_seats=int(raw["requested_seats"]),
        service=service,
        bids=tuple(bids),
    )


def check_bids_cover_valuations(bid: BidSchedule, valuation: BidSchedule) -> None:
    """Check the paired-schedule invariant: bid(m) >= valuation(m) everywhere."""
    if set(bid.prices) != set(valuation.prices):
        raise MissingPrice(
            f"bidder {bid.bidder_id}: bid and valuation schedules price different sizes"
        )
    for size, price in bid.prices.items():
        if price < valuation.prices[size]:
            raise ValidationError(
                f"bidder {bid.bidder_id}: bid below valuation at size {size}"
            )
