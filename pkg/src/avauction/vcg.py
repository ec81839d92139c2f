"""Pivotal (VCG) charges, bidder utilities, and bid-perturbation tooling.

Each bidder's charge is its pivotal value minus the welfare the others get
at the chosen allocation; non-winners always land on exactly zero.  When a
winning bidder cannot be excluded (the remaining bids cannot serve the
request) the report falls back to the optimal totals: that bidder is charged
its winning bid and the customer pays the optimum, mirroring how single-
bidder markets have to be settled.
"""

from __future__ import annotations

import os
from concurrent.futures import Executor
from dataclasses import dataclass
from fractions import Fraction
from itertools import repeat
from typing import Iterable, Mapping, Optional, Union

from .core import (
    AuctionError,
    AuctionInstance,
    BidSchedule,
    Money,
    ServiceType,
    UnknownBidder,
    ValidationError,
    as_fraction,
    has_diminishing_marginals,
    round_half_up,
)
from .wdp import Allocation, exclusion_totals, solve_wdp, solve_wdp_excluding


class NotServed(AuctionError):
    """The instance itself is unservable, so there is nothing to charge."""


class MissingValuation(AuctionError):
    pass


class ZeroBaseline(AuctionError):
    pass


class FallbackReport(AuctionError):
    pass


@dataclass(frozen=True)
class BidderCharge:
    """One bidder's pivotal value and final charge.

    ``pivotal`` is None when removing the bidder makes the request
    unservable; that can only happen to winners.
    """

    bidder_id: str
    pivotal: Optional[Money]
    charge: Money


@dataclass(frozen=True)
class ChargeReport:
    service: ServiceType
    optimum: Money
    winner_allocation: Allocation
    per_bidder: tuple[BidderCharge, ...]
    total_charge: Money
    fallback: bool

    def charge_of(self, bidder_id: str) -> Money:
        for entry in self.per_bidder:
            if entry.bidder_id == bidder_id:
                return entry.charge
        raise UnknownBidder(bidder_id)


@dataclass(frozen=True)
class UtilityLedger:
    """Signed per-bidder utilities in micro-units: charge minus served valuation."""

    utilities: Mapping[str, int]
    report: ChargeReport


def _exclusion_batch(instance: AuctionInstance, ids: tuple[str, ...]) -> list[Optional[int]]:
    out: list[Optional[int]] = []
    for bidder_id in ids:
        alloc = solve_wdp_excluding(instance, bidder_id)
        out.append(None if alloc is None else alloc.total_bid.micros)
    return out


def _pivotal_micros(
    instance: AuctionInstance,
    independent_solves: bool,
    executor: Optional[Executor],
) -> dict[str, Optional[int]]:
    ids = tuple(sorted(instance.bidder_ids()))
    if executor is not None:
        chunks_wanted = max(1, (os.cpu_count() or 1) * 2)
        step = max(1, -(-len(ids) // chunks_wanted))
        chunks = [ids[i : i + step] for i in range(0, len(ids), step)]
        totals: dict[str, Optional[int]] = {}
        for chunk, values in zip(chunks, executor.map(_exclusion_batch, repeat(instance), chunks)):
            totals.update(zip(chunk, values))
        return totals
    if independent_solves:
        return {k: v for k, v in zip(ids, _exclusion_batch(instance, ids))}
    return exclusion_totals(instance)


def vcg_charges(
    instance: AuctionInstance,
    *,
    independent_solves: bool = False,
    executor: Optional[Executor] = None,
) -> ChargeReport:
    """Compute the full charge report for a servable instance.

    Pivotal values come from a shared-work pass over all single-bidder
    exclusions by default; ``independent_solves=True`` runs the literal
    per-bidder exclusion solves instead, and ``executor`` fans those solves
    out concurrently (they are independent subproblems).  All three paths
    produce identical reports.
    """
    allocation = solve_wdp(instance)
    if allocation is None:
        raise NotServed("instance is unservable; no charges to compute")
    p_star = allocation.total_bid.micros
    winning_amount = {
        bidder_id: instance.schedule(bidder_id).prices[size].micros
        for bidder_id, size in allocation.assignments
    }
    pivotal = _pivotal_micros(instance, independent_solves, executor)
    entries: list[BidderCharge] = []
    fallback = False
    total = 0
    for bidder_id in sorted(instance.bidder_ids()):
        own = winning_amount.get(bidder_id, 0)
        piv = pivotal[bidder_id]
        if piv is None:
            if own == 0:
                raise AssertionError(
                    f"non-winner {bidder_id} cannot make the request unservable"
                )
            fallback = True
            charge = own
        else:
            charge = piv - (p_star - own)
            if charge < 0:
                raise AssertionError(
                    f"negative charge for {bidder_id}: exclusion beat the optimum"
                )
        total += charge
        entries.append(
            BidderCharge(
                bidder_id=bidder_id,
                pivotal=None if piv is None else Money(piv),
                charge=Money(charge),
            )
        )
    return ChargeReport(
        service=instance.service,
        optimum=allocation.total_bid,
        winner_allocation=allocation,
        per_bidder=tuple(entries),
        total_charge=Money(p_star if fallback else total),
        fallback=fallback,
    )


def charge_identity_holds(report: ChargeReport) -> bool:
    """Exact check of total = p* + sum_k (pivotal_k - p*) for non-fallback reports."""
    if report.fallback:
        return False
    p_star = report.optimum.micros
    expected = p_star + sum(e.pivotal.micros - p_star for e in report.per_bidder)
    return report.total_charge.micros == expected


def bidder_utility(
    instance: AuctionInstance, valuations: Mapping[str, BidSchedule]
) -> UtilityLedger:
    """Per-bidder utility (micro-units, may be negative) under the given valuations."""
    for sched in instance.bids:
        val = valuations.get(sched.bidder_id)
        if val is None:
            raise MissingValuation(f"no valuation schedule for bidder {sched.bidder_id}")
        missing = set(sched.prices) - set(val.prices)
        if missing:
            raise MissingValuation(
                f"bidder {sched.bidder_id}: valuation lacks sizes {sorted(missing)}"
            )
    report = vcg_charges(instance)
    assigned = dict(report.winner_allocation.assignments)
    utilities: dict[str, int] = {}
    for bidder_id in sorted(instance.bidder_ids()):
        size = assigned.get(bidder_id)
        if size is None:
            utilities[bidder_id] = 0
        else:
            served_value = valuations[bidder_id].prices[size].micros
            utilities[bidder_id] = report.charge_of(bidder_id).micros - served_value
    return UtilityLedger(utilities=utilities, report=report)


def perturb_bids(
    instance: AuctionInstance,
    targets: Iterable[str],
    raise_fraction: Union[Fraction, int, str, float],
) -> AuctionInstance:
    """Scale every price of the targeted bidders by (1 + raise_fraction).

    Scaled prices are rounded half-up to micro-units; strict monotonicity
    survives any non-negative raise, but micro-rounding can break an exact
    diminishing-marginals pattern, so the concave flag is kept only when it
    still holds on the rounded prices.
    """
    fraction = as_fraction(raise_fraction)
    if fraction < 0:
        raise ValidationError(f"raise_fraction must be non-negative, got {fraction}")
    target_set = set(targets)
    known = set(instance.bidder_ids())
    unknown = target_set - known
    if unknown:
        raise UnknownBidder(", ".join(sorted(unknown)))
    factor = 1 + fraction
    new_bids = []
    for sched in instance.bids:
        if sched.bidder_id not in target_set:
            new_bids.append(sched)
            continue
        prices = {
            size: Money(round_half_up(price.micros * factor))
            for size, price in sched.prices.items()
        }
        series = [prices[m].micros for m in sorted(prices)]
        new_bids.append(
            BidSchedule(
                bidder_id=sched.bidder_id,
                available_seats=sched.available_seats,
                prices=prices,
                concave=sched.concave and has_diminishing_marginals(series),
            )
        )
    return AuctionInstance(
        capacity=instance.capacity,
        requested_seats=instance.requested_seats,
        service=instance.service,
        bids=tuple(new_bids),
    )


def change_of_charge(truthful: ChargeReport, perturbed: ChargeReport) -> Fraction:
    """(perturbed total - truthful total) / truthful total, as an exact rational."""
    if truthful.service is not perturbed.service:
        raise ValidationError(
            f"reports compare different services: {truthful.service.value} vs {perturbed.service.value}"
        )
    base = truthful.total_charge.micros
    if base == 0:
        raise ZeroBaseline("truthful total charge is zero")
    return Fraction(perturbed.total_charge.micros - base, base)


def change_of_payment(report: ChargeReport) -> Fraction:
    """(total charge - p*) / p*: the premium the charging rule adds over the optimum."""
    if report.fallback:
        raise FallbackReport("change of payment is undefined for fallback reports")
    p_star = report.optimum.micros
    if p_star == 0:
        raise ZeroBaseline("optimum is zero")
    return Fraction(report.total_charge.micros - p_star, p_star)
