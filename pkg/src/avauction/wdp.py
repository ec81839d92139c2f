"""Exact winner determination for the three service types.

The splittable service is solved by dynamic programming over (bidders
considered, seats still required); the single-vehicle services reduce to a
direct minimum thanks to strictly increasing prices.  A literal enumeration
oracle (``brute_force_wdp``) keeps the fast solvers honest: it filters raw
one-size-or-nothing assignments by the service constraints in their original
inequality form.

All solvers return ``None`` when the request cannot be served, and break ties
deterministically: lowest total, then fewest assignments, then the
lexicographically smallest sorted (bidder_id, size) list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Optional

from .core import AuctionError, AuctionInstance, Money, ServiceType

# Totals stay far below 2**62 (sums of <= 1e4 prices, each < 1e7 micros).
_INF = 1 << 62

DEFAULT_ENUMERATION_CAP = 10**7


class EnumerationCapExceeded(AuctionError):
    pass


@dataclass(frozen=True)
class Allocation:
    """The winner set: (bidder_id, size) pairs and their exact total bid."""

    assignments: tuple[tuple[str, int], ...]
    total_bid: Money

    def winner_ids(self) -> tuple[str, ...]:
        return tuple(b for b, _ in self.assignments)

    def seat_total(self) -> int:
        return sum(size for _, size in self.assignments)

    def size_of(self, bidder_id: str) -> Optional[int]:
        for b, size in self.assignments:
            if b == bidder_id:
                return size
        return None


@dataclass(frozen=True)
class Feasibility:
    """Whether each service type can be fulfilled at all."""

    splittable: bool
    non_splittable: bool
    private: bool

    def for_service(self, service: ServiceType) -> bool:
        return {
            ServiceType.SPLITTABLE: self.splittable,
            ServiceType.NON_SPLITTABLE: self.non_splittable,
            ServiceType.PRIVATE: self.private,
        }[service]


def _rows(instance: AuctionInstance) -> list[tuple[str, list[int]]]:
    """Per-bidder price series in micro-units, ordered by bidder_id."""
    rows = []
    for sched in instance.bids:
        top = sched.max_size(instance.capacity)
        rows.append((sched.bidder_id, [sched.prices[m].micros for m in range(1, top + 1)]))
    rows.sort(key=lambda r: r[0])
    return rows


def feasibility(instance: AuctionInstance) -> Feasibility:
    q_r, cap = instance.requested_seats, instance.capacity
    offered = [b.max_size(cap) for b in instance.bids]
    return Feasibility(
        splittable=sum(offered) >= q_r,
        non_splittable=bool(offered) and max(offered) >= q_r,
        private=any(m == cap for m in offered),
    )


def solve_wdp(instance: AuctionInstance) -> Optional[Allocation]:
    """Exact minimum-total allocation for the instance's service type."""
    rows = _rows(instance)
    if instance.service is ServiceType.SPLITTABLE:
        return _solve_splittable(rows, instance.requested_seats)
    if instance.service is ServiceType.NON_SPLITTABLE:
        return _solve_single_vehicle(rows, instance.requested_seats)
    return _solve_single_vehicle(rows, instance.capacity)


def solve_wdp_excluding(instance: AuctionInstance, excluded: str) -> Optional[Allocation]:
    """Solve the same problem with one bidder's schedule removed."""
    return solve_wdp(instance.without_bidder(excluded))


def _solve_single_vehicle(rows: list[tuple[str, list[int]]], size: int) -> Optional[Allocation]:
    # Strict monotonicity makes exactly `size` seats optimal among sizes >= size,
    # so the minimum over bidders offering that size is the exact optimum.
    best: Optional[tuple[int, str]] = None
    for bidder_id, prices in rows:
        if len(prices) >= size:
            cand = (prices[size - 1], bidder_id)
            if best is None or cand < best:
                best = cand
    if best is None:
        return None
    return Allocation(assignments=((best[1], size),), total_bid=Money(best[0]))


def _suffix_pairs(rows: list[tuple[str, list[int]]], q_r: int) -> list[list[Optional[tuple[int, int]]]]:
    """suffix[i][s]: minimal (cost, count) covering exactly s seats with bidders i.."""
    k = len(rows)
    table: list[list[Optional[tuple[int, int]]]] = [[None] * (q_r + 1) for _ in range(k + 1)]
    table[k][0] = (0, 0)
    for i in range(k - 1, -1, -1):
        prices = rows[i][1]
        nxt = table[i + 1]
        cur = table[i]
        for s in range(q_r + 1):
            best = nxt[s]  # contribute nothing
            for m in range(1, min(len(prices), s) + 1):
                rest = nxt[s - m]
                if rest is not None:
                    cand = (prices[m - 1] + rest[0], 1 + rest[1])
                    if best is None or cand < best:
                        best = cand
            cur[s] = best
    return table


def _solve_splittable(rows: list[tuple[str, list[int]]], q_r: int) -> Optional[Allocation]:
    # Seat exactness: with strictly increasing prices the optimum covers q_r
    # seats exactly, so the DP targets the equality form directly.
    suffix = _suffix_pairs(rows, q_r)
    target = suffix[0][q_r]
    if target is None:
        return None
    total = target[0]
    assignments: list[tuple[str, int]] = []
    remaining = q_r
    for i, (bidder_id, prices) in enumerate(rows):
        taken = False
        for m in range(1, min(len(prices), remaining) + 1):
            rest = suffix[i + 1][remaining - m]
            if rest is not None and (prices[m - 1] + rest[0], 1 + rest[1]) == target:
                assignments.append((bidder_id, m))
                remaining -= m
                target = rest
                taken = True
                break
        if not taken and suffix[i + 1][remaining] != target:
            raise AssertionError("splittable reconstruction lost the optimum")
    return Allocation(assignments=tuple(assignments), total_bid=Money(total))


def exclusion_totals(instance: AuctionInstance) -> dict[str, Optional[int]]:
    """Optimal totals (micro-units) of every single-bidder-exclusion problem.

    Equivalent to running ``solve_wdp_excluding`` once per bidder, but shares
    the DP work across exclusions; ``None`` marks an infeasible exclusion.
    """
    rows = _rows(instance)
    if instance.service is ServiceType.SPLITTABLE:
        return _exclusion_totals_splittable(rows, instance.requested_seats)
    size = (
        instance.requested_seats
        if instance.service is ServiceType.NON_SPLITTABLE
        else instance.capacity
    )
    return _exclusion_totals_single_vehicle(rows, size)


def _exclusion_totals_single_vehicle(
    rows: list[tuple[str, list[int]]], size: int
) -> dict[str, Optional[int]]:
    candidates = [
        (prices[size - 1] if len(prices) >= size else None, bidder_id)
        for bidder_id, prices in rows
    ]
    totals: dict[str, Optional[int]] = {}
    for k, (_, bidder_id) in enumerate(candidates):
        best = None
        for j, (value, _) in enumerate(candidates):
            if j != k and value is not None and (best is None or value < best):
                best = value
        totals[bidder_id] = best
    return totals


def _exclusion_totals_splittable(
    rows: list[tuple[str, list[int]]], q_r: int
) -> dict[str, Optional[int]]:
    k = len(rows)
    prefix = [[_INF] * (q_r + 1) for _ in range(k + 1)]
    prefix[0][0] = 0
    for i in range(k):
        prices = rows[i][1]
        prev, cur = prefix[i], prefix[i + 1]
        for s in range(q_r + 1):
            best = prev[s]
            for m in range(1, min(len(prices), s) + 1):
                c = prev[s - m] + prices[m - 1]
                if c < best:
                    best = c
            cur[s] = best
    suffix = [[_INF] * (q_r + 1) for _ in range(k + 1)]
    suffix[k][0] = 0
    for i in range(k - 1, -1, -1):
        prices = rows[i][1]
        nxt, cur = suffix[i + 1], suffix[i]
        for s in range(q_r + 1):
            best = nxt[s]
            for m in range(1, min(len(prices), s) + 1):
                c = nxt[s - m] + prices[m - 1]
                if c < best:
                    best = c
            cur[s] = best
    totals: dict[str, Optional[int]] = {}
    for j, (bidder_id, _) in enumerate(rows):
        best = _INF
        pre, suf = prefix[j], suffix[j + 1]
        for s in range(q_r + 1):
            c = pre[s] + suf[q_r - s]
            if c < best:
                best = c
        totals[bidder_id] = None if best >= _INF else best
    return totals


def brute_force_wdp(
    instance: AuctionInstance, enumeration_cap: int = DEFAULT_ENUMERATION_CAP
) -> Optional[Allocation]:
    """Independent oracle: enumerate every one-size-or-nothing assignment.

    Constraints are applied as literally written for each service type,
    keeping the seat-coverage condition in its inequality form (>= q_r, or
    >= capacity for private) rather than the equality the fast solver uses.
    """
    rows = _rows(instance)
    options = [
        [(0, 0)] + [(m, prices[m - 1]) for m in range(1, len(prices) + 1)]
        for _, prices in rows
    ]
    if math.prod(len(o) for o in options) > enumeration_cap:
        raise EnumerationCapExceeded(
            f"search space exceeds cap of {enumeration_cap} assignments"
        )
    service = instance.service
    need = (
        instance.capacity if service is ServiceType.PRIVATE else instance.requested_seats
    )
    single = service is not ServiceType.SPLITTABLE
    best_key: Optional[tuple[int, int, tuple[tuple[str, int], ...]]] = None
    for combo in product(*options):
        seats = 0
        total = 0
        count = 0
        for m, price in combo:
            if m:
                seats += m
                total += price
                count += 1
        if seats < need or (single and count > 1):
            continue
        if best_key is not None and (total, count) > best_key[:2]:
            continue
        assigns = tuple(
            (rows[i][0], m) for i, (m, _) in enumerate(combo) if m
        )
        key = (total, count, assigns)
        if best_key is None or key < best_key:
            best_key = key
    if best_key is None:
        return None
    return Allocation(assignments=best_key[2], total_bid=Money(best_key[0]))
