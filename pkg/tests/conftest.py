import pytest

from avauction import AuctionInstance, BidSchedule, ServiceType, money_from_decimal


def sched(bidder_id, available, prices, concave=False):
    return BidSchedule(
        bidder_id=bidder_id,
        available_seats=available,
        prices={m: money_from_decimal(p) for m, p in prices.items()},
        concave=concave,
    )


def make_instance(capacity, requested, service, bids):
    return AuctionInstance(
        capacity=capacity, requested_seats=requested, service=service, bids=tuple(bids)
    )


@pytest.fixture
def e1():
    """Two bidders, Q=5, q_r=3; the splittable optimum is B taking all 3 seats."""
    return make_instance(
        5, 3, ServiceType.SPLITTABLE,
        [
            sched("A", 5, {1: "0.40", 2: "0.70", 3: "0.90", 4: "1.05", 5: "1.15"}),
            sched("B", 3, {1: "0.30", 2: "0.55", 3: "0.78"}),
        ],
    )


@pytest.fixture
def e2():
    """Three bidders, Q=5, q_r=4; the optimum is a genuine two-vehicle split."""
    return make_instance(
        5, 4, ServiceType.SPLITTABLE,
        [
            sched("A", 5, {1: "0.20", 2: "0.38", 3: "0.80", 4: "1.20", 5: "1.50"}),
            sched("B", 3, {1: "0.22", 2: "0.40", 3: "0.85"}),
            sched("C", 5, {1: "0.30", 2: "0.60", 3: "0.95", 4: "1.30", 5: "1.60"}),
        ],
    )
