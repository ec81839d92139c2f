"""Exact combinatorial-auction pricing for a multi-tenant AV seat market.

Solves winner determination for splittable, non-splittable, and private
seat requests, settles strategy-proof pivotal charges, and replays the
accompanying Monte-Carlo studies deterministically from a seed.
"""

from .core import (
    AuctionError,
    AuctionInstance,
    BidSchedule,
    DuplicateBidder,
    MissingPrice,
    Money,
    NegativeAmount,
    NonConcavePrices,
    NonMonotonePrices,
    OversizedCombination,
    PrecisionLoss,
    SeatBoundViolation,
    ServiceType,
    UnknownBidder,
    ValidationError,
    ValuationSchedule,
    money_from_decimal,
    money_to_decimal,
    validate_instance,
)
from .instance_io import ParseError, parse_instance, read_instance, serialize_instance, write_instance
from .scenario import (
    CostLaw,
    GenerationLaw,
    InvalidLaw,
    RngStream,
    ScenarioBatch,
    generate_batch,
    rng_stream,
)
from .studies import (
    ExperimentConfig,
    ResultTable,
    StudyInvariantViolation,
    run_asymptoticity_study,
    run_charge_study,
    run_servability_study,
    run_study,
    run_timing_study,
    run_truthfulness_study,
)
from .vcg import (
    BidderCharge,
    ChargeReport,
    FallbackReport,
    MissingValuation,
    NotServed,
    UtilityLedger,
    ZeroBaseline,
    bidder_utility,
    change_of_charge,
    change_of_payment,
    charge_identity_holds,
    perturb_bids,
    vcg_charges,
)
from .wdp import (
    Allocation,
    EnumerationCapExceeded,
    Feasibility,
    brute_force_wdp,
    exclusion_totals,
    feasibility,
    solve_wdp,
    solve_wdp_excluding,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "AuctionError",
    "AuctionInstance",
    "BidSchedule",
    "BidderCharge",
    "ChargeReport",
    "CostLaw",
    "DuplicateBidder",
    "EnumerationCapExceeded",
    "ExperimentConfig",
    "FallbackReport",
    "Feasibility",
    "GenerationLaw",
    "InvalidLaw",
    "MissingPrice",
    "MissingValuation",
    "Money",
    "NegativeAmount",
    "NonConcavePrices",
    "NonMonotonePrices",
    "NotServed",
    "OversizedCombination",
    "ParseError",
    "PrecisionLoss",
    "ResultTable",
    "RngStream",
    "ScenarioBatch",
    "SeatBoundViolation",
    "ServiceType",
    "StudyInvariantViolation",
    "UnknownBidder",
    "UtilityLedger",
    "ValidationError",
    "ValuationSchedule",
    "ZeroBaseline",
    "bidder_utility",
    "brute_force_wdp",
    "change_of_charge",
    "change_of_payment",
    "charge_identity_holds",
    "exclusion_totals",
    "feasibility",
    "generate_batch",
    "money_from_decimal",
    "money_to_decimal",
    "parse_instance",
    "perturb_bids",
    "read_instance",
    "rng_stream",
    "run_asymptoticity_study",
    "run_charge_study",
    "run_servability_study",
    "run_study",
    "run_timing_study",
    "run_truthfulness_study",
    "serialize_instance",
    "solve_wdp",
    "solve_wdp_excluding",
    "validate_instance",
    "vcg_charges",
    "write_instance",
]
