"""Command-line front end: solve or charge instance files, generate random
cases, and run the study suite.

Exit codes: 0 served, 2 unservable, 64 parse error, 65 validation error.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .core import ServiceType, ValidationError, validate_instance
from .instance_io import ParseError, read_instance, serialize_instance
from .scenario import CostLaw, GenerationLaw, InvalidLaw, generate_batch
from .studies import STUDY_NAMES, ExperimentConfig, run_study
from .vcg import NotServed, vcg_charges
from .wdp import solve_wdp

EXIT_OK = 0
EXIT_UNSERVABLE = 2
EXIT_PARSE = 64
EXIT_VALIDATION = 65


def _parse_k_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad bidder-count list {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("bidder-count list is empty")
    return values


def _parse_gamma(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad ratio {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avauction",
        description="Exact combinatorial-auction pricing for seat requests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=20250810, help="RNG seed (u64)")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--law", choices=["large", "small"], default="large",
                       help="unit-cost variation regime")
        p.add_argument("--gamma", type=_parse_gamma, default=Fraction(4, 5),
                       help="marginal decay ratio in (0, 1], e.g. 0.8 or 4/5")
        p.add_argument("--cases", type=int, default=100, help="random cases per scenario")
        p.add_argument("--k", type=_parse_k_list, default=None,
                       help="comma-separated bidder counts, e.g. 1,5,10,30,50,100")
        p.add_argument("--parallel", choices=["on", "off"], default="off",
                       help="run exclusion solves concurrently")

    p_solve = sub.add_parser("solve", help="solve one instance file")
    p_solve.add_argument("instance", help="instance document path")
    p_solve.add_argument("--service", choices=[s.value for s in ServiceType],
                         default=None, help="override the file's service type")

    p_charge = sub.add_parser("charge", help="compute the full charge report")
    p_charge.add_argument("instance", help="instance document path")
    p_charge.add_argument("--service", choices=[s.value for s in ServiceType],
                          default=None, help="override the file's service type")
    p_charge.add_argument("--parallel", choices=["on", "off"], default="off")

    p_gen = sub.add_parser("gen", help="generate random instance files")
    add_common(p_gen)
    p_gen.add_argument("--service", choices=[s.value for s in ServiceType],
                       default="splittable")
    p_gen.add_argument("--qr", type=int, default=1, help="requested seats")
    p_gen.add_argument("--capacity", type=int, default=5)

    p_study = sub.add_parser("study", help="run a study and write its CSV tables")
    p_study.add_argument("name", choices=STUDY_NAMES)
    add_common(p_study)

    return parser


def _load_instance(path: str, service_override: Optional[str]):
    instance = read_instance(path)
    if service_override is not None:
        instance = instance.with_service(ServiceType.from_token(service_override))
    return validate_instance(instance)


def cmd_solve(args: argparse.Namespace) -> int:
    instance = _load_instance(args.instance, args.service)
    allocation = solve_wdp(instance)
    if allocation is None:
        print("unservable")
        return EXIT_UNSERVABLE
    parts = [f"winner {b} size {m}" for b, m in allocation.assignments]
    parts.append(f"total {allocation.total_bid.to_decimal()}")
    print(" ".join(parts))
    return EXIT_OK


def cmd_charge(args: argparse.Namespace) -> int:
    instance = _load_instance(args.instance, args.service)
    try:
        if args.parallel == "on":
            with ProcessPoolExecutor() as pool:
                report = vcg_charges(instance, executor=pool)
        else:
            report = vcg_charges(instance)
    except NotServed:
        print("unservable")
        return EXIT_UNSERVABLE
    print(f"service {report.service.value}")
    print(f"optimum {report.optimum.to_decimal()}")
    for entry in report.per_bidder:
        pivotal = "unservable" if entry.pivotal is None else entry.pivotal.to_decimal()
        print(f"bidder {entry.bidder_id} pivotal {pivotal} charge {entry.charge.to_decimal()}")
    print(f"total {report.total_charge.to_decimal()}")
    print(f"fallback {'true' if report.fallback else 'false'}")
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    law = GenerationLaw(seed=args.seed, cost_law=CostLaw.from_token(args.law), gamma=args.gamma)
    service = ServiceType.from_token(args.service)
    sizes = args.k or (5,)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k in sizes:
        batch = generate_batch(law, k, args.capacity, args.cases)
        for i in range(batch.case_count):
            instance = batch.instance(i, service, args.qr)
            comments = [
                f"generated: law={law.cost_law.value} gamma={law.gamma} "
                f"seed={law.seed} K={k} case={i}"
            ]
            path = out / f"k{k:03d}-case{i:04d}.txt"
            path.write_text(serialize_instance(instance, comments))
        print(f"wrote {batch.case_count} instance(s) for K={k} under {out}")
    return EXIT_OK


def cmd_study(args: argparse.Namespace) -> int:
    config = ExperimentConfig(
        scenario_sizes=args.k or ExperimentConfig.scenario_sizes,
        cases=args.cases,
        cost_law=CostLaw.from_token(args.law),
        gamma=args.gamma,
        seed=args.seed,
        parallel=args.parallel == "on",
    )
    for table in run_study(args.name, config):
        path = table.write_csv(args.out)
        print(f"wrote {path}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "solve": cmd_solve,
        "charge": cmd_charge,
        "gen": cmd_gen,
        "study": cmd_study,
    }
    try:
        return handlers[args.command](args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValidationError, InvalidLaw) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
