"""Command-line front end: ``run``, ``matrix`` and ``overhead``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..adversary.attacks import AttackId
from ..adversary.user import USER_POLICIES
from ..errors import FidoSimError
from ..fido2.policy import PRESETS, CloneMode
from .matrix import detection_matrix, grid, load_golden
from .overhead import measure_overhead
from .scenario import ScenarioConfig, run_scenario
from .world import ProtocolKind


def _drop(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fidosim", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--rp-preset", default="github", help=f"one of {', '.join(sorted(PRESETS))} or custom")
    common.add_argument("--out", type=Path, help="write the trace (run, matrix) or report here")
    common.add_argument("--format", choices=("json", "table"), default="table")

    run = sub.add_parser("run", parents=[common], help="run one scenario")
    run.add_argument("--protocol", choices=[k.value for k in ProtocolKind], default="FIDO2")
    run.add_argument("--clone-mode", choices=[m.value for m in CloneMode], default="COUNTER")
    run.add_argument("--attack", choices=[a.value for a in AttackId], default=None)
    run.add_argument("--user", choices=sorted(USER_POLICIES), default="NEGLIGENT")
    run.add_argument("--drop", type=_drop, default=None, help="comma-separated delivery indices to lose")

    matrix = sub.add_parser("matrix", parents=[common], help="run the full attack grid")
    matrix.add_argument("--check", action="store_true", help="exit 2 if the grid differs from the golden copy")
    matrix.add_argument("--golden", type=Path, default=None)

    sub.add_parser("overhead", parents=[common], help="bytes added by channel MACs")
    return p


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _run(args) -> int:
    config = ScenarioConfig(
        seed=args.seed,
        protocol=ProtocolKind(args.protocol),
        clone_mode=CloneMode(args.clone_mode),
        rp_preset=args.rp_preset,
        attack=AttackId(args.attack) if args.attack else None,
        user=args.user,
        drop_pattern=args.drop,
    )
    report = run_scenario(config)
    if args.out:
        args.out.write_text("\n".join(report.trace) + "\n")
    if args.format == "json":
        _emit(json.dumps(report.as_dict(), indent=2, sort_keys=True))
    else:
        o = report.outcome
        _emit(f"cell: {report.cell.value}\nsucceeded: {o.succeeded}\n"
              f"detected_by: {','.join(sorted(d.value for d in o.detected_by))}")
        for line in o.evidence:
            _emit(f"  {line}")
    return 0


def _matrix(args) -> int:
    matrix = detection_matrix(grid(args.seed, args.rp_preset))
    if args.out:
        args.out.write_text("\n".join(matrix.trace_lines()) + "\n")
    _emit(json.dumps(matrix.as_dict(), indent=2, sort_keys=True) if args.format == "json" else matrix.table())
    if args.check:
        diffs = matrix.mismatches(load_golden(args.golden))
        for d in diffs:
            print(d, file=sys.stderr)
        if diffs:
            return 2
    return 0


def _overhead(args) -> int:
    report = measure_overhead(args.seed, rp_preset=args.rp_preset)
    if args.out:
        args.out.write_text(json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n")
    if args.format == "json":
        _emit(json.dumps(report.as_dict(), indent=2, sort_keys=True))
    else:
        _emit("phase           RP  HSK  CLIENT")
        for phase, d in report.deltas.items():
            _emit(f"{phase:<14} {d['RP']:>3} {d['HSK']:>4} {d['CLIENT']:>7}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return {"run": _run, "matrix": _matrix, "overhead": _overhead}[args.command](args)
    except FidoSimError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
