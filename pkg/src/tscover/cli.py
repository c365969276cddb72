"""
Command-line front end.

    tscover profile   --code tanner
    tscover hunt      --code tanner --k-max 3 --out runs/tanner
    tscover eliminate --code tanner --census runs/tanner/census.json --schedule relaxed-freeze --out runs/cover
    tscover simulate  --code runs/cover/cover.alist --alpha-list 0.01,0.007 --out runs/sim
    tscover unwrap    --code tanner --plan runs/cover/plan.json --periods 4 --out runs/conv

``--code`` takes an alist path or a bundled name. Any flag can also come
from ``--config run.json`` (keys are flag names with underscores); flags
given on the command line win. Output files embed the tool version and
seed; timestamps go only to ``run.log`` in the output directory.

Exit codes: 0 success, 2 search or simulation budget exceeded, 3 bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

from ._version import __version__
from .code import AlistError, BudgetExceeded, code_profile, save_alist
from .cover import (SCHEDULES, SwapPlan, build_cover, eliminate_trapping_sets, unresolved_targets,
                    unwrap_convolutional, verify_elimination, verify_rate_theorem)
from .data import load_code
from .decoders import GallagerBConfig, MinSumConfig
from .sim import Awgn, Bsc, InsufficientPoints, StopRule, fit_slope, points_to_csv, simulate_fer
from .trapping import (DEFAULT_PATTERN_BUDGET, census_records_from_json, census_to_json, count_by_signature, critical_number,
                       instanton_search, topological_ts_scan)

EXIT_OK, EXIT_BUDGET, EXIT_INPUT = 0, 2, 3
TOOL = f"tscover {__version__}"


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors, not the budget code argparse would use
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _decoder(args):
    if args.decoder == "gallager-b":
        return GallagerBConfig(args.iters or 50)
    return MinSumConfig(args.iters or 500)


def _load(args):
    if not args.code:
        raise InputError("--code is required")
    try:
        return load_code(args.code)
    except FileNotFoundError:
        raise InputError(f"code file not found: {args.code}")


def _outdir(args) -> Path | None:
    if not args.out:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(out: Path | None, name: str, text: str):
    if out is not None:
        (out / name).write_text(text)


def _log(out: Path | None, args, extra: str = ""):
    if out is None:
        return
    with open(out / "run.log", "a") as fh:
        fh.write(f"{time.strftime('%Y-%m-%dT%H:%M:%S')} {TOOL} {args.command} seed={args.seed} {extra}\n")


def _dump(doc) -> str:
    return json.dumps(doc, indent=1) + "\n"


# ---------------------------------------------------------------------------


def cmd_profile(args) -> int:
    prof = code_profile(_load(args))
    doc = {"tool": TOOL, "code": str(args.code), **prof.as_dict()}
    text = _dump(doc)
    print(text, end="")
    out = _outdir(args)
    _write(out, "profile.json", text)
    _log(out, args)
    return EXIT_OK


def cmd_hunt(args) -> int:
    H = _load(args)
    g = H.graph
    config = _decoder(args)
    meta = {"tool": TOOL, "code": str(args.code), "decoder": config.name,
            "iterations": config.max_iterations, "seed": args.seed}
    if args.ts_a is not None or args.ts_b is not None:
        if args.ts_a is None or args.ts_b is None:
            raise InputError("--ts-a and --ts-b go together")
        records = topological_ts_scan(g, args.ts_a, args.ts_b)
        if args.k_max:
            # errors confined to the set itself
            records = [replace(r, critical_number=cn.value, halo=0, witness_patterns=cn.witnesses)
                       for r in records
                       for cn in [critical_number(g, r, config, halo_radius=0, k_max=args.k_max)]]
        meta.update(method="topological", a_max=args.ts_a, b_max=args.ts_b, k_max=args.k_max)
    else:
        k_max = args.k_max or 0
        # fail before hours of work, not after
        for k in range(1, k_max + 1):
            if math.comb(H.n, k) > DEFAULT_PATTERN_BUDGET:
                raise BudgetExceeded(f"C({H.n}, {k}) = {math.comb(H.n, k)} patterns exceeds the budget "
                                     f"of {DEFAULT_PATTERN_BUDGET}; use --ts-a/--ts-b instead")
        best: dict = {}
        per_weight = {}
        for k in range(1, k_max + 1):
            census = instanton_search(g, k, config, workers=args.workers)
            per_weight[str(k)] = census.num_failures
            for rec in census.classes():
                best.setdefault(rec.variables, rec)
        records = [best[v] for v in sorted(best)]
        meta.update(method="instanton", k_max=k_max, failures_by_weight=per_weight)
    counts = {f"{a},{b}": c for (a, b), c in count_by_signature(records).items()}
    meta["counts"] = counts
    text = census_to_json(records, **meta) + "\n"
    out = _outdir(args)
    _write(out, "census.json", text)
    _log(out, args)
    print(_dump({"records": len(records), "counts": counts}), end="")
    return EXIT_OK


def _manual_edges(text: str | None) -> list[tuple[int, int]]:
    if not text:
        return []
    try:
        return [tuple(int(x) for x in item.split(":")) for item in text.split(",") if item]
    except ValueError:
        raise InputError(f"--manual-edges wants check:variable pairs, got {text!r}")


def cmd_eliminate(args) -> int:
    H = _load(args)
    g = H.graph
    if args.census:
        try:
            records = census_records_from_json(g, Path(args.census).read_text())
        except FileNotFoundError:
            raise InputError(f"census file not found: {args.census}")
        except (KeyError, json.JSONDecodeError) as exc:
            raise InputError(f"malformed census {args.census}: {exc}")
    else:
        records = []
    if args.ts_a is not None and args.ts_b is not None:
        records = [r for r in records if r.signature == (args.ts_a, args.ts_b)]
    if not records and args.schedule != "manual":
        print("warning: no target sets, the cover is two disjoint copies", file=sys.stderr)
    cover, plan = eliminate_trapping_sets(H, records, args.schedule, args.seed, args.copies,
                                          manual_edges=_manual_edges(args.manual_edges))
    prof = code_profile(cover.matrix)
    report = {"tool": TOOL, "code": str(args.code), "schedule": args.schedule, "seed": args.seed,
              "copies": args.copies, "targets": len(records), "swaps": len(plan.swapped),
              "unresolved": unresolved_targets(plan, records), "cover": prof.as_dict()}
    if args.copies == 2:
        report["rate_theorem"] = verify_rate_theorem(cover).as_dict()
    checks = {}
    for sig in sorted({r.signature for r in records}):
        rep = verify_elimination(cover, sig, args.k_max, _decoder(args), workers=args.workers)
        checks[f"{sig[0]},{sig[1]}"] = rep.summary()
    report["verification"] = checks
    out = _outdir(args)
    if out is not None:
        save_alist(cover.matrix, out / "cover.alist")
    _write(out, "plan.json", plan.to_json() + "\n")
    _write(out, "report.json", _dump(report))
    _log(out, args)
    print(_dump({k: report[k] for k in ("targets", "swaps", "unresolved", "verification")}
                | {"n": prof.n, "rank": prof.rank, "rate": prof.rate}), end="")
    return EXIT_OK


def cmd_simulate(args) -> int:
    H = _load(args)
    if bool(args.alpha_list) == bool(args.snr_db_list):
        raise InputError("give exactly one of --alpha-list and --snr-db-list")
    prof = code_profile(H)
    if args.alpha_list:
        channels = [Bsc(a) for a in args.alpha_list]
        domain = "bsc-loglog"
    else:
        channels = [Awgn.from_db(s, prof.rate) for s in args.snr_db_list]
        domain = "awgn-linear"
    config = _decoder(args)
    code_id = Path(str(args.code)).stem
    points = simulate_fer(H.graph, channels, config, StopRule(args.max_frames, args.target_failures),
                          args.seed, args.workers, code_id=code_id)
    try:
        slope = fit_slope(points, domain).as_dict()
    except InsufficientPoints as exc:
        slope = {"domain": domain, "error": str(exc)}
    out = _outdir(args)
    _write(out, "fer.csv", points_to_csv(points))
    _write(out, "slope.json", _dump({"tool": TOOL, "code_id": code_id, "decoder": config.name,
                                     "seed": args.seed, **slope}))
    _log(out, args)
    print(points_to_csv(points), end="")
    print(_dump(slope), end="")
    return EXIT_OK


def cmd_unwrap(args) -> int:
    H = _load(args)
    if not args.plan:
        raise InputError("--plan is required")
    try:
        plan = SwapPlan.from_json(Path(args.plan).read_text(), H)
    except FileNotFoundError:
        raise InputError(f"plan file not found: {args.plan}")
    conv = unwrap_convolutional(plan, args.periods)
    out = _outdir(args)
    if out is not None:
        save_alist(conv, out / f"conv_{args.periods}.alist")
    _log(out, args)
    print(_dump({"periods": args.periods, "m": conv.m, "n": conv.n, "nnz": conv.nnz}), end="")
    return EXIT_OK


COMMANDS = {"profile": cmd_profile, "hunt": cmd_hunt, "eliminate": cmd_eliminate,
            "simulate": cmd_simulate, "unwrap": cmd_unwrap}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file of flag defaults")
    common.add_argument("--code", help="alist file or bundled name")
    common.add_argument("--decoder", choices=("gallager-b", "min-sum"), default="gallager-b")
    common.add_argument("--iters", type=int, help="decoder iterations (50 Gallager B, 500 min-sum)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    common.add_argument("--out", help="output directory")

    ap = _Parser(prog="tscover", description=__doc__.split("\n\n")[0].strip())
    ap.add_argument("--version", action="version", version=TOOL)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("profile", parents=[common], help="n, m, rank, rate, girth, degrees")

    p = sub.add_parser("hunt", parents=[common], help="instanton census or topological scan")
    p.add_argument("--k-max", type=int)
    p.add_argument("--ts-a", type=int)
    p.add_argument("--ts-b", type=int)

    p = sub.add_parser("eliminate", parents=[common], help="build a cover that breaks the census sets")
    p.add_argument("--census")
    p.add_argument("--schedule", choices=SCHEDULES, default="random")
    p.add_argument("--copies", type=int, default=2)
    p.add_argument("--k-max", type=int, help="also decode all cover patterns up to this weight")
    p.add_argument("--ts-a", type=int, help="only target sets of this signature")
    p.add_argument("--ts-b", type=int)
    p.add_argument("--manual-edges", help="check:variable,... for --schedule manual")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo FER sweep and slope fit")
    p.add_argument("--alpha-list", type=_floats)
    p.add_argument("--snr-db-list", type=_floats)
    p.add_argument("--max-frames", type=int, default=10 ** 7)
    p.add_argument("--target-failures", type=int, default=100)

    p = sub.add_parser("unwrap", parents=[common], help="truncated convolutional matrix from a plan")
    p.add_argument("--plan")
    p.add_argument("--periods", type=int, default=2)
    return ap


def _parse(argv):
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        try:
            defaults = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}")
        sub = ap._subparsers._group_actions[0].choices[args.command]
        sub.set_defaults(**{k.replace("-", "_"): v for k, v in defaults.items()})
        args = ap.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = _parse(argv)
        return COMMANDS[args.command](args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InputError, AlistError, ValueError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
