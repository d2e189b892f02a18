"""``loopsim`` command line: sampling, memory estimates, validation, state-space counts and bounds."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from loopsim.circuit import LoopArchitecture, progressive_schedule, relevant_modes
from loopsim.complexity import (
    DISTRIBUTION_TAGS,
    SAMPLERS,
    batch_stats,
    format_fraction,
    heuristic_batch,
    memory_of_outcome,
    theoretical_bounds,
    true_memory_samples,
)
from loopsim.errors import ContractError, LoopsimError
from loopsim.fock import fock_dimension
from loopsim.lattice import final_space, physical_max_vector, require_unit_first_loop
from loopsim.progressive import run_batch

DEFAULT_VALIDATE_CAP = 10**6


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def outcome_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(v) for v in text.replace(" ", "").split(",") if v != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("photon counts must be non-negative")
    return values


def load_document(path: str) -> dict[str, Any]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ContractError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ContractError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ContractError(f"{path}: expected a JSON object")
    return doc


def dump_json(doc: Any) -> str:
    return json.dumps(doc, separators=(", ", ": ")) + "\n"


def table_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def ratio(a: int, b: int) -> str | None:
    return None if b == 0 else format_fraction(Fraction(a, b))


def cmd_sample(args, doc) -> str:
    arch = LoopArchitecture.from_dict(doc)
    records = run_batch(arch, args.samples, args.seed, workers=args.workers, max_support=args.max_support)
    if args.format == "csv":
        return table_csv(["outcome", "peak_support", "chained_probability", "lost"],
                         [[" ".join(map(str, r.outcome)), r.peak_support, repr(r.chained_probability), r.lost]
                          for r in records])
    return "".join(dump_json(r.to_dict()) for r in records)


def cmd_estimate_memory(args, doc) -> str:
    arch = LoopArchitecture.from_dict(doc)
    require_unit_first_loop(arch)
    draws = heuristic_batch(arch, args.samples, args.seed, workers=args.workers, sampler=args.heuristic)
    stats = batch_stats((trace for _, trace in draws), distribution=DISTRIBUTION_TAGS[args.heuristic])
    if args.raw_csv:
        Path(args.raw_csv).write_text(table_csv(
            ["index", "peak", "outcome"],
            [[i, trace.peak, " ".join(map(str, outcome))] for i, (outcome, trace) in enumerate(draws)]))
    doc_out = {**stats.to_dict(), "R": relevant_modes(arch.loops)}
    if args.format == "csv":
        return table_csv(list(doc_out), [list(doc_out.values())])
    return dump_json(doc_out)


def cmd_validate(args, doc) -> str:
    arch = LoopArchitecture.from_dict(doc)
    require_unit_first_loop(arch)
    R = relevant_modes(arch.loops)
    dim = fock_dimension(R, arch.photon_count)
    if dim >= args.cap:
        raise ContractError(f"true sampling refused: Fock dimension {dim} of {arch.photon_count} photons "
                            f"in R={R} modes reaches the cap {args.cap}; raise --cap to force it")
    true_stats = batch_stats(true_memory_samples(arch, args.samples, args.seed, args.group_size, args.workers),
                             distribution="true")
    heur_stats = batch_stats((t for _, t in heuristic_batch(arch, args.samples, args.seed, args.workers,
                                                            args.heuristic)),
                             distribution=DISTRIBUTION_TAGS[args.heuristic])
    ratios = {k: ratio(v, true_stats.quantiles()[k]) for k, v in heur_stats.quantiles().items()}
    ratios["mean"] = None if true_stats.mean == 0 else format_fraction(heur_stats.mean / true_stats.mean)
    if args.format == "csv":
        rows = [[s.distribution, format_fraction(s.mean), *map(str, s.quantiles().values()), s.n]
                for s in (true_stats, heur_stats)]
        rows.append(["ratio", ratios["mean"], *(ratios[k] for k in ("p25", "p50", "p75", "p95")), args.samples])
        return table_csv(["distribution", "mean", "p25", "p50", "p75", "p95", "N"], rows)
    return dump_json({"R": R, "group_size": args.group_size, "true": true_stats.to_dict(),
                      "heuristic": heur_stats.to_dict(), "ratio_heuristic_over_true": ratios})


def cmd_count_space(args, doc) -> str:
    arch = LoopArchitecture.from_dict(doc)
    if args.outcome is not None:
        trace = memory_of_outcome(arch, args.outcome, progressive_schedule(arch), prefix=True)
        counts = [str(c) for c in trace.per_step_counts]
        if args.format == "csv":
            return table_csv(["step", "count"], list(enumerate(counts)))
        return dump_json({"outcome": list(args.outcome), "per_step_counts": counts, "peak": str(trace.peak)})
    pcs = final_space(arch)
    out = {"mu": list(pcs.heights), "sigma": [pcs.sigma[mode] for mode in sorted(pcs.sigma)],
           "max_vector": physical_max_vector(pcs), "count": str(pcs.count())}
    if args.format == "csv":
        return table_csv(list(out), [[" ".join(map(str, v)) if isinstance(v, list) else v for v in out.values()]])
    return dump_json(out)


def cmd_bounds(args, doc) -> str:
    try:
        loops = tuple(int(x) for x in doc["loops"])
    except (KeyError, TypeError, ValueError):
        raise ContractError("config needs a list of integer 'loops'") from None
    m = doc.get("m")
    bounds = theoretical_bounds(loops, None if m is None else int(m))
    out = bounds.to_dict()
    if args.format == "csv":
        rt = out["runtime_class"] or {}
        return table_csv(["R", "expression", "exponent"], [[out["R"], rt.get("expression", ""), rt.get("exponent", "")]])
    return dump_json(out)


COMMANDS = {
    "sample": cmd_sample,
    "estimate-memory": cmd_estimate_memory,
    "validate": cmd_validate,
    "count-space": cmd_count_space,
    "bounds": cmd_bounds,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", required=True, help="architecture JSON file")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", help="write here instead of stdout")

    stochastic = argparse.ArgumentParser(add_help=False)
    stochastic.add_argument("-n", "--samples", type=positive_int, default=1000)
    stochastic.add_argument("--seed", type=int, required=True, help="master seed; run i uses stream (seed, i)")
    stochastic.add_argument("--workers", type=positive_int, default=1)

    parser = argparse.ArgumentParser(prog="loopsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("sample", parents=[common, stochastic], help="draw outcomes, one JSON line each")
    p.add_argument("--max-support", type=positive_int, help="abort when the live support exceeds this size")
    p = sub.add_parser("estimate-memory", parents=[common, stochastic],
                       help="memory statistics under the uniform heuristic")
    p.add_argument("--raw-csv", help="also write every sampled peak to this CSV file")
    p.add_argument("--heuristic", choices=sorted(SAMPLERS), default="uniform",
                   help="uniform over feasible outcomes, or drawn from the space reached so far")
    p = sub.add_parser("validate", parents=[common, stochastic],
                       help="compare heuristic and true memory distributions")
    p.add_argument("--cap", type=positive_int, default=DEFAULT_VALIDATE_CAP,
                   help="refuse when the Fock dimension over R modes reaches this")
    p.add_argument("--group-size", type=positive_int, default=10, help="true samples per angle draw")
    p.add_argument("--heuristic", choices=sorted(SAMPLERS), default="uniform")
    p = sub.add_parser("count-space", parents=[common], help="reachable state-space size")
    p.add_argument("--outcome", type=outcome_list, help="comma-separated outcome prefix; report per-step counts")
    sub.add_parser("bounds", parents=[common], help="relevant modes and runtime class")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = COMMANDS[args.command](args, load_document(args.config))
        if args.output:
            Path(args.output).write_text(text)
        else:
            sys.stdout.write(text)
    except LoopsimError as exc:
        print(f"loopsim {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"loopsim {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
