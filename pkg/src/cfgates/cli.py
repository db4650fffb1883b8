"""Command-line front end.

Scalar results (run, entangle, audit, exec) default to JSON; tables (sweep,
noise) default to CSV. Every JSON document carries a top-level ``schema`` key.
Diagnostics go to stderr, results to stdout or ``--out``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from . import __version__
from .components import BOB, CHARLIE, DAVID
from .dsl import execute_program, load_program, parse_program, shipped_program
from .entangle import PIPELINES, run_pipeline
from .errors import CfgatesError
from .gates import GateConfig, GateKind, counterfactual_audit, run_gate, theory_prediction
from .noise import POLICIES, noise_sweep

log = logging.getLogger("cfgates")

SEED_ENV = "CFGATES_SEED"
GATES = {"nand": GateKind.NAND2, "nand3": GateKind.NAND_MULTI, "nor": GateKind.NOR, "xor": GateKind.XOR}
SCHEMA = {
    "run": "cfgates.run/1",
    "sweep": "cfgates.sweep/1",
    "noise": "cfgates.noise/1",
    "entangle": "cfgates.pipeline/1",
    "exec": "cfgates.pipeline/1",
    "audit": "cfgates.audit/1",
}


def _p(x) -> float | None:
    """Probabilities are reported with 6 decimal digits."""
    return None if x is None else round(float(x), 6)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.6f}"
    return str(x)


def _fmt_small(x) -> str:
    return "" if x is None else f"{x:.6e}"


# -- argument helpers ------------------------------------------------------------


def int_grid(text: str) -> list[int]:
    """``10,20,30`` or an inclusive range ``start:stop:step``."""
    try:
        if ":" in text:
            start, stop, step = (int(t) for t in text.split(":"))
            if step <= 0:
                raise ValueError
            return list(range(start, stop + 1, step))
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer grid {text!r}") from None


def float_grid(text: str) -> list[float]:
    """``0,0.01,0.02`` or ``start:stop:count`` (evenly spaced, inclusive)."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            return [float(g) for g in np.linspace(float(start), float(stop), int(count))]
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad float grid {text!r}") from None


def bit(text: str) -> int:
    if text not in ("0", "1"):
        raise argparse.ArgumentTypeError(f"input must be 0 or 1, got {text!r}")
    return int(text)


def gate_config(args) -> GateConfig:
    kind = GATES[args.gate]
    parties = (BOB, CHARLIE, DAVID) if kind is GateKind.NAND_MULTI else (BOB, CHARLIE)
    return GateConfig(kind, args.m, args.n, parties)


def all_inputs(cfg: GateConfig) -> list[tuple[int, ...]]:
    n = len(cfg.parties)
    return [tuple((i >> (n - 1 - k)) & 1 for k in range(n)) for i in range(2**n)]


def parse_inputs(text: str | None, cfg: GateConfig) -> list[tuple[int, ...]]:
    if not text:
        return all_inputs(cfg)
    out = []
    for item in text.split(","):
        item = item.strip()
        if len(item) != len(cfg.parties) or set(item) - {"0", "1"}:
            raise CfgatesError(f"input pattern {item!r} must be {len(cfg.parties)} binary digits")
        out.append(tuple(int(c) for c in item))
    return out


# -- output ----------------------------------------------------------------------


def emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def to_csv(rows: list[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([row.get(c, "") for c in columns])
    return buf.getvalue()


def _complex(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


# -- subcommands -------------------------------------------------------------------


def run_record(cfg: GateConfig, inputs, theory_form: str = "asymptotic") -> dict:
    dist = run_gate(cfg, inputs)
    theory = theory_prediction(cfg, inputs, form=theory_form)
    bits = cfg.normalize_inputs(inputs)
    return {
        "M": cfg.M,
        "N": cfg.N,
        **{f"input_{p}": b for p, b in bits.items()},
        "P_D0": dist.p_d0,
        "P_D1": dist.p_d1,
        "theory_D0": theory["D0"],
        "theory_D1": theory["D1"],
        "sinks": {k: v for k, v in dist.probabilities.items() if k not in ("D0", "D1")},
        "total": dist.total,
    }


def cmd_run(args) -> str:
    cfg = gate_config(args)
    bits = {BOB: args.bob, CHARLIE: args.charlie}
    if cfg.kind is GateKind.NAND_MULTI:
        if args.david is None:
            raise CfgatesError("nand3 needs --david")
        bits[DAVID] = args.david
    elif args.david is not None:
        raise CfgatesError(f"--david only applies to nand3, not {args.gate}")
    rec = run_record(cfg, bits, args.theory)
    if args.format == "csv":
        columns = ["M", "N", *[f"input_{p}" for p in cfg.parties], "P_D0", "P_D1", "theory_D0", "theory_D1"]
        return to_csv([{k: _fmt(v) for k, v in rec.items()}], columns)
    return to_json(
        {
            "schema": SCHEMA["run"],
            "gate": args.gate,
            "M": cfg.M,
            "N": cfg.N,
            "inputs": {p: bits[p] for p in cfg.parties},
            "P_D0": _p(rec["P_D0"]),
            "P_D1": _p(rec["P_D1"]),
            "theory_form": args.theory,
            "theory_D0": _p(rec["theory_D0"]),
            "theory_D1": _p(rec["theory_D1"]),
            "gap_D0": _p(rec["P_D0"] - rec["theory_D0"]),
            "gap_D1": _p(rec["P_D1"] - rec["theory_D1"]),
            "sinks": {k: _p(v) for k, v in sorted(rec["sinks"].items())},
            "total": _p(rec["total"]),
        }
    )


def _sweep_cell(job):
    cfg, inputs, form = job
    return run_record(cfg, inputs, form)


def cmd_sweep(args) -> str:
    kind = GATES[args.gate]
    parties = (BOB, CHARLIE, DAVID) if kind is GateKind.NAND_MULTI else (BOB, CHARLIE)
    jobs = []
    for M in args.m_grid:
        for N in args.n_grid:
            cfg = GateConfig(kind, M, N, parties)
            for inputs in parse_inputs(args.inputs, cfg):
                jobs.append((cfg, inputs, args.theory))
    if not jobs:
        raise CfgatesError("empty sweep grid")
    if args.workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_sweep_cell, jobs))
    else:
        rows = [_sweep_cell(job) for job in jobs]
    columns = ["M", "N", *[f"input_{p}" for p in parties], "P_D0", "P_D1", "theory_D0", "theory_D1"]
    if args.format == "json":
        clean = [{c: (_p(r[c]) if c.startswith(("P_", "theory")) else r[c]) for c in columns} for r in rows]
        return to_json({"schema": SCHEMA["sweep"], "gate": args.gate, "theory_form": args.theory, "rows": clean})
    return to_csv([{c: _fmt(r[c]) for c in columns} for r in rows], columns)


def cmd_noise(args) -> str:
    cfg = gate_config(args)
    inputs = parse_inputs(args.inputs, cfg)
    rows = noise_sweep(cfg, inputs, args.gamma_grid, args.samples, args.seed, args.policy, args.workers)
    columns = ["gamma"]
    for bits in inputs:
        tag = "".join(map(str, bits))
        columns += [f"E_{tag}D0", f"E_{tag}D1", f"SE_{tag}D0", f"SE_{tag}D1"]
    if args.format == "json":
        return to_json(
            {
                "schema": SCHEMA["noise"],
                "gate": args.gate,
                "M": cfg.M,
                "N": cfg.N,
                "samples": args.samples,
                "seed": args.seed,
                "policy": args.policy,
                "rows": [{c: row[c] for c in columns} for row in rows],
            }
        )
    text_rows = []
    for row in rows:
        text_rows.append({c: (_fmt_small(row[c]) if c.startswith("SE_") else _fmt(row[c])) for c in columns})
    return to_csv(text_rows, columns)


def pipeline_doc(kind: str, result, **meta) -> dict:
    return {
        "schema": SCHEMA[kind],
        **meta,
        "success_probability": _p(result.success_probability),
        "fidelity": _p(result.fidelity),
        "postselected_amplitudes": {k: _complex(v) for k, v in sorted(result.amplitudes.items())},
        "failure_breakdown": {k: _p(v) for k, v in sorted(result.failures.items())},
        "conservation": result.conservation,
    }


def cmd_entangle(args) -> str:
    pipeline = PIPELINES[args.state](args.m, args.n)
    result = run_pipeline(pipeline, ideal=args.ideal)
    meta = {"state": args.state, "M": None if args.ideal else args.m, "N": None if args.ideal else args.n}
    return to_json(pipeline_doc("entangle", result, ideal=args.ideal, **meta))


def cmd_exec(args) -> str:
    path = Path(args.program)
    if not path.exists() and args.program in PIPELINES:
        program = parse_program(shipped_program(args.program))
    else:
        program = load_program(path)
    result = execute_program(program, ideal=args.ideal)
    return to_json(pipeline_doc("exec", result, program=args.program, ideal=args.ideal, target=program.target))


def cmd_audit(args) -> str:
    cfg = gate_config(args)
    records = []
    for inputs in all_inputs(cfg):
        rep = counterfactual_audit(cfg, inputs)
        records.append(
            {
                "inputs": rep.inputs,
                "claimed": list(rep.claimed),
                "max_deviation": rep.max_deviation,
                "deviations": rep.deviations,
                "balanced_residual_max": rep.max_balanced_residual if rep.balanced_residuals else None,
            }
        )
    if args.format == "csv":
        columns = [*[f"input_{p}" for p in cfg.parties], "max_deviation", "balanced_residual_max"]
        rows = [
            {
                **{f"input_{p}": r["inputs"][p] for p in cfg.parties},
                "max_deviation": _fmt_small(r["max_deviation"]),
                "balanced_residual_max": _fmt_small(r["balanced_residual_max"]),
            }
            for r in records
        ]
        return to_csv(rows, columns)
    return to_json({"schema": SCHEMA["audit"], "gate": args.gate, "M": cfg.M, "N": cfg.N, "results": records})


# -- parser ----------------------------------------------------------------------------


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise CfgatesError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cfgates", description="Counterfactual logic gate simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def gate_flags(p, scalar=True):
        p.add_argument("--gate", choices=sorted(GATES), required=True)
        if scalar:
            p.add_argument("--m", type=int, required=True, help="outer splitter count M")
            p.add_argument("--n", type=int, required=True, help="inner splitter count N")

    def out_flags(p, default):
        p.add_argument("--format", choices=("json", "csv"), default=default)
        p.add_argument("--out", help="write to this file instead of stdout")

    p = sub.add_parser("run", help="exact run of one gate and input pattern")
    gate_flags(p)
    p.add_argument("--bob", type=bit, required=True)
    p.add_argument("--charlie", type=bit, required=True)
    p.add_argument("--david", type=bit, help="third input (nand3 only)")
    p.add_argument("--theory", choices=("asymptotic", "sum"), default="asymptotic")
    out_flags(p, "json")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="exact runs over an (M, N) grid")
    gate_flags(p, scalar=False)
    p.add_argument("--m-grid", type=int_grid, required=True, help="e.g. 10,20,30 or 10:30:5")
    p.add_argument("--n-grid", type=int_grid, required=True)
    p.add_argument("--inputs", help="comma-separated patterns such as 00,11 (default: all)")
    p.add_argument("--theory", choices=("asymptotic", "sum"), default="asymptotic")
    p.add_argument("--workers", type=int, default=1)
    out_flags(p, "csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("noise", help="effective probabilities under random channel blocking")
    gate_flags(p)
    p.add_argument("--gamma-grid", type=float_grid, required=True, help="e.g. 0,0.01,0.03 or 0:0.05:11")
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    p.add_argument("--policy", choices=POLICIES, default="segment")
    p.add_argument("--inputs", help="comma-separated patterns (default: all)")
    p.add_argument("--workers", type=int, default=1)
    out_flags(p, "csv")
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("entangle", help="GHZ or W preparation pipeline")
    p.add_argument("--state", choices=sorted(PIPELINES), required=True)
    p.add_argument("--m", type=int, default=50)
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--ideal", action="store_true", help="use the ideal gate maps")
    p.add_argument("--out")
    p.set_defaults(func=cmd_entangle)

    p = sub.add_parser("audit", help="counterfactuality audit over all inputs")
    gate_flags(p)
    out_flags(p, "json")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("exec", help="execute a .cfg pipeline program")
    p.add_argument("program", help="path to a .cfg file, or ghz / w for the bundled programs")
    p.add_argument("--ideal", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_exec)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        if getattr(args, "workers", 1) < 1:
            raise CfgatesError("--workers must be positive")
        if getattr(args, "samples", 1) < 1:
            raise CfgatesError("--samples must be positive")
        text = args.func(args)
        emit(text, getattr(args, "out", None))
    except (CfgatesError, ValueError, OSError) as exc:
        print(f"cfgates: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
