"""Command-line interface.

Commands: validate, solve-jsighted, shoot, backward, approximate-hpo,
diagnose, example1. Output goes to ``--output`` (stdout by default) as CSV
(the default) or JSON; set ``OLG_FORGE_LOG`` to a logging level name for progress logs.

Exit status is 0 on success, 1 when the computation fails or the economy is
invalid, and 2 for usage and input errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .backward import approximate_hpo, gale_family, run_backward, theorem3_family
from .demand import avg_savings
from .diagnostics import diagnose
from .economy import DomainError, GaleTail, validate_spec
from .example1 import closed_form_rates, example1_economy
from .io import SpecParseError, example1_file, load_prices, load_spec
from .solver import CandidatePath, SolveOptions, certify, forward_shoot, solve_j_sighted
from .tails import TailConstructionError

log = logging.getLogger("olg_forge")

COMMANDS = ("validate", "solve-jsighted", "shoot", "backward", "approximate-hpo",
            "diagnose", "example1")


class CommandFailed(RuntimeError):
    """The computation ran but did not produce a usable result."""


def fmt(x) -> str:
    """Round-trip float formatting used in every CSV output."""
    return format(float(x), ".17g")


@dataclass
class Output:
    command: str
    status: str
    result: dict
    rows: list[list] | None = None
    header: list[str] | None = None
    trailer: list[str] | None = None

    def json_text(self) -> str:
        doc = {"command": self.command, "status": self.status, "result": self.result}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
        for line in self.trailer or []:
            buf.write(line + "\n")
        return buf.getvalue()


def _options(args) -> SolveOptions:
    kw = {"seed": args.seed, "jobs": args.jobs}
    if args.tol is not None:
        kw["tol_residual"] = args.tol
    return SolveOptions(**kw)


def _economy(args):
    return load_spec(args.input) if args.input else load_spec(example1_file())


def _path_dict(c: CandidatePath) -> dict:
    return {"prices": c.prices.to_lists(), "residual": c.residual, "boxes_ok": c.boxes_ok,
            "failed_at": c.failed_at, "notes": list(c.notes)}


def _path_rows(paths: list[CandidatePath]) -> list[list]:
    rows = []
    for n, c in enumerate(paths):
        for t, p in enumerate(c.prices):
            for i, v in enumerate(p):
                rows.append([n, t, i + 1, float(v)])
    return rows


PATH_HEADER = ["path", "t", "good", "price"]


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_validate(args) -> Output:
    if not args.input:
        raise SpecParseError("validate needs --input")
    rep = validate_spec(load_spec(args.input))
    viol = [{"kind": v.kind, "t": v.t, "message": v.message} for v in rep.violations]
    out = Output("validate", "ok" if rep.valid else "invalid", {"valid": rep.valid, "violations": viol},
                 [[v["kind"], "" if v["t"] is None else v["t"], v["message"]] for v in viol],
                 ["kind", "t", "message"])
    return out


def cmd_solve_jsighted(args) -> Output:
    e = _economy(args)
    j = args.k if args.k is not None else 2
    paths = solve_j_sighted(e, j, _options(args))
    status = "ok" if paths else "failed"
    return Output("solve-jsighted", status, {"j": j, "paths": [_path_dict(c) for c in paths]},
                  _path_rows(paths), PATH_HEADER)


def _shoot(args, e):
    T = args.T if args.T is not None else (args.k if args.k is not None else 50)
    r0 = args.r0 if args.r0 is not None else 1.0
    L0, L1 = e.dims(0), e.dims(1)
    return forward_shoot(e, np.ones(L0), np.full(L1, 1.0 / r0), T, _options(args)), T, r0


def cmd_shoot(args) -> Output:
    e = _economy(args)
    path, T, r0 = _shoot(args, e)
    status = "ok" if path.ok else "failed"
    return Output("shoot", status, {"T": T, "r0": r0, "path": _path_dict(path)},
                  _path_rows([path]), PATH_HEADER)


def _tail_for(args, e):
    if args.w is not None:
        return GaleTail(args.w), gale_family(args.w)
    return None, theorem3_family(e)


def cmd_backward(args) -> Output:
    e = _economy(args)
    k = args.k if args.k is not None else 50
    tail, family = _tail_for(args, e)
    runs = run_backward(e, tail if tail is not None else family(k), k, _options(args))
    result = {"k": k, "runs": [{"converged": r.converged, "tail_anchor": r.tail_anchor,
                                "rates": list(r.iterates), **_path_dict(r.candidate)}
                               for r in runs]}
    status = "ok" if any(r.converged for r in runs) else "failed"
    return Output("backward", status, result, _path_rows([r.candidate for r in runs]), PATH_HEADER)


def cmd_approximate_hpo(args) -> Output:
    e = _economy(args)
    ks = args.k_schedule or list(range(10, 101, 10))
    _, family = _tail_for(args, e)
    res = approximate_hpo(e, family, ks, opts=_options(args))
    trace = [{"k": t.k, "p1": list(t.p1), "branches": t.n_branches, "window": t.window,
              "diff": t.diff} for t in res.trace]
    result = {"converged": res.converged, "converged_at": res.converged_at, "trace": trace,
              "prices": res.prices.to_lists() if res.prices else None,
              "residual": res.residual, "forward_gap": res.forward_gap, "notes": res.notes,
              "diagnostics": res.diagnostics.to_dict() if res.diagnostics else None}
    rows = [[t.k, t.window, "" if t.diff is None else float(t.diff)]
            + [float(v) for v in t.p1] for t in res.trace]
    width = max((len(t.p1) for t in res.trace), default=1)
    header = ["k", "window", "diff"] + [f"p1_{i + 1}" for i in range(width)]
    return Output("approximate-hpo", "ok" if res.converged else "failed", result, rows, header)


def cmd_diagnose(args) -> Output:
    e = _economy(args)
    if args.path:
        prices = load_prices(args.path)
        cand = CandidatePath(prices, certify(e, prices) if len(prices) >= 3 else 0.0, True)
    else:
        cand, _, _ = _shoot(args, e)
        if not cand.ok:
            raise CommandFailed(f"forward shooting failed at t={cand.failed_at}")
    report = diagnose(e, cand)
    rows = []
    for t, s in enumerate(report.savings):
        rows.append([t, float(s), float(report.cass_partials[t])])
    return Output("diagnose", "ok", report.to_dict(), rows, ["t", "savings", "cass_partial"])


def cmd_example1(args) -> Output:
    w = args.w if args.w is not None else 0.7
    k = args.k if args.k is not None else 50
    e = example1_economy()
    runs = run_backward(e, GaleTail(w), k, _options(args))
    if not runs:
        raise CommandFailed("backward recursion found no path")
    run = runs[0]
    ps = run.candidate.prices
    rows = []
    for t in range(k + 1):
        s = avg_savings(e.generation(t), ps[t], ps[t + 1])
        rows.append([k, t, float(run.iterates[t]), float(ps[t][0]), float(s)])
    gap = abs(run.iterates[0] - 1.0)
    closed = closed_form_rates(w, k)
    result = {"w": w, "k": k, "abs_r0_minus_1": gap,
              "max_closed_form_gap": float(np.max(np.abs(np.array(run.iterates) - closed))),
              "rows": [{"t": r[1], "r_t": r[2], "p_t": r[3], "savings_t": r[4]} for r in rows]}
    return Output("example1", "ok", result, rows, ["k", "t", "r_t", "p_t", "savings_t"],
                  [f"# abs_r0_minus_1,{fmt(gap)}"])


HANDLERS = {
    "validate": cmd_validate,
    "solve-jsighted": cmd_solve_jsighted,
    "shoot": cmd_shoot,
    "backward": cmd_backward,
    "approximate-hpo": cmd_approximate_hpo,
    "diagnose": cmd_diagnose,
    "example1": cmd_example1,
}


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def _schedule(text: str) -> list[int]:
    try:
        ks = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad k schedule {text!r}") from None
    if not ks or any(b <= a for a, b in zip(ks, ks[1:])):
        raise argparse.ArgumentTypeError("k schedule must be increasing integers")
    return ks


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="olg-forge", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", help="economy JSON file (built-in scalar example if omitted)")
    p.add_argument("--output", help="output file (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, help="Newton residual tolerance")
    p.add_argument("--k", type=int, help="horizon (j for solve-jsighted, T for shoot)")
    p.add_argument("--k-schedule", type=_schedule, help="comma-separated increasing horizons")
    p.add_argument("--w", type=float, help="tail return rate (one-good economies)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--r0", type=float, help="initial return rate p_0/p_1 for shoot and diagnose")
    p.add_argument("--T", type=int, help="shooting horizon (overrides --k)")
    p.add_argument("--path", help="price path JSON for diagnose")
    p.add_argument("--version", action="version", version=__version__)
    return p


def run(argv=None) -> int:
    level = os.environ.get("OLG_FORGE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        out = HANDLERS[args.command](args)
    except (SpecParseError, FileNotFoundError, TailConstructionError) as exc:
        print(f"olg-forge: error: {exc}", file=sys.stderr)
        return 2
    except (CommandFailed, DomainError, ValueError) as exc:
        print(f"olg-forge: failed: {exc}", file=sys.stderr)
        return 1
    text = out.json_text() if args.format == "json" else out.csv_text()
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if out.status != "ok":
        print(f"olg-forge: {args.command} finished with status {out.status}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())
