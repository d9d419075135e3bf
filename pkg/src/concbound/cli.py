"""Command-line front end: ``concbound q|bound|verify|sweep|convpow|run``.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .bounds import BOUND_IDS, BoundReport, estimate_constant, evaluate
from .concentration import q_exact, q_monte_carlo
from .convolution import conv_power
from .errors import ConcBoundError, EmptyFamily, SpecError
from .families import trivial_mixture
from .measures import DiscreteDist, Measure, MixtureSpec, infer_step, to_lattice
from .specio import ScenarioFile, dist_to_spec, load_scenario, parse_family_expr
from .verify import run_suite

FLOAT_FMT = ".17g"
CORE_COLUMNS = ("bound_id", "lhs", "rhs_unit", "implied_c", "hypothesis_ok")


class UsageError(Exception):
    pass


def fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, FLOAT_FMT) if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    return str(v)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(type(o).__name__)


def dumps(obj: Any) -> str:
    return json.dumps(obj, default=_json_default, allow_nan=False)


class Resolver:
    """Looks distribution names up in a scenario file, then among built-in families."""

    def __init__(self, spec: ScenarioFile | None):
        self.spec = spec

    def entry(self, name: str) -> Measure | MixtureSpec:
        if self.spec is not None and name in self.spec.distributions:
            return self.spec.get(name)
        try:
            return parse_family_expr(name)
        except SpecError:
            where = "spec file" if self.spec is not None else "built-in families"
            raise SpecError(f"distribution {name!r} not found in {where}") from None

    def measure(self, name: str) -> Measure:
        e = self.entry(name)
        return e.mixed() if isinstance(e, MixtureSpec) else e

    def mixture(self, name: str, p: float | None = None, v_name: str | None = None) -> MixtureSpec:
        e = self.entry(name)
        if isinstance(e, MixtureSpec):
            if p is None and v_name is None:
                return e
            V = self.measure(v_name).to_discrete() if v_name else e.V
            return MixtureSpec(e.p if p is None else p, e.U, V)
        U = e.to_discrete()
        if p is None and v_name is None:
            return trivial_mixture(U)
        V = self.measure(v_name).to_discrete() if v_name else DiscreteDist.point(0.0)
        return MixtureSpec(0.0 if p is None else p, U, V)


def _resolver(spec_path: str | None) -> Resolver:
    return Resolver(load_scenario(spec_path) if spec_path else None)


def _require(params: dict, *names: str) -> None:
    missing = [n for n in names if params.get(n) is None]
    if missing:
        raise UsageError(f"missing parameter(s): {', '.join('--' + m.replace('_', '-') for m in missing)}")


def bound_kwargs(bound_id: str, res: Resolver, params: dict) -> dict:
    """Translate CLI-level parameters into evaluator keyword arguments."""
    _require(params, "dist", "n", "b")
    n, b = params["n"], params["b"]
    common = {"prune_eps": params.get("prune_eps") or 0.0}
    H = res.measure(params["h"]) if params.get("h") else DiscreteDist.point(0.0)
    if bound_id == "lemma1":
        G = res.measure(params["g"]) if params.get("g") else H
        W = res.mixture(params["dist"]).U
        return dict(W_base=W, n=n, G=G, b=b, **common)
    if bound_id in ("esseen_1_11", "sharpened_1_13", "cf_1_15"):
        return dict(F=res.measure(params["dist"]).to_discrete(), n=n, b=b, **common)
    spec = res.mixture(params["dist"], params.get("p"), params.get("v"))
    if bound_id == "cor1":
        return dict(spec=spec, H=H, n=n, b=b, **common)
    if bound_id == "th1_simple":
        _require(params, "r")
        return dict(spec=spec, H=H, n=n, r=params["r"], b=b, **common)
    if bound_id == "th1_general":
        _require(params, "r", "s")
        return dict(spec=spec, H=H, n=n, r=params["r"], s=params["s"], b=b, **common)
    if bound_id in ("mult_1_7", "cf_1_16"):
        _require(params, "alpha")
        return dict(spec=spec, n=n, alpha=params["alpha"], b=b, **common)
    if bound_id == "cor2":
        _require(params, "delta")
        return dict(spec=spec, n=n, b=b, delta=params["delta"], **common)
    raise UsageError(f"unknown bound {bound_id!r}")


def report_row(report: BoundReport) -> dict[str, str]:
    row = {
        "bound_id": report.bound_id,
        "lhs": fmt(report.lhs),
        "rhs_unit": fmt(report.rhs_unit),
        "implied_c": fmt(report.implied_c),
        "hypothesis_ok": fmt(report.hypothesis_ok),
    }
    row.update({k: fmt(v) for k, v in report.flat_params().items()})
    return row


def write_csv(rows: list[dict[str, str]], out: io.TextIOBase, footer: Sequence[str] = ()) -> None:
    header = list(CORE_COLUMNS)
    for r in rows:
        header.extend(k for k in r if k not in header)
    w = csv.DictWriter(out, fieldnames=header, lineterminator="\n", restval="")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    for line in footer:
        out.write(f"# {line}\n")


def read_report_csv(path_or_text: str | Path) -> tuple[list[dict[str, Any]], dict[str, Any]]:
    """Parse a report CSV produced by ``bound`` or ``sweep`` back into typed rows and footer."""
    text = Path(path_or_text).read_text(encoding="utf-8") if isinstance(path_or_text, Path) \
        else str(path_or_text)
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    footer: dict[str, Any] = {}
    for ln in text.splitlines():
        if ln.startswith("# "):
            key, _, val = ln[2:].partition("=")
            footer[key] = json.loads(val)
    schema = load_schema("report_csv.schema.json")
    leading = tuple(c["name"] for c in schema["leading_columns"])
    reader = csv.DictReader(body)
    names = reader.fieldnames or []
    if tuple(names[:len(leading)]) != leading:
        raise SpecError(f"report CSV must start with columns {leading}")
    extra = [c for c in names[len(leading):] if not c.startswith(tuple(schema["trailing_prefixes"]))]
    if extra:
        raise SpecError(f"unexpected report CSV column(s) {extra}")
    rows = []
    for raw in reader:
        if raw["bound_id"] not in BOUND_IDS:
            raise SpecError(f"unknown bound_id {raw['bound_id']!r} in report CSV")
        if raw["hypothesis_ok"] not in ("true", "false"):
            raise SpecError(f"hypothesis_ok must be true/false, got {raw['hypothesis_ok']!r}")
        row: dict[str, Any] = dict(raw)
        for k in ("lhs", "rhs_unit", "implied_c"):
            row[k] = float(raw[k])
        row["hypothesis_ok"] = raw["hypothesis_ok"] == "true"
        rows.append(row)
    return rows, footer


def load_schema(name: str) -> dict:
    return json.loads(resources.files("concbound").joinpath("schemas", name).read_text(encoding="utf-8"))


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- subcommands

def cmd_q(args) -> int:
    res = _resolver(args.spec)
    F = res.measure(args.dist)
    n = args.n
    if args.mc:
        Fd = F.to_discrete()
        probs = Fd.masses / Fd.masses.sum()

        def sampler(rng, N):
            idx = rng.choice(Fd.positions.size, size=(N, n), p=probs)
            return Fd.positions[idx].sum(axis=1)

        est, half = q_monte_carlo(sampler, args.b, args.mc, args.seed)
        out = {"dist": args.dist, "n": n, "b": args.b, "estimate": est, "ci_halfwidth": half,
               "N": args.mc, "seed": args.seed}
    else:
        X = _power_auto(F, n, args.prune_eps)
        q = q_exact(X, args.b)
        out = {"dist": args.dist, "n": n, "b": args.b, **q.as_dict()}
    _emit(dumps(out) + "\n", args.out)
    return 0


def _power_auto(F: Measure, n: int, prune_eps: float) -> Measure:
    if isinstance(F, DiscreteDist) and len(F) > 1:
        h = infer_step(F)
        if h is not None:
            F = to_lattice(F, h)
    return conv_power(F, n, prune_eps)


def _bound_params(args) -> dict:
    return {k: getattr(args, k) for k in
            ("dist", "n", "b", "alpha", "p", "r", "s", "delta", "prune_eps", "h", "g", "v")}


def cmd_bound(args) -> int:
    res = _resolver(args.spec)
    report = evaluate(args.bound_id, **bound_kwargs(args.bound_id, res, _bound_params(args)))
    if args.format == "json":
        _emit(dumps(report.as_dict()) + "\n", args.out)
    else:
        buf = io.StringIO()
        write_csv([report_row(report)], buf)
        _emit(buf.getvalue(), args.out)
    return 0


def cmd_verify(args) -> int:
    try:
        results = run_suite(args.suite)
    except KeyError:
        raise UsageError(f"unknown suite {args.suite!r}; choose identities, constants, counterexample or all")
    if args.format == "json":
        payload = {"suite": args.suite, "passed": all(r.passed for r in results),
                   "checks": [{"name": r.name, "passed": r.passed, "detail": r.detail,
                               "failure": r.failure} for r in results]}
        _emit(dumps(payload) + "\n", args.out)
    else:
        width = max(len(r.name) for r in results)
        lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}" for r in results]
        _emit("\n".join(lines) + "\n", args.out)
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"first failure: {failed[0].name}: {dumps(failed[0].failure)}", file=sys.stderr)
        return 1
    return 0


def parse_grid(items: Sequence[str]) -> list[dict[str, float | int]]:
    """``["n=16,64", "b=1"]`` -> cartesian product of parameter dicts, in order."""
    if not items:
        raise UsageError("empty grid: give at least one --grid key=v1,v2,...")
    keys, values = [], []
    for item in items:
        key, sep, vals = item.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key:
            raise UsageError(f"bad grid item {item!r}; expected key=v1,v2,...")
        parsed = []
        for tok in vals.split(","):
            tok = tok.strip()
            if not tok:
                continue
            try:
                parsed.append(int(tok) if key in ("n", "r", "s") else float(tok))
            except ValueError:
                raise UsageError(f"grid value {tok!r} for {key} is not a number") from None
        if not parsed:
            raise UsageError(f"empty grid axis {key!r}")
        keys.append(key)
        values.append(parsed)
    return [dict(zip(keys, combo)) for combo in itertools.product(*values)]


def cmd_sweep(args) -> int:
    res = _resolver(args.spec)
    grid = parse_grid(args.grid)
    base = _bound_params(args)
    reports = [evaluate(args.bound_id, **bound_kwargs(args.bound_id, res, {**base, **point}))
               for point in grid]
    try:
        c_hat, witness = estimate_constant(reports, args.bound_id)
        footer = [f"c_hat={dumps(c_hat)}",
                  f"witness={dumps({k: v for k, v in witness.items() if not isinstance(v, (dict, list))})}"]
    except EmptyFamily:
        footer = ["c_hat=null", "witness=null"]
    buf = io.StringIO()
    write_csv([report_row(r) for r in reports], buf, footer)
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_convpow(args) -> int:
    res = _resolver(args.spec)
    X = _power_auto(res.measure(args.dist), args.n, args.prune_eps)
    out = {"dist": args.dist, "n": args.n, "distribution": dist_to_spec(X),
           "budgets": X.budget.as_dict()}
    _emit(dumps(out) + "\n", args.out)
    return 0


def cmd_run(args) -> int:
    """Execute the ``runs`` listed in a scenario file."""
    spec = load_scenario(args.spec)
    status = 0
    for i, run in enumerate(spec.runs):
        argv = [run["command"]]
        if run["command"] in ("bound", "sweep"):
            argv.append(str(run["params"].get("bound_id", "")))
        if run["command"] == "verify":
            argv.append(str(run["params"].get("suite", "")))
        argv += ["--spec", args.spec]
        for k, v in run["params"].items():
            if k in ("bound_id", "suite"):
                continue
            if k == "grid":
                for g in v:
                    argv += ["--grid", g]
                continue
            argv += [f"--{k.replace('_', '-')}", str(v)]
        if run.get("out"):
            argv += ["--out", run["out"]]
        code = main(argv)
        if code != 0:
            print(f"run {i} ({run['command']}) exited with {code}", file=sys.stderr)
            status = max(status, code)
    return status


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="concbound",
                                     description="Exact concentration functions of convolutions and bound evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, dist=True):
        p.add_argument("--spec", help="scenario/distribution JSON file")
        if dist:
            p.add_argument("--dist", required=True,
                           help="name in --spec, or a family such as 'two_point(1)'")
        p.add_argument("--prune-eps", type=float, default=0.0)
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default=None)

    def scalars(p):
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--b", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("--p", type=float)
        p.add_argument("--r", type=int)
        p.add_argument("--s", type=int)
        p.add_argument("--delta", type=float)
        p.add_argument("--h", help="distribution H (default point mass at 0)")
        p.add_argument("--g", help="distribution G for lemma1 (default H)")
        p.add_argument("--v", help="mixture component V when --dist is a plain distribution")

    p = sub.add_parser("q", help="concentration function of F^n")
    common(p)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--mc", type=int, help="Monte-Carlo estimate with this many draws")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_q)

    p = sub.add_parser("bound", help="evaluate one bound")
    p.add_argument("bound_id", choices=BOUND_IDS)
    common(p)
    scalars(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sweep", help="evaluate a bound over a parameter grid")
    p.add_argument("bound_id", choices=BOUND_IDS)
    common(p)
    p.add_argument("--grid", action="append", default=[], help="key=v1,v2,... (repeatable)")
    scalars(p)
    p.set_defaults(func=cmd_sweep)
    # n may come from the grid
    for a in p._actions:
        if a.dest == "n":
            a.required = False

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite")
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "table"), default="table")
    p.add_argument("--seed", type=int, default=None, help="accepted for symmetry; suites use a fixed corpus")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("convpow", help="print F^n as a distribution spec")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_convpow)

    p = sub.add_parser("run", help="execute the runs listed in a scenario file")
    p.add_argument("--spec", required=True)
    p.set_defaults(func=cmd_run)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "format", None) is None and args.command in ("bound", "sweep"):
        args.format = "csv"
    try:
        return args.func(args)
    except (UsageError, ConcBoundError, ValueError) as exc:
        print(f"concbound {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
