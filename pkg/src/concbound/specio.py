"""JSON distribution specs and scenario files.

A distribution spec is exactly one of::

    {"atoms": [[x, m], ...]}
    {"lattice": {"offset": a, "step": h, "weights": [...]}}
    {"family": "two_point", "params": {"a": 1}}

A mixture entry is ``{"mixture": {"p": 0.3, "U": <dist>, "V": <dist>}}``.
Unknown keys are rejected.
"""

from __future__ import annotations

import inspect
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConcBoundError, SpecError
from .families import FAMILIES
from .measures import DiscreteDist, LatticeDist, Measure, MixtureSpec


def _exact_keys(obj: Any, where: str, required: set[str], optional: set[str] = frozenset()) -> dict:
    if not isinstance(obj, dict):
        raise SpecError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = set(obj) - required - optional
    if unknown:
        raise SpecError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise SpecError(f"{where}: missing key(s) {sorted(missing)}")
    return obj


def _number(v: Any, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SpecError(f"{where}: expected a number, got {v!r}")
    return float(v)


def parse_dist(obj: Any, where: str = "distribution") -> Measure:
    if not isinstance(obj, dict) or len(obj) == 0:
        raise SpecError(f"{where}: expected an object with one of 'atoms', 'lattice', 'family'")
    try:
        if "atoms" in obj:
            _exact_keys(obj, where, {"atoms"})
            atoms = obj["atoms"]
            if not isinstance(atoms, list) or not atoms:
                raise SpecError(f"{where}.atoms: expected a nonempty list of [x, m] pairs")
            pairs = []
            for i, a in enumerate(atoms):
                if not isinstance(a, list) or len(a) != 2:
                    raise SpecError(f"{where}.atoms[{i}]: expected [x, m]")
                pairs.append((_number(a[0], f"{where}.atoms[{i}][0]"),
                              _number(a[1], f"{where}.atoms[{i}][1]")))
            return DiscreteDist.from_atoms(pairs)
        if "lattice" in obj:
            _exact_keys(obj, where, {"lattice"})
            lat = _exact_keys(obj["lattice"], f"{where}.lattice", {"offset", "step", "weights"})
            w = lat["weights"]
            if not isinstance(w, list) or not w:
                raise SpecError(f"{where}.lattice.weights: expected a nonempty list")
            weights = [_number(x, f"{where}.lattice.weights[{i}]") for i, x in enumerate(w)]
            return LatticeDist.trimmed(_number(lat["offset"], f"{where}.lattice.offset"),
                                       _number(lat["step"], f"{where}.lattice.step"),
                                       np.array(weights))
        if "family" in obj:
            _exact_keys(obj, where, {"family"}, {"params"})
            return make_family(obj["family"], obj.get("params", {}), where)
    except SpecError:
        raise
    except ConcBoundError as exc:
        raise SpecError(f"{where}: {exc}") from exc
    raise SpecError(f"{where}: expected one of 'atoms', 'lattice', 'family'; got keys {sorted(obj)}")


def make_family(name: Any, params: Any, where: str = "family") -> DiscreteDist:
    if name not in FAMILIES:
        raise SpecError(f"{where}.family: unknown family {name!r}; known: {sorted(FAMILIES)}")
    fn = FAMILIES[name]
    if not isinstance(params, dict):
        raise SpecError(f"{where}.params: expected an object")
    allowed = set(inspect.signature(fn).parameters)
    unknown = set(params) - allowed
    if unknown:
        raise SpecError(f"{where}.params: unknown parameter(s) {sorted(unknown)} for {name}")
    kwargs = {k: _number(v, f"{where}.params.{k}") for k, v in params.items()}
    for k in ("n", "m"):
        if k in kwargs:
            if kwargs[k] != int(kwargs[k]):
                raise SpecError(f"{where}.params.{k}: expected an integer")
            kwargs[k] = int(kwargs[k])
    try:
        return fn(**kwargs)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"{where}: {exc}") from exc


def parse_mixture(obj: Any, where: str = "mixture") -> MixtureSpec:
    body = _exact_keys(obj, where, {"mixture"})["mixture"]
    body = _exact_keys(body, f"{where}.mixture", {"p", "U", "V"})
    U = parse_dist(body["U"], f"{where}.mixture.U").to_discrete()
    V = parse_dist(body["V"], f"{where}.mixture.V").to_discrete()
    try:
        return MixtureSpec(_number(body["p"], f"{where}.mixture.p"), U, V)
    except SpecError:
        raise
    except ConcBoundError as exc:
        raise SpecError(f"{where}.mixture: {exc}") from exc


def parse_entry(obj: Any, where: str) -> Measure | MixtureSpec:
    if isinstance(obj, dict) and "mixture" in obj:
        return parse_mixture(obj, where)
    return parse_dist(obj, where)


_FAMILY_CALL = re.compile(r"^\s*([A-Za-z_]\w*)\s*(?:\((.*)\))?\s*$")


def parse_family_expr(text: str) -> DiscreteDist:
    """``"two_point(1)"``, ``"fair_coin"``, ``"zero_mean_three_point(p=0.5, a=2)"``."""
    m = _FAMILY_CALL.match(text)
    if not m or m.group(1) not in FAMILIES:
        raise SpecError(f"unknown distribution {text!r}")
    name, argtext = m.group(1), (m.group(2) or "").strip()
    names = list(inspect.signature(FAMILIES[name]).parameters)
    params: dict[str, float] = {}
    if argtext:
        for i, tok in enumerate(t.strip() for t in argtext.split(",")):
            key, sep, val = tok.partition("=")
            if sep:
                key = key.strip()
            else:
                if i >= len(names):
                    raise SpecError(f"too many arguments in {text!r}")
                key, val = names[i], tok
            try:
                params[key] = float(val)
            except ValueError:
                raise SpecError(f"argument {tok!r} in {text!r} is not a number") from None
    return make_family(name, params, where=name)


def dist_to_spec(F: Measure) -> dict:
    if isinstance(F, LatticeDist):
        return {"lattice": {"offset": F.offset, "step": F.step, "weights": F.weights.tolist()}}
    return {"atoms": [[x, m] for x, m in F.atoms]}


def mixture_to_spec(spec: MixtureSpec) -> dict:
    return {"mixture": {"p": spec.p, "U": dist_to_spec(spec.U), "V": dist_to_spec(spec.V)}}


@dataclass
class ScenarioFile:
    """Named distributions plus an optional list of runs."""

    distributions: dict[str, Measure | MixtureSpec]
    runs: list[dict] = field(default_factory=list)

    def get(self, name: str) -> Measure | MixtureSpec:
        if name not in self.distributions:
            raise SpecError(f"distribution {name!r} not found; available: {sorted(self.distributions)}")
        return self.distributions[name]


def parse_scenario(obj: Any) -> ScenarioFile:
    body = _exact_keys(obj, "spec", {"distributions"}, {"runs"})
    dists = body["distributions"]
    if not isinstance(dists, dict):
        raise SpecError("spec.distributions: expected an object mapping names to distributions")
    parsed = {name: parse_entry(v, f"distributions.{name}") for name, v in dists.items()}
    runs = body.get("runs", [])
    if not isinstance(runs, list):
        raise SpecError("spec.runs: expected a list")
    for i, run in enumerate(runs):
        _exact_keys(run, f"runs[{i}]", {"command", "params"}, {"out"})
        if not isinstance(run["params"], dict):
            raise SpecError(f"runs[{i}].params: expected an object")
        for key in ("dist", "h", "g"):
            ref = run["params"].get(key)
            if ref is None or ref in parsed:
                continue
            try:
                parse_family_expr(str(ref))
            except SpecError:
                raise SpecError(f"runs[{i}].params.{key}: distribution {ref!r} not found") from None
    return ScenarioFile(parsed, runs)


def load_scenario(path: str | Path) -> ScenarioFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecError(f"cannot read spec file {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc})") from exc
    return parse_scenario(obj)
