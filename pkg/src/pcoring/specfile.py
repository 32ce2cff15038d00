"""Flat ``key = value`` experiment specs.

Example::

    name = fig2-top
    n = 8
    direction = bi
    coupling = 0.8377
    init = worst-case:bi-ubar
    refractory = 1:pi          # 1-based node label : dead-zone length
    record_every = 0.05

Angles accept plain floats or multiples of pi (``pi``, ``2pi``, ``3pi/2``,
``pi/4``). Unknown keys are rejected.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from .analysis import WorstCase, worst_case_state
from .engine import CascadeOrder, SimulationConfig, Verdict
from .exceptions import DomainError
from .model import CycleTopology, Direction, PhaseState, PrcSpec, TiePolicy
from .rng import SplitMix64
from .sampling import random_semicircle_state, random_state


class SpecError(ValueError):
    """The experiment description cannot be parsed or is inconsistent."""


KNOWN_KEYS = {
    "name", "kind", "n", "direction", "coupling", "l", "w", "init", "phases",
    "refractory", "tie", "eps", "horizon_rounds", "max_time", "record_every",
    "cascade_order", "seed", "expected", "n_min", "n_max",
}

_ANGLE = re.compile(
    r"^\s*(?P<sign>-)?\s*(?P<k>\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*pi\s*(?:/\s*(?P<d>\d+(?:\.\d*)?))?\s*$",
    re.IGNORECASE)


def parse_angle(text: str) -> float:
    """``"3pi/2"`` -> 4.712..., ``"1.25"`` -> 1.25."""
    s = str(text).strip()
    m = _ANGLE.match(s)
    if m:
        k = float(m.group("k")) if m.group("k") else 1.0
        d = float(m.group("d")) if m.group("d") else 1.0
        v = k * math.pi / d
        return -v if m.group("sign") else v
    try:
        return float(s)
    except ValueError:
        raise SpecError(f"cannot parse angle {text!r}") from None


def parse_refractory(items, n: int) -> dict:
    """``["1:pi", "3:0.5"]`` (1-based labels) -> ``{0: pi, 2: 0.5}``."""
    out = {}
    for item in items:
        for part in str(item).split(","):
            part = part.strip()
            if not part:
                continue
            node, sep, length = part.partition(":")
            if not sep:
                raise SpecError(f"refractory entry {part!r} must be node:length")
            try:
                k = int(node)
            except ValueError:
                raise SpecError(f"bad refractory node {node!r}") from None
            if not 1 <= k <= n:
                raise SpecError(f"refractory node {k} outside 1..{n}")
            out[k - 1] = parse_angle(length)
    return out


def parse_verdict(text: str) -> Verdict:
    key = text.strip().lower()
    aliases = {"sync": Verdict.SYNCHRONIZED, "synchronized": Verdict.SYNCHRONIZED,
               "clustered": Verdict.CLUSTERED, "clustered-equilibrium": Verdict.CLUSTERED,
               "horizon": Verdict.HORIZON, "horizon-exhausted": Verdict.HORIZON}
    try:
        return aliases[key]
    except KeyError:
        raise SpecError(f"unknown verdict {text!r}") from None


def parse_pairs(text: str) -> dict:
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise SpecError(f"line {lineno}: expected key = value")
        key = key.strip().lower().replace("-", "_")
        if key not in KNOWN_KEYS:
            raise SpecError(f"line {lineno}: unknown key {key!r}")
        if key in pairs:
            raise SpecError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = value.strip()
    return pairs


@dataclass
class ExperimentSpec:
    name: str
    kind: str = "simulate"
    config: Optional[SimulationConfig] = None
    expected: Optional[Verdict] = None
    seed: int = 0
    init: str = ""
    n_range: tuple = (4, 250)
    text: str = ""
    pairs: dict = field(default_factory=dict)


def build_initial(init: str, n: int, l: float, seed: int) -> PhaseState:
    """Initial phases from an ``init`` directive."""
    init = init.strip()
    head, _, arg = init.partition(":")
    head = head.strip().lower()
    if head == "worst-case":
        try:
            which = WorstCase(arg.strip().lower())
        except ValueError:
            raise SpecError(f"unknown worst-case set {arg!r}; "
                            f"expected one of {', '.join(w.value for w in WorstCase)}") from None
        return worst_case_state(n, l, which)
    if head == "phases":
        values = [parse_angle(v) for v in arg.split(",") if v.strip()]
        if len(values) != n:
            raise SpecError(f"{len(values)} phases given for n={n}")
        return PhaseState(values)
    if head == "random":
        return random_state(SplitMix64(seed), n)
    if head == "random-semicircle":
        return random_semicircle_state(SplitMix64(seed), n)
    raise SpecError(f"unknown init directive {init!r}")


def spec_from_pairs(pairs: dict, text: str = "", overrides: Optional[dict] = None) -> ExperimentSpec:
    p = dict(pairs)
    p.update({k: v for k, v in (overrides or {}).items() if v is not None})
    name = str(p.get("name", "run"))
    kind = str(p.get("kind", "simulate")).strip().lower()
    try:
        seed = int(p.get("seed", 0))
        if kind == "critical-sweep":
            lo, hi = int(p.get("n_min", 4)), int(p.get("n_max", 250))
            return ExperimentSpec(name, kind, seed=seed, n_range=(lo, hi), text=text, pairs=p)
        if kind != "simulate":
            raise SpecError(f"unknown kind {kind!r}")
        for required in ("n", "direction"):
            if required not in p:
                raise SpecError(f"missing required key {required!r}")
        n = int(p["n"])
        l = float(p.get("coupling", p.get("l", 1.0)))
        direction = Direction.parse(p["direction"])
        topo = CycleTopology(n, direction, l)
        refr = p.get("refractory", "")
        if isinstance(refr, (list, tuple)):
            lengths = parse_refractory(refr, n)
        else:
            lengths = parse_refractory([refr], n) if refr else {}
        prc = PrcSpec.with_refractory(n, lengths, TiePolicy.parse(p.get("tie", "advance")))
        init = str(p.get("init", "random"))
        if "phases" in p:
            init = "phases:" + str(p["phases"])
        initial = build_initial(init, n, l, seed)
        horizon = p.get("horizon_rounds")
        max_time = p.get("max_time")
        record_every = p.get("record_every")
        cfg = SimulationConfig(
            topology=topo,
            initial=initial,
            prc=prc,
            w=parse_angle(p.get("w", "2pi")),
            horizon_rounds=float(horizon) if horizon is not None else
            (None if max_time is not None else 500),
            max_time=float(max_time) if max_time is not None else None,
            sync_tol=float(p.get("eps", 1e-6)),
            record_every=float(record_every) if record_every not in (None, "", "0") else None,
            cascade_order=CascadeOrder(str(p.get("cascade_order", "ascending")).lower()),
            seed=seed,
        )
        expected = parse_verdict(p["expected"]) if "expected" in p else None
    except SpecError:
        raise
    except (DomainError, ValueError) as exc:
        raise SpecError(str(exc)) from exc
    return ExperimentSpec(name, kind, cfg, expected, seed, init, text=text, pairs=p)


def parse_spec(text: str, overrides: Optional[dict] = None) -> ExperimentSpec:
    return spec_from_pairs(parse_pairs(text), text, overrides)


def bundled_names() -> list:
    root = resources.files("pcoring") / "specs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".spec"))


def read_spec_text(ref: str) -> str:
    """Spec text from a file path or the name of a bundled spec."""
    path = Path(ref)
    if path.is_file():
        return path.read_text()
    res = resources.files("pcoring") / "specs" / f"{ref}.spec"
    if res.is_file():
        return res.read_text()
    raise SpecError(f"no spec file or bundled spec named {ref!r} "
                    f"(bundled: {', '.join(bundled_names())})")


def load_spec(ref: str, overrides: Optional[dict] = None) -> ExperimentSpec:
    return parse_spec(read_spec_text(ref), overrides)
