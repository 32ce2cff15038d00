"""Randomized property suites behind ``pcoring verify``.

Each suite returns a list of :class:`PropertyResult`; a suite passes when
every property does. The suites are deterministic given the seed.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .analysis import (
    StateTag,
    WorstCase,
    classify,
    decreasing_nodes,
    distance_vector,
    equilibrium_gamma,
    lemma2a_witness,
    rotate_to_fire,
    transition_matrix,
    worst_case_state,
)
from .engine import SimulationConfig, Verdict, resolve_cascade, run
from .exceptions import EngineInvariantError
from .model import (
    TWO_PI,
    CycleTopology,
    DeltaCase,
    Direction,
    PhaseState,
    PrcSpec,
    apply_jump,
    critical_coupling,
    solve_delta,
)
from .rng import SplitMix64
from .sampling import (
    random_grid_state,
    random_semicircle_state,
    random_state,
    random_u_state,
    random_u_state_linear,
    unit_coupling,
)

SUITES = ("proposition1", "lemma1", "lemma2", "matrices", "thresholds")


@dataclass
class PropertyResult:
    suite: str
    name: str
    passed: bool
    trials: int
    detail: str = ""
    seconds: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)


def _directions(rng: SplitMix64) -> Direction:
    return Direction.UNI if rng.random() < 0.5 else Direction.BI


def check_trajectory(outcome) -> list:
    """Structural violations found in a recorded run (empty when clean)."""
    problems = []
    n = outcome.config.topology.n
    bound = TWO_PI / outcome.config.w
    samples = outcome.trajectory.samples
    prev = None
    jumps_here = 0
    last_jump_t = None
    for s in samples:
        x = s.phases
        if min(x) < 0.0 or max(x) > TWO_PI:
            problems.append(f"phase outside [0, 2pi] at t={s.t}")
        if prev is not None:
            if (s.t, s.j) < (prev.t, prev.j):
                problems.append(f"hybrid time went backwards at t={s.t}")
            if s.j != prev.j and s.t != prev.t:
                problems.append(f"flow and jump mixed at t={s.t}")
        if s.fired_mask:
            if s.j != (prev.j + 1 if prev else 1):
                problems.append(f"jump counter skipped at t={s.t}")
            if last_jump_t is not None and s.t == last_jump_t:
                jumps_here += 1
            else:
                if last_jump_t is not None and s.t - last_jump_t > bound * (1 + 1e-12):
                    problems.append(f"{s.t - last_jump_t} time units without a firing")
                jumps_here = 1
            if jumps_here > n:
                problems.append(f"{jumps_here} jumps at t={s.t}")
            last_jump_t = s.t
        prev = s
    return problems


def proposition1(seed: int = 0, trials: int = 10_000, rounds: float = 3.0) -> list:
    """Completeness, at most N jumps per instant, at most 2*pi/w between firings,
    phases confined to [0, 2*pi], over random rings and initial conditions."""
    rng = SplitMix64(seed)
    t0 = time.perf_counter()
    violations = []
    max_cascade_seen = 0
    for trial in range(trials):
        n = rng.integers(4, 17)
        d = _directions(rng)
        l = 1.0 if rng.random() < 0.2 else unit_coupling(rng)
        state = random_grid_state(rng, n) if rng.random() < 0.3 else random_state(rng, n)
        cfg = SimulationConfig(CycleTopology(n, d, l), state, horizon_rounds=rounds,
                               w=TWO_PI)
        try:
            out = run(cfg)
        except EngineInvariantError as exc:
            violations.append(f"trial {trial}: {exc}")
            continue
        max_cascade_seen = max(max_cascade_seen, out.max_cascade)
        if out.jumps == 0 and out.verdict is not Verdict.SYNCHRONIZED:
            violations.append(f"trial {trial}: no jumps before the horizon")
        for p in check_trajectory(out):
            violations.append(f"trial {trial}: {p}")
    dt = time.perf_counter() - t0
    detail = (f"{len(violations)} violations; largest cascade {max_cascade_seen}"
              + (f"; first: {violations[0]}" if violations else ""))
    return [PropertyResult("proposition1", "jump-bounds-and-completeness",
                           not violations, trials, detail, dt)]


def lemma1(seed: int = 7, trials: int = 200, refractory_prob: float = 0.75) -> list:
    """Every initial condition with phase spread below pi synchronizes,
    for any coupling in (0, 1] and at most one refractory node with r <= pi."""
    rng = SplitMix64(seed)
    t0 = time.perf_counter()
    failures = []
    for trial in range(trials):
        n = rng.integers(4, 11)
        d = _directions(rng)
        l = unit_coupling(rng)
        state = random_semicircle_state(rng, n)
        lengths = {}
        if rng.random() < refractory_prob:
            lengths[rng.integers(0, n)] = math.pi * rng.random()
        cfg = SimulationConfig(
            CycleTopology(n, d, l), state, PrcSpec.with_refractory(n, lengths),
            horizon_rounds=500 + 5000.0 / l, record=False)
        out = run(cfg)
        if out.verdict is not Verdict.SYNCHRONIZED:
            failures.append(f"trial {trial}: n={n} {d.value} l={l:.6g} -> {out.verdict.value}")
    dt = time.perf_counter() - t0
    detail = f"{trials - len(failures)}/{trials} synchronized" + (
        f"; first failure: {failures[0]}" if failures else "")
    return [PropertyResult("lemma1", "semicircle-synchronizes", not failures, trials, detail, dt)]


def lemma2(seed: int = 0, trials: int = 2000) -> list:
    """Classifier exhaustiveness and the four claims about cycle length."""
    rng = SplitMix64(seed)
    results = []

    t0 = time.perf_counter()
    bad = 0
    for _ in range(trials):
        n = rng.integers(4, 17)
        x = random_state(rng, n)
        c = classify(x)
        length = distance_vector(x).length
        expect_band = ("below" if length < TWO_PI - 1e-9
                       else "above" if length > TWO_PI + 1e-9 else "equal")
        band = {StateTag.LENGTH_BELOW_2PI: "below", StateTag.LENGTH_ABOVE_2PI: "above"}.get(
            c.tag, "equal")
        if band != expect_band:
            bad += 1
    results.append(PropertyResult("lemma2", "classify-exhaustive", bad == 0, trials,
                                  f"{bad} inconsistent tags", time.perf_counter() - t0))

    t0 = time.perf_counter()
    bad, seen = 0, 0
    for _ in range(trials):
        n = rng.integers(4, 17)
        x = random_semicircle_state(rng, n) if rng.random() < 0.3 else random_state(rng, n)
        if distance_vector(x).length < TWO_PI - 1e-9:
            seen += 1
            if lemma2a_witness(x) is None:
                bad += 1
    results.append(PropertyResult("lemma2", "short-cycle-witness", bad == 0, seen,
                                  f"{bad} short cycles without witness",
                                  time.perf_counter() - t0))

    t0 = time.perf_counter()
    bad, seen, without = 0, 0, 0
    for _ in range(trials):
        n = rng.integers(4, 17)
        x = random_state(rng, n)
        v0 = distance_vector(x).length
        if v0 <= TWO_PI + 1e-9:
            continue
        seen += 1
        nodes = decreasing_nodes(x)
        if not nodes:
            without += 1
            continue
        d = _directions(rng)
        l = unit_coupling(rng)
        y = PhaseState(rotate_to_fire(x, nodes[0]))
        after = resolve_cascade(y, CycleTopology(n, d, l))
        if not distance_vector(after).length < v0:
            bad += 1
    # A qualifying node is not guaranteed for every rotation-free snapshot;
    # the count is reported, the decrease is what is checked.
    results.append(PropertyResult("lemma2", "long-cycle-shrinks", bad == 0, seen - without,
                                  f"{bad} qualifying firings did not shorten the cycle; "
                                  f"{without}/{seen} long cycles had no qualifying node",
                                  time.perf_counter() - t0))

    t0 = time.perf_counter()
    bad = 0
    for k in range(trials):
        n = rng.integers(4, 17)
        state, _ = random_u_state(rng, n, "u1" if k % 2 == 0 else "u2")
        c = classify(state)
        x = state.phases
        i_max, i_min = int(np.argmax(x)), int(np.argmin(x))
        gaps = [abs(x[i] - x[(i + 1) % n]) for i in range(n) if i not in (i_max, i_min)]
        if (c.tag not in (StateTag.IN_U1, StateTag.IN_U2)
                or abs(x[i_max] - x[i_min]) < math.pi - 1e-12
                or max(gaps) > math.pi + 1e-12):
            bad += 1
    results.append(PropertyResult("lemma2", "ordered-set-gaps", bad == 0, trials,
                                  f"{bad} ordered states violating the gap claims",
                                  time.perf_counter() - t0))
    return results


def matrices(seed: int = 0, trials: int = 1000) -> list:
    """Column stochasticity, length preservation, and agreement of the
    linear gap update with the actual jump map on ordered states."""
    rng = SplitMix64(seed)
    results = []

    t0 = time.perf_counter()
    worst = 0.0
    count = 0
    for n in range(4, 17):
        for d in Direction:
            for l in (1e-3, 0.25, 0.5, 0.8377, 0.99, 1.0, unit_coupling(rng)):
                for i in range(n):
                    c = transition_matrix(i, n, l, d).entries
                    worst = max(worst, float(np.max(np.abs(c.sum(axis=0) - 1.0))))
                    if c.min() < 0:
                        worst = max(worst, 1.0)
                    count += 1
    results.append(PropertyResult("matrices", "column-stochastic", worst <= 1e-14, count,
                                  f"max |column sum - 1| = {worst:.3g}",
                                  time.perf_counter() - t0))

    t0 = time.perf_counter()
    worst = 0.0
    for k in range(trials):
        n = rng.integers(4, 17)
        d = Direction.BI if k % 2 else Direction.UNI
        l = unit_coupling(rng)
        ordering = "u1" if (k // 2) % 2 == 0 else "u2"
        state, i = random_u_state_linear(rng, n, l, d, ordering)
        v = distance_vector(state).components
        after = distance_vector(apply_jump(state, i, CycleTopology(n, d, l))).components
        predicted = transition_matrix(i, n, l, d).apply(v)
        worst = max(worst, float(np.max(np.abs(after - predicted))))
    results.append(PropertyResult("matrices", "oracle-equivalence", worst <= 1e-12, trials,
                                  f"max |V+ - C V| = {worst:.3g}", time.perf_counter() - t0))
    return results


def _sorted_pattern(n: int, l: float, direction: Direction) -> np.ndarray:
    if direction is Direction.BI:
        d = solve_delta(n, l, DeltaCase.BI_WORST)
        pattern = [d] * (n - 2) + [(1 - l) * d, d / (1 - l)]
    else:
        d = solve_delta(n, l, DeltaCase.UNI_WORST_U1)
        pattern = [d] * (n - 1) + [d / (1 - l)]
    return np.sort(pattern)


def gamma_grid(ns=(4, 8, 16), offsets=(-0.1, -0.01, 0.01, 0.1)) -> list:
    """(n, direction, l, max |sorted gamma - pattern|, max gamma, l*) rows."""
    rows = []
    for n in ns:
        for d in Direction:
            ls = critical_coupling(n, d)
            for off in offsets:
                l = ls + off
                if not 0.0 < l < 1.0:
                    continue
                g = equilibrium_gamma(n, l, d)
                err = float(np.max(np.abs(np.sort(g) - _sorted_pattern(n, l, d))))
                rows.append((n, d, l, err, float(g.max()), ls))
    return rows


def locate_threshold(n: int, direction, tol: float = 1e-5) -> tuple:
    """Bisect the coupling on the worst-case initial condition until the
    clustered/synchronized boundary is bracketed within ``tol``."""
    direction = Direction.parse(direction)
    ls = critical_coupling(n, direction)

    def synchronizes(l: float) -> bool:
        if direction is Direction.BI:
            state = worst_case_state(n, l, WorstCase.BI_UBAR)
            prc = PrcSpec()
        else:
            state = worst_case_state(n, l, WorstCase.UNI_U1_STAR)
            prc = PrcSpec.with_refractory(n, {0: math.pi})
        out = run(SimulationConfig(CycleTopology(n, direction, l), state, prc, record=False))
        return out.verdict is Verdict.SYNCHRONIZED

    lo, hi = max(ls - 0.05, 1e-3), min(ls + 0.05, 1.0 - 1e-6)
    if synchronizes(lo) or not synchronizes(hi):
        raise RuntimeError(f"threshold not bracketed by [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if synchronizes(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


def thresholds(seed: int = 0, n: Optional[int] = None) -> list:
    """Equilibrium structure of the round map and the sync threshold."""
    results = []
    t0 = time.perf_counter()
    rows = gamma_grid()
    worst = max(r[3] for r in rows)
    results.append(PropertyResult("thresholds", "gamma-delta-pattern", worst <= 1e-9, len(rows),
                                  f"max |sorted gamma - pattern| = {worst:.3g}",
                                  time.perf_counter() - t0))
    mismatches = [r for r in rows if (r[4] > 0.5) != (r[2] > r[5])]
    results.append(PropertyResult("thresholds", "max-gamma-above-half-iff-supercritical",
                                  not mismatches, len(rows),
                                  f"{len(mismatches)} grid points disagree", 0.0))

    sizes = (n,) if n else (8,)
    for size in sizes:
        for d in Direction:
            t0 = time.perf_counter()
            lo, hi = locate_threshold(size, d)
            ls = critical_coupling(size, d)
            ok = lo <= ls <= hi
            if size == 8 and d is Direction.BI:
                ok = ok and 0.8377 <= lo and hi <= 0.8378
            results.append(PropertyResult(
                "thresholds", f"bisection-n{size}-{d.value}", ok, 1,
                f"boundary in [{lo:.7f}, {hi:.7f}], l* = {ls:.7f}",
                time.perf_counter() - t0))
    return results


def run_suite(name: str, seed: Optional[int] = None, trials: Optional[int] = None,
              n: Optional[int] = None) -> list:
    table: dict = {
        "proposition1": proposition1,
        "lemma1": lemma1,
        "lemma2": lemma2,
        "matrices": matrices,
    }
    if name == "thresholds":
        return thresholds(seed or 0, n)
    if name not in table:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    kwargs = {}
    if seed is not None:
        kwargs["seed"] = seed
    if trials is not None:
        kwargs["trials"] = trials
    fn: Callable = table[name]
    return fn(**kwargs)
