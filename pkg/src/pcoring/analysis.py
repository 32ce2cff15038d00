"""Synchronization analysis on the ring: distance vectors, state
classification, per-firing transition matrices of the gap vector and the
worst-case (clustered) initial conditions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .exceptions import ConvergenceError, DomainError
from .model import (
    TWO_PI,
    DeltaCase,
    Direction,
    PhaseState,
    _check_n,
    critical_coupling,
    solve_delta,
)

LENGTH_TOL = 1e-9
ORDER_TOL = 1e-12
GAMMA_TOL = 1e-12
GAMMA_MAX_ROUNDS = 10**6


def _phases(state) -> np.ndarray:
    if isinstance(state, PhaseState):
        return state.phases
    return np.asarray(state, dtype=float)


@dataclass(frozen=True)
class DistanceVector:
    """Shortest arc between each node and its successor on the ring.

    ``components[i]`` measures the gap between nodes ``i`` and ``i+1``
    (the last entry wraps to node 0).
    """

    components: np.ndarray

    @property
    def length(self) -> float:
        return float(self.components.sum())

    @property
    def max(self) -> float:
        return float(self.components.max())

    def __len__(self):
        return self.components.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.components, dtype=dtype)


def distance_vector(state) -> DistanceVector:
    x = _phases(state)
    d = np.abs(x - np.roll(x, -1))
    v = np.minimum(d, TWO_PI - d)
    v.flags.writeable = False
    return DistanceVector(v)


class SyncCheck(NamedTuple):
    synchronized: bool
    max_gap: float


def is_synchronized(state, eps: float = 1e-6) -> SyncCheck:
    """Whether every adjacent gap is below ``eps`` (0 and 2*pi coincide)."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    gap = distance_vector(state).max
    return SyncCheck(gap < eps, gap)


class StateTag(str, Enum):
    LENGTH_BELOW_2PI = "length-below-2pi"
    LENGTH_ABOVE_2PI = "length-above-2pi"
    AT_2PI_OUTSIDE_U = "at-2pi-outside-u"
    IN_U1 = "in-u1"
    IN_U2 = "in-u2"


@dataclass(frozen=True)
class StateClass:
    tag: StateTag
    length: float
    evidence: dict = field(default_factory=dict)


def _extremes(x: np.ndarray):
    return int(np.argmax(x)), int(np.argmin(x))


def _monotone(x: np.ndarray, descending: bool) -> bool:
    """Cyclic monotone ordering allowing a single break at the extreme node.

    Descending (``x_i >= x_{i+1}`` except where node i is a minimiser)
    characterises the first obstruction set; ascending with the break at a
    maximiser characterises the second.
    """
    nxt = np.roll(x, -1)
    if descending:
        breaks = np.flatnonzero(x < nxt - ORDER_TOL)
        return all(x[b] <= x.min() + ORDER_TOL for b in breaks) and breaks.size <= 1
    breaks = np.flatnonzero(x > nxt + ORDER_TOL)
    return all(x[b] >= x.max() - ORDER_TOL for b in breaks) and breaks.size <= 1


def lemma2a_witness(state) -> Optional[dict]:
    """Evidence that a short cycle (length < 2*pi) is a semicircle up to rotation.

    Returns either an index ``i`` whose successor lies more than pi away
    (the pair joining the maximiser and the minimiser is not eligible), or
    the phase spread when it is below pi. ``None`` means no witness exists.
    """
    x = _phases(state)
    n = x.size
    i_max, i_min = _extremes(x)
    for i in range(n):
        if {i, (i + 1) % n} == {i_max, i_min}:
            continue
        if abs(x[i] - x[(i + 1) % n]) > math.pi:
            return {"gap_index": i}
    spread = float(x[i_max] - x[i_min])
    if spread < math.pi:
        return {"spread": spread}
    return None


def _decrease_condition(a: float, b: float) -> bool:
    return (0.0 <= b < a and a <= math.pi) or (a < b <= TWO_PI and a >= math.pi) \
        or abs(b - a) > math.pi


def rotate_to_fire(state, node: int) -> np.ndarray:
    """Rigidly rotate all phases so that ``node`` sits exactly at 2*pi."""
    x = _phases(state)
    y = np.mod(x - x[node], TWO_PI)
    y[node] = TWO_PI
    return y


def decreasing_nodes(state) -> list:
    """Nodes ``i`` for which, once rotated to 2*pi, the two successors
    ``x_{i+1}, x_{i+2}`` satisfy one of the cycle-shortening configurations.
    """
    x = _phases(state)
    n = x.size
    out = []
    for i in range(n):
        y = rotate_to_fire(x, i)
        if _decrease_condition(y[(i + 1) % n], y[(i + 2) % n]):
            out.append(i)
    return out


def classify(state, tol: float = LENGTH_TOL) -> StateClass:
    """Place a state in exactly one of the five classes used by the
    synchronization argument (cycle shorter than, longer than, or equal to
    2*pi; and within the equal case, membership of the two ordered sets).
    """
    x = _phases(state)
    length = distance_vector(x).length
    if length < TWO_PI - tol:
        return StateClass(StateTag.LENGTH_BELOW_2PI, length, lemma2a_witness(x) or {})
    if length > TWO_PI + tol:
        nodes = decreasing_nodes(x)
        return StateClass(StateTag.LENGTH_ABOVE_2PI, length,
                          {"node": nodes[0]} if nodes else {})
    i_max, i_min = _extremes(x)
    info = {"i_max": i_max, "i_min": i_min,
            "extreme_gap": float(abs(x[i_max] - x[i_min]))}
    if _monotone(x, descending=True):
        return StateClass(StateTag.IN_U1, length, info)
    if _monotone(x, descending=False):
        return StateClass(StateTag.IN_U2, length, info)
    nodes = decreasing_nodes(x)
    return StateClass(StateTag.AT_2PI_OUTSIDE_U, length, {"node": nodes[0]} if nodes else {})


@dataclass(frozen=True)
class TransitionMatrix:
    """Linear map of the gap vector when ``firing_node`` fires inside the
    ordered obstruction set."""

    entries: np.ndarray
    firing_node: int
    direction: Direction

    def apply(self, v) -> np.ndarray:
        return self.entries @ np.asarray(v, dtype=float)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def transition_matrix(firing_node: int, n: int, l: float, direction) -> TransitionMatrix:
    """Column-stochastic update of the gap vector for one firing.

    Gap ``i`` (between the firing node and its successor) shrinks by the
    factor ``1-l`` and the mass ``l*V_i`` moves to gap ``i+1``. On the
    bidirectional ring the same happens on the predecessor side: gap
    ``i-1`` shrinks and gap ``i-2`` grows.
    """
    n = _check_n(n)
    direction = Direction.parse(direction)
    if not (0.0 < l <= 1.0):
        raise DomainError(f"coupling must lie in (0, 1], got {l!r}")
    if not 0 <= firing_node < n:
        raise DomainError(f"firing node {firing_node} out of range for n={n}")
    i = firing_node
    c = np.eye(n)
    c[i, i] = 1.0 - l
    c[(i + 1) % n, i] = l
    if direction is Direction.BI:
        c[(i - 1) % n, (i - 1) % n] = 1.0 - l
        c[(i - 2) % n, (i - 1) % n] = l
    c.flags.writeable = False
    return TransitionMatrix(c, i, direction)


def round_product(n: int, l: float, direction, firing_order: Optional[Sequence[int]] = None) -> np.ndarray:
    """Product of the transition matrices over one firing round (first firing applied first)."""
    order = list(range(n)) if firing_order is None else list(firing_order)
    p = np.eye(n)
    for i in order:
        p = transition_matrix(i, n, l, direction).entries @ p
    return p


def equilibrium_gamma(n: int, l: float, direction,
                      firing_order: Optional[Sequence[int]] = None,
                      max_rounds: int = GAMMA_MAX_ROUNDS) -> np.ndarray:
    """Limit direction of the gap vector under repeated firing rounds.

    Powers of the round product converge to ``gamma @ 1.T``; the returned
    ``gamma`` is the gap vector (normalised to unit length) seen just
    before ``firing_order[0]`` fires.
    """
    n = _check_n(n)
    if not (0.0 < l < 1.0):
        raise DomainError(f"coupling must lie in (0, 1), got {l!r}")
    order = list(range(n)) if firing_order is None else list(firing_order)
    if sorted(order) != list(range(n)):
        raise DomainError("firing order must be a permutation of the nodes")
    p = round_product(n, l, direction, order)
    m = p.copy()
    for _ in range(max_rounds):
        if float(np.max(m.max(axis=1) - m.min(axis=1))) <= GAMMA_TOL:
            break
        m = p @ m
    else:
        raise ConvergenceError(
            f"round products did not converge within {max_rounds} rounds (n={n}, l={l})")
    gamma = m[:, 0].copy()
    if abs(gamma.sum() - 1.0) > GAMMA_TOL:
        raise ConvergenceError(f"gamma sums to {gamma.sum()!r}, expected 1")
    return gamma


class WorstCase(str, Enum):
    BI_UBAR = "bi-ubar"
    UNI_U1_STAR = "uni-u1star"
    UNI_U2_UNIFORM = "uni-u2-uniform"


def worst_case_gaps(n: int, l: float, which) -> np.ndarray:
    """Unit-length gap pattern of the worst-case set, in firing order.

    Entry ``k`` is the gap between nodes ``k`` and ``k+1``; node 0 is the
    next to fire. These are fixed points of the round map up to rotation.
    """
    n = _check_n(n)
    which = WorstCase(which)
    if which is WorstCase.UNI_U2_UNIFORM:
        return np.full(n, 1.0 / n)
    if which is WorstCase.BI_UBAR:
        d = solve_delta(n, l, DeltaCase.BI_WORST)
        g = np.full(n, d)
        g[0] = d / (1.0 - l)
        g[n - 2] = (1.0 - l) * d
        return g
    d = solve_delta(n, l, DeltaCase.UNI_WORST_U1)
    g = np.full(n, d)
    g[0] = d / (1.0 - l)
    return g


def worst_case_state(n: int, l: float, which) -> PhaseState:
    """Initial phases realising a worst-case gap pattern.

    Node 0 is anchored at 2*pi (about to fire). The clustered sets are laid
    out in descending phase order; the uniform configuration is laid out in
    ascending order with node ``n-1`` at 2*pi.
    """
    which = WorstCase(which)
    gaps = worst_case_gaps(n, l, which)
    if which is WorstCase.UNI_U2_UNIFORM:
        x = TWO_PI * np.arange(1, n + 1) / n
        x[-1] = TWO_PI
        return PhaseState(x)
    x = np.empty(n)
    x[0] = TWO_PI
    x[1:] = TWO_PI - TWO_PI * np.cumsum(gaps[:-1])
    return PhaseState(np.clip(x, 0.0, TWO_PI))


def gamma_report(n: int, l: float, direction,
                 firing_order: Optional[Sequence[int]] = None, tol: float = 1e-9) -> str:
    """Sorted gamma entries, each labelled with its delta-pattern role."""
    direction = Direction.parse(direction)
    order = list(range(n)) if firing_order is None else list(firing_order)
    gamma = equilibrium_gamma(n, l, direction, order)
    if direction is Direction.BI:
        case = DeltaCase.BI_WORST
    elif order == sorted(order):
        case = DeltaCase.UNI_WORST_U1
    else:
        case = DeltaCase.UNI_U2_NO_REFRACTORY
    d = solve_delta(n, l, case)
    labels = {"delta": d, "(1-l)*delta": (1 - l) * d, "delta/(1-l)": d / (1 - l)}
    lines = [f"n={n} l={l!r} direction={direction.value} case={case.value} delta={d:.12g}",
             f"l*={critical_coupling(n, direction):.12g} max(gamma)={gamma.max():.12g}"]
    for g in sorted(gamma):
        role = next((k for k, v in labels.items() if abs(g - v) <= tol), "other")
        lines.append(f"{g:.15f}  {role}")
    return "\n".join(lines)


def critical_sweep(n_min: int = 4, n_max: int = 250) -> list:
    """Rows ``(n, direction, l_star)`` for both ring types over a size range."""
    _check_n(n_min)
    if n_max < n_min:
        raise DomainError("empty sweep range")
    return [(n, d.value, critical_coupling(n, d))
            for n in range(n_min, n_max + 1) for d in (Direction.UNI, Direction.BI)]
