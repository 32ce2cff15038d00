"""Core model: ring topologies, the advance-delay phase response curve,
the saturating jump map and the closed-form critical couplings.

Everything here is a pure function of immutable inputs. Node indices are
0-based throughout the Python API; the CLI translates to 1-based labels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np

from .exceptions import DegenerateCaseError, DomainError, PreconditionError

TWO_PI = 2.0 * math.pi

# A node counts as "at 2*pi" (inside the jump set) within this distance.
FIRE_TOL = 1e-9

MIN_NODES = 4


class Direction(str, Enum):
    UNI = "uni"
    BI = "bi"

    @classmethod
    def parse(cls, value) -> "Direction":
        if isinstance(value, Direction):
            return value
        key = str(value).strip().lower()
        aliases = {
            "uni": cls.UNI, "unidirectional": cls.UNI, "directed": cls.UNI,
            "bi": cls.BI, "bidirectional": cls.BI, "undirected": cls.BI,
        }
        try:
            return aliases[key]
        except KeyError:
            raise DomainError(f"unknown direction {value!r}; expected 'uni' or 'bi'") from None


class TiePolicy(str, Enum):
    """Which element of the set value {+pi, -pi} the PRC takes at exactly pi."""

    ADVANCE = "advance"
    DELAY = "delay"

    @classmethod
    def parse(cls, value) -> "TiePolicy":
        if isinstance(value, TiePolicy):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise DomainError(f"unknown tie policy {value!r}; expected 'advance' or 'delay'") from None

    @property
    def value_at_pi(self) -> float:
        return math.pi if self is TiePolicy.ADVANCE else -math.pi


def _check_n(n) -> int:
    if int(n) != n or n < MIN_NODES:
        raise DomainError(f"ring size must be an integer >= {MIN_NODES}, got {n!r}")
    return int(n)


@dataclass(frozen=True)
class CycleTopology:
    """A ring of ``n`` oscillators with uniform coupling strength.

    In the unidirectional ring node ``i+1`` senses node ``i`` (and node 0
    senses node ``n-1``). The bidirectional ring adds the reversed edges.
    """

    n: int
    direction: Direction = Direction.BI
    coupling: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "n", _check_n(self.n))
        object.__setattr__(self, "direction", Direction.parse(self.direction))
        l = float(self.coupling)
        if not (0.0 < l <= 1.0):
            raise DomainError(f"coupling must lie in (0, 1], got {self.coupling!r}")
        object.__setattr__(self, "coupling", l)

    def listeners(self, node: int) -> tuple:
        """Nodes whose phase reacts when ``node`` fires."""
        n = self.n
        if self.direction is Direction.UNI:
            return ((node + 1) % n,)
        return ((node + 1) % n, (node - 1) % n)

    def edges(self) -> frozenset:
        """Edge set as (receiver, sender) pairs."""
        return frozenset((r, s) for s in range(self.n) for r in self.listeners(s))

    def adjacency(self) -> np.ndarray:
        """Weighted adjacency ``a[i, j] = l`` iff node i senses node j."""
        a = np.zeros((self.n, self.n))
        for r, s in self.edges():
            a[r, s] = self.coupling
        return a


@dataclass(frozen=True)
class PrcSpec:
    """Optimal advance-delay PRC with an optional per-node dead zone.

    ``refractory`` is either empty (no dead zones) or holds one length in
    [0, 2*pi] per node. The dead zone of node i is the closed interval
    [0, refractory[i]].
    """

    tie: TiePolicy = TiePolicy.ADVANCE
    refractory: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "tie", TiePolicy.parse(self.tie))
        r = tuple(float(v) for v in self.refractory)
        for v in r:
            if not (0.0 <= v <= TWO_PI):
                raise DomainError(f"refractory length {v!r} outside [0, 2*pi]")
        object.__setattr__(self, "refractory", r)

    @classmethod
    def with_refractory(cls, n: int, lengths: Mapping[int, float],
                        tie: TiePolicy = TiePolicy.ADVANCE) -> "PrcSpec":
        """Build a spec for ``n`` nodes where only the listed nodes are refractory."""
        r = [0.0] * _check_n(n)
        for node, length in lengths.items():
            if not 0 <= node < n:
                raise DomainError(f"refractory node {node} out of range for n={n}")
            r[node] = float(length)
        return cls(tie=tie, refractory=tuple(r))

    def refractory_of(self, node: int) -> float:
        if not self.refractory:
            return 0.0
        return self.refractory[node]

    def lengths(self, n: int) -> list:
        """Per-node refractory lengths, validated against the ring size."""
        if not self.refractory:
            return [0.0] * n
        if len(self.refractory) != n:
            raise DomainError(
                f"refractory vector has {len(self.refractory)} entries for a ring of {n}")
        return list(self.refractory)


@dataclass(frozen=True)
class PhaseState:
    """Phases of all oscillators at hybrid time ``(t, j)``."""

    phases: np.ndarray
    t: float = 0.0
    j: int = 0

    def __post_init__(self):
        x = np.array(self.phases, dtype=float)
        if x.ndim != 1:
            raise DomainError("phases must be a 1-D vector")
        _check_n(x.size)
        if not np.all(np.isfinite(x)) or x.min() < 0.0 or x.max() > TWO_PI:
            raise DomainError("every phase must lie in [0, 2*pi]")
        if self.t < 0 or self.j < 0 or int(self.j) != self.j:
            raise DomainError("hybrid time needs t >= 0 and integer j >= 0")
        x.flags.writeable = False
        object.__setattr__(self, "phases", x)
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "j", int(self.j))

    @property
    def n(self) -> int:
        return self.phases.size

    def firing_nodes(self, tol: float = FIRE_TOL) -> list:
        """Indices of nodes inside the jump set."""
        return [i for i, v in enumerate(self.phases) if TWO_PI - v <= tol]

    def replace(self, phases=None, t=None, j=None) -> "PhaseState":
        return PhaseState(self.phases if phases is None else phases,
                          self.t if t is None else t,
                          self.j if j is None else j)


def _prc(x: float, dead_zone: float, tie_value: float) -> float:
    if x <= dead_zone:
        return 0.0
    if x > math.pi:
        return TWO_PI - x
    if x < math.pi:
        return -x
    return tie_value


def _saturate(y: float) -> float:
    if y <= 0.0:
        return 0.0
    if y >= TWO_PI - FIRE_TOL:
        return TWO_PI
    return y


def _jump_inplace(x: list, node: int, listeners: Sequence[int], coupling: float,
                  dead_zones: Sequence[float], tie_value: float) -> None:
    """Fire ``node``: reset it and kick its listeners. Mutates ``x``."""
    x[node] = 0.0
    for k in listeners:
        xk = x[k]
        x[k] = _saturate(xk + coupling * _prc(xk, dead_zones[k], tie_value))


def evaluate_prc(phase: float, spec: Optional[PrcSpec] = None, node: int = 0) -> float:
    """Phase shift produced by an incoming pulse received at ``phase``.

    >>> evaluate_prc(3 * math.pi / 2)
    1.5707963267948966
    """
    phase = float(phase)
    if not (0.0 <= phase <= TWO_PI) or math.isnan(phase):
        raise DomainError(f"phase {phase!r} outside [0, 2*pi]")
    spec = spec or PrcSpec()
    if spec.refractory and not 0 <= node < len(spec.refractory):
        raise DomainError(f"node {node} has no refractory entry")
    return _prc(phase, spec.refractory_of(node), spec.tie.value_at_pi)


def apply_jump(state: PhaseState, firing_node: int, topology: CycleTopology,
               spec: Optional[PrcSpec] = None) -> PhaseState:
    """Apply the jump map for a single firing node.

    The firing node resets to 0 and each listener ``k`` moves to
    ``sat(x_k + l * Q(x_k))``. A listener landing within ``FIRE_TOL`` of
    2*pi is snapped onto 2*pi, i.e. it is absorbed and will fire next.
    """
    spec = spec or PrcSpec()
    if state.n != topology.n:
        raise DomainError(f"state has {state.n} phases, topology has {topology.n} nodes")
    if not 0 <= firing_node < state.n:
        raise DomainError(f"firing node {firing_node} out of range")
    if TWO_PI - state.phases[firing_node] > FIRE_TOL:
        raise PreconditionError(
            f"node {firing_node} is at {state.phases[firing_node]!r}, not at 2*pi")
    x = state.phases.tolist()
    _jump_inplace(x, firing_node, topology.listeners(firing_node), topology.coupling,
                  spec.lengths(state.n), spec.tie.value_at_pi)
    return PhaseState(x, state.t, state.j + 1)


def critical_coupling(n: int, direction) -> float:
    """Coupling strength above which the ring synchronizes from any start.

    Bidirectional rings: ``n/2 - sqrt(n**2 - 4(n-2))/2``; unidirectional
    rings (with one node carrying a refractory period of length pi):
    ``(n-2)/(n-1)``.
    """
    n = _check_n(n)
    if Direction.parse(direction) is Direction.BI:
        return n / 2.0 - math.sqrt(n * n - 4.0 * (n - 2)) / 2.0
    return (n - 2.0) / (n - 1.0)


class DeltaCase(str, Enum):
    """Which fixed-point equation to solve for the repeated gap ``delta``."""

    BI_WORST = "bi-worst"                      # (n-2)d + (1-l)d + d/(1-l) = 1
    UNI_WORST_U1 = "uni-worst-u1"              # (n-1)d + d/(1-l) = 1
    UNI_U2_NO_REFRACTORY = "uni-u2"            # (n-1)d + (1-l)d = 1


def delta_equation(n: int, l: float, case: DeltaCase) -> float:
    """Coefficient ``c`` such that the equation for ``case`` reads ``c * delta = 1``."""
    case = DeltaCase(case)
    if case is DeltaCase.BI_WORST:
        return (n - 2) + (1 - l) + 1 / (1 - l)
    if case is DeltaCase.UNI_WORST_U1:
        return (n - 1) + 1 / (1 - l)
    return (n - 1) + (1 - l)


def solve_delta(n: int, l: float, case: DeltaCase) -> float:
    """Solve the linear equilibrium equation of ``case`` for ``delta``.

    At ``l = 1`` the two worst-case constructions degenerate (the
    equilibrium then has a single nonzero entry equal to 1) and a
    :class:`DegenerateCaseError` is raised.
    """
    n = _check_n(n)
    case = DeltaCase(case)
    l = float(l)
    if case is DeltaCase.UNI_U2_NO_REFRACTORY:
        if not (0.0 < l <= 1.0):
            raise DomainError(f"coupling must lie in (0, 1], got {l!r}")
    else:
        if l == 1.0:
            raise DegenerateCaseError(
                "no worst-case equilibrium at l = 1: the gap vector collapses to one entry")
        if not (0.0 < l < 1.0):
            raise DomainError(f"coupling must lie in (0, 1), got {l!r}")
    return 1.0 / delta_equation(n, l, case)

