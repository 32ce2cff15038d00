"""Random initial conditions drawn from a :class:`~pcoring.rng.SplitMix64` stream."""
from __future__ import annotations

import math
from typing import Optional


from .analysis import distance_vector
from .model import TWO_PI, Direction, PhaseState
from .rng import SplitMix64


def random_state(rng: SplitMix64, n: int) -> PhaseState:
    """Phases i.i.d. uniform on [0, 2*pi]."""
    return PhaseState(rng.uniform_vector(n, 0.0, TWO_PI))


def random_grid_state(rng: SplitMix64, n: int, levels: int = 4) -> PhaseState:
    """Phases on a coarse grid including 0 and 2*pi.

    Coincident phases make simultaneous firings and absorption cascades
    common, which uniform sampling almost never produces.
    """
    grid = [TWO_PI * k / levels for k in range(levels + 1)]
    return PhaseState([rng.choice(grid) for _ in range(n)])


def random_semicircle_state(rng: SplitMix64, n: int) -> PhaseState:
    """Phases whose max-min spread is strictly below pi.

    The spread ``s`` is uniform on [0, pi), the offset uniform on
    [0, 2*pi - s], and the phases uniform within the window.
    """
    s = math.pi * rng.random()
    a = rng.uniform(0.0, TWO_PI - s)
    return PhaseState([a + s * rng.random() for _ in range(n)])


def _gap_partition(rng: SplitMix64, m: int, total: float, cap: float) -> Optional[list]:
    w = [-math.log(1.0 - rng.random()) for _ in range(m)]
    scale = total / sum(w)
    d = [v * scale for v in w]
    if max(d) >= cap:
        return None
    return d


def random_u_state(rng: SplitMix64, n: int, ordering: str = "u1",
                   firing: Optional[int] = None, max_tries: int = 10_000) -> tuple:
    """A member of one of the ordered sets with node ``firing`` at 2*pi.

    ``ordering`` is ``"u1"`` (phases decrease along the ring starting at the
    firing node) or ``"u2"`` (phases increase towards the firing node).
    Returns ``(state, firing)``.
    """
    if firing is None:
        firing = rng.integers(0, n)
    for _ in range(max_tries):
        total = rng.uniform(math.pi, TWO_PI)
        d = _gap_partition(rng, n - 1, total, math.pi)
        if d is None:
            continue
        x = [0.0] * n
        x[firing] = TWO_PI
        acc = TWO_PI
        step = 1 if ordering == "u1" else -1
        for k, g in enumerate(d, start=1):
            acc -= g
            x[(firing + step * k) % n] = max(acc, 0.0)
        return PhaseState(x), firing
    raise RuntimeError("could not sample an ordered state")


def gap_conditions_hold(state: PhaseState, firing: int, l: float, direction,
                        margin: float = 1e-9) -> bool:
    """Whether the neighbours of ``firing`` stay within pi of their far-side
    neighbours after the kick, so the gap vector updates linearly."""
    v = distance_vector(state).components
    n = v.size
    i = firing
    ok = v[(i + 1) % n] + l * v[i] < math.pi - margin
    if Direction.parse(direction) is Direction.BI:
        ok = ok and v[(i - 2) % n] + l * v[(i - 1) % n] < math.pi - margin
    return bool(ok)


def random_u_state_linear(rng: SplitMix64, n: int, l: float, direction,
                          ordering: str = "u1", max_tries: int = 10_000) -> tuple:
    """Like :func:`random_u_state` but rejecting states that violate the gap conditions."""
    for _ in range(max_tries):
        state, i = random_u_state(rng, n, ordering)
        if gap_conditions_hold(state, i, l, direction) and _neighbours_off_pi(state, i):
            return state, i
    raise RuntimeError("could not sample an ordered state meeting the gap conditions")


def _neighbours_off_pi(state: PhaseState, i: int, margin: float = 1e-9) -> bool:
    n = state.n
    x = state.phases
    return all(abs(x[k % n] - math.pi) > margin for k in (i - 1, i + 1))


def unit_coupling(rng: SplitMix64) -> float:
    """Coupling uniform on (0, 1]."""
    return 1.0 - rng.random()


