import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcoring.exceptions import DegenerateCaseError, DomainError, PreconditionError
from pcoring.model import (
    TWO_PI,
    CycleTopology,
    DeltaCase,
    Direction,
    PhaseState,
    PrcSpec,
    TiePolicy,
    apply_jump,
    critical_coupling,
    delta_equation,
    evaluate_prc,
    solve_delta,
)

PI = math.pi


@pytest.mark.parametrize("phase, spec, expected", [
    (0.0, PrcSpec(), 0.0),
    (3 * PI / 2, PrcSpec(), PI / 2),
    (PI / 2, PrcSpec(), -PI / 2),
    (PI / 2, PrcSpec.with_refractory(4, {0: PI}), 0.0),
    (PI, PrcSpec(tie=TiePolicy.ADVANCE), PI),
    (PI, PrcSpec(tie=TiePolicy.DELAY), -PI),
    (TWO_PI, PrcSpec(), 0.0),
])
def test_prc_values(phase, spec, expected):
    assert evaluate_prc(phase, spec, 0) == pytest.approx(expected)


def test_prc_dead_zone_is_closed():
    spec = PrcSpec.with_refractory(4, {1: 1.0})
    assert evaluate_prc(1.0, spec, 1) == 0.0
    assert evaluate_prc(1.0 + 1e-12, spec, 1) < 0
    assert evaluate_prc(1.0, spec, 0) == -1.0


@pytest.mark.parametrize("bad", [-0.1, TWO_PI + 1e-6, float("nan")])
def test_prc_rejects_out_of_range(bad):
    with pytest.raises(DomainError):
        evaluate_prc(bad)


def test_jump_partial_coupling():
    topo = CycleTopology(4, Direction.UNI, 0.5)
    s = apply_jump(PhaseState([TWO_PI, PI / 2, 1, 1]), 0, topo)
    np.testing.assert_allclose(s.phases, [0, PI / 4, 1, 1])
    assert s.j == 1


def test_jump_saturates_to_two_pi():
    topo = CycleTopology(4, Direction.UNI, 1.0)
    s = apply_jump(PhaseState([TWO_PI, 3 * PI / 2, 1, 1]), 0, topo)
    np.testing.assert_allclose(s.phases, [0, TWO_PI, 1, 1])
    assert s.firing_nodes() == [1]


@pytest.mark.parametrize("direction", list(Direction))
def test_neighbour_at_zero_stays(direction):
    topo = CycleTopology(5, direction, 0.7)
    s = apply_jump(PhaseState([TWO_PI, 0, 2, 3, 0]), 0, topo)
    assert s.phases[1] == 0.0
    assert s.phases[4] == 0.0


def test_bidirectional_kicks_both_sides():
    topo = CycleTopology(5, "bi", 0.5)
    s = apply_jump(PhaseState([TWO_PI, 4.0, 3, 3, 2.0]), 0, topo)
    assert s.phases[1] == pytest.approx(4.0 + 0.5 * (TWO_PI - 4.0))
    assert s.phases[4] == pytest.approx(1.0)
    assert s.phases[2] == 3


def test_jump_precondition():
    topo = CycleTopology(4, "uni", 0.5)
    with pytest.raises(PreconditionError):
        apply_jump(PhaseState([1, 2, 3, 4]), 0, topo)


def test_topology_edges():
    uni = CycleTopology(4, "uni")
    assert uni.edges() == {(1, 0), (2, 1), (3, 2), (0, 3)}
    bi = CycleTopology(4, "bi")
    assert len(bi.edges()) == 8
    assert np.allclose(bi.adjacency(), bi.adjacency().T)


@pytest.mark.parametrize("kwargs", [
    dict(n=3), dict(n=4, coupling=0.0), dict(n=4, coupling=1.5), dict(n=4, direction="sideways"),
])
def test_topology_validation(kwargs):
    with pytest.raises(DomainError):
        CycleTopology(**kwargs)


def test_state_validation():
    with pytest.raises(DomainError):
        PhaseState([0, 1, 2])
    with pytest.raises(DomainError):
        PhaseState([0, 1, 2, 7])
    s = PhaseState([0, 1, 2, 3])
    with pytest.raises(ValueError):
        s.phases[0] = 1.0


@pytest.mark.parametrize("n, direction, expected, tol", [
    (8, "bi", 0.83772, 5e-6),
    (8, "uni", 0.857142857, 1e-9),
    (250, "uni", 0.99598, 5e-6),
    (250, "bi", 0.99597, 5e-6),
    (4, "bi", 2 - math.sqrt(8) / 2, 1e-12),
])
def test_critical_coupling(n, direction, expected, tol):
    assert abs(critical_coupling(n, direction) - expected) <= tol


def test_critical_coupling_monotone_and_ordered():
    ns = np.arange(4, 10001)
    uni = np.array([critical_coupling(int(n), "uni") for n in ns])
    bi = np.array([critical_coupling(int(n), "bi") for n in ns])
    assert np.all(np.diff(uni) > 0) and np.all(np.diff(bi) > 0)
    assert np.all(uni > bi)
    assert uni[-1] < 1 and bi[-1] < 1


def test_critical_coupling_small_ring():
    with pytest.raises(DomainError):
        critical_coupling(3, "bi")


def test_solve_delta_examples():
    d = solve_delta(8, 0.8378, DeltaCase.BI_WORST)
    assert d == pytest.approx(1 / (6 + 0.1622 + 1 / 0.1622))
    # quoted approximation 0.081121 is rounded; the closed form is authoritative
    assert d == pytest.approx(0.081121, abs=5e-6)
    assert solve_delta(8, 0.86, DeltaCase.UNI_WORST_U1) == pytest.approx(1 / (7 + 1 / 0.14))
    assert solve_delta(8, 1.0, DeltaCase.UNI_U2_NO_REFRACTORY) == pytest.approx(1 / 7)


@pytest.mark.parametrize("case", [DeltaCase.BI_WORST, DeltaCase.UNI_WORST_U1])
def test_solve_delta_degenerate(case):
    with pytest.raises(DegenerateCaseError):
        solve_delta(8, 1.0, case)


@settings(max_examples=200, deadline=None)
@given(n=st.integers(4, 60), l=st.floats(0.001, 0.999), case=st.sampled_from(list(DeltaCase)))
def test_solve_delta_back_substitution(n, l, case):
    d = solve_delta(n, l, case)
    assert d * delta_equation(n, l, case) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(
    x=st.lists(st.floats(0, TWO_PI), min_size=4, max_size=12),
    l=st.floats(0.001, 1.0),
    direction=st.sampled_from(list(Direction)),
    tie=st.sampled_from(list(TiePolicy)),
)
def test_jump_stays_in_range_and_only_touches_listeners(x, l, direction, tie):
    x[0] = TWO_PI
    topo = CycleTopology(len(x), direction, l)
    s = apply_jump(PhaseState(x), 0, topo, PrcSpec(tie=tie))
    assert s.phases[0] == 0.0
    assert s.phases.min() >= 0 and s.phases.max() <= TWO_PI
    untouched = set(range(len(x))) - {0, *topo.listeners(0)}
    for k in untouched:
        assert s.phases[k] == x[k]
