import math

import numpy as np
import pytest

from pcoring.analysis import (
    StateTag,
    WorstCase,
    classify,
    critical_sweep,
    distance_vector,
    equilibrium_gamma,
    gamma_report,
    is_synchronized,
    transition_matrix,
    worst_case_gaps,
    worst_case_state,
)
from pcoring.exceptions import DomainError
from pcoring.model import TWO_PI, CycleTopology, DeltaCase, PhaseState, apply_jump, solve_delta
from pcoring.rng import SplitMix64
from pcoring.sampling import random_semicircle_state, random_u_state, random_u_state_linear

PI = math.pi


def test_distance_vector_examples():
    v = distance_vector(PhaseState([1.0] * 5))
    assert v.length == 0 and v.max == 0
    v = distance_vector(PhaseState([0, PI / 2, PI, 3 * PI / 2]))
    np.testing.assert_allclose(v.components, [PI / 2] * 4)
    assert v.length == pytest.approx(TWO_PI)
    v = distance_vector(PhaseState([3 * PI / 2, 0, 1, 2]))
    assert v.components[0] == pytest.approx(PI / 2)


def test_is_synchronized():
    assert is_synchronized(PhaseState([2.0] * 4)) == (True, 0.0)
    ok, gap = is_synchronized(PhaseState([0, TWO_PI, 0, TWO_PI]))
    assert ok and gap == 0
    ok, gap = is_synchronized(PhaseState(np.arange(6) * TWO_PI / 6))
    assert not ok and gap == pytest.approx(TWO_PI / 6)
    with pytest.raises(DomainError):
        is_synchronized(PhaseState([0] * 4), 0.0)


def test_classify_uniform_orderings():
    up = PhaseState(np.arange(1, 9) * TWO_PI / 8)
    down = PhaseState(up.phases[::-1].copy())
    assert classify(up).tag is StateTag.IN_U2
    assert classify(down).tag is StateTag.IN_U1


def test_classify_short_and_long_cycles():
    assert classify(PhaseState([0.1, 0.5, 1.2, 0.3])).tag is StateTag.LENGTH_BELOW_2PI
    # alternating near-antipodal phases make every gap close to pi
    assert classify(PhaseState([0, 3, 0.1, 3.1, 0.2, 3.0])).tag is StateTag.LENGTH_ABOVE_2PI


def test_classify_length_two_pi_outside_u():
    x = PhaseState([0, PI / 2, PI, PI / 2])
    c = classify(x)
    assert c.length == pytest.approx(TWO_PI)
    assert c.tag is StateTag.AT_2PI_OUTSIDE_U


def test_ordered_members_have_one_long_gap():
    rng = SplitMix64(5)
    for k in range(200):
        state, _ = random_u_state(rng, 4 + k % 9, "u1" if k % 2 else "u2")
        c = classify(state)
        assert c.tag in (StateTag.IN_U1, StateTag.IN_U2)
        assert c.evidence["extreme_gap"] >= PI - 1e-9
        x = state.phases
        others = [abs(x[i] - x[(i + 1) % x.size]) for i in range(x.size)
                  if {i, (i + 1) % x.size} != {c.evidence["i_max"], c.evidence["i_min"]}]
        assert max(others) <= PI + 1e-9


def test_semicircle_sampler_spread():
    rng = SplitMix64(9)
    for _ in range(100):
        assert np.ptp(random_semicircle_state(rng, 7).phases) < PI


def test_transition_matrix_bidirectional_entries():
    c = transition_matrix(2, 4, 0.5, "bi").entries
    # 0-based: firing node 2 touches gaps 0..3 around it
    assert c[2, 2] == 0.5 and c[1, 1] == 0.5
    assert c[3, 2] == 0.5 and c[0, 1] == 0.5
    np.testing.assert_allclose(c.sum(axis=0), 1.0)


def test_transition_matrix_unidirectional_full_coupling():
    c = transition_matrix(3, 6, 1.0, "uni").entries
    assert np.all(c[3] == 0)
    assert c[4, 3] == 1.0
    keep = [k for k in range(6) if k != 3]
    np.testing.assert_array_equal(c[np.ix_(keep, keep)], np.eye(5))


@pytest.mark.parametrize("direction", ["uni", "bi"])
def test_transition_matrix_matches_jump(direction):
    rng = SplitMix64(11)
    for _ in range(100):
        n = rng.integers(4, 12)
        l = 1.0 - rng.random()
        state, i = random_u_state_linear(rng, n, l, direction)
        v = distance_vector(state).components
        after = distance_vector(apply_jump(state, i, CycleTopology(n, direction, l))).components
        np.testing.assert_allclose(transition_matrix(i, n, l, direction).apply(v), after, atol=1e-12)


def test_transition_matrix_bad_index():
    with pytest.raises(DomainError):
        transition_matrix(4, 4, 0.5, "bi")


def test_gamma_bidirectional_pattern():
    l = 0.8378
    g = equilibrium_gamma(8, l, "bi")
    d = solve_delta(8, l, DeltaCase.BI_WORST)
    np.testing.assert_allclose(np.sort(g), np.sort([d] * 6 + [(1 - l) * d, d / (1 - l)]), atol=1e-9)
    assert g.sum() == pytest.approx(1.0, abs=1e-12)


def test_gamma_unidirectional_pattern():
    l = 0.86
    g = equilibrium_gamma(8, l, "uni", list(range(8)))
    d = solve_delta(8, l, DeltaCase.UNI_WORST_U1)
    np.testing.assert_allclose(np.sort(g), np.sort([d] * 7 + [d / (1 - l)]), atol=1e-9)


def test_gamma_requires_interior_coupling():
    with pytest.raises(DomainError):
        equilibrium_gamma(8, 1.0, "bi")


def test_gamma_report_labels():
    text = gamma_report(8, 0.8, "bi")
    assert text.count("  delta\n") + text.endswith("  delta") >= 5
    assert "(1-l)*delta" in text and "delta/(1-l)" in text


@pytest.mark.parametrize("which, tag", [
    (WorstCase.BI_UBAR, StateTag.IN_U1),
    (WorstCase.UNI_U1_STAR, StateTag.IN_U1),
])
def test_worst_case_round_trip_below_threshold(which, tag):
    l = 0.8377 if which is WorstCase.BI_UBAR else 0.857
    s = worst_case_state(8, l, which)
    assert s.phases.max() == TWO_PI
    assert classify(s).tag is tag
    assert distance_vector(s).length == pytest.approx(TWO_PI, abs=1e-9)


def test_worst_case_above_threshold_has_short_cycle():
    # past the critical coupling the largest gap exceeds pi, so the
    # shortest-arc cycle length drops below 2pi
    s = worst_case_state(8, 0.8378, WorstCase.BI_UBAR)
    assert worst_case_gaps(8, 0.8378, WorstCase.BI_UBAR).max() > 0.5
    assert classify(s).tag is StateTag.LENGTH_BELOW_2PI


def test_worst_case_uniform():
    s = worst_case_state(8, 1.0, WorstCase.UNI_U2_UNIFORM)
    np.testing.assert_allclose(np.diff(s.phases), TWO_PI / 8)
    assert classify(s).tag is StateTag.IN_U2


def test_worst_case_near_degenerate():
    # the long gap tends to a full turn, so every node nearly coincides
    l = 1 - 1e-9
    assert worst_case_gaps(8, l, WorstCase.UNI_U1_STAR).max() > 1 - 1e-7
    s = worst_case_state(8, l, WorstCase.UNI_U1_STAR)
    assert distance_vector(s).max < 1e-6


def test_critical_sweep_shape():
    rows = critical_sweep(4, 250)
    assert len(rows) == 2 * 247
    uni = [r[2] for r in rows if r[1] == "uni"]
    bi = [r[2] for r in rows if r[1] == "bi"]
    assert all(a < b for a, b in zip(uni, uni[1:]))
    assert all(u > b for u, b in zip(uni, bi))


def test_rng_reference_vectors():
    assert SplitMix64(0).next_u64() == 0xE220A8397B1DCDAF
    r = SplitMix64(1234567)
    assert [r.next_u64() for _ in range(5)] == [
        6457827717110365317, 3203168211198807973, 9817491932198370423,
        4593380528125082431, 16408922859458223821,
    ]


def test_rng_ranges():
    r = SplitMix64(3)
    xs = [r.random() for _ in range(1000)]
    assert 0 <= min(xs) and max(xs) < 1
    ks = {r.integers(4, 7) for _ in range(200)}
    assert ks == {4, 5, 6}
