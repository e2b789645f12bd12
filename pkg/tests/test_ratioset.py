from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypercantor.errors import InvariantViolation, ParameterError
from hypercantor.hierarchy import level_arrays
from hypercantor.ratioset import ScalingSource, build_ratio_set, scenery_identity_check
from hypercantor.scaling import build_scaling_table, scaling_estimate
from hypercantor.symbolic import BiWindow

THIRD = Fraction(1, 3)

words = st.lists(st.integers(0, 1), max_size=12).map(tuple)


def test_constant_thirds_rebuild_middle_third(middle_third):
    s = build_ratio_set(ScalingSource.constant(THIRD, THIRD, THIRD), (0, 1), 6)
    s.check()
    left, length = level_arrays(middle_third, 6)
    assert np.max(np.abs(s.as_array() - np.stack([left, left + length], 1))) < 1e-15


def test_constant_linear_rebuilds_linear(linear_quarter_half):
    s = build_ratio_set(ScalingSource.constant(0.25, 0.25, 0.5), (), 5)
    left, length = level_arrays(linear_quarter_half, 5)
    assert np.max(np.abs(s.as_array() - np.stack([left, left + length], 1))) < 1e-15


def test_level_one_intervals_are_the_triple():
    s = build_ratio_set(ScalingSource.constant(0.2, 0.5, 0.3), (), 1)
    assert [tuple(float(v) for v in iv) for iv in s.intervals] == [(0.0, 0.2), (0.7, 1.0)]


def test_source_outside_simplex_rejected():
    bad = ScalingSource(lambda past: (0.5, 0.6, -0.1))
    with pytest.raises(ParameterError):
        build_ratio_set(bad, (), 2)
    with pytest.raises(ParameterError):
        ScalingSource.constant(0.5, 0.5, 0.5)


def test_table_source_matches_limit_geometry(perturbed):
    """A set rebuilt from the estimated scaling function sits near the rescaled cylinder."""
    table = build_scaling_table(perturbed, 8, 20)
    src = ScalingSource.from_table(table)
    past = (0, 1) * 10
    rebuilt = build_ratio_set(src, past, 4).as_array()
    # the actual rescaled subtree below the dual word `past`
    left, length = level_arrays(perturbed, 4)
    from hypercantor.conjugacy import renormalized_jet
    lo, _, _ = renormalized_jet(perturbed, past, left)
    hi, _, _ = renormalized_jet(perturbed, past, left + length)
    direct = np.stack([lo, hi], 1)
    # slack: each of 4 levels uses a triple with multiplicative error err_bound
    assert np.max(np.abs(rebuilt - direct)) < 4 * table.err_bound + 1e-12


@given(words, st.lists(st.integers(0, 1), min_size=4, max_size=8).map(tuple), st.integers(1, 4))
def test_scenery_identity_holds_for_any_source(past, future, n):
    def rule(p):
        k = sum(p[-3:])
        return (Fraction(2 + k, 10), Fraction(3, 10), Fraction(5 - k, 10))
    src = ScalingSource(rule, 3, 0.0, "three-symbol rule")
    rep = scenery_identity_check(src, BiWindow(past, future), n, 3)
    assert rep.ok and rep.max_abs_diff < 1e-30


def test_scenery_identity_on_estimated_scaling(perturbed):
    src = ScalingSource(lambda p: scaling_estimate(perturbed, p[-10:], 16).triple, 10)
    rep = scenery_identity_check(src, BiWindow((1, 0, 0), (0, 1, 1, 0, 1)), 3, 3)
    assert rep.ok


def test_scenery_identity_needs_future():
    src = ScalingSource.constant(THIRD, THIRD, THIRD)
    with pytest.raises(ParameterError):
        scenery_identity_check(src, BiWindow((), (0,)), 2, 2)


def test_skeleton_check_flags_bad_set():
    s = build_ratio_set(ScalingSource.constant(THIRD, THIRD, THIRD), (), 2)
    broken = type(s)(3, s.intervals)
    with pytest.raises(InvariantViolation):
        broken.check()
