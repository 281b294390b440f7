import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from macdmt.curves import (
    MacConfig,
    PiecewiseLinearCurve,
    mac_dmt,
    mac_dmt_curve,
    max_multiplexing_gain,
    mimo_dmt,
    mimo_dmt_curve,
)
from macdmt.errors import DomainError


@pytest.mark.parametrize("m,n,r,expected", [(4, 3, 0, 12), (4, 3, 3, 0), (4, 3, 2.8, 0.4)])
def test_mimo_dmt_examples(m, n, r, expected):
    assert mimo_dmt(m, n, r) == pytest.approx(expected, abs=1e-12)


def test_mimo_dmt_integer_knots():
    for k in range(4):
        assert mimo_dmt(4, 3, k) == (4 - k) * (3 - k)


def test_mimo_dmt_domain():
    with pytest.raises(DomainError):
        mimo_dmt(4, 3, 3.1)
    with pytest.raises(DomainError):
        mimo_dmt(4, 3, -0.1)


@pytest.mark.parametrize("K,n_r,r,expected", [(4, 3, 0.3, 2.1), (4, 3, 0.7, 0.4), (2, 1, 0.0, 1.0),
                                              (2, 1, 0.5, 0.0)])
def test_mac_dmt_examples(K, n_r, r, expected):
    assert mac_dmt(MacConfig(K, n_r, r)) == pytest.approx(expected, abs=1e-12)


def test_mac_dmt_heavy_branch_matches_interpolation():
    # heavy branch is the K x n_r MIMO curve at K r; compare with a direct line
    for r in np.linspace(0.6, 0.75, 16):
        x = 4 * r
        direct = 2 + (x - 2) * (0 - 2) / (3 - 2)
        assert mac_dmt(MacConfig(4, 3, r)) == pytest.approx(direct, abs=1e-12)


def test_mac_dmt_out_of_range():
    with pytest.raises(DomainError):
        MacConfig(4, 3, 0.8)
    with pytest.raises(DomainError):
        MacConfig(2, 2, 1.01)


def test_max_multiplexing_gain():
    assert max_multiplexing_gain(4, 3) == 0.75
    assert max_multiplexing_gain(3, 4) == 1.0


def test_curve_rejects_bad_points():
    with pytest.raises(ValueError, match="increasing"):
        PiecewiseLinearCurve((0.0, 0.0), (1.0, 2.0))
    with pytest.raises(ValueError):
        PiecewiseLinearCurve((0.0, 1.0), (1.0,))
    with pytest.raises(DomainError):
        PiecewiseLinearCurve((0.0, 1.0), (1.0, 0.0))(1.5)


def test_curve_breakpoint_exact():
    curve = mac_dmt_curve(4, 3)
    for x, y in curve.breakpoints:
        assert curve(x) == y
    assert curve.x_min == 0.0 and curve.x_max == 0.75


@settings(max_examples=60, deadline=None)
@given(K=st.integers(1, 6), n_r=st.integers(1, 6), a=st.floats(0, 1), b=st.floats(0, 1))
def test_mac_dmt_nonincreasing(K, n_r, a, b):
    rmax = max_multiplexing_gain(K, n_r)
    lo, hi = sorted((a * rmax, b * rmax))
    assert mac_dmt(MacConfig(K, n_r, lo)) >= mac_dmt(MacConfig(K, n_r, hi)) - 1e-12


@settings(max_examples=40, deadline=None)
@given(K=st.integers(1, 6), n_r=st.integers(1, 6))
def test_mac_dmt_starts_at_n_r_and_ends_at_zero(K, n_r):
    curve = mac_dmt_curve(K, n_r)
    assert curve(0.0) == n_r
    assert curve(curve.x_max) == pytest.approx(0.0, abs=1e-12)


def test_mimo_curve_knots():
    c = mimo_dmt_curve(2, 2)
    assert c.breakpoints == [(0.0, 4.0), (1.0, 1.0), (2.0, 0.0)]
