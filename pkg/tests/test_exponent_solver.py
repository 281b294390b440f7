import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from macdmt.curves import MacConfig, mac_dmt, max_multiplexing_gain
from macdmt.errors import DomainError, ResourceError, UnsupportedConfigurationError
from macdmt.exponent_solver import (
    cbar_closed_nr1,
    cbar_closed_nrK,
    cbar_large_nr,
    clipped_gain,
    grid_oracle_sup,
    grid_sup,
    solve_cbar_mac,
    solve_cbar_mac_d,
    staircase_sup,
)


def test_cbar_d_examples():
    cfg = MacConfig(4, 1, 0.2)
    assert solve_cbar_mac_d(cfg, mac_dmt(cfg)).value == pytest.approx(0.6, abs=1e-12)
    cfg = MacConfig(3, 3, 2 / 3)
    assert solve_cbar_mac_d(cfg, mac_dmt(cfg)).value == pytest.approx(2 / 3, abs=1e-12)
    for d in (0.0, 1.0, 7.5):
        assert solve_cbar_mac_d(MacConfig(3, 2, 0.0), d).value == 0.0


def test_negative_target_rejected():
    with pytest.raises(DomainError):
        solve_cbar_mac_d(MacConfig(2, 2, 0.3), -1.0)


@pytest.mark.parametrize("K,n_r,r,expected", [(5, 1, 0.1, 0.4), (4, 4, 0.5, 0.5), (3, 3, 1.0, 0.0)])
def test_cbar_mac_examples(K, n_r, r, expected):
    assert solve_cbar_mac(MacConfig(K, n_r, r)).value == pytest.approx(expected, abs=1e-12)


def test_cbar_mac_requires_single_use_block():
    with pytest.raises(UnsupportedConfigurationError):
        solve_cbar_mac(MacConfig(2, 2, 0.3, T=2))


@pytest.mark.parametrize("K,r,expected", [(4, 0.25, 0.75), (2, 0.0, 0.0), (5, 0.2, 0.8)])
def test_closed_nr1(K, r, expected):
    assert cbar_closed_nr1(K, r) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("K,r,expected", [(4, 0.5, 0.5), (3, 1.0, 0.0), (4, 0.0, 0.0)])
def test_closed_nrK(K, r, expected):
    assert cbar_closed_nrK(K, r) == pytest.approx(expected, abs=1e-12)


def test_closed_form_domains():
    with pytest.raises(DomainError):
        cbar_closed_nr1(4, 0.3)
    with pytest.raises(DomainError):
        cbar_closed_nrK(3, 1.2)
    with pytest.raises(DomainError):
        cbar_large_nr(3, 3, 0.5)


def test_large_nr():
    assert cbar_large_nr(3, 100, 0.5) == pytest.approx(min(0.5, 2 * 0.5 / 98), abs=1e-12)
    assert cbar_large_nr(3, 4, 1.0) == 0.0
    values = [cbar_large_nr(3, n, 0.4) for n in (4, 10, 100, 1000, 10_000)]
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert values[-1] < 1e-3


def test_grid_oracle_examples():
    assert grid_oracle_sup(MacConfig(4, 1, 0.2), 0.8).value == pytest.approx(0.6, abs=4e-3)
    cfg = MacConfig(3, 3, 2 / 3)
    assert grid_oracle_sup(cfg, mac_dmt(cfg)).value == pytest.approx(2 / 3, abs=1e-2)
    assert grid_oracle_sup(MacConfig(3, 2, 0.0), 4.0).value == 0.0


def test_grid_cell_cap():
    with pytest.raises(ResourceError):
        grid_oracle_sup(MacConfig(3, 3, 0.3), 2.1, step=1e-3, cell_cap=1000)


def test_clipped_gain():
    assert clipped_gain(0.2, 0.5) == 0.0
    assert clipped_gain(0.7, 0.5) == pytest.approx(0.2)
    assert clipped_gain(1.0, 0.5) == 0.5


def test_staircase_returns_feasible_argmax():
    w = np.array([1.0, 3.0, 5.0])
    value, x = staircase_sup(w, 4.0, 0.4)
    assert np.all(np.diff(x) <= 1e-12)
    assert float(w @ x) <= 4.0 + 1e-9
    assert value == pytest.approx(sum(clipped_gain(v, 0.4) for v in x), abs=1e-12)


def test_cbar_argmax_levels_reproduce_value():
    cfg = MacConfig(4, 4, 0.35)
    b = solve_cbar_mac(cfg)
    assert b.method == "vertex-enumeration"
    mu = np.asarray(b.argmax_levels.levels)
    assert b.value == pytest.approx(sum(clipped_gain(m, 0.35) for m in mu), abs=1e-12)


def test_non_monotone_in_r():
    # the bound at r = 0.5 exceeds the bound near full rate for K = n_r = 4
    lo = solve_cbar_mac(MacConfig(4, 4, 0.5)).value
    hi = solve_cbar_mac(MacConfig(4, 4, 0.999)).value
    assert lo > hi


def _rand_cfg(K, n_r, u):
    return MacConfig(K, n_r, u * max_multiplexing_gain(K, n_r))


@settings(max_examples=80, deadline=None)
@given(K=st.integers(1, 6), n_r=st.integers(1, 6), u=st.floats(0, 1), a=st.floats(0, 12), b=st.floats(0, 12))
def test_monotone_in_target(K, n_r, u, a, b):
    cfg = _rand_cfg(K, n_r, u)
    lo, hi = sorted((a, b))
    assert solve_cbar_mac_d(cfg, lo).value <= solve_cbar_mac_d(cfg, hi).value + 1e-12


@settings(max_examples=80, deadline=None)
@given(K=st.integers(1, 6), n_r=st.integers(1, 6), u=st.floats(0, 1))
def test_below_brute_force_ceiling(K, n_r, u):
    cfg = _rand_cfg(K, n_r, u)
    assert 0.0 <= solve_cbar_mac(cfg).value <= cfg.r * K + 1e-12


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 3), data=st.data())
def test_staircase_matches_grid(n, data):
    w = np.array(sorted(data.draw(st.lists(st.floats(0.5, 6), min_size=n, max_size=n))))
    budget = data.draw(st.floats(0, 8))
    rate = data.draw(st.floats(0, 1))
    exact, _ = staircase_sup(w, budget, rate)
    approx, _ = grid_sup(w, budget, rate, 1e-2)
    assert approx <= exact + 1e-9
    assert exact - approx <= n * 1e-2 * 2 + 1e-9


def test_solver_pure_vs_closed_form_sweep():
    for K in (3, 4, 5):
        for r in np.linspace(0, 1, 41):
            assert solve_cbar_mac(MacConfig(K, K, r)).value == pytest.approx(cbar_closed_nrK(K, r), abs=1e-9)
    assert math.isclose(solve_cbar_mac(MacConfig(5, 1, 0.2)).value, 0.8)
