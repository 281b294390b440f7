import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from macdmt.curves import MacConfig, mac_dmt
from macdmt.errors import DomainError
from macdmt.exponent_solver import solve_cbar_mac
from macdmt.selection_bounds import (
    D_kl,
    AscendingLevelVector,
    SelectionBoundConfig,
    allowed_L,
    cbar_red_us,
    cbar_red_us_min,
    cbar_us,
    d0L_piecewise,
    d_kl,
    dbar_us,
    feedback_bits,
    grid_oracle_cbar_us,
    grid_oracle_d_kl,
    optimize_L,
)


def test_D_kl_examples():
    assert D_kl(AscendingLevelVector([1.0]), 4, 3, 1, 1) == pytest.approx(7)
    assert D_kl(AscendingLevelVector([1.0]), 4, 3, 0, 1) == pytest.approx(12)
    assert D_kl(AscendingLevelVector([0.0, 0.0, 0.0]), 4, 3, 0, 3) == 0.0
    with pytest.raises(DomainError):
        D_kl(AscendingLevelVector([1.0, 1.0]), 4, 3, 0, 3)


@pytest.mark.parametrize("k", range(3))
def test_D_kl_all_ones_closed_form(k):
    # (K - k)(n_r - k) + k ell at alpha = 1
    for ell in range(1, 4 - k):
        ones = AscendingLevelVector(np.ones(ell))
        assert D_kl(ones, 4, 3, k, ell) == pytest.approx(12 - k * 7 + k * k + k * ell)


def test_d_kl_examples():
    assert d_kl(4, 3, 0, 1, 0.0) == pytest.approx(12)
    assert d_kl(4, 3, 0, 3, 0.0) == pytest.approx(12)
    assert d_kl(4, 3, 2, 1, 0.0) == pytest.approx(4)
    for ell in (1, 2, 3):
        assert d_kl(4, 3, 0, ell, float(ell)) == 0.0
    with pytest.raises(DomainError):
        d_kl(4, 3, 0, 1, -0.1)


def test_dbar_examples():
    assert dbar_us(SelectionBoundConfig(4, 3, 2, 0.0)) == pytest.approx(7)
    assert dbar_us(SelectionBoundConfig(3, 4, 1, 0.0)) == pytest.approx(12)
    for r in np.linspace(0, 0.75, 16):
        assert dbar_us(SelectionBoundConfig(4, 3, 4, r)) == pytest.approx(mac_dmt(MacConfig(4, 3, r)), abs=1e-12)
    with pytest.raises(DomainError):
        dbar_us(SelectionBoundConfig(4, 3, 1, 0.3))


def test_d0L_piecewise_anchor():
    assert d0L_piecewise(4, 3, 3)(0.0) == 12
    for r in np.linspace(0, 3, 31):
        assert d0L_piecewise(4, 3, 3)(r) == pytest.approx(d_kl(4, 3, 0, 3, r), abs=1e-9)


def test_cbar_us_examples():
    assert cbar_us(SelectionBoundConfig(4, 3, 2, 0.0)).value == 0.0
    for r in (0.1, 0.4, 0.7):
        assert cbar_us(SelectionBoundConfig(4, 3, 4, r)).value == pytest.approx(
            solve_cbar_mac(MacConfig(4, 3, r)).value)
    cfg = SelectionBoundConfig(4, 3, 2, 0.25)
    assert cbar_us(cfg).value == pytest.approx(grid_oracle_cbar_us(cfg).value, abs=1e-3)
    with pytest.raises(DomainError):
        cbar_us(SelectionBoundConfig(4, 3, 1, 0.5))


def test_cbar_red_us_examples():
    assert cbar_red_us(SelectionBoundConfig(4, 3, 1, 0.0)).value == 0.0
    # L = 1 falls short of the MAC DMT at r = 0.24, so the no-selection bound applies
    cfg = SelectionBoundConfig(4, 3, 1, 0.24)
    assert dbar_us(cfg) < mac_dmt(MacConfig(4, 3, 0.24))
    assert cbar_red_us(cfg).value == solve_cbar_mac(MacConfig(4, 3, 0.24)).value
    assert cbar_red_us_min(4, 3, 0.2)[0] == 0.0


def test_cbar_red_us_min_reports_effective_L():
    value, L = cbar_red_us_min(4, 3, 0.7)
    assert L == 4 and value == solve_cbar_mac(MacConfig(4, 3, 0.7)).value


@pytest.mark.parametrize("r,L", [(0.1, 1), (0.3, 2), (0.7, 3)])
def test_optimize_L_examples(r, L):
    assert optimize_L(3, 4, r, allow_all_users=True)[0] == L


def test_optimize_L_forced_selection():
    L, d = optimize_L(4, 3, 0.7, allow_all_users=False)
    assert L == 3
    assert optimize_L(4, 3, 0.7, allow_all_users=True)[0] == 4


def test_optimize_L_crossover_between_two_and_three():
    # dbar_2 = 7 (1 - 1.5 r) meets the MAC DMT 4 (1 - r) at r = 6/13
    assert optimize_L(3, 4, 0.46)[0] == 2
    assert optimize_L(3, 4, 0.47)[0] == 3
    r = 6 / 13
    assert dbar_us(SelectionBoundConfig(3, 4, 2, r)) == pytest.approx(mac_dmt(MacConfig(3, 4, r)))


@pytest.mark.parametrize("K,L,bits", [(4, 2, 3), (4, 4, 0), (3, 1, 2)])
def test_feedback_bits(K, L, bits):
    assert feedback_bits(K, L) == bits


def test_feedback_bits_domain():
    with pytest.raises(DomainError):
        feedback_bits(3, 4)


def test_allowed_L():
    assert allowed_L(4, 3) == [1, 2, 3, 4]
    assert allowed_L(2, 2) == [1, 2]


def test_grid_oracle_d_kl_brackets():
    for r in (0.0, 0.3, 0.9):
        exact = d_kl(4, 3, 0, 2, r)
        grid = grid_oracle_d_kl(4, 3, 0, 2, r, step=1e-3)
        assert exact - 1e-9 <= grid <= exact + 2e-2


@settings(max_examples=40, deadline=None)
@given(K=st.integers(2, 5), n_r=st.integers(1, 5), data=st.data())
def test_dbar_dominates_mac_at_zero_rate(K, n_r, data):
    L = data.draw(st.sampled_from(allowed_L(K, n_r)))
    assert dbar_us(SelectionBoundConfig(K, n_r, L, 0.0)) >= n_r - 1e-12


@settings(max_examples=40, deadline=None)
@given(K=st.integers(2, 5), n_r=st.integers(1, 5), data=st.data())
def test_reduced_bound_never_exceeds_selection_bound(K, n_r, data):
    L = data.draw(st.sampled_from([L for L in allowed_L(K, n_r) if L < K] or [K]))
    r = data.draw(st.floats(0, 1)) * L / K
    cfg = SelectionBoundConfig(K, n_r, L, r)
    if dbar_us(cfg) >= mac_dmt(MacConfig(K, n_r, r)):
        assert cbar_red_us(cfg).value <= cbar_us(cfg).value + 1e-12
