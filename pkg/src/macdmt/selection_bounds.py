"""DMT and complexity bounds for MAC decoding with L-of-K user selection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .curves import MacConfig, PiecewiseLinearCurve, mac_dmt, max_multiplexing_gain
from .errors import DomainError, ResourceError
from .exponent_solver import (
    DEFAULT_CELL_CAP,
    ExponentBound,
    OrderedLevelVector,
    grid_sup,
    solve_cbar_mac,
    staircase_sup,
)

_TOL = 1e-9


def allowed_L(K: int, n_r: int) -> list[int]:
    """Admissible selection sizes ``{1, ..., min(K, n_r), K}``."""
    return sorted(set(range(1, min(K, n_r) + 1)) | {K})


@dataclass(frozen=True)
class SelectionBoundConfig:
    K: int
    n_r: int
    L: int
    r: float

    def __post_init__(self):
        if self.K < 1 or self.n_r < 1:
            raise DomainError("K and n_r must be positive")
        if self.L not in allowed_L(self.K, self.n_r):
            raise DomainError(f"L={self.L} not in {allowed_L(self.K, self.n_r)}")
        if self.r < -_TOL or self.r > max_multiplexing_gain(self.K, self.n_r) + _TOL:
            raise DomainError(f"r={self.r} outside the achievable range")

    @property
    def nu(self) -> int:
        return min(self.K, self.n_r)

    @property
    def feasible(self) -> bool:
        """Whether ``r`` is reachable with L selected users (``r <= L/K``)."""
        return self.L == self.K or self.r <= self.L / self.K + _TOL

    @property
    def per_user_rate(self) -> float:
        """Multiplexing gain of each transmitting user, ``K r / L``."""
        return self.K * self.r / self.L


class AscendingLevelVector(OrderedLevelVector):
    def __init__(self, levels):
        super().__init__(levels, descending=False)


def dkl_coefficients(K: int, n_r: int, k: int, ell: int) -> np.ndarray:
    """Weights ``c`` such that ``D_{k,ell}(alpha) = c @ alpha``."""
    if k < 0 or ell < 1:
        raise DomainError("need k >= 0 and ell >= 1")
    i = np.arange(1, ell + 1)
    c = (n_r + ell - 2 * i + 1).astype(float)
    c[:-1] += K - k - ell
    c[-1] += (K - k - ell) * (n_r - k - ell + 1)
    return c


def D_kl(alpha, K: int, n_r: int, k: int, ell: int) -> float:
    a = np.asarray(getattr(alpha, "levels", alpha), dtype=float)
    if a.shape != (ell,):
        raise DomainError(f"alpha must have length {ell}")
    return float(dkl_coefficients(K, n_r, k, ell) @ a)


def _d_kl_solve(coeffs, rate):
    """Minimize ``coeffs @ a`` over ascending ``a`` in ``[0, 1]`` with
    ``sum(a) >= len(a) - rate``.

    Vertices of this polytope are ``(0, .., 0, t, .., t, 1, .., 1)`` with the
    run value ``t`` fixed by the sum constraint, so they are enumerated.
    """
    n = coeffs.size
    need = n - rate
    if need <= 0:
        return 0.0, np.zeros(n)
    best, best_a = math.inf, None
    for ones in range(n + 1):
        for run in range(n - ones + 1):
            a = np.zeros(n)
            if ones:
                a[n - ones:] = 1.0
            if run == 0:
                if ones < need - _TOL:
                    continue
            else:
                t = (need - ones) / run
                if t < -_TOL or t > 1 + _TOL:
                    continue
                a[n - ones - run:n - ones] = min(max(t, 0.0), 1.0)
            val = float(coeffs @ a)
            if val < best - 1e-15:
                best, best_a = val, a
    return best, best_a


def d_kl(K: int, n_r: int, k: int, ell: int, r: float) -> float:
    """Infimum of ``D_{k,ell}`` over ascending ``alpha >= 0`` with
    ``sum (1 - alpha_i)^+ <= r``; zero once ``r >= ell``."""
    if r < -_TOL:
        raise DomainError(f"r must be >= 0, got {r}")
    return _d_kl_solve(dkl_coefficients(K, n_r, k, ell), max(r, 0.0))[0]


def _dbar(K, n_r, L, r):
    if L == K:
        return mac_dmt(MacConfig(K, n_r, min(r, max_multiplexing_gain(K, n_r))))
    if r > L / K + _TOL:
        return 0.0
    return min(d_kl(K, n_r, k, ell, ell * K * r / L)
               for k in range(L) for ell in range(1, L - k + 1))


def dbar_us(cfg: SelectionBoundConfig) -> float:
    """Upper bound on the selection-aided DMT for fixed L.

    Minimum of ``d_{k,ell}(ell K r / L)`` over ``k >= 0, ell >= 1,
    k + ell <= L``; equal to the MAC DMT when ``L = K``.
    """
    if not cfg.feasible:
        raise DomainError(f"r={cfg.r} exceeds L/K={cfg.L / cfg.K}")
    return _dbar(cfg.K, cfg.n_r, cfg.L, cfg.r)


def d0L_piecewise(K: int, n_r: int, L: int) -> PiecewiseLinearCurve:
    """Closed-form ``d_{0,L}`` curve through ``(p, (K-p)(n_r-p))``,
    ``p = 0..P``, and ``(L, 0)``."""
    if L < 1 or L > min(K, n_r):
        raise DomainError(f"L={L} outside [1, {min(K, n_r)}]")
    ratios = [(K - p) * (n_r - p) / (L - p) for p in range(L)]
    P = int(np.argmin(ratios))
    pts = [(p, (K - p) * (n_r - p)) for p in range(P + 1)] + [(L, 0)]
    return PiecewiseLinearCurve.from_points(pts)


def _selection_sup(K, n_r, L, r, budget, method_budget):
    coeffs = dkl_coefficients(K, n_r, 0, L)
    val, alpha = staircase_sup(coeffs, budget, K * r / L, descending=False)
    return ExponentBound(val, AscendingLevelVector(alpha), method_budget)


def cbar_us(cfg: SelectionBoundConfig) -> ExponentBound:
    """Complexity bound guaranteeing the selection-aided DMT bound."""
    if cfg.L == cfg.K:
        return solve_cbar_mac(MacConfig(cfg.K, cfg.n_r, cfg.r))
    if not cfg.feasible:
        raise DomainError(f"r={cfg.r} exceeds L/K={cfg.L / cfg.K}")
    return _selection_sup(cfg.K, cfg.n_r, cfg.L, cfg.r, dbar_us(cfg), "vertex-enumeration")


def cbar_red_us(cfg: SelectionBoundConfig) -> ExponentBound:
    """Complexity bound when selection only has to preserve the MAC DMT.

    If the selection DMT bound reaches the MAC DMT, the budget becomes the
    MAC DMT; otherwise (including ``r > L/K``) it falls back to the
    no-selection bound.
    """
    mac_cfg = MacConfig(cfg.K, cfg.n_r, cfg.r)
    d_mac = mac_dmt(mac_cfg)
    if cfg.L == cfg.K or not cfg.feasible or _dbar(cfg.K, cfg.n_r, cfg.L, cfg.r) < d_mac - _TOL:
        return solve_cbar_mac(mac_cfg)
    return _selection_sup(cfg.K, cfg.n_r, cfg.L, cfg.r, d_mac, "vertex-enumeration")


def cbar_red_us_min(K: int, n_r: int, r: float) -> tuple[float, int]:
    """Minimum over admissible L of :func:`cbar_red_us`; returns (value, L).

    An L whose selection bound falls short of the MAC DMT is reported as
    ``L = K``, since that is the bound actually used for it.
    """
    d_mac = mac_dmt(MacConfig(K, n_r, r))
    best = None
    for L in allowed_L(K, n_r):
        cfg = SelectionBoundConfig(K, n_r, L, r)
        v = cbar_red_us(cfg).value
        if L < K and (not cfg.feasible or _dbar(K, n_r, L, r) < d_mac - _TOL):
            L = K
        if best is None or v < best[0] - 1e-12:
            best = (v, L)
    return best


def optimize_L(K: int, n_r: int, r: float, allow_all_users: bool = True) -> tuple[int, float]:
    """Selection size maximizing the DMT bound at ``r``.

    With ``allow_all_users`` the choice includes ``L = K`` (no selection);
    otherwise only ``L <= min(K, n_r)``.  Ties go to the smaller L.  An L that
    cannot reach ``r`` is skipped; if none can, ``(None, 0.0)`` is returned.
    """
    if r < -_TOL or r > max_multiplexing_gain(K, n_r) + _TOL:
        raise DomainError(f"r={r} outside the achievable range")
    choices = allowed_L(K, n_r)
    if not allow_all_users:
        choices = [L for L in choices if L <= min(K, n_r)]
    best_L, best_d = None, -math.inf
    for L in choices:
        if L < K and r > L / K + _TOL:
            continue
        d = _dbar(K, n_r, L, r)
        if d > best_d + 1e-12:
            best_L, best_d = L, d
    if best_L is None:
        return None, 0.0
    return best_L, best_d


def feedback_bits(K: int, L: int) -> int:
    """Bits to announce which L of K users transmit: ``ceil(log2 C(K, L))``."""
    if L < 1 or L > K:
        raise DomainError(f"need 1 <= L <= K, got L={L}, K={K}")
    return (math.comb(K, L) - 1).bit_length()


def grid_oracle_d_kl(K, n_r, k, ell, r, step=1e-3, cell_cap=DEFAULT_CELL_CAP) -> float:
    """Exhaustive grid upper estimate of :func:`d_kl` (independent oracle)."""
    if r >= ell:
        return 0.0
    val, _, _, aborted = _kernels.grid_inf_kernel(
        dkl_coefficients(K, n_r, k, ell), float(r), float(step), int(cell_cap))
    if aborted:
        raise ResourceError(f"grid exceeds {cell_cap} cells at step {step}")
    return float(val)


def grid_oracle_cbar_us(cfg: SelectionBoundConfig, budget=None, step=1e-3,
                        cell_cap=DEFAULT_CELL_CAP) -> ExponentBound:
    """Grid version of the selection complexity supremum.

    ``budget`` defaults to the selection DMT bound (``cbar_us``); pass the
    MAC DMT to check the reduced-complexity variant.
    """
    if budget is None:
        budget = dbar_us(cfg)
    coeffs = dkl_coefficients(cfg.K, cfg.n_r, 0, cfg.L)
    val, alpha = grid_sup(coeffs, budget, cfg.per_user_rate, step, False, cell_cap)
    return ExponentBound(val, AscendingLevelVector(alpha), "grid-oracle")
