"""Piecewise-linear curves and the closed-form DMT functions.

All diversity curves here are piecewise linear in the multiplexing gain, so
they are carried around as breakpoint lists and evaluated by exact linear
interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError

_EPS = 1e-12


@dataclass(frozen=True)
class PiecewiseLinearCurve:
    """Breakpoint representation of a piecewise-linear function.

    Parameters
    ----------
    xs, ys : array_like
        Breakpoint abscissae (strictly increasing) and ordinates.
    """

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape:
            raise ValueError("xs and ys must be 1-D arrays of equal length")
        if xs.size < 2:
            raise ValueError("a curve needs at least 2 breakpoints")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("breakpoint x values must be strictly increasing")
        xs.flags.writeable = False
        ys.flags.writeable = False
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @classmethod
    def from_points(cls, points) -> "PiecewiseLinearCurve":
        pts = list(points)
        return cls(np.array([p[0] for p in pts]), np.array([p[1] for p in pts]))

    @property
    def x_min(self) -> float:
        return float(self.xs[0])

    @property
    def x_max(self) -> float:
        return float(self.xs[-1])

    @property
    def breakpoints(self) -> list[tuple[float, float]]:
        return list(zip(self.xs.tolist(), self.ys.tolist()))

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        if np.any(arr < self.x_min - _EPS) or np.any(arr > self.x_max + _EPS):
            raise DomainError(
                f"x outside curve domain [{self.x_min}, {self.x_max}]: {x!r}")
        out = np.interp(np.clip(arr, self.x_min, self.x_max), self.xs, self.ys)
        return float(out) if out.ndim == 0 else out


def mimo_dmt_curve(m: int, n: int) -> PiecewiseLinearCurve:
    """Optimal DMT of an m x n Rayleigh MIMO channel as a curve.

    Connects the integer points ``(k, (m-k)(n-k))`` for ``k = 0..min(m, n)``.
    """
    if m < 1 or n < 1:
        raise DomainError("antenna counts must be positive")
    ks = np.arange(min(m, n) + 1)
    return PiecewiseLinearCurve(ks.astype(float), ((m - ks) * (n - ks)).astype(float))


def mimo_dmt(m: int, n: int, r: float) -> float:
    if r < -_EPS or r > min(m, n) + _EPS:
        raise DomainError(f"r={r} outside [0, {min(m, n)}]")
    return mimo_dmt_curve(m, n)(r)


@dataclass(frozen=True)
class MacConfig:
    """Symmetric K-user SIMO MAC instance.

    ``r`` is the per-user multiplexing gain; it is limited to
    ``min(1, n_r / K)`` because every user has a single transmit antenna.
    """

    K: int
    n_r: int
    r: float = 0.0
    T: int = 1
    nu: int = field(init=False)

    def __post_init__(self):
        if self.K < 1 or self.n_r < 1 or self.T < 1:
            raise DomainError("K, n_r and T must be positive integers")
        if self.r < -_EPS or self.r > max_multiplexing_gain(self.K, self.n_r) + _EPS:
            raise DomainError(
                f"r={self.r} outside [0, {max_multiplexing_gain(self.K, self.n_r)}]")
        object.__setattr__(self, "nu", min(self.K, self.n_r))

    @property
    def r_max(self) -> float:
        return max_multiplexing_gain(self.K, self.n_r)

    def with_r(self, r: float) -> "MacConfig":
        return MacConfig(self.K, self.n_r, r, self.T)


def max_multiplexing_gain(K: int, n_r: int) -> float:
    return min(1.0, n_r / K)


@lru_cache(maxsize=256)
def mac_dmt_curve(K: int, n_r: int) -> PiecewiseLinearCurve:
    """Optimal K-user MAC DMT as a curve on ``[0, min(1, n_r/K)]``.

    Lightly loaded region ``r <= n_r/(K+1)``: ``n_r (1 - r)``.  Heavily loaded
    region: ``mimo_dmt(K, n_r, K r)``.  The two branches are checked to meet.
    """
    r_max = max_multiplexing_gain(K, n_r)
    boundary = n_r / (K + 1)
    if boundary >= r_max:
        return PiecewiseLinearCurve(np.array([0.0, r_max]), np.array([n_r, n_r * (1 - r_max)]))
    light = n_r * (1 - boundary)
    heavy = mimo_dmt(K, n_r, K * boundary)
    if abs(light - heavy) > 1e-12:
        raise AssertionError(
            f"MAC DMT branches disagree at r={boundary}: {light} vs {heavy}")
    pts = [(0.0, float(n_r)), (boundary, light)]
    for k in range(min(K, n_r) + 1):
        x = k / K
        if boundary + _EPS < x <= r_max + _EPS:
            pts.append((x, float((K - k) * (n_r - k))))
    return PiecewiseLinearCurve.from_points(pts)


def mac_dmt(cfg: MacConfig) -> float:
    return mac_dmt_curve(cfg.K, cfg.n_r)(cfg.r)
