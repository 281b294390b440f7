"""Complexity-exponent upper bounds for sphere decoding on the MAC.

The bound is a supremum of a separable piecewise-linear objective over
ordered singularity levels under a weighted diversity budget.  It is solved
exactly by enumerating the vertices of every linear piece, and checked
against an exhaustive grid search.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .curves import MacConfig, mac_dmt
from .errors import DomainError, ResourceError, UnsupportedConfigurationError

_TOL = 1e-9
DEFAULT_CELL_CAP = 50_000_000


@dataclass(frozen=True)
class OrderedLevelVector:
    """Nonnegative singularity levels in a fixed order (descending by default)."""

    levels: np.ndarray
    descending: bool = True

    def __post_init__(self):
        lv = np.asarray(self.levels, dtype=float).reshape(-1)
        if lv.size and lv.min() < -_TOL:
            raise DomainError("levels must be nonnegative")
        d = np.diff(lv)
        if self.descending and np.any(d > _TOL):
            raise DomainError("levels must be descending")
        if not self.descending and np.any(d < -_TOL):
            raise DomainError("levels must be ascending")
        lv.flags.writeable = False
        object.__setattr__(self, "levels", lv)

    def __len__(self):
        return self.levels.size


@dataclass(frozen=True)
class ExponentBound:
    value: float
    argmax_levels: OrderedLevelVector
    method: str  # "vertex-enumeration" | "closed-form" | "grid-oracle"


def clipped_gain(x, rate):
    """Per-level objective ``[min(rate, rate + x - 1)]^+``."""
    return np.clip(np.asarray(x, dtype=float) - (1.0 - rate), 0.0, rate)


def staircase_sup(weights, budget, rate, descending=True):
    """Maximize ``sum_i clipped_gain(x_i, rate)`` over ordered ``x >= 0``
    subject to ``weights @ x <= budget``.

    On each cell where every coordinate stays on one linear piece of the
    objective (pieces split at 0, 1 - rate and 1) the problem is a bounded
    LP, so the optimum is a vertex: every coordinate sits at a piece
    boundary except at most one run of equal coordinates, whose common
    value is fixed by the budget.  All such vertices are enumerated.

    Returns
    -------
    value : float
    x : ndarray
        A maximizer, in the requested order.
    """
    w = np.asarray(weights, dtype=float)
    n = w.size
    if budget < -_TOL:
        raise DomainError(f"negative budget {budget}")
    budget = max(budget, 0.0)
    # work in descending order; ascending callers get the reversed result
    wd = w if descending else w[::-1]
    levels = sorted({0.0, min(max(1.0 - rate, 0.0), 1.0), 1.0}, reverse=True)
    # intervals a free run may occupy, described by the level index it sits under
    bounds = [(levels[0], math.inf)] + [(levels[i + 1], levels[i]) for i in range(len(levels) - 1)]

    best_val, best_x = -1.0, None
    for run in range(n + 1):
        for counts in _compositions(n - run, len(levels)):
            for gap in (range(len(bounds)) if run else [0]):
                x = _assemble(levels, counts, run, gap)
                fixed = np.isfinite(x)
                cost = float(wd[fixed] @ x[fixed])
                if cost > budget + _TOL:
                    continue
                if run:
                    lo, hi = bounds[gap]
                    wrun = float(wd[~fixed].sum())
                    t = hi if wrun <= 0 else min(hi, (budget - cost) / wrun)
                    if not math.isfinite(t) or t < lo - _TOL:
                        continue
                    x[~fixed] = max(t, lo)
                val = float(clipped_gain(x, rate).sum())
                if val > best_val + 1e-15:
                    best_val, best_x = val, x
    if not descending:
        best_x = best_x[::-1].copy()
    return best_val, best_x


def _compositions(total, parts):
    for cut in itertools.combinations(range(total + parts - 1), parts - 1):
        prev, out = -1, []
        for c in cut:
            out.append(c - prev - 1)
            prev = c
        out.append(total + parts - 2 - prev)
        yield out


def _assemble(levels, counts, run, gap):
    # descending layout: free run goes above levels[gap] (below levels[gap-1])
    parts = []
    for i, (lvl, cnt) in enumerate(zip(levels, counts)):
        if i == gap and run:
            parts.append(np.full(run, np.nan))
        parts.append(np.full(cnt, lvl))
    return np.concatenate(parts) if parts else np.zeros(0)


def _mac_problem(cfg: MacConfig):
    weights = abs(cfg.K - cfg.n_r) + 2 * np.arange(1, cfg.nu + 1) - 1
    offset = (cfg.K - cfg.n_r) * cfg.r * cfg.T if cfg.K > cfg.n_r else 0.0
    return weights.astype(float), offset


def solve_cbar_mac_d(cfg: MacConfig, d_target: float) -> ExponentBound:
    """Complexity-exponent upper bound guaranteeing diversity ``d_target``.

    ``d_target`` above the optimal MAC DMT is accepted and treated as a
    plain budget (an extrapolation of the bound).
    """
    if d_target < 0:
        raise DomainError(f"d_target must be >= 0, got {d_target}")
    weights, offset = _mac_problem(cfg)
    val, mu = staircase_sup(weights, d_target, cfg.r, descending=True)
    return ExponentBound(offset + cfg.T * val, OrderedLevelVector(mu), "vertex-enumeration")


def solve_cbar_mac(cfg: MacConfig) -> ExponentBound:
    """Bound for achieving the optimal MAC DMT with uncoded QAM (``T = 1``)."""
    if cfg.T != 1:
        raise UnsupportedConfigurationError("the optimal-DMT bound is stated for T = 1")
    b = solve_cbar_mac_d(cfg, mac_dmt(cfg))
    ceiling = cfg.r * cfg.K * cfg.T
    if b.value > ceiling:
        return ExponentBound(ceiling, b.argmax_levels, b.method)
    return b


def cbar_closed_nr1(K: int, r: float) -> float:
    """Single-antenna receiver: ``(K - 1) r`` on ``[0, 1/K]``."""
    if r < -_TOL or r > 1.0 / K + _TOL:
        raise DomainError(f"r={r} outside [0, 1/{K}]")
    return (K - 1) * r


def cbar_closed_nrK(K: int, r: float) -> float:
    """Closed form for ``n_r = K``.

    ``r j + (r - 1 + (K(1-r) - j^2) / (2j + 1))^+`` with
    ``j = floor(sqrt(K (1 - r)))``.
    """
    if r < -_TOL or r > 1 + _TOL:
        raise DomainError(f"r={r} outside [0, 1]")
    budget = max(K * (1.0 - r), 0.0)
    j = math.floor(math.sqrt(budget) + 1e-12)
    return r * j + max(r - 1.0 + (budget - j * j) / (2 * j + 1), 0.0)


def cbar_large_nr(K: int, n_r: int, r: float) -> float:
    """Limit form for ``n_r > K``: ``min(r, (K-1)(1-r)^+ / (n_r-K+1))``."""
    if n_r <= K:
        raise DomainError("requires n_r > K")
    if r < -_TOL or r > 1 + _TOL:
        raise DomainError(f"r={r} outside [0, 1]")
    return min(r, (K - 1) * max(1.0 - r, 0.0) / (n_r - K + 1))


def grid_sup(weights, budget, rate, step, descending=True, cell_cap=DEFAULT_CELL_CAP):
    """Exhaustive grid version of :func:`staircase_sup` (independent oracle)."""
    if step <= 0:
        raise DomainError("step must be positive")
    w = np.asarray(weights, dtype=float)
    wd = w if descending else w[::-1]
    val, idx, cells, aborted = _kernels.grid_sup_kernel(
        np.ascontiguousarray(wd), float(max(budget, 0.0)), float(rate), float(step), int(cell_cap))
    if aborted:
        raise ResourceError(f"grid exceeds {cell_cap} cells at step {step}")
    x = idx.astype(float) * step
    if not descending:
        x = x[::-1].copy()
    return float(val), x


def grid_oracle_sup(cfg: MacConfig, d_target: float, step: float = 1e-3,
                    cell_cap: int = DEFAULT_CELL_CAP) -> ExponentBound:
    """Best point of the grid ``{0, step, ...}^nu`` inside the budget region.

    Within ``T * nu * step`` of the true supremum.
    """
    if d_target < 0:
        raise DomainError(f"d_target must be >= 0, got {d_target}")
    weights, offset = _mac_problem(cfg)
    val, mu = grid_sup(weights, d_target, cfg.r, step, True, cell_cap)
    return ExponentBound(offset + cfg.T * val, OrderedLevelVector(mu), "grid-oracle")
