"""Oracle cross-check suites behind ``macdmt validate`` and the acceptance tests.

Each suite returns a list of :class:`Check` results; nothing here raises on
a failed comparison.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .curves import MacConfig, mac_dmt, max_multiplexing_gain
from .exponent_solver import (
    cbar_closed_nr1,
    cbar_closed_nrK,
    grid_oracle_sup,
    solve_cbar_mac,
)
from .jv_selection import pivot_dominance_violation, select_users_batch
from .mac_sim import SimConfig, draw_channel, mmse_qr, real_lift, run_trials, sphere_decode
from .selection_bounds import (
    SelectionBoundConfig,
    allowed_L,
    cbar_red_us,
    cbar_red_us_min,
    cbar_us,
    d0L_piecewise,
    d_kl,
    dbar_us,
    grid_oracle_cbar_us,
    grid_oracle_d_kl,
    optimize_L,
)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def closed_forms() -> list[Check]:
    out = []
    for K in (4, 5):
        grid = np.arange(0.0, 1.0 / K + 1e-12, 0.005)
        err = max(abs(solve_cbar_mac(MacConfig(K, 1, r)).value - cbar_closed_nr1(K, r)) for r in grid)
        out.append(Check(f"cbar n_r=1 K={K} vs (K-1)r", err <= 1e-9, f"max |diff| = {err:.3g} (tol 1e-9)"))
    for K in (3, 4, 5):
        grid = np.minimum(np.arange(0.0, 1.0 + 1e-12, 0.005), 1.0)
        err = max(abs(solve_cbar_mac(MacConfig(K, K, r)).value - cbar_closed_nrK(K, r)) for r in grid)
        out.append(Check(f"cbar n_r=K={K} vs closed form", err <= 1e-6, f"max |diff| = {err:.3g} (tol 1e-6)"))
    return out


def selection_anchors() -> list[Check]:
    out = []
    for K, n_r in ((4, 3), (3, 4)):
        vals = [dbar_us(SelectionBoundConfig(K, n_r, L, 0.0)) for L in (1, 2, 3)]
        err = max(abs(v - e) for v, e in zip(vals, (12, 7, 4)))
        out.append(Check(f"dbar_us(0) K={K} n_r={n_r}", err <= 1e-9, f"L=1,2,3 -> {vals}"))
        rmax = max_multiplexing_gain(K, n_r)
        grid = np.minimum(np.arange(0.0, rmax + 1e-12, 0.01), rmax)
        err = max(abs(dbar_us(SelectionBoundConfig(K, n_r, K, r)) - mac_dmt(MacConfig(K, n_r, r)))
                  for r in grid)
        out.append(Check(f"dbar_us L=K equals MAC DMT K={K} n_r={n_r}", err <= 1e-9,
                         f"max |diff| = {err:.3g} over {grid.size} points"))
    return out


def piecewise_remark() -> list[Check]:
    worst, count = 0.0, 0
    for K, n_r in itertools.product(range(1, 6), repeat=2):
        for L in range(1, min(K, n_r) + 1):
            curve = d0L_piecewise(K, n_r, L)
            for r in np.minimum(np.arange(0.0, L + 1e-12, 0.01), L):
                worst = max(worst, abs(curve(r) - d_kl(K, n_r, 0, L, r)))
                count += 1
    return [Check("d_{0,L} LP vs piecewise closed form", worst <= 1e-6,
                  f"max |diff| = {worst:.3g} over {count} points, K,n_r <= 5")]


def _sweep_configs(n, seed):
    """Random (K, n_r, L, r) with every grid problem of dimension <= 3."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        K, n_r = (int(v) for v in rng.integers(1, 6, size=2))
        if min(K, n_r) > 3:
            continue
        L = int(rng.choice(allowed_L(K, n_r)))
        hi = max_multiplexing_gain(K, n_r) if L == K else L / K
        out.append((K, n_r, L, float(rng.uniform(0.0, hi))))
    return out


def solver_vs_grid(n_configs=200, step=1e-3, tol=1e-2, seed=2024) -> list[Check]:
    comparisons, worst, bad = 0, 0.0, []

    def compare(label, exact, grid):
        nonlocal comparisons, worst
        comparisons += 1
        d = abs(exact - grid)
        worst = max(worst, d)
        if d > tol:
            bad.append(f"{label}: {exact:.6g} vs {grid:.6g}")

    for K, n_r, L, r in _sweep_configs(n_configs, seed):
        mac = MacConfig(K, n_r, r)
        compare(f"cbar_mac{(K, n_r, r)}", solve_cbar_mac(mac).value,
                min(grid_oracle_sup(mac, mac_dmt(mac), step).value, r * K))
        if L == K:
            continue
        cfg = SelectionBoundConfig(K, n_r, L, r)
        for k in range(L):
            for ell in range(1, L - k + 1):
                x = ell * K * r / L
                compare(f"d_kl{(K, n_r, k, ell, x)}", d_kl(K, n_r, k, ell, x),
                        grid_oracle_d_kl(K, n_r, k, ell, x, step))
        compare(f"cbar_us{(K, n_r, L, r)}", cbar_us(cfg).value, grid_oracle_cbar_us(cfg, step=step).value)
        d_mac = mac_dmt(mac)
        if dbar_us(cfg) >= d_mac - 1e-9:
            compare(f"cbar_red_us{(K, n_r, L, r)}", cbar_red_us(cfg).value,
                    grid_oracle_cbar_us(cfg, budget=d_mac, step=step).value)
    return [Check(f"solver vs grid oracle, {n_configs} configs, step {step}", not bad,
                  f"{comparisons} comparisons, max |diff| = {worst:.3g} (tol {tol})"
                  + (f"; failures: {bad[:3]}" if bad else ""))]


def optimal_L_regions(spacing=0.025, exclusion=0.01) -> list[Check]:
    expected = ((0.0, 0.2, 1), (0.2, 0.5, 2), (0.5, 1.0, 3))
    mismatches, n = [], 0
    for r in np.arange(spacing, 1.0 + 1e-12, spacing):
        r = round(float(r), 10)
        if any(abs(r - b) <= exclusion for b in (0.2, 0.5)):
            continue
        want = next(L for lo, hi, L in expected if lo < r <= hi)
        got, _ = optimize_L(3, 4, r, allow_all_users=True)
        n += 1
        if got != want:
            mismatches.append(f"r={r}: L={got} (expected {want})")
    return [Check("optimal L regions K=3 n_r=4", not mismatches,
                  f"{n - len(mismatches)}/{n} sample points agree" + (f"; {mismatches}" if mismatches else ""))]


def zero_complexity() -> list[Check]:
    low = [(r, cbar_red_us_min(4, 3, r)) for r in np.arange(0.01, 0.3 + 1e-12, 0.01)]
    zeros = [round(float(r), 3) for r, (v, _) in low if abs(v) <= 1e-12]
    out = [Check("min_L cbar_red_us = 0 somewhere in (0, 0.3], K=4 n_r=3", bool(zeros),
                 f"zero at r in {zeros[:3]}...{zeros[-1:]}" if zeros else "never zero")]
    high = []
    for r in np.arange(0.65, 0.745, 0.01):
        L_star, _ = optimize_L(4, 3, float(r), allow_all_users=True)
        v, _ = cbar_red_us_min(4, 3, float(r))
        c = solve_cbar_mac(MacConfig(4, 3, float(r))).value
        high.append((round(float(r), 3), L_star, abs(v - c)))
    ok = all(L == 4 and d <= 1e-9 for _, L, d in high)
    out.append(Check("min_L cbar_red_us equals cbar_mac where L* = K (r in [0.65, 0.74])", ok,
                     f"max |diff| = {max(d for *_, d in high):.3g}, L* = {sorted({L for _, L, _ in high})}"))
    return out


def sd_vs_exhaustive(n=10_000, seed=7) -> list[Check]:
    rng = np.random.default_rng(seed)
    K = n_r = 2
    cands = np.array(list(itertools.product((-1.0, 1.0), repeat=2 * K)))
    mismatches = 0
    for b in range(n):
        snr = 10 ** (rng.uniform(0, 25) / 10)
        M = math.sqrt(snr) * math.sqrt(0.5) * real_lift(draw_channel(K, n_r, rng))
        v = cands[rng.integers(len(cands))]
        w = rng.standard_normal(2 * n_r) * math.sqrt(0.5)
        y = M @ v + w
        ml = cands[np.argmin(np.sum((y[None, :] - cands @ M.T) ** 2, axis=1))]
        qr = mmse_qr(M, K, n_r, 1, 0.0, snr)
        out = sphere_decode(qr.R, qr.project(y), 2, np.linalg.norm(w) + 1.0)
        if out.s_hat is None or out.halted or not np.array_equal(out.s_hat, ml):
            mismatches += 1
    return [Check(f"sphere decoder vs exhaustive ML, {n} instances (K=n_r=2, 4-QAM)", mismatches == 0,
                  f"{n - mismatches}/{n} agree")]


def jv_invariants(n=10_000, seed=11, max_dim=6) -> list[Check]:
    rng = np.random.default_rng(seed)
    worst_pivot, worst_frob, triples = -np.inf, 0.0, 0
    for K, n_r in itertools.product(range(1, max_dim + 1), repeat=2):
        for L in range(1, min(K, n_r) + 1):
            H = draw_channel(K, n_r, rng, size=n)
            R, _ = select_users_batch(H, L)
            scale = np.sum(np.abs(H) ** 2, axis=(1, 2))
            worst_pivot = max(worst_pivot, float(np.max(pivot_dominance_violation(R, L) / scale)))
            fro_h = np.linalg.norm(H, axis=(1, 2))
            worst_frob = max(worst_frob, float(np.max(np.abs(np.linalg.norm(R, axis=(1, 2)) - fro_h) / fro_h)))
            triples += 1
    return [
        Check(f"pivot dominance on {n} matrices x {triples} (K, n_r, L)", worst_pivot <= 1e-12,
              f"max relative violation = {worst_pivot:.3g}"),
        Check("Frobenius norm preserved", worst_frob <= 1e-9, f"max relative error = {worst_frob:.3g}"),
    ]


def empirical_diversity(trials=100_000) -> list[Check]:
    rep1 = run_trials(SimConfig(K=1, n_r=1, r=0.0, snr_db=[20, 25, 30, 35, 40], trials_per_snr=trials, seed=1))
    rep2 = run_trials(SimConfig(K=2, n_r=2, r=0.0, snr_db=[10, 13, 16, 19, 22], trials_per_snr=trials, seed=2))
    d1, d2 = rep1.estimated_diversity, rep2.estimated_diversity
    return [
        Check("diversity slope K=1 n_r=1 r=0 (20-40 dB)", not d1.flagged and 0.7 <= d1.slope <= 1.3,
              f"{_slope_text(d1)}, window [0.7, 1.3]"),
        Check("diversity slope K=2 n_r=2 r=0 (10-22 dB)", not d2.flagged and d2.slope >= 1.4,
              f"{_slope_text(d2)}, need >= 1.4"),
    ]


def _slope_text(est):
    if est.flagged:
        return f"flagged ({est.reason})"
    return f"slope {est.slope:.4g} +/- {est.stderr:.2g} over {est.points_used} points"


def empirical_complexity(trials=20_000) -> list[Check]:
    cfg = SimConfig(K=2, n_r=2, r=0.5, snr_db=[15, 20, 25, 30, 35], trials_per_snr=trials, seed=3)
    rep = run_trials(cfg)
    ceiling = solve_cbar_mac(MacConfig(2, 2, 0.5)).value + 0.5
    c = rep.estimated_complexity
    return [Check("q99 node-count exponent K=n_r=2 r=0.5 (15-35 dB)", not c.flagged and c.slope <= ceiling,
                  f"{_slope_text(c)}, ceiling {ceiling}")]


def determinism(workers=(1, 8)) -> list[Check]:
    cfg = SimConfig(K=2, n_r=2, r=0.25, snr_db=[10, 15], trials_per_snr=3000, seed=99, chunk_size=500)
    blobs = [json.dumps(run_trials(cfg, workers=w).to_dict(), sort_keys=True) for w in workers for _ in (0, 1)]
    return [Check(f"identical reports for workers {workers}, two runs each", len(set(blobs)) == 1,
                  f"{len(set(blobs))} distinct report(s)")]


SUITES = {
    "closed-forms": closed_forms,
    "selection-anchors": selection_anchors,
    "piecewise": piecewise_remark,
    "solver-grid": solver_vs_grid,
    "optimal-L": optimal_L_regions,
    "zero-complexity": zero_complexity,
    "sd-oracle": sd_vs_exhaustive,
    "jv": jv_invariants,
    "empirical-diversity": empirical_diversity,
    "empirical-complexity": empirical_complexity,
    "determinism": determinism,
}
FAST_SUITES = ("closed-forms", "selection-anchors", "piecewise", "solver-grid", "optimal-L",
               "zero-complexity", "sd-oracle", "jv")
