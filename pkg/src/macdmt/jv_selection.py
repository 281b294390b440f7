"""Greedy column-pivoted Householder user selection.

Each of the L iterations moves the trailing column of largest norm into
pivot position and zeroes it below the diagonal with a Householder
reflection, so the selection and the triangular factor come out together.
The loop runs over a stack of channel matrices at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of :func:`select_users`.

    ``selected_users`` are user labels (1-based, user ``u`` is column
    ``u - 1`` of ``H``) in pivot order.  ``permutation[j]`` is the 0-based
    column index now at position ``j`` of ``R_jv``, so
    ``R_jv = Q H[:, permutation]`` for a unitary ``Q``.
    """

    selected_users: tuple[int, ...]
    R_jv: np.ndarray
    permutation: np.ndarray


def _check(H, L):
    if H.ndim < 2 or 0 in H.shape[-2:]:
        raise DomainError("H must be a nonempty matrix (or stack of matrices)")
    if not np.all(np.isfinite(H)):
        raise DomainError("H must have finite entries")
    n_r, K = H.shape[-2:]
    if L < 1 or L > min(K, n_r):
        raise DomainError(f"L={L} outside [1, {min(K, n_r)}]")


def select_users_batch(H, L: int) -> tuple[np.ndarray, np.ndarray]:
    """Run the selection on a ``(B, n_r, K)`` stack.

    Returns ``(R_jv, permutation)`` with shapes ``(B, n_r, K)`` and ``(B, K)``;
    the selected users are ``permutation[:, :L]``.
    """
    H = np.asarray(H, dtype=complex)
    _check(H, L)
    R = H.copy()
    B, n_r, K = R.shape
    perm = np.tile(np.arange(K), (B, 1))
    rows = np.arange(B)
    for i in range(L):
        norms = np.sum(np.abs(R[:, i:, i:]) ** 2, axis=1)
        j = i + np.argmax(norms, axis=1)  # first maximum on ties
        R[rows, :, i], R[rows, :, j] = R[rows, :, j], R[rows, :, i].copy()
        perm[rows, i], perm[rows, j] = perm[rows, j], perm[rows, i].copy()

        # Householder reflection sends x to -e^{i theta}||x|| e_1; the phase
        # fix on the pivot row makes the diagonal real and nonnegative.
        x = R[:, i:, i]
        norm = np.linalg.norm(x, axis=1)
        theta = np.angle(x[:, 0])
        v = x.copy()
        v[:, 0] += np.exp(1j * theta) * norm
        vv = np.sum(np.abs(v) ** 2, axis=1)
        live = norm > 0
        coef = np.where(live, 2.0 / np.where(live, vv, 1.0), 0.0)
        tail = R[:, i:, i:]
        proj = np.einsum("bm,bmk->bk", v.conj(), tail)
        tail -= v[:, :, None] * (coef[:, None] * proj)[:, None, :]
        tail[:, 0, :] *= np.where(live, -np.exp(-1j * theta), 1.0)[:, None]
        R[:, i + 1:, i] = 0.0
        R[:, i, i] = np.abs(R[:, i, i])
    return R, perm


def select_users(H, L: int) -> SelectionResult:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2:
        raise DomainError("H must be a 2-D matrix")
    R, perm = select_users_batch(H[None], L)
    return SelectionResult(tuple(int(u) + 1 for u in perm[0, :L]), R[0], perm[0])


def pivot_dominance_violation(R_jv, L: int) -> np.ndarray:
    """Largest ``sum_{m>=i} |r_{m,j}|^2 - |r_{i,i}|^2`` over pivots ``i < L``
    and later columns ``j``, per matrix; nonpositive when the ordering
    invariant holds."""
    R = np.asarray(R_jv)
    R = R[None] if R.ndim == 2 else R
    worst = np.full(R.shape[0], -np.inf)
    for i in range(L):
        tails = np.sum(np.abs(R[:, i:, i + 1:]) ** 2, axis=1)
        if tails.shape[1]:
            worst = np.maximum(worst, tails.max(axis=1) - np.abs(R[:, i, i]) ** 2)
    return worst
