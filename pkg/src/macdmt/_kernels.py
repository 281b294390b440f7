"""Inner loops: sphere-decoder tree search, exhaustive ML, grid oracles."""

import numpy as np

from ._jit import njit


@njit
def sphere_decode_kernel(R, z, n_levels, radius2, node_budget):
    """Depth-first Schnorr-Euchner search over a centered PAM box.

    Coordinate ``k`` takes values ``2*j - (n_levels[k] - 1)`` for
    ``j = 0..n_levels[k]-1``.  Returns ``(j_hat, nodes, halted, found)``;
    ``node_budget < 0`` means unlimited.
    """
    n = R.shape[0]
    v = np.zeros(n)
    best_idx = np.zeros(n, dtype=np.int64)
    dist = np.zeros(n + 1)
    center = np.zeros(n)
    up = np.zeros(n)
    down = np.zeros(n)
    nodes = 0
    halted = False
    found = False
    best = radius2
    k = n - 1
    fresh = True
    while True:
        if fresh:
            acc = z[k]
            for j in range(k + 1, n):
                acc -= R[k, j] * v[j]
            c = acc / R[k, k]
            center[k] = c
            top = n_levels[k] - 1.0
            x = 2.0 * np.floor((c + top) / 2.0 + 0.5) - top
            if x > top:
                x = top
            elif x < -top:
                x = -top
            up[k] = x
            down[k] = x - 2.0
            fresh = False
        # next-closest untried level on either side of the center
        top = n_levels[k] - 1.0
        c = center[k]
        has_up = up[k] <= top
        has_down = down[k] >= -top
        if not has_up and not has_down:
            k += 1
            if k == n:
                break
            continue
        if has_up and (not has_down or abs(up[k] - c) <= abs(c - down[k])):
            x = up[k]
            up[k] = x + 2.0
        else:
            x = down[k]
            down[k] = x - 2.0
        e = (c - x) * R[k, k]
        d = dist[k + 1] + e * e
        if d > best or (found and d >= best):
            # farther candidates on this level are no closer
            k += 1
            if k == n:
                break
            continue
        if node_budget >= 0 and nodes >= node_budget:
            halted = True
            break
        nodes += 1
        v[k] = x
        dist[k] = d
        if k == 0:
            best = d
            found = True
            for j in range(n):
                best_idx[j] = int(round((v[j] + n_levels[j] - 1.0) / 2.0))
        else:
            k -= 1
            fresh = True
    return best_idx, nodes, halted, found


@njit
def sphere_decode_batch(R, Z, n_levels, radius2, node_budget):
    B, n = Z.shape
    idx = np.zeros((B, n), dtype=np.int64)
    nodes = np.zeros(B, dtype=np.int64)
    halted = np.zeros(B, dtype=np.bool_)
    found = np.zeros(B, dtype=np.bool_)
    for b in range(B):
        i, m, h, f = sphere_decode_kernel(R[b], Z[b], n_levels, radius2, node_budget)
        idx[b] = i
        nodes[b] = m
        halted[b] = h
        found[b] = f
    return idx, nodes, halted, found


@njit
def exhaustive_ml_batch(M, Y, n_levels):
    """Exhaustive minimizer of ``||y - M v||`` over the full PAM box."""
    B, m, n = M.shape
    out = np.zeros((B, n), dtype=np.int64)
    total = 1
    for k in range(n):
        total *= n_levels[k]
    j = np.zeros(n, dtype=np.int64)
    v = np.zeros(n)
    for b in range(B):
        best = np.inf
        for code in range(total):
            rem = code
            for k in range(n):
                j[k] = rem % n_levels[k]
                rem //= n_levels[k]
                v[k] = 2.0 * j[k] - (n_levels[k] - 1.0)
            s = 0.0
            for row in range(m):
                acc = Y[b, row]
                for k in range(n):
                    acc -= M[b, row, k] * v[k]
                s += acc * acc
            if s < best:
                best = s
                out[b] = j
    return out


@njit
def _clip_gain(x, threshold, rate):
    g = x - threshold
    if g < 0.0:
        return 0.0
    if g > rate:
        return rate
    return g


@njit
def grid_sup_kernel(weights, budget, rate, step, cell_cap):
    """Brute-force grid maximization for the complexity-bound problems.

    Maximizes ``sum_i clip(x_i - (1 - rate), 0, rate)`` over descending
    grid vectors ``x = step * idx`` with ``sum_i weights[i] x_i <= budget``.
    Every prefix of the vector is enumerated; the last coordinate is set to
    its largest feasible grid value, which is optimal because the objective
    is nondecreasing in it.  Returns ``(value, idx, cells, aborted)``.
    """
    n = weights.shape[0]
    thr = 1.0 - rate
    tol = 1e-12 * (1.0 + budget)
    idx = np.zeros(n, dtype=np.int64)
    best_idx = np.zeros(n, dtype=np.int64)
    best = -1.0
    cells = 0
    # odometer over the first n-1 coordinates
    hi = np.zeros(n, dtype=np.int64)
    used = np.zeros(n + 1)
    level = 0
    big = np.int64(1) << 40
    if n == 1:
        top = int(np.floor((budget + tol) / (weights[0] * step))) if weights[0] > 0 else big
        idx[0] = top
        return _clip_gain(top * step, thr, rate), idx, 1, False
    # initialise range of coordinate 0
    hi[0] = int(np.floor((budget + tol) / (weights[0] * step))) if weights[0] > 0 else big
    idx[0] = -1
    while level >= 0:
        idx[level] += 1
        if idx[level] > hi[level]:
            level -= 1
            continue
        used[level + 1] = used[level] + weights[level] * idx[level] * step
        if level < n - 2:
            level += 1
            room = budget - used[level]
            cap = int(np.floor((room + tol) / (weights[level] * step))) if weights[level] > 0 else big
            hi[level] = min(idx[level - 1], cap)
            idx[level] = -1
            continue
        # last coordinate: largest feasible grid value
        room = budget - used[n - 1]
        cap = int(np.floor((room + tol) / (weights[n - 1] * step))) if weights[n - 1] > 0 else big
        last = min(idx[n - 2], cap)
        if last < 0:
            continue
        cells += 1
        if cells > cell_cap:
            return best, best_idx, cells, True
        val = _clip_gain(last * step, thr, rate)
        for i in range(n - 1):
            val += _clip_gain(idx[i] * step, thr, rate)
        if val > best:
            best = val
            for i in range(n - 1):
                best_idx[i] = idx[i]
            best_idx[n - 1] = last
    return best, best_idx, cells, False


@njit
def grid_inf_kernel(coeffs, rate, step, cell_cap):
    """Brute-force grid minimization of ``sum_i coeffs[i] a_i``.

    Runs over ascending grid vectors ``a = step * idx`` in ``[0, 1]`` with
    ``sum_i (1 - a_i) <= rate``.  The largest coordinate is set to the
    smallest grid value meeting the constraint (the objective is
    nondecreasing in it).  Returns ``(value, idx, cells, aborted)``.
    """
    n = coeffs.shape[0]
    top = int(np.floor(1.0 / step + 1e-9))
    tol = 1e-12
    idx = np.zeros(n, dtype=np.int64)
    best_idx = np.zeros(n, dtype=np.int64)
    best = np.inf
    cells = 0
    if n == 1:
        need = max(0.0, 1.0 - rate)
        if need > 1.0 + tol:
            return np.inf, idx, 1, False
        idx[0] = int(np.ceil(need / step - 1e-9))
        return coeffs[0] * need, idx, 1, False
    slack = np.zeros(n + 1)
    level = 0
    idx[0] = -1
    slack[0] = rate
    while level >= 0:
        idx[level] += 1
        if idx[level] > top:
            level -= 1
            continue
        slack[level + 1] = slack[level] - (1.0 - idx[level] * step)
        # remaining coordinates are at most 1, contributing >= 0 to the sum
        if slack[level + 1] < -tol:
            continue
        if level < n - 2:
            level += 1
            idx[level] = idx[level - 1] - 1
            continue
        need = max(idx[n - 2] * step, 1.0 - slack[n - 1])
        if need > 1.0 + tol:
            continue
        last = int(np.ceil(need / step - 1e-9))
        cells += 1
        if cells > cell_cap:
            return best, best_idx, cells, True
        val = coeffs[n - 1] * need
        for i in range(n - 1):
            val += coeffs[i] * idx[i] * step
        if val < best:
            best = val
            for i in range(n - 1):
                best_idx[i] = idx[i]
            best_idx[n - 1] = last
    return best, best_idx, cells, False
