import numpy as np

from macdmt import _kernels
from macdmt.mac_sim import draw_channel, mmse_qr, real_lift


def _pairs(kernel):
    return kernel, getattr(kernel, "py_func", kernel)


def test_sphere_kernel_fallback_parity(rng):
    levels = np.full(4, 4, dtype=np.int64)
    fast, slow = _pairs(_kernels.sphere_decode_kernel)
    for _ in range(50):
        M = 5 * real_lift(draw_channel(2, 2, rng))
        qr = mmse_qr(M, 2, 2, 1, 0.3, 100.0)
        z = qr.project(M @ (2 * rng.integers(0, 4, size=4) - 3) + rng.standard_normal(4))
        for budget in (-1, 3):
            a = fast(np.ascontiguousarray(qr.R), z, levels, 30.0, budget)
            b = slow(np.ascontiguousarray(qr.R), z, levels, 30.0, budget)
            assert np.array_equal(a[0], b[0]) and a[1:] == b[1:]


def test_grid_kernel_fallback_parity():
    w = np.array([1.0, 3.0, 5.0])
    for fast, slow in (_pairs(_kernels.grid_sup_kernel),):
        a = fast(w, 3.0, 0.4, 0.05, 10 ** 6)
        b = slow(w, 3.0, 0.4, 0.05, 10 ** 6)
        assert a[0] == b[0] and np.array_equal(a[1], b[1])
    fast, slow = _pairs(_kernels.grid_inf_kernel)
    a = fast(w, 1.3, 0.05, 10 ** 6)
    b = slow(w, 1.3, 0.05, 10 ** 6)
    assert a[0] == b[0]
