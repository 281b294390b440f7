import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from macdmt.errors import DomainError
from macdmt.jv_selection import pivot_dominance_violation, select_users, select_users_batch
from macdmt.mac_sim import draw_channel


def test_largest_column_first():
    assert select_users(np.diag([3.0, 1.0]), 1).selected_users == (1,)
    H = np.diag([1.0, 5.0, 2.0])
    assert select_users(H, 2).selected_users[0] == 2


def test_random_3x4_invariant_and_unitarity(rng):
    H = draw_channel(4, 3, rng)
    res = select_users(H, 3)
    assert pivot_dominance_violation(res.R_jv, 3)[0] <= 1e-12
    # R = Q H P with Q unitary: column norms of H P are preserved
    np.testing.assert_allclose(np.linalg.norm(res.R_jv, axis=0),
                               np.linalg.norm(H[:, res.permutation], axis=0), rtol=1e-12)
    Q = res.R_jv[:, :3] @ np.linalg.inv(H[:, res.permutation][:, :3])
    np.testing.assert_allclose(Q.conj().T @ Q, np.eye(3), atol=1e-10)


def test_upper_triangular_real_diagonal(rng):
    R, _ = select_users_batch(draw_channel(5, 4, rng, size=50), 4)
    for i in range(4):
        assert np.all(R[:, i + 1:, i] == 0)
        assert np.all(R[:, i, i].imag == 0) and np.all(R[:, i, i].real >= 0)


def test_zero_matrix():
    res = select_users(np.zeros((3, 3)), 2)
    assert len(set(res.selected_users)) == 2
    assert np.all(res.R_jv == 0)
    assert pivot_dominance_violation(res.R_jv, 2)[0] <= 0


def test_bad_L():
    with pytest.raises(DomainError):
        select_users(np.eye(2), 3)
    with pytest.raises(DomainError):
        select_users(np.eye(2), 0)


def test_batch_matches_single(rng):
    H = draw_channel(4, 3, rng, size=20)
    R, perm = select_users_batch(H, 2)
    for b in range(20):
        single = select_users(H[b], 2)
        np.testing.assert_allclose(single.R_jv, R[b], atol=1e-14)
        assert single.selected_users == tuple(perm[b, :2] + 1)


@settings(max_examples=50, deadline=None)
@given(K=st.integers(1, 6), n_r=st.integers(1, 6), seed=st.integers(0, 2**32 - 1), data=st.data())
def test_invariant_property(K, n_r, seed, data):
    L = data.draw(st.integers(1, min(K, n_r)))
    H = draw_channel(K, n_r, np.random.default_rng(seed), size=8)
    R, perm = select_users_batch(H, L)
    scale = np.sum(np.abs(H) ** 2, axis=(1, 2))
    assert np.all(pivot_dominance_violation(R, L) <= 1e-12 * scale)
    np.testing.assert_allclose(np.linalg.norm(R, axis=(1, 2)), np.linalg.norm(H, axis=(1, 2)), rtol=1e-12)
    assert all(sorted(p) == list(range(K)) for p in perm)
