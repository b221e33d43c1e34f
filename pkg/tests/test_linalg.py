import itertools

import numpy as np
import pytest
import scipy.sparse

from datareach.linalg import (
    LpProblem,
    lp_solve,
    matrix_rank,
    min_singular_value,
    nullspace_basis,
    pseudoinverse,
    svd,
)


def test_svd_reconstruction_and_orthogonality():
    rng = np.random.default_rng(0)
    for _ in range(25):
        rows, cols = rng.integers(1, 9, size=2)
        m = rng.normal(size=(rows, cols))
        u, s, v = svd(m)
        assert u.shape == (rows, rows) and v.shape == (cols, cols)
        assert np.all(np.diff(s) <= 1e-12)
        assert np.allclose(u.T @ u, np.eye(rows), atol=1e-10)
        assert np.allclose(v.T @ v, np.eye(cols), atol=1e-10)
        sigma = np.zeros((rows, cols))
        sigma[: s.size, : s.size] = np.diag(s)
        assert np.allclose(u @ sigma @ v.T, m, atol=1e-10)


def test_pseudoinverse_penrose_conditions():
    rng = np.random.default_rng(1)
    for _ in range(25):
        rows, cols = rng.integers(1, 9, size=2)
        rank = rng.integers(1, min(rows, cols) + 1)
        m = rng.normal(size=(rows, rank)) @ rng.normal(size=(rank, cols))
        p = pseudoinverse(m)
        assert np.allclose(m @ p @ m, m, atol=1e-8)
        assert np.allclose(p @ m @ p, p, atol=1e-8)
        assert np.allclose((m @ p).T, m @ p, atol=1e-8)
        assert np.allclose((p @ m).T, p @ m, atol=1e-8)


def test_pseudoinverse_is_right_inverse_for_full_row_rank():
    rng = np.random.default_rng(2)
    for _ in range(10):
        d, t = 4, 20
        phi = rng.normal(size=(d, t))
        h = pseudoinverse(phi)
        assert np.allclose(phi @ h, np.eye(d), atol=1e-10)
        # minimal Frobenius norm among all right inverses
        null = nullspace_basis(phi)
        for _ in range(5):
            perturbed = h + null @ rng.normal(size=(null.shape[1], d))
            assert np.linalg.norm(perturbed, "fro") >= np.linalg.norm(h, "fro") - 1e-10


def test_nullspace_basis_properties():
    rng = np.random.default_rng(3)
    for _ in range(25):
        rows, cols = rng.integers(1, 9, size=2)
        rank = int(rng.integers(0, min(rows, cols) + 1))
        m = rng.normal(size=(rows, rank)) @ rng.normal(size=(rank, cols)) if rank else np.zeros((rows, cols))
        n = nullspace_basis(m)
        assert n.shape == (cols, cols - matrix_rank(m))
        assert n.shape[1] == cols - rank
        assert np.allclose(m @ n, 0.0, atol=1e-9)
        assert np.allclose(n.T @ n, np.eye(n.shape[1]), atol=1e-10)


def test_min_singular_value():
    m = np.diag([3.0, 2.0, 0.5])
    assert np.isclose(min_singular_value(m), 0.5)
    assert np.isclose(min_singular_value(np.zeros((2, 3))), 0.0)
    rng = np.random.default_rng(4)
    a = rng.normal(size=(5, 7))
    assert np.isclose(min_singular_value(a), np.linalg.svd(a, compute_uv=False)[-1])


def test_lp_solve_known_solutions():
    # max x1 over the segment x1 + x2 = 0 inside the unit box: x = (1, -1)
    res = lp_solve(LpProblem(np.array([1.0, 0.0]), np.array([[1.0, 1.0]]), np.array([0.0]),
                             -np.ones(2), np.ones(2)))
    assert res.status == "feasible"
    assert np.isclose(res.objective, 1.0)
    assert np.allclose(res.x, [1.0, -1.0])

    res = lp_solve(LpProblem(np.zeros(2), np.array([[1.0, 0.0]]), np.array([5.0]),
                             -np.ones(2), np.ones(2)))
    assert res.status == "infeasible"

    res = lp_solve(LpProblem(np.array([1.0]), None, None, None, None))
    assert res.status == "unbounded"


def _brute_force_box_lp(c, a_eq, b_eq):
    """Enumerate basic solutions of max c.x, A x = b, x in [-1, 1]^n."""
    n, q = c.size, a_eq.shape[0]
    best = None
    for basic in itertools.combinations(range(n), q):
        nonbasic = [i for i in range(n) if i not in basic]
        sub = a_eq[:, basic]
        if abs(np.linalg.det(sub)) < 1e-10:
            continue
        for signs in itertools.product([-1.0, 1.0], repeat=n - q):
            x = np.empty(n)
            x[nonbasic] = signs
            rhs = b_eq - a_eq[:, nonbasic] @ x[nonbasic]
            x[list(basic)] = np.linalg.solve(sub, rhs)
            if np.all(np.abs(x) <= 1.0 + 1e-9):
                val = c @ x
                if best is None or val > best:
                    best = val
    return best


def test_lp_solve_matches_vertex_enumeration():
    rng = np.random.default_rng(5)
    for _ in range(30):
        n = int(rng.integers(2, 5))
        q = int(rng.integers(1, n))
        c = rng.normal(size=n)
        a_eq = rng.normal(size=(q, n))
        # build a feasible rhs from an interior point
        b_eq = a_eq @ rng.uniform(-0.5, 0.5, size=n)
        res = lp_solve(LpProblem(c, a_eq, b_eq, -np.ones(n), np.ones(n)))
        brute = _brute_force_box_lp(c, a_eq, b_eq)
        assert res.status == "feasible"
        assert brute is not None
        assert np.isclose(res.objective, brute, atol=1e-8)


def test_lp_solve_sparse_equalities():
    rng = np.random.default_rng(6)
    n = 20
    c = rng.normal(size=n)
    a = rng.normal(size=(4, n))
    b = a @ rng.uniform(-0.3, 0.3, size=n)
    dense = lp_solve(LpProblem(c, a, b, -np.ones(n), np.ones(n)))
    sparse = lp_solve(LpProblem(c, scipy.sparse.csr_matrix(a), b, -np.ones(n), np.ones(n)))
    assert dense.status == sparse.status == "feasible"
    assert np.isclose(dense.objective, sparse.objective, atol=1e-8)


def test_lp_solve_rejects_bad_shapes():
    with pytest.raises(AssertionError):
        lp_solve(LpProblem(np.ones(3), np.ones((2, 2)), np.ones(2), -np.ones(3), np.ones(3)))
