"""Zonotopic set representations and operations.

Vector sets: Zonotope <c, G>, ConstrainedZonotope <c, G, A, b> (factors
xi in [-1, 1]^m with A xi = b), and EmptySet.  Matrix sets: MatrixZonotope
<C, {G_l}> and ConstrainedMatrixZonotope (adds A beta = b over the matrix
factors).  Operations are module-level functions; the classes are thin
containers with validation and JSON round-tripping.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .linalg import LpProblem, lp_solve, pseudoinverse


class EmptySetError(ValueError):
    """Raised when an operation needs a nonempty set but got an empty one."""


def _vector(x):
    v = np.asarray(x, dtype=float).reshape(-1)
    assert np.all(np.isfinite(v)), "vector has non-finite entries"
    return v


def _gen_matrix(g, dim):
    if g is None:
        return np.zeros((dim, 0))
    a = np.asarray(g, dtype=float)
    if a.ndim == 1:
        a = a.reshape(dim, -1) if dim == 1 else a.reshape(-1, 1)
    assert a.ndim == 2 and a.shape[0] == dim, f"generator matrix must be {dim} x m"
    assert np.all(np.isfinite(a)), "generators have non-finite entries"
    return a


class EmptySet:
    """The empty subset of R^dim."""

    __slots__ = ("dim",)

    def __init__(self, dim):
        self.dim = int(dim)

    def __repr__(self):
        return f"EmptySet(dim={self.dim})"

    def to_dict(self):
        return {"type": "empty", "dim": self.dim}


class Zonotope:
    """<c, G>: the set {c + G xi : xi in [-1, 1]^m}."""

    __slots__ = ("c", "G")

    def __init__(self, center, generators=None):
        self.c = _vector(center)
        self.G = _gen_matrix(generators, self.c.size)

    @property
    def dim(self):
        return self.c.size

    @property
    def num_generators(self):
        return self.G.shape[1]

    def to_constrained(self):
        m = self.num_generators
        return ConstrainedZonotope(self.c, self.G, np.zeros((0, m)), np.zeros(0))

    def copy(self):
        return Zonotope(self.c.copy(), self.G.copy())

    def __repr__(self):
        return f"Zonotope(dim={self.dim}, gens={self.num_generators})"

    def to_dict(self):
        return {"type": "zonotope", "c": self.c.tolist(), "G": _array_to_json(self.G)}


class ConstrainedZonotope:
    """<c, G, A, b>: {c + G xi : xi in [-1, 1]^m, A xi = b}."""

    __slots__ = ("c", "G", "A", "b")

    def __init__(self, center, generators, a=None, b=None):
        self.c = _vector(center)
        self.G = _gen_matrix(generators, self.c.size)
        m = self.G.shape[1]
        if a is None:
            a = np.zeros((0, m))
        a = np.asarray(a, dtype=float)
        if a.size == 0:
            self.A = np.zeros((a.shape[0] if a.ndim == 2 else 0, m))
        else:
            self.A = a.reshape(-1, m)
        self.b = np.zeros(self.A.shape[0]) if b is None else _vector(b)
        assert self.b.size == self.A.shape[0], "constraint rhs length mismatch"
        assert np.all(np.isfinite(self.A)), "constraint matrix has non-finite entries"

    @property
    def dim(self):
        return self.c.size

    @property
    def num_generators(self):
        return self.G.shape[1]

    @property
    def num_constraints(self):
        return self.A.shape[0]

    def copy(self):
        return ConstrainedZonotope(self.c.copy(), self.G.copy(), self.A.copy(), self.b.copy())

    def __repr__(self):
        return (
            f"ConstrainedZonotope(dim={self.dim}, gens={self.num_generators}, "
            f"cons={self.num_constraints})"
        )

    def to_dict(self):
        return {
            "type": "constrained_zonotope",
            "c": self.c.tolist(),
            "G": _array_to_json(self.G),
            "A": _array_to_json(self.A),
            "b": self.b.tolist(),
        }


class MatrixZonotope:
    """<C, {G_l}>: {C + sum_l beta_l G_l : beta in [-1, 1]^kappa}.

    Generators are stored as one (kappa, rows, cols) array.
    """

    __slots__ = ("C", "generators")

    def __init__(self, center, generators=None):
        self.C = np.asarray(center, dtype=float)
        assert self.C.ndim == 2, "matrix-zonotope center must be 2-D"
        if generators is None:
            gens = np.zeros((0,) + self.C.shape)
        else:
            gens = np.asarray(generators, dtype=float)
            if gens.ndim == 2:
                gens = gens[None, :, :]
        assert gens.ndim == 3 and gens.shape[1:] == self.C.shape, (
            f"generators must be (kappa, {self.C.shape[0]}, {self.C.shape[1]})"
        )
        assert np.all(np.isfinite(self.C)) and np.all(np.isfinite(gens))
        self.generators = gens

    @property
    def shape(self):
        return self.C.shape

    @property
    def num_generators(self):
        return self.generators.shape[0]

    def at(self, beta):
        """The member matrix C + sum_l beta_l G_l."""
        beta = _vector(beta)
        assert beta.size == self.num_generators
        if beta.size == 0:
            return self.C.copy()
        return self.C + np.einsum("l,lij->ij", beta, self.generators)

    def __repr__(self):
        return f"MatrixZonotope(shape={self.shape}, gens={self.num_generators})"

    def to_dict(self):
        return {
            "type": "matrix_zonotope",
            "C": _array_to_json(self.C),
            "generators": [_array_to_json(g) for g in self.generators],
        }


class ConstrainedMatrixZonotope(MatrixZonotope):
    """Matrix zonotope whose factors also satisfy A beta = b.

    An optional block form of the constraints (A_blocks[l] stacked so that
    column l of A equals vec(A_blocks[l]) in column-major order, and
    b = vec(B_block)) can be kept for diagnostics; it is checked for
    consistency on construction.
    """

    __slots__ = ("A", "b", "A_blocks", "B_block")

    def __init__(self, center, generators, a, b, a_blocks=None, b_block=None):
        super().__init__(center, generators)
        kappa = self.num_generators
        a = np.asarray(a, dtype=float)
        if a.size == 0:
            self.A = np.zeros((a.shape[0] if a.ndim == 2 else 0, kappa))
        else:
            self.A = a.reshape(-1, kappa)
        self.b = _vector(b)
        assert self.b.size == self.A.shape[0]
        assert np.all(np.isfinite(self.A))
        self.A_blocks = None if a_blocks is None else np.asarray(a_blocks, dtype=float)
        self.B_block = None if b_block is None else np.asarray(b_block, dtype=float)
        if self.A_blocks is not None:
            # column l of A must be the column-major vec of block l
            flat = np.stack([blk.flatten(order="F") for blk in self.A_blocks])
            assert np.allclose(flat.T, self.A, atol=1e-10), "block form inconsistent with A"
        if self.B_block is not None:
            assert np.allclose(self.B_block.flatten(order="F"), self.b, atol=1e-10), \
                "block rhs inconsistent with b"

    @property
    def num_constraints(self):
        return self.A.shape[0]

    def __repr__(self):
        return (
            f"ConstrainedMatrixZonotope(shape={self.shape}, gens={self.num_generators}, "
            f"cons={self.num_constraints})"
        )

    def to_dict(self):
        d = super().to_dict()
        d["type"] = "constrained_matrix_zonotope"
        d["A"] = _array_to_json(self.A)
        d["b"] = self.b.tolist()
        return d


# ---------------------------------------------------------------------------
# JSON round-tripping.  Large sparse matrices are stored in triplet form.

_SPARSE_MIN_SIZE = 256
_SPARSE_MAX_DENSITY = 0.25


def _array_to_json(a):
    a = np.asarray(a, dtype=float)
    if a.size >= _SPARSE_MIN_SIZE:
        nz = np.nonzero(a)
        if len(nz[0]) <= _SPARSE_MAX_DENSITY * a.size:
            return {
                "shape": list(a.shape),
                "rows": nz[0].tolist(),
                "cols": nz[1].tolist(),
                "vals": a[nz].tolist(),
            }
    return a.tolist()


def _array_from_json(d):
    if isinstance(d, dict):
        a = np.zeros(tuple(d["shape"]))
        a[np.asarray(d["rows"], dtype=int), np.asarray(d["cols"], dtype=int)] = d["vals"]
        return a
    return np.asarray(d, dtype=float)


def set_from_dict(d):
    """Inverse of the to_dict methods; dispatches on d["type"]."""
    kind = d["type"]
    if kind == "empty":
        return EmptySet(d["dim"])
    if kind == "zonotope":
        return Zonotope(d["c"], _array_from_json(d["G"]))
    if kind == "constrained_zonotope":
        return ConstrainedZonotope(d["c"], _array_from_json(d["G"]), _array_from_json(d["A"]), d["b"])
    if kind == "matrix_zonotope":
        gens = np.stack([_array_from_json(g) for g in d["generators"]]) if d["generators"] else None
        c = _array_from_json(d["C"])
        return MatrixZonotope(c, gens if gens is not None else np.zeros((0,) + c.shape))
    if kind == "constrained_matrix_zonotope":
        gens = np.stack([_array_from_json(g) for g in d["generators"]]) if d["generators"] else None
        c = _array_from_json(d["C"])
        if gens is None:
            gens = np.zeros((0,) + c.shape)
        return ConstrainedMatrixZonotope(c, gens, _array_from_json(d["A"]), d["b"])
    raise ValueError(f"unknown set type {kind!r}")


# ---------------------------------------------------------------------------
# Basic operations


def _check_dims(a, b):
    assert a.dim == b.dim, f"dimension mismatch: {a.dim} vs {b.dim}"


def minkowski_sum(a, b):
    """Minkowski sum.  Plain + plain stays plain; otherwise constrained."""
    if isinstance(a, EmptySet) or isinstance(b, EmptySet):
        _check_dims(a, b)
        return EmptySet(a.dim)
    _check_dims(a, b)
    if isinstance(a, Zonotope) and isinstance(b, Zonotope):
        return Zonotope(a.c + b.c, np.hstack([a.G, b.G]))
    za, zb = _to_cz(a), _to_cz(b)
    qa, qb = za.num_constraints, zb.num_constraints
    ma, mb = za.num_generators, zb.num_generators
    g = np.hstack([za.G, zb.G])
    a_new = np.block([
        [za.A, np.zeros((qa, mb))],
        [np.zeros((qb, ma)), zb.A],
    ])
    return ConstrainedZonotope(za.c + zb.c, g, a_new, np.concatenate([za.b, zb.b]))


def _to_cz(z):
    return z.to_constrained() if isinstance(z, Zonotope) else z


def linear_map(m, z):
    """Image under x -> M x."""
    m = np.asarray(m, dtype=float)
    assert m.ndim == 2 and m.shape[1] == z.dim
    if isinstance(z, EmptySet):
        return EmptySet(m.shape[0])
    if isinstance(z, Zonotope):
        return Zonotope(m @ z.c, m @ z.G)
    return ConstrainedZonotope(m @ z.c, m @ z.G, z.A, z.b)


def cartesian_product(a, b):
    """Stacked set {(x, y) : x in a, y in b}."""
    if isinstance(a, EmptySet) or isinstance(b, EmptySet):
        return EmptySet(a.dim + b.dim)
    if isinstance(a, Zonotope) and isinstance(b, Zonotope):
        c = np.concatenate([a.c, b.c])
        g = np.block([
            [a.G, np.zeros((a.dim, b.num_generators))],
            [np.zeros((b.dim, a.num_generators)), b.G],
        ])
        return Zonotope(c, g)
    za, zb = _to_cz(a), _to_cz(b)
    c = np.concatenate([za.c, zb.c])
    g = np.block([
        [za.G, np.zeros((za.dim, zb.num_generators))],
        [np.zeros((zb.dim, za.num_generators)), zb.G],
    ])
    a_new = np.block([
        [za.A, np.zeros((za.num_constraints, zb.num_generators))],
        [np.zeros((zb.num_constraints, za.num_generators)), zb.A],
    ])
    return ConstrainedZonotope(c, g, a_new, np.concatenate([za.b, zb.b]))


# ---------------------------------------------------------------------------
# Matrix-set times vector-set products.
#
# For M = <C, {G_l}> (kappa generators) and Z = <c_z, G_z> (p generators) the
# product M Z is over-approximated by a zonotope whose generator columns come
# in three blocks, in this order:
#   alpha block: C @ G_z[:, i]          (p columns, factor alpha_i)
#   beta block:  G_l @ c_z              (kappa columns, factor beta_l)
#   gamma block: G_l @ G_z[:, i]        (kappa * p columns, one per (l, i),
#                                        laid out l-major: l slow, i fast)
# The bilinear products beta_l * alpha_i are relaxed to fresh factors, which
# is what makes this an over-approximation.  Matrix-factor constraints carry
# over to the beta block only; gamma columns stay unconstrained.


def _product_blocks(m, c_z, g_z):
    kappa = m.num_generators
    p = g_z.shape[1]
    n = m.shape[0]
    center = m.C @ c_z
    alpha = m.C @ g_z
    if kappa:
        beta = np.einsum("lij,j->il", m.generators, c_z)
        gamma = np.einsum("lij,jp->lip", m.generators, g_z).transpose(1, 0, 2).reshape(n, kappa * p)
    else:
        beta = np.zeros((n, 0))
        gamma = np.zeros((n, 0))
    return center, alpha, beta, gamma


def mz_times_zonotope(m, z):
    """Over-approximating product of a matrix zonotope and a zonotope."""
    assert isinstance(z, Zonotope)
    assert m.shape[1] == z.dim
    center, alpha, beta, gamma = _product_blocks(m, z.c, z.G)
    return Zonotope(center, np.hstack([alpha, beta, gamma]))


def cmz_times_zonotope(m, z):
    """Product with matrix-factor constraints carried onto the beta block."""
    assert isinstance(m, ConstrainedMatrixZonotope)
    assert isinstance(z, Zonotope)
    assert m.shape[1] == z.dim
    center, alpha, beta, gamma = _product_blocks(m, z.c, z.G)
    p, kappa = alpha.shape[1], beta.shape[1]
    q = m.num_constraints
    a_hat = np.hstack([np.zeros((q, p)), m.A, np.zeros((q, kappa * p))])
    return ConstrainedZonotope(center, np.hstack([alpha, beta, gamma]), a_hat, m.b)


def cmz_times_czonotope(m, z):
    """Product of a (possibly constrained) matrix zonotope and a constrained
    zonotope.  Factor constraints of both operands are kept, zero-padded onto
    their own blocks."""
    z = _to_cz(z)
    assert m.shape[1] == z.dim
    center, alpha, beta, gamma = _product_blocks(m, z.c, z.G)
    p, kappa = alpha.shape[1], beta.shape[1]
    pz = z.num_constraints
    q = m.A.shape[0] if isinstance(m, ConstrainedMatrixZonotope) else 0
    a_top = np.hstack([z.A, np.zeros((pz, kappa + kappa * p))])
    if q:
        a_bot = np.hstack([np.zeros((q, p)), m.A, np.zeros((q, kappa * p))])
        a_hat = np.vstack([a_top, a_bot])
        b_hat = np.concatenate([z.b, m.b])
    else:
        a_hat, b_hat = a_top, z.b
    return ConstrainedZonotope(center, np.hstack([alpha, beta, gamma]), a_hat, b_hat)


# ---------------------------------------------------------------------------
# Queries


def support(z, direction):
    """Support value max{d . x : x in z}.  Raises EmptySetError on empty sets."""
    d = _vector(direction)
    if isinstance(z, EmptySet):
        raise EmptySetError("support of the empty set")
    assert d.size == z.dim
    if isinstance(z, Zonotope) or z.num_constraints == 0:
        return float(d @ z.c + np.sum(np.abs(d @ z.G)))
    m = z.num_generators
    res = lp_solve(LpProblem(d @ z.G, z.A, z.b, -np.ones(m), np.ones(m)))
    if res.status == "infeasible":
        raise EmptySetError("support of an empty constrained zonotope")
    return float(d @ z.c + res.objective)


def interval_hull(z):
    """Tight axis-aligned bounds as a (lo, hi) pair of arrays."""
    if isinstance(z, EmptySet):
        raise EmptySetError("interval hull of the empty set")
    if isinstance(z, Zonotope) or z.num_constraints == 0:
        r = np.sum(np.abs(z.G), axis=1)
        return z.c - r, z.c + r
    n = z.dim
    lo, hi = np.empty(n), np.empty(n)
    e = np.zeros(n)
    for i in range(n):
        e[:] = 0.0
        e[i] = 1.0
        hi[i] = support(z, e)
        e[i] = -1.0
        lo[i] = -support(z, e)
    return lo, hi


def is_empty(z):
    if isinstance(z, EmptySet):
        return True
    if isinstance(z, Zonotope) or z.num_constraints == 0:
        return False
    m = z.num_generators
    res = lp_solve(LpProblem(np.zeros(m), z.A, z.b, -np.ones(m), np.ones(m)))
    return res.status == "infeasible"


def contains_point(z, x, tol=1e-9):
    """LP membership test: is x within tol of the set?

    Looks for factors xi with |xi| <= 1 + tol, A xi = b, and
    |c + G xi - x| <= tol componentwise.
    """
    x = _vector(x)
    if isinstance(z, EmptySet):
        return False
    assert x.size == z.dim
    cz = _to_cz(z)
    m, n, q = cz.num_generators, cz.dim, cz.num_constraints
    # variables: [xi (m), slack (n)]
    a_eq = np.block([
        [cz.G, np.eye(n)],
        [cz.A, np.zeros((q, n))],
    ])
    b_eq = np.concatenate([x - cz.c, cz.b])
    lb = np.concatenate([-np.ones(m) * (1 + tol), -np.ones(n) * tol])
    ub = -lb
    res = lp_solve(LpProblem(np.zeros(m + n), a_eq, b_eq, lb, ub))
    return res.status == "feasible"


def halfspace_intersection_with_plan(z, normal, offset):
    """halfspace_intersection that also reports what happened.

    The second return value is ("pass",) when the halfspace does not cut,
    ("empty",) when the sets are disjoint, and ("cut", row, w, rhs) when a
    factor and constraint row [row, w] xi' = rhs were appended.  A member
    point with factors xi gets the new factor (rhs - row . xi) / w.
    """
    h = _vector(normal)
    c = float(offset)
    if isinstance(z, EmptySet):
        return z, ("empty",)
    assert h.size == z.dim
    cz = _to_cz(z)
    d = float(h @ cz.c)
    row = h @ cz.G
    r = float(np.sum(np.abs(row)))
    if d + r <= c:
        return z, ("pass",)
    if d - r > c:
        return EmptySet(z.dim), ("empty",)
    w = (c - d + r) / 2.0
    rhs = (c - d - r) / 2.0
    m, q = cz.num_generators, cz.num_constraints
    g = np.hstack([cz.G, np.zeros((cz.dim, 1))])
    a_new = np.block([
        [cz.A, np.zeros((q, 1))],
        [row.reshape(1, m), np.array([[w]])],
    ])
    out = ConstrainedZonotope(cz.c, g, a_new, np.concatenate([cz.b, [rhs]]))
    return out, ("cut", row, w, rhs)


def halfspace_intersection(z, normal, offset):
    """Intersection with {x : h . x <= c}.

    Returns the input unchanged when the halfspace does not cut it, EmptySet
    when they are disjoint, and otherwise a constrained zonotope with one
    extra factor and one extra constraint row.
    """
    return halfspace_intersection_with_plan(z, normal, offset)[0]


# ---------------------------------------------------------------------------
# Order reduction


@dataclass
class ReductionPlan:
    """Bookkeeping for replaying a Girard reduction on factor values.

    kept/boxed index the input generator columns; the output columns are the
    kept ones (in input order) followed by one axis-aligned box column per
    entry of box_rows.
    """

    kept: np.ndarray
    boxed: np.ndarray
    box_rows: np.ndarray
    box_radii: np.ndarray

    def replay(self, xi, g_boxed):
        """Map factor values for the input columns to factor values for the
        output columns.  xi is (N, m_in); g_boxed is the boxed generator block
        (dim x len(boxed))."""
        out_kept = xi[:, self.kept]
        resid = xi[:, self.boxed] @ g_boxed.T  # (N, dim)
        box = resid[:, self.box_rows] / self.box_radii
        return np.hstack([out_kept, box])


def _girard_split(g, n_keep):
    """Indices (kept, boxed) keeping the n_keep columns with the largest
    l1-minus-linf score; the smallest-score columns get boxed."""
    score = np.sum(np.abs(g), axis=0) - np.max(np.abs(g), axis=0)
    order = np.argsort(score, kind="stable")
    boxed = np.sort(order[: g.shape[1] - n_keep])
    kept = np.sort(order[g.shape[1] - n_keep:])
    return kept, boxed


def _box_block(g, boxed):
    """Axis-aligned block covering the boxed columns; zero-radius rows dropped."""
    radii = np.sum(np.abs(g[:, boxed]), axis=1)
    rows = np.nonzero(radii > 0.0)[0]
    block = np.zeros((g.shape[0], rows.size))
    block[rows, np.arange(rows.size)] = radii[rows]
    return rows, radii[rows], block


def reduce_girard_with_plan(z, max_order):
    """reduce_girard that also returns the ReductionPlan (None if unchanged)."""
    assert isinstance(z, Zonotope)
    assert max_order >= 1
    n, m = z.dim, z.num_generators
    cap = int(math.floor(max_order * n))
    if m <= cap:
        return z, None
    kept, boxed = _girard_split(z.G, cap - n)
    rows, radii, block = _box_block(z.G, boxed)
    g = np.hstack([z.G[:, kept], block])
    return Zonotope(z.c, g), ReductionPlan(kept, boxed, rows, radii)


def reduce_girard(z, max_order):
    """Girard order reduction: box the lowest-scoring generators so that at
    most max_order * dim generators remain."""
    return reduce_girard_with_plan(z, max_order)[0]


def free_columns(cz):
    """Mask of generator columns with all-zero constraint coefficients."""
    if cz.num_constraints == 0:
        return np.ones(cz.num_generators, dtype=bool)
    return ~np.any(cz.A != 0.0, axis=0)


def reduce_free_generators_with_plan(z, max_order):
    """Constrained-zonotope order reduction touching only unconstrained columns.

    Columns that appear in a constraint are never boxed.  The free columns are
    Girard-reduced to a budget of max(dim, max_order * dim - n_constrained).
    Output column order: constrained columns (input order), kept free columns
    (input order), box columns.  Returns (reduced, plan) where plan is
    (constrained_idx, free_idx, ReductionPlan) or None if unchanged.
    """
    assert isinstance(z, ConstrainedZonotope)
    assert max_order >= 1
    n = z.dim
    free = free_columns(z)
    free_idx = np.nonzero(free)[0]
    cons_idx = np.nonzero(~free)[0]
    budget = max(n, int(math.floor(max_order * n)) - cons_idx.size)
    if free_idx.size <= budget:
        return z, None
    g_free = z.G[:, free_idx]
    kept, boxed = _girard_split(g_free, budget - n)
    rows, radii, block = _box_block(g_free, boxed)
    g = np.hstack([z.G[:, cons_idx], g_free[:, kept], block])
    a = np.hstack([
        z.A[:, cons_idx],
        np.zeros((z.num_constraints, kept.size + rows.size)),
    ])
    out = ConstrainedZonotope(z.c, g, a, z.b)
    return out, (cons_idx, free_idx, ReductionPlan(kept, boxed, rows, radii))


def reduce_free_generators(z, max_order):
    return reduce_free_generators_with_plan(z, max_order)[0]


# ---------------------------------------------------------------------------
# Volume and projections


def volume(z, max_subsets=10_000_000):
    """Exact volume of a plain zonotope: 2^n * sum over n-column subsets of
    |det G_S|.  Refuses when the subset count exceeds max_subsets."""
    assert isinstance(z, Zonotope), "volume is defined for plain zonotopes"
    n, m = z.dim, z.num_generators
    if m < n:
        return 0.0
    n_subsets = math.comb(m, n)
    if n_subsets > max_subsets:
        raise ValueError(
            f"volume would enumerate {n_subsets} generator subsets (> {max_subsets}); "
            "reduce the zonotope first"
        )
    idx = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(m), n)),
        dtype=np.intp,
        count=n_subsets * n,
    ).reshape(n_subsets, n)
    gt = z.G.T
    total = 0.0
    chunk = max(1, 4_000_000 // (n * n))
    for start in range(0, n_subsets, chunk):
        sub = gt[idx[start : start + chunk]]  # (k, n, n)
        total += float(np.sum(np.abs(np.linalg.det(sub))))
    return (2.0 ** n) * total


def polygon_area(vertices):
    """Shoelace area of an ordered 2-D vertex list."""
    v = np.asarray(vertices, dtype=float)
    if v.shape[0] < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _zonotope_polygon(c, g):
    """Exact boundary of a 2-D zonotope, counterclockwise."""
    norms = np.linalg.norm(g, axis=0)
    g = g[:, norms > 0.0]
    m = g.shape[1]
    if m == 0:
        return c.reshape(1, 2)
    # flip generators into the upper half-plane, then sort by angle
    flip = (g[1] < 0.0) | ((g[1] == 0.0) & (g[0] < 0.0))
    g = np.where(flip, -g, g)
    order = np.argsort(np.arctan2(g[1], g[0]), kind="stable")
    g = g[:, order]
    verts = np.empty((2 * m, 2))
    v = c - g.sum(axis=1)
    for i in range(m):
        verts[i] = v
        v = v + 2.0 * g[:, i]
    for i in range(m):
        verts[m + i] = v
        v = v - 2.0 * g[:, i]
    return verts


def project_polygon(z, dims, n_dirs=32):
    """Vertices of the projection onto two coordinates, counterclockwise.

    Plain zonotopes are projected exactly.  Constrained zonotopes are
    over-approximated by intersecting n_dirs support halfplanes.
    """
    assert len(dims) == 2
    if isinstance(z, EmptySet):
        raise EmptySetError("projection of the empty set")
    sel = np.zeros((2, z.dim))
    sel[0, dims[0]] = 1.0
    sel[1, dims[1]] = 1.0
    flat = linear_map(sel, z)
    if isinstance(flat, Zonotope) or flat.num_constraints == 0:
        return _zonotope_polygon(flat.c, flat.G)
    angles = np.linspace(0.0, 2.0 * np.pi, n_dirs, endpoint=False)
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    vals = np.array([support(flat, d) for d in dirs])
    verts = []
    for i in range(n_dirs):
        j = (i + 1) % n_dirs
        a = np.stack([dirs[i], dirs[j]])
        det = np.linalg.det(a)
        if abs(det) < 1e-12:
            continue
        verts.append(np.linalg.solve(a, np.array([vals[i], vals[j]])))
    return np.asarray(verts)


# ---------------------------------------------------------------------------
# Sampling


def project_factors(a, b, xi, passes=100, tol=1e-9):
    """Alternating projection of factor rows onto {A xi = b} intersect the unit
    box.  xi is (N, m); returns (projected, converged_mask)."""
    xi = np.array(xi, dtype=float, ndmin=2)
    if a.shape[0] == 0:
        return np.clip(xi, -1.0, 1.0), np.ones(xi.shape[0], dtype=bool)
    a_pinv = pseudoinverse(a)
    for _ in range(passes):
        xi = xi - (xi @ a.T - b) @ a_pinv.T
        xi = np.clip(xi, -1.0, 1.0)
        eq_res = np.max(np.abs(xi @ a.T - b), axis=1)
        if np.all(eq_res <= tol):
            break
    ok = np.max(np.abs(xi @ a.T - b), axis=1) <= tol
    return xi, ok


def sample_factors(z, rng, count, max_tries=50):
    """count feasible factor rows (count x m) for a zonotope or constrained
    zonotope, drawn uniformly then projected onto the constraints."""
    cz = _to_cz(z)
    m = cz.num_generators
    if cz.num_constraints == 0:
        return rng.uniform(-1.0, 1.0, size=(count, m))
    out = np.empty((0, m))
    for _ in range(max_tries):
        raw = rng.uniform(-1.0, 1.0, size=(count, m))
        proj, ok = project_factors(cz.A, cz.b, raw)
        out = np.vstack([out, proj[ok]])
        if out.shape[0] >= count:
            return out[:count]
    raise EmptySetError("could not sample feasible factors; set may be empty or thin")


def sample_points(z, rng, count):
    """count points from the set, via factors drawn with sample_factors."""
    assert not isinstance(z, EmptySet)
    xi = sample_factors(z, rng, count)
    return z.c + xi @ z.G.T
