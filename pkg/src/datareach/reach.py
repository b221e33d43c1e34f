"""Reachable-set propagation for linear and piecewise-affine dynamics.

One step maps the current state set R through

    R' = M (R x U) + W

where M is a (possibly constrained) matrix zonotope of models over the lifted
vector [x; u], U is the propagation input set, and W the disturbance set.
With a plain matrix zonotope and a plain state set everything stays a
zonotope; matrix-factor constraints or guard splits turn the state sets into
constrained zonotopes, whose constrained columns are exempt from order
reduction.

Piecewise-affine propagation splits every fragment along the mode guards,
propagates each nonempty piece through its mode's model set, and tracks the
fragment lineage.

Each step can emit a replay plan: enough bookkeeping to push explicit factor
certificates for sampled trajectories through products, reductions, and guard
splits.  That gives a constructive containment proof per trajectory that is
much cheaper than one LP per point, and is used by the soundness self-checks.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .modelset import DataSet
from .sets import (
    ConstrainedMatrixZonotope,
    ConstrainedZonotope,
    EmptySet,
    MatrixZonotope,
    ReductionPlan,
    Zonotope,
    _box_block,
    _girard_split,
    cartesian_product,
    halfspace_intersection_with_plan,
    is_empty,
    support,
)


# ---------------------------------------------------------------------------
# results


@dataclass
class Fragment:
    """One piece of a reachable set: its set, the mode it was propagated
    through (None before the first step), and the index of its parent
    fragment at the previous step."""

    set: object
    mode: object = None
    parent: int = -1


@dataclass
class StepRecord:
    fragments: list

    @property
    def sets(self):
        return [f.set for f in self.fragments]


@dataclass
class ReachResult:
    """Reachable fragments per step; steps[0] holds the initial set."""

    steps: list
    metadata: dict = field(default_factory=dict)

    @property
    def horizon(self):
        return len(self.steps) - 1

    def fragment_counts(self):
        return [len(s.fragments) for s in self.steps]

    def union_support(self, k, direction):
        return max(support(f.set, direction) for f in self.steps[k].fragments)

    def union_interval_hull(self, k):
        from .sets import interval_hull

        lows, highs = zip(*(interval_hull(f.set) for f in self.steps[k].fragments))
        return np.min(lows, axis=0), np.max(highs, axis=0)


# ---------------------------------------------------------------------------
# single propagation steps (with replay plans)


@dataclass
class PlainStepPlan:
    """Replay data for a plain-zonotope step (no constraints anywhere)."""

    p: int                      # lifted factor count (state + input columns)
    kappa: int
    w_count: int
    c_lift: np.ndarray
    g_lift: np.ndarray
    w_g: np.ndarray
    model: MatrixZonotope
    rplan: object               # ReductionPlan over [alpha, beta, gamma, w] or None
    kept_cols: np.ndarray       # generator columns kept by the reduction


@dataclass
class CzStepPlan:
    """Replay data for a constrained step (fused product + reduction)."""

    p: int
    kappa: int
    w_count: int
    c_lift: np.ndarray
    g_lift: np.ndarray
    w_g: np.ndarray
    model: MatrixZonotope
    cons_alpha: np.ndarray      # indices of alpha columns carrying constraints
    free_alpha: np.ndarray
    beta_in_free: bool
    rplan: object               # ReductionPlan over the free collection or None
    kept_free: np.ndarray       # kept free-collection indices (all, if no reduction)
    kept_cols: np.ndarray


def _lift(r, u_prop):
    lifted = cartesian_product(r, u_prop)
    if isinstance(lifted, Zonotope):
        return lifted.c, lifted.G, np.zeros((0, lifted.num_generators)), np.zeros(0)
    return lifted.c, lifted.G, lifted.A, lifted.b


def _step_plain(model, r, u_prop, w, max_order):
    """R' = model (R x U) + W for plain sets; returns (Zonotope, PlainStepPlan)."""
    c_lift, g_lift, _, _ = _lift(r, u_prop)
    n = model.shape[0]
    p = g_lift.shape[1]
    kappa = model.num_generators
    center = model.C @ c_lift + w.c
    alpha = model.C @ g_lift
    if kappa:
        beta = np.einsum("lij,j->il", model.generators, c_lift)
        gamma = np.einsum("lij,jp->lip", model.generators, g_lift)
        gamma = gamma.transpose(1, 0, 2).reshape(n, kappa * p)
        g_all = np.hstack([alpha, beta, gamma, w.G])
    else:
        g_all = np.hstack([alpha, w.G])
    cap = int(math.floor(max_order * n))
    if g_all.shape[1] <= cap:
        out = Zonotope(center, g_all)
        plan = PlainStepPlan(p, kappa, w.num_generators, c_lift, g_lift, w.G,
                             model, None, g_all)
        return out, plan
    kept, boxed = _girard_split(g_all, cap - n)
    rows, radii, block = _box_block(g_all, boxed)
    kept_cols = g_all[:, kept]
    out = Zonotope(center, np.hstack([kept_cols, block]))
    plan = PlainStepPlan(p, kappa, w.num_generators, c_lift, g_lift, w.G, model,
                         ReductionPlan(kept, boxed, rows, radii), kept_cols)
    return out, plan


def _step_cz(model, r, u_prop, w, max_order):
    """Constrained step: product, disturbance sum, and free-column reduction
    fused so the gamma block's zero constraint columns are never materialized.
    Returns (ConstrainedZonotope, CzStepPlan)."""
    c_lift, g_lift, a_z, b_z = _lift(r, u_prop)
    n = model.shape[0]
    p = g_lift.shape[1]
    kappa = model.num_generators
    q_m = model.A.shape[0] if isinstance(model, ConstrainedMatrixZonotope) else 0
    beta_constrained = q_m > 0

    center = model.C @ c_lift + w.c
    alpha = model.C @ g_lift
    if kappa:
        beta = np.einsum("lij,j->il", model.generators, c_lift)
        gamma = np.einsum("lij,jp->lip", model.generators, g_lift)
        gamma = gamma.transpose(1, 0, 2).reshape(n, kappa * p)
    else:
        beta = np.zeros((n, 0))
        gamma = np.zeros((n, 0))

    alpha_free_mask = ~np.any(a_z != 0.0, axis=0) if a_z.shape[0] else np.ones(p, dtype=bool)
    free_alpha = np.nonzero(alpha_free_mask)[0]
    cons_alpha = np.nonzero(~alpha_free_mask)[0]

    if beta_constrained:
        free_block = np.hstack([alpha[:, free_alpha], gamma, w.G])
    else:
        free_block = np.hstack([alpha[:, free_alpha], beta, gamma, w.G])
    # constrained columns are never boxed, so the order cap governs the free
    # block alone; subtracting the constrained count would collapse the free
    # budget to n once the model constraints alone exceed the cap
    budget = max(n, int(math.floor(max_order * n)))

    if free_block.shape[1] <= budget:
        kept_free = np.arange(free_block.shape[1])
        rplan = None
        kept_cols = free_block
        free_out = free_block
        n_box = 0
    else:
        kept_free, boxed = _girard_split(free_block, budget - n)
        rows, radii, block = _box_block(free_block, boxed)
        rplan = ReductionPlan(kept_free, boxed, rows, radii)
        kept_cols = free_block[:, kept_free]
        free_out = np.hstack([kept_cols, block])
        n_box = block.shape[1]

    if beta_constrained:
        g_out = np.hstack([alpha[:, cons_alpha], beta, free_out])
        q_z = a_z.shape[0]
        a_out = np.zeros((q_z + q_m, g_out.shape[1]))
        a_out[:q_z, : cons_alpha.size] = a_z[:, cons_alpha]
        a_out[q_z:, cons_alpha.size : cons_alpha.size + kappa] = model.A
        b_out = np.concatenate([b_z, model.b])
    else:
        g_out = np.hstack([alpha[:, cons_alpha], free_out])
        q_z = a_z.shape[0]
        a_out = np.zeros((q_z, g_out.shape[1]))
        a_out[:, : cons_alpha.size] = a_z[:, cons_alpha]
        b_out = b_z
    out = ConstrainedZonotope(center, g_out, a_out, b_out)
    plan = CzStepPlan(p, kappa, w.num_generators, c_lift, g_lift, w.G, model,
                      cons_alpha, free_alpha, not beta_constrained, rplan, kept_free,
                      kept_cols)
    return out, plan


def propagation_step(model, r, u_prop, w, max_order):
    """One reachability step with its replay plan."""
    plain = isinstance(r, Zonotope) and not isinstance(model, ConstrainedMatrixZonotope)
    if plain:
        return _step_plain(model, r, u_prop, w, max_order)
    return _step_cz(model, r, u_prop, w, max_order)


# ---------------------------------------------------------------------------
# factor replay


def _plain_factor_groups(plan, idx, xi_lift, beta_star, xi_w):
    """Factor values for selected columns of the unreduced [alpha, beta,
    gamma, w] layout.  idx is sorted; xi_lift is (N, p)."""
    p, kappa = plan.p, plan.kappa
    n_tr = xi_lift.shape[0]
    out = np.empty((n_tr, idx.size))
    b0, b1, b2 = p, p + kappa, p + kappa + kappa * p
    for j, col in enumerate(idx):
        if col < b0:
            out[:, j] = xi_lift[:, col]
        elif col < b1:
            out[:, j] = beta_star[col - b0]
        elif col < b2:
            g = col - b1
            out[:, j] = beta_star[g // p] * xi_lift[:, g % p]
        else:
            out[:, j] = xi_w[:, col - b2]
    return out


def replay_plain_step(plan, xi_state, xi_u, beta_star, xi_w):
    """Push factors through a plain step; returns factors for the result."""
    xi_lift = np.hstack([xi_state, xi_u])
    assert xi_lift.shape[1] == plan.p
    m_beta = (np.einsum("l,lij->ij", beta_star, plan.model.generators)
              if plan.kappa else np.zeros(plan.model.shape))
    if plan.rplan is None:
        idx = np.arange(plan.p + plan.kappa + plan.kappa * plan.p + plan.w_count)
        return _plain_factor_groups(plan, idx, xi_lift, beta_star, xi_w)
    kept_f = _plain_factor_groups(plan, plan.rplan.kept, xi_lift, beta_star, xi_w)
    # total contribution of every column, via the closed form
    lift_pts = xi_lift @ plan.g_lift.T                      # (N, d)
    full = lift_pts @ (plan.model.C + m_beta).T + xi_w @ plan.w_g.T
    full = full + (m_beta @ plan.c_lift)[None, :]
    resid = full - kept_f @ plan.kept_cols.T
    box = resid[:, plan.rplan.box_rows] / plan.rplan.box_radii
    return np.hstack([kept_f, box])


def _free_factor_groups(plan, idx, xi_lift, beta_star, xi_w):
    """Factor values for selected columns of the free collection
    [alpha_free, (beta), gamma, w]."""
    p, kappa = plan.p, plan.kappa
    n_af = plan.free_alpha.size
    n_tr = xi_lift.shape[0]
    n_beta = kappa if plan.beta_in_free else 0
    out = np.empty((n_tr, idx.size))
    b0, b1, b2 = n_af, n_af + n_beta, n_af + n_beta + kappa * p
    for j, col in enumerate(idx):
        if col < b0:
            out[:, j] = xi_lift[:, plan.free_alpha[col]]
        elif col < b1:
            out[:, j] = beta_star[col - b0]
        elif col < b2:
            g = col - b1
            out[:, j] = beta_star[g // p] * xi_lift[:, g % p]
        else:
            out[:, j] = xi_w[:, col - b2]
    return out


def replay_cz_step(plan, xi_state, xi_u, beta_star, xi_w):
    """Push factors through a constrained step."""
    xi_lift = np.hstack([xi_state, xi_u])
    assert xi_lift.shape[1] == plan.p
    n_tr = xi_lift.shape[0]
    m_beta = (np.einsum("l,lij->ij", beta_star, plan.model.generators)
              if plan.kappa else np.zeros(plan.model.shape))
    kept_f = _free_factor_groups(plan, plan.kept_free, xi_lift, beta_star, xi_w)
    if plan.rplan is None:
        free_part = kept_f
    else:
        lift_pts = xi_lift @ plan.g_lift.T
        full = lift_pts @ m_beta.T + xi_w @ plan.w_g.T
        full = full + (xi_lift[:, plan.free_alpha] @ plan.g_lift[:, plan.free_alpha].T) @ plan.model.C.T
        if plan.beta_in_free:
            full = full + (m_beta @ plan.c_lift)[None, :]
        resid = full - kept_f @ plan.kept_cols.T
        box = resid[:, plan.rplan.box_rows] / plan.rplan.box_radii
        free_part = np.hstack([kept_f, box])
    pieces = [xi_lift[:, plan.cons_alpha]]
    if not plan.beta_in_free:
        pieces.append(np.broadcast_to(beta_star, (n_tr, plan.kappa)))
    pieces.append(free_part)
    return np.hstack(pieces)


def replay_step(plan, xi_state, xi_u, beta_star, xi_w):
    if isinstance(plan, PlainStepPlan):
        return replay_plain_step(plan, xi_state, xi_u, beta_star, xi_w)
    return replay_cz_step(plan, xi_state, xi_u, beta_star, xi_w)


def replay_split(events, xi, w_floor=1e-12):
    """Push factors through a recorded guard split (list of halfspace events)."""
    for ev in events:
        if ev[0] == "pass":
            continue
        assert ev[0] == "cut"
        _, row, w, rhs = ev
        # w ~ 0 means the slice is a face; the new factor is then arbitrary
        sigma = (rhs - xi @ row) / w if abs(w) > w_floor else np.zeros(xi.shape[0])
        xi = np.hstack([xi, sigma[:, None]])
    return xi


# ---------------------------------------------------------------------------
# LTI propagation


def propagate_lti(model, x0, u_prop, w, horizon, max_order, plan_sink=None):
    """Reachable sets of x' = M [x; u] + w for k = 0..horizon.

    model: matrix zonotope (constrained or not) over the lifted vector.
    plan_sink: optional list collecting the per-step replay plans.
    """
    assert horizon >= 0
    r = x0
    steps = [StepRecord([Fragment(r)])]
    for _ in range(horizon):
        r, plan = propagation_step(model, r, u_prop, w, max_order)
        if plan_sink is not None:
            plan_sink.append(plan)
        steps.append(StepRecord([Fragment(r, mode=None, parent=0)]))
    return ReachResult(steps)


# ---------------------------------------------------------------------------
# piecewise-affine systems


@dataclass
class Halfspace:
    """normal . x <= offset"""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        self.normal = np.asarray(self.normal, dtype=float).reshape(-1)
        self.offset = float(self.offset)


@dataclass
class PwaMode:
    """One affine mode x' = a x + b u (+ w) active on the region given by the
    conjunction of halfspaces.  a and b may be None for data-driven use."""

    region: list
    a: np.ndarray = None
    b: np.ndarray = None

    def __post_init__(self):
        self.region = [h if isinstance(h, Halfspace) else Halfspace(*h) for h in self.region]
        if self.a is not None:
            self.a = np.asarray(self.a, dtype=float)
        if self.b is not None:
            self.b = np.asarray(self.b, dtype=float)


@dataclass
class PwaSpec:
    """Modes with guard regions.  Classification is first-match over the
    declared order, with closed regions: a state exactly on a shared guard
    belongs to the earliest declared mode, so the mode owning the boundary
    must come first."""

    modes: list

    @property
    def n_modes(self):
        return len(self.modes)

    @property
    def n_x(self):
        return self.modes[0].region[0].normal.size

    def classify(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        for q, mode in enumerate(self.modes):
            if all(h.normal @ x <= h.offset for h in mode.region):
                return q
        raise ValueError(f"state {x} matches no mode region")

    def classify_batch(self, xs):
        xs = np.asarray(xs, dtype=float)
        out = np.full(xs.shape[0], -1, dtype=int)
        for q in reversed(range(self.n_modes)):
            ok = np.ones(xs.shape[0], dtype=bool)
            for h in self.modes[q].region:
                ok &= xs @ h.normal <= h.offset
            out[ok] = q
        if np.any(out < 0):
            raise ValueError("some states match no mode region")
        return out

    def true_matrices(self):
        assert all(m.a is not None and m.b is not None for m in self.modes)
        return [(m.a, m.b) for m in self.modes]


def partition_data_by_mode(trajectories, pwa, return_indices=False):
    """Split transition data by the mode active at the start state.

    trajectories: list of (X, U) with X of shape (n_x, T_i + 1) and U of
    shape (n_u, T_i).  Returns one DataSet per mode; modes with fewer
    transitions than n_x + n_u trigger a warning.  With return_indices the
    global transition index of every column (counting across trajectories in
    order) is returned alongside, one index array per mode.
    """
    n_modes = pwa.n_modes
    buckets = [([], [], [], []) for _ in range(n_modes)]
    n_u = None
    offset = 0
    for x_traj, u_traj in trajectories:
        x_traj = np.asarray(x_traj, dtype=float)
        u_traj = np.asarray(u_traj, dtype=float)
        n_u = u_traj.shape[0]
        modes = pwa.classify_batch(x_traj[:, :-1].T)
        for t, q in enumerate(modes):
            buckets[q][0].append(x_traj[:, t + 1])
            buckets[q][1].append(x_traj[:, t])
            buckets[q][2].append(u_traj[:, t])
            buckets[q][3].append(offset + t)
        offset += modes.size
    out = []
    indices = []
    for q, (xp, xm, um, idx) in enumerate(buckets):
        if xp:
            data = DataSet(np.column_stack(xp), np.column_stack(xm), np.column_stack(um))
        else:
            n_x = pwa.n_x
            data = DataSet(np.zeros((n_x, 0)), np.zeros((n_x, 0)), np.zeros((n_u or 0, 0)))
        if data.T < data.d:
            warnings.warn(f"mode {q}: only {data.T} transitions for {data.d} unknowns")
        out.append(data)
        indices.append(np.asarray(idx, dtype=int))
    if return_indices:
        return out, indices
    return out


@dataclass
class PwaStepPlan:
    """Replay data for one piecewise-affine step: for every surviving
    (parent fragment, mode) pair, the guard-split events and product plan."""

    children: dict  # (parent_index, mode) -> (child_index, split_events, step_plan)


def propagate_pwa(models, pwa, x0, u_prop, w, horizon, max_order,
                  fragment_cap=256, plan_sink=None):
    """Reachable fragments of a piecewise-affine system.

    models: one (constrained) matrix zonotope per mode, over [x; u].
    Every fragment is split along each mode region; nonempty pieces are
    propagated through that mode's model.  Raises if the fragment count
    would exceed fragment_cap.
    """
    assert len(models) == pwa.n_modes
    steps = [StepRecord([Fragment(x0)])]
    for _ in range(horizon):
        parents = steps[-1].fragments
        children = []
        child_map = {}
        for fi, frag in enumerate(parents):
            for q, mode in enumerate(pwa.modes):
                piece = frag.set
                events = []
                for h in mode.region:
                    piece, ev = halfspace_intersection_with_plan(piece, h.normal, h.offset)
                    events.append(ev)
                    if isinstance(piece, EmptySet):
                        break
                if isinstance(piece, EmptySet) or is_empty(piece):
                    continue
                new_set, step_plan = propagation_step(models[q], piece, u_prop, w, max_order)
                child_map[(fi, q)] = (len(children), events, step_plan)
                children.append(Fragment(new_set, mode=q, parent=fi))
        if not children:
            raise ValueError("all fragments became empty; check the mode regions")
        if len(children) > fragment_cap:
            raise ValueError(f"fragment count {len(children)} exceeds cap {fragment_cap}")
        if plan_sink is not None:
            plan_sink.append(PwaStepPlan(child_map))
        steps.append(StepRecord(children))
    return ReachResult(steps)


def model_based_reference(system, x0, u_prop, w, horizon, max_order):
    """Propagation with the true dynamics as singleton model sets.

    system: (A, B) for linear dynamics, or a PwaSpec carrying true matrices.
    """
    if isinstance(system, PwaSpec):
        models = [MatrixZonotope(np.hstack([a, b])) for a, b in system.true_matrices()]
        return propagate_pwa(models, system, x0, u_prop, w, horizon, max_order)
    a, b = system
    model = MatrixZonotope(np.hstack([np.asarray(a, dtype=float), np.asarray(b, dtype=float)]))
    return propagate_lti(model, x0, u_prop, w, horizon, max_order)


# ---------------------------------------------------------------------------
# trajectory certificates


@dataclass
class CertificateReport:
    """Worst-case evidence over all trajectories and steps.

    A sound run has max_factor <= 1 + tol, max_constraint ~ 0, and
    max_point_error ~ 0 (reconstruction matches the simulated states).
    """

    max_factor: float
    max_constraint: float
    max_point_error: float
    n_trajectories: int
    n_steps: int

    def ok(self, tol=1e-6):
        return (self.max_factor <= 1.0 + tol
                and self.max_constraint <= tol
                and self.max_point_error <= tol)


def _check_step(rset, xi, states_k, report):
    report["max_factor"] = max(report["max_factor"], float(np.max(np.abs(xi))) if xi.size else 0.0)
    rec = rset.c[None, :] + xi @ rset.G.T
    report["max_point_error"] = max(report["max_point_error"],
                                    float(np.max(np.abs(rec - states_k))))
    if isinstance(rset, ConstrainedZonotope) and rset.num_constraints:
        res = xi @ rset.A.T - rset.b[None, :]
        report["max_constraint"] = max(report["max_constraint"], float(np.max(np.abs(res))))


def certify_lti(model, beta_star, x0, u_prop, w, horizon, max_order,
                states, xi0, xi_u, xi_w):
    """Constructive containment certificates for simulated trajectories.

    states: (N, horizon+1, n_x) simulated with recorded factor draws
    xi0 (N, m0), xi_u (horizon, N, m_u), xi_w (horizon, N, p_w); beta_star is
    the model-set factor vector recovered from the data noise (empty for
    singleton models).  Re-runs the propagation and replays all factors.
    """
    beta_star = np.asarray(beta_star, dtype=float).reshape(-1)
    plans = []
    result = propagate_lti(model, x0, u_prop, w, horizon, max_order, plan_sink=plans)
    report = {"max_factor": 0.0, "max_constraint": 0.0, "max_point_error": 0.0}
    xi = np.asarray(xi0, dtype=float)
    _check_step(result.steps[0].fragments[0].set, xi, states[:, 0, :], report)
    for k in range(horizon):
        xi = replay_step(plans[k], xi, xi_u[k], beta_star, xi_w[k])
        _check_step(result.steps[k + 1].fragments[0].set, xi, states[:, k + 1, :], report)
    return result, CertificateReport(report["max_factor"], report["max_constraint"],
                                     report["max_point_error"], states.shape[0], horizon)


def certify_pwa(models, beta_stars, pwa, x0, u_prop, w, horizon, max_order,
                states, xi0, xi_u, xi_w, fragment_cap=256):
    """Containment certificates for piecewise-affine trajectories.

    Each trajectory follows its own fragment lineage: at step k its state's
    mode selects the child fragment, the guard-split events append the slice
    factors, and the product plan pushes the rest.  beta_stars is one factor
    vector per mode.
    """
    plans = []
    result = propagate_pwa(models, pwa, x0, u_prop, w, horizon, max_order,
                           fragment_cap=fragment_cap, plan_sink=plans)
    n_traj = states.shape[0]
    report = {"max_factor": 0.0, "max_constraint": 0.0, "max_point_error": 0.0}
    xi = np.asarray(xi0, dtype=float)
    _check_step(result.steps[0].fragments[0].set, xi, states[:, 0, :], report)
    xi_by_frag = {0: (np.arange(n_traj), xi)}
    for k in range(horizon):
        modes_k = pwa.classify_batch(states[:, k, :])
        child_map = plans[k].children
        new_by_frag = {}
        next_sets = result.steps[k + 1].fragments
        for fi, (traj_ids, xi_f) in xi_by_frag.items():
            for q in np.unique(modes_k[traj_ids]):
                sel = traj_ids[modes_k[traj_ids] == q]
                key = (fi, int(q))
                assert key in child_map, (
                    f"trajectory fell into a pruned fragment (step {k}, parent {fi}, mode {q})"
                )
                ci, events, step_plan = child_map[key]
                xi_piece = replay_split(events, xi_f[np.searchsorted(traj_ids, sel)])
                xi_next = replay_step(step_plan, xi_piece, xi_u[k][sel],
                                      beta_stars[int(q)], xi_w[k][sel])
                _check_step(next_sets[ci].set, xi_next, states[sel, k + 1, :], report)
                new_by_frag.setdefault(ci, []).append((sel, xi_next))
        xi_by_frag = {
            ci: (np.concatenate([s for s, _ in parts]),
                 np.vstack([x for _, x in parts]))
            for ci, parts in new_by_frag.items()
        }
        # keep trajectory ids sorted within each fragment for searchsorted
        xi_by_frag = {
            ci: (ids[np.argsort(ids)], x[np.argsort(ids)])
            for ci, (ids, x) in xi_by_frag.items()
        }
    return result, CertificateReport(report["max_factor"], report["max_constraint"],
                                     report["max_point_error"], n_traj, horizon)
