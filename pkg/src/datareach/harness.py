"""Experiment harness: true-system simulation, data collection, and the
full reachability studies with file emission.

The harness owns everything the library proper must not know: the ground
truth matrices, the realized noise, and the bookkeeping that turns recorded
factor draws into containment certificates.  An experiment is described by
an ExperimentConfig (JSON round-trippable, versioned schema) and produces a
deterministic report dict; wall-clock data goes to a separate metadata file
so reports stay byte-identical for a fixed config and seed.

RNG streams are derived from the config seed with fixed stream ids.  The
trajectory stream (initial states and process noise) is shared by both
input modes, so the random and designed collections see identical
disturbance realizations and differ only through the chosen inputs; input
draws, self-check trajectories, and probe directions get their own
streams.

Output layout (when an output directory is given):

    report.json                     all numeric results, deterministic
    metadata.json                   timestamps, runtime, library versions
    sets/<combo>/step<k>.json       reachable fragments per step
    polygons/<combo>_<i>-<j>.csv    2-D projection outlines per step
    volume_table.csv                tabulated-step volumes and ratios (lti)
    hull_widths.csv                 per-step interval hulls (pwa)
"""

import csv
import json
import time
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from itertools import product
from pathlib import Path

import numpy as np
from scipy.linalg import expm

from . import __version__
from .inputdesign import (
    DesignConfig,
    design_input,
    info_init,
    info_update,
    sample_input,
)
from .modelset import DataSet, build_denoised, build_model_sets, build_noise_mz, generator_norm_proxy
from .reach import (
    Halfspace,
    PwaMode,
    PwaSpec,
    certify_lti,
    certify_pwa,
    model_based_reference,
    partition_data_by_mode,
    propagate_lti,
    propagate_pwa,
)
from .rightinv import pinv_right_inverse, row_norm_right_inverse, verify_sandwich
from .sets import (
    ConstrainedZonotope,
    MatrixZonotope,
    Zonotope,
    contains_point,
    project_polygon,
    reduce_girard,
    sample_factors,
    set_from_dict,
    volume,
)

SCHEMA_VERSION = 1

# rng stream ids; every consumer owns one stream of the config seed
_TRAJ_STREAM = 0
_INPUT_STREAM = 1
_CHECK_STREAM = 2
_DIRECTION_STREAM = 3
_MODES = ("random", "designed")


class HarnessError(RuntimeError):
    """Configuration or self-check failure; carries the partial report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# ---------------------------------------------------------------------------
# true systems


def discretize(a_c, b_c, dt):
    """Zero-order-hold discretization via one augmented matrix exponential."""
    a_c = np.asarray(a_c, dtype=float)
    b_c = np.asarray(b_c, dtype=float)
    n, m = b_c.shape
    assert a_c.shape == (n, n), "a_c must be square and match b_c rows"
    aug = np.zeros((n + m, n + m))
    aug[:n, :n] = a_c
    aug[:n, n:] = b_c
    e = expm(aug * float(dt))
    return e[:n, :n], e[:n, n:]


@dataclass
class TrueSystem:
    """Ground-truth dynamics plus the noise set, known only to the harness.

    Either (a, b) for a linear system or a PwaSpec carrying true matrices.
    """

    w: Zonotope
    a: np.ndarray = None
    b: np.ndarray = None
    pwa: PwaSpec = None

    def __post_init__(self):
        if self.pwa is None:
            self.a = np.asarray(self.a, dtype=float)
            self.b = np.asarray(self.b, dtype=float)
            assert self.a.shape[0] == self.a.shape[1] == self.b.shape[0]

    @property
    def n_x(self):
        return self.pwa.n_x if self.pwa is not None else self.a.shape[0]

    @property
    def n_u(self):
        if self.pwa is not None:
            return self.pwa.modes[0].b.shape[1]
        return self.b.shape[1]

    def matrices_at(self, x):
        if self.pwa is not None:
            mode = self.pwa.modes[self.pwa.classify(x)]
            return mode.a, mode.b
        return self.a, self.b

    def step(self, x, u, w_real):
        x = np.asarray(x, dtype=float).reshape(-1)
        u = np.asarray(u, dtype=float).reshape(-1)
        a, b = self.matrices_at(x)
        return a @ x + b @ u + np.asarray(w_real, dtype=float).reshape(-1)


# ---------------------------------------------------------------------------
# configuration


def _set_from_config(d):
    if d is None or isinstance(d, (Zonotope, ConstrainedZonotope)):
        return d
    d = dict(d)
    # accept the friendly {"center", "generators", "a", "b"} spelling too
    for alias, key in (("center", "c"), ("generators", "G"), ("a", "A")):
        if alias in d and key not in d:
            d[key] = d.pop(alias)
    d.setdefault("type", "constrained_zonotope" if "A" in d else "zonotope")
    return set_from_dict(d)


@dataclass
class ExperimentConfig:
    """One experiment, fully specified and JSON round-trippable.

    system is a plain dict: {"type": "continuous", "a_c", "b_c", "dt"},
    {"type": "discrete", "a", "b"}, or {"type": "pwa", "modes": [{"a", "b",
    "region": [{"normal", "offset"}, ...]}, ...]}.  PWA regions are matched
    in declaration order, so the mode owning a shared guard (its closed
    side) must come first.  Sets accept {"center", "generators"} dicts or
    the serialized {"c", "G"} form.  x0_data, when given, replaces x0 as
    the initial set for data collection only.  x0_sampling picks how data
    trajectories draw their initial state from that set: "uniform" draws
    factors uniformly, "vertex" snaps them to extreme points, which keeps
    the regressor blocks well conditioned when x0_data is wide.  The
    volume table is evaluated at volume_step (default: the horizon).
    """

    kind: str
    system: dict
    x0: object
    w: object
    u_data: object
    u_prop: object
    name: str = ""
    x0_data: object = None
    k_trajectories: int = 12
    t_steps: int = 5
    horizon: int = 6
    max_order: float = 10.0
    input_modes: tuple = ("random", "designed")
    right_inverses: tuple = ("pinv", "row_norm")
    model_sets: tuple = ("mz", "cmz")
    pwa_variants: tuple = (("random", "pinv"), ("designed", "row_norm"))
    rng_seed: int = 0
    design: DesignConfig = field(default_factory=DesignConfig)
    projection_dims: tuple = ((1, 2),)
    x0_sampling: str = "uniform"
    volume_step: object = None
    n_check: int = 200
    n_directions: int = 32
    n_lp_spot: int = 5
    fragment_cap: int = 256
    compute_supports: bool = True
    compute_volumes: bool = True

    def __post_init__(self):
        if self.kind not in ("lti", "pwa"):
            raise HarnessError(f"kind must be 'lti' or 'pwa', got {self.kind!r}")
        if self.x0_sampling not in ("uniform", "vertex"):
            raise HarnessError(f"x0_sampling must be 'uniform' or 'vertex', got {self.x0_sampling!r}")
        if self.volume_step is not None:
            self.volume_step = int(self.volume_step)
            if not 0 <= self.volume_step <= self.horizon:
                raise HarnessError(f"volume_step {self.volume_step} outside 0..{self.horizon}")
        for name in ("x0", "w", "u_data", "u_prop", "x0_data"):
            setattr(self, name, _set_from_config(getattr(self, name)))
        self.input_modes = tuple(self.input_modes)
        self.right_inverses = tuple(self.right_inverses)
        self.model_sets = tuple(self.model_sets)
        self.pwa_variants = tuple((m, r) for m, r in self.pwa_variants)
        self.projection_dims = tuple(tuple(int(i) for i in p) for p in self.projection_dims)
        if isinstance(self.design, dict):
            self.design = DesignConfig(**self.design)

    @property
    def x0_collect(self):
        return self.x0_data if self.x0_data is not None else self.x0

    def true_system(self):
        """Build the TrueSystem and check every set dimension against it."""
        s = self.system
        kind = s.get("type")
        if kind == "pwa":
            modes = [
                PwaMode(
                    region=[Halfspace(h["normal"], h["offset"]) for h in m["region"]],
                    a=np.asarray(m["a"], dtype=float),
                    b=np.asarray(m["b"], dtype=float),
                )
                for m in s["modes"]
            ]
            system = TrueSystem(w=self.w, pwa=PwaSpec(modes))
        elif kind == "continuous":
            a, b = discretize(s["a_c"], s["b_c"], s["dt"])
            system = TrueSystem(w=self.w, a=a, b=b)
        elif kind == "discrete":
            system = TrueSystem(w=self.w, a=s["a"], b=s["b"])
        else:
            raise HarnessError(f"unknown system type {kind!r}")
        if (kind == "pwa") != (self.kind == "pwa"):
            raise HarnessError(f"config kind {self.kind!r} does not match system type {kind!r}")
        checks = (
            ("x0", self.x0, system.n_x),
            ("x0_data", self.x0_collect, system.n_x),
            ("w", self.w, system.n_x),
            ("u_data", self.u_data, system.n_u),
            ("u_prop", self.u_prop, system.n_u),
        )
        for label, z, dim in checks:
            if z.dim != dim:
                raise HarnessError(f"{label} has dimension {z.dim}, expected {dim}")
        return system

    def to_dict(self):
        out = {"schema_version": SCHEMA_VERSION}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "design":
                v = {"n_candidates": v.n_candidates, "refine_iters": v.refine_iters,
                     "refine_step": v.refine_step, "rng_seed": v.rng_seed}
            elif isinstance(v, (Zonotope, ConstrainedZonotope)):
                v = v.to_dict()
            elif isinstance(v, tuple):
                v = [list(x) if isinstance(x, tuple) else x for x in v]
            out[f.name] = v
        return out

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        version = d.pop("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise HarnessError(f"unsupported config schema version {version}")
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise HarnessError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def load_config(path):
    with open(path) as f:
        return ExperimentConfig.from_dict(json.load(f))


def bundled_config(name):
    """One of the shipped configs: 'lti_5d' or 'pwa_2mode'."""
    ref = resources.files("datareach") / "configs" / f"{name}.json"
    if not ref.is_file():
        raise HarnessError(f"no bundled config named {name!r}")
    return ExperimentConfig.from_dict(json.loads(ref.read_text()))


# ---------------------------------------------------------------------------
# simulation and data collection


@dataclass
class Trajectory:
    """One rollout with its recorded noise factors (columns, one per step)."""

    states: np.ndarray   # (n_x, T + 1)
    inputs: np.ndarray   # (n_u, T)
    xi_w: np.ndarray     # (p_w, T)


def simulate(system, x0, inputs, rng):
    """Roll the true system forward from the point x0 under given inputs.

    Noise factors are drawn uniformly from the box and recorded, so the
    realized disturbances can be reconstructed exactly.
    """
    inputs = np.asarray(inputs, dtype=float)
    x = np.asarray(x0, dtype=float).reshape(-1)
    w = system.w
    xs = [x]
    xiws = []
    for k in range(inputs.shape[1]):
        xiw = rng.uniform(-1.0, 1.0, w.num_generators)
        x = system.step(x, inputs[:, k], w.c + w.G @ xiw)
        xs.append(x)
        xiws.append(xiw)
    xi_w = np.column_stack(xiws) if xiws else np.zeros((w.num_generators, 0))
    return Trajectory(np.column_stack(xs), inputs.copy(), xi_w)


def simulate_batch(system, x0_set, u_set, horizon, count, rng):
    """Many rollouts at once with every factor draw recorded.

    Initial states and inputs are sampled uniformly from the factor sets,
    noise uniformly from its box.  Shapes match the certificate replays:
    states (count, horizon + 1, n_x), xi_u and xi_w indexed by step.
    """
    w = system.w
    xi0 = sample_factors(x0_set, rng, count)
    states = np.empty((count, horizon + 1, system.n_x))
    states[:, 0, :] = xi0 @ x0_set.G.T + x0_set.c
    xi_u = np.empty((horizon, count, u_set.num_generators))
    xi_w = np.empty((horizon, count, w.num_generators))
    for k in range(horizon):
        xi_u[k] = sample_factors(u_set, rng, count)
        xi_w[k] = rng.uniform(-1.0, 1.0, (count, w.num_generators))
        u_pts = xi_u[k] @ u_set.G.T + u_set.c
        w_pts = xi_w[k] @ w.G.T + w.c
        x = states[:, k, :]
        if system.pwa is None:
            states[:, k + 1, :] = x @ system.a.T + u_pts @ system.b.T + w_pts
        else:
            nxt = np.empty_like(x)
            modes = system.pwa.classify_batch(x)
            for q in np.unique(modes):
                sel = modes == q
                mode = system.pwa.modes[q]
                nxt[sel] = x[sel] @ mode.a.T + u_pts[sel] @ mode.b.T + w_pts[sel]
            states[:, k + 1, :] = nxt
    return states, xi0, xi_u, xi_w


@dataclass
class CollectLog:
    """Everything recorded during data collection that the data set itself
    cannot carry: factor draws, design diagnostics, the information state."""

    trajectories: list        # (states, inputs) per trajectory
    xi_w: np.ndarray          # (p_w, T) noise factors, global column order
    xi0: np.ndarray           # (K, m0) initial-state factors
    design_gains: list
    design_trace: list        # trace of the maintained inverse after each update
    info: object              # final InfoState (designed mode) or None
    trace_inverse: float      # tr((Phi Phi')^-1) of the realized regressor


def collect_data(cfg, system, input_mode, design_cfg=None, rng_seed=None):
    """K trajectories of T_i transitions each from the collection sets.

    Random mode draws inputs uniformly from u_data; designed mode picks each
    input by information-gain maximization, with a single information state
    shared across all trajectories.  Initial states come from the collection
    set's factor box, uniformly or snapped to its corners per cfg.x0_sampling.

    Initial states and process noise come from a trajectory stream that
    depends only on the seed, never on the input mode, so the two modes are
    compared on identical disturbance realizations.  Random inputs draw from
    a separate seed-derived stream; design candidates draw from the
    DesignConfig's own seed.
    """
    if input_mode not in _MODES:
        raise HarnessError(f"unknown input mode {input_mode!r}")
    designed = input_mode == "designed"
    design_cfg = design_cfg or cfg.design
    seed = cfg.rng_seed if rng_seed is None else rng_seed
    rng_traj = np.random.default_rng([seed, _TRAJ_STREAM])
    if designed:
        rng_inp = np.random.default_rng(design_cfg.rng_seed)
    else:
        rng_inp = np.random.default_rng([seed, _INPUT_STREAM])
    w = system.w
    x0_set = cfg.x0_collect
    if cfg.x0_sampling == "vertex" and isinstance(x0_set, ConstrainedZonotope):
        raise HarnessError("vertex x0 sampling needs an unconstrained initial set")
    info = info_init(system.n_x + system.n_u) if designed else None
    trajectories, xi_w_cols, xi0s = [], [], []
    gains, trace = [], []
    for _ in range(cfg.k_trajectories):
        xi0 = sample_factors(x0_set, rng_traj, 1)[0]
        if cfg.x0_sampling == "vertex":
            # snap the factor draw to a corner of the factor box; data rows
            # then start from extreme points of x0, which props up the weak
            # singular values of the regressor and tightens every model set
            xi0 = np.where(xi0 >= 0.0, 1.0, -1.0)
        x = x0_set.c + x0_set.G @ xi0
        xs, us = [x], []
        for _ in range(cfg.t_steps):
            if designed:
                u, gain = design_input(info, x, cfg.u_data, design_cfg, rng_inp)
                gains.append(gain)
            else:
                u = sample_input(cfg.u_data, rng_inp)
            xiw = rng_traj.uniform(-1.0, 1.0, w.num_generators)
            x_next = system.step(x, u, w.c + w.G @ xiw)
            xs.append(x_next)
            us.append(u)
            xi_w_cols.append(xiw)
            if designed:
                info = info_update(info, np.concatenate([x, u]))
                trace.append(info.trace_inverse)
            x = x_next
        trajectories.append((np.column_stack(xs), np.column_stack(us)))
        xi0s.append(xi0)
    x_stack = [t[0] for t in trajectories]
    data = DataSet(
        np.hstack([s[:, 1:] for s in x_stack]),
        np.hstack([s[:, :-1] for s in x_stack]),
        np.hstack([t[1] for t in trajectories]),
        traj_lengths=(cfg.t_steps,) * cfg.k_trajectories,
    )
    phi = data.phi
    trace_inv = float(np.trace(np.linalg.pinv(phi @ phi.T)))
    log = CollectLog(trajectories, np.column_stack(xi_w_cols), np.asarray(xi0s),
                     gains, trace, info, trace_inv)
    return data, log


def true_noise_coefficients(log, columns=None):
    """Factor vector placing the realized data noise inside the noise matrix
    zonotope (t-major).  columns restricts to a subset of global transition
    columns, e.g. one mode's share after partitioning."""
    xi_w = log.xi_w if columns is None else log.xi_w[:, np.asarray(columns, dtype=int)]
    return xi_w.T.reshape(-1).copy()


def _model_proxy(data, w_generators, h):
    """Generator-norm proxy of the model set (X+ - W) H without building
    the constrained variant."""
    noise = build_noise_mz(w_generators, data.T)
    denoised = build_denoised(data.x_plus, noise)
    h = np.asarray(h, dtype=float)
    gens = np.einsum("lnt,td->lnd", denoised.generators, h)
    return generator_norm_proxy(MatrixZonotope(denoised.C @ h, gens))


def proxy_chain(cfg):
    """Collect both input modes and compare model-set size proxies.

    Returns per-mode pseudoinverse norms and proxies for the pinv and
    row-norm right inverses, plus the two chain gaps
    proxy(designed, row_norm) - proxy(designed, pinv) and
    proxy(designed, pinv) - proxy(random, pinv) (negative means the chain
    inequality holds).
    """
    system = cfg.true_system()
    out = {}
    for mode in ("random", "designed"):
        data, log = collect_data(cfg, system, mode)
        phi = data.phi
        pinv_res = pinv_right_inverse(phi)
        row_res = row_norm_right_inverse(phi)
        out[mode] = {
            "pinv_frobenius": pinv_res.frobenius_norm,
            "proxy_pinv": _model_proxy(data, cfg.w.G, pinv_res.h),
            "proxy_row_norm": _model_proxy(data, cfg.w.G, row_res.h),
            "row_norm_sum_pinv": pinv_res.row_norm_sum,
            "row_norm_sum_row_norm": row_res.row_norm_sum,
            "trace_inverse": log.trace_inverse,
        }
    out["gap_row_norm_vs_pinv"] = out["designed"]["proxy_row_norm"] - out["designed"]["proxy_pinv"]
    out["gap_designed_vs_random"] = out["designed"]["proxy_pinv"] - out["random"]["proxy_pinv"]
    out["design_reduces_pinv_norm"] = bool(
        out["designed"]["pinv_frobenius"] <= out["random"]["pinv_frobenius"]
    )
    return out


# ---------------------------------------------------------------------------
# report helpers


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON-serializable: {type(o)!r}")


def _write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(obj, f, sort_keys=True, indent=1, default=_json_default)
        f.write("\n")


def _write_table(path, header, rows, fmt):
    path = Path(path)
    if fmt == "json":
        _write_json(path.with_suffix(".json"), [dict(zip(header, row)) for row in rows])
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)


def _unit_directions(rng, count, dim):
    d = rng.normal(size=(count, dim))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def _parse_combo(combo):
    mset, rest = combo.split("_", 1)
    rinv, mode = rest.rsplit("_", 1)
    return mset, rinv, mode


def _rinv_summary(res):
    return {
        "method": res.method,
        "row_norm_sum": res.row_norm_sum,
        "frobenius_norm": res.frobenius_norm,
        "feasibility_residual": res.feasibility_residual,
        "iterations": res.iterations,
    }


def _lp_spot_check(result, states, rng, n_spot, tol=1e-6):
    """A few independent membership LPs on random (trajectory, step) pairs,
    as a cross-check on the factor certificates."""
    n_traj = states.shape[0]
    n_steps = len(result.steps)
    if n_steps < 2:
        return 0
    failures = 0
    for _ in range(n_spot):
        i = int(rng.integers(n_traj))
        k = int(rng.integers(1, n_steps))
        pt = states[i, k]
        if not any(contains_point(f.set, pt, tol=tol) for f in result.steps[k].fragments):
            failures += 1
    return failures


def _support_table(runs, combos, dirs, horizon):
    return {
        c: [[runs[c].union_support(k, d) for d in dirs] for k in range(horizon + 1)]
        for c in combos
    }


def _max_gap(sup_a, sup_b):
    """max over steps and directions of sup_a - sup_b."""
    return float(np.max(np.asarray(sup_a) - np.asarray(sup_b)))


def _emit_sets(out, combo, result):
    for k, step in enumerate(result.steps):
        payload = {
            "schema_version": SCHEMA_VERSION,
            "step": k,
            "fragments": [
                {"mode": f.mode, "parent": f.parent, "set": f.set.to_dict()}
                for f in step.fragments
            ],
        }
        _write_json(out / "sets" / combo / f"step{k}.json", payload)


def _emit_polygons(out, combo, result, dims_pairs, fmt, n_dirs=32):
    for i, j in dims_pairs:
        rows = []
        for k, step in enumerate(result.steps):
            for fi, frag in enumerate(step.fragments):
                poly = project_polygon(frag.set, (i - 1, j - 1), n_dirs=n_dirs)
                rows.extend([k, fi, float(x), float(y)] for x, y in poly)
        _write_table(out / "polygons" / f"{combo}_{i}-{j}.csv",
                     ["step", "fragment", "x", "y"], rows, fmt)


def _emit_common(out, cfg, report, runs, combos, fmt, runtime):
    _write_json(out / "report.json", report)
    _write_json(out / "metadata.json", {
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "runtime_seconds": runtime,
        "versions": {
            "datareach": __version__,
            "numpy": np.__version__,
            "scipy": __import__("scipy").__version__,
        },
    })
    for combo in combos:
        _emit_sets(out, combo, runs[combo])
        _emit_polygons(out, combo, runs[combo], cfg.projection_dims, fmt)


# ---------------------------------------------------------------------------
# experiments


def _require_centered_noise(w):
    if np.any(w.c != 0.0):
        raise HarnessError("model-set construction assumes zero-centered noise")


def run_lti_experiment(cfg, out_dir=None, fmt="csv"):
    """The linear study: data collection, model sets, propagation, checks.

    Runs every requested (model set x right inverse x input mode) combination
    plus the exact-matrix reference, self-checks each against fresh simulated
    trajectories, and (optionally) compares supports and final volumes.
    Returns the report dict; with out_dir the full file layout is written.
    """
    t0 = time.perf_counter()
    if cfg.kind != "lti":
        raise HarnessError(f"config kind is {cfg.kind!r}, expected 'lti'")
    system = cfg.true_system()
    _require_centered_noise(cfg.w)
    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": "lti",
        "name": cfg.name,
        "config": cfg.to_dict(),
    }

    data, logs = {}, {}
    rinvs, bundles = {}, {}
    data_stats, rinv_stats = {}, {}
    for mode in cfg.input_modes:
        data[mode], logs[mode] = collect_data(cfg, system, mode)
        phi = data[mode].phi
        sigma = np.linalg.svd(phi, compute_uv=False)
        data_stats[mode] = {
            "transitions": data[mode].T,
            "sigma_min": float(sigma[-1]),
            "sigma_max": float(sigma[0]),
            "trace_inverse": logs[mode].trace_inverse,
        }
        for rinv in cfg.right_inverses:
            res = pinv_right_inverse(phi) if rinv == "pinv" else row_norm_right_inverse(phi)
            rinvs[(mode, rinv)] = res
            bundles[(mode, rinv)] = build_model_sets(data[mode], cfg.w.G, res.h)
            rinv_stats[f"{rinv}_{mode}"] = _rinv_summary(res)
            if rinv == "row_norm":
                check = verify_sandwich(phi, res)
                rinv_stats[f"{rinv}_{mode}"]["sandwich"] = {
                    "lower": check.lower, "value": check.value,
                    "upper": check.upper, "holds": check.holds,
                }
    report["data"] = data_stats
    report["right_inverses"] = rinv_stats
    report["proxies"] = {
        f"{rinv}_{mode}": generator_norm_proxy(bundles[(mode, rinv)].mz)
        for (mode, rinv) in bundles
    }

    combos, runs = [], {}
    for mode, rinv, mset in product(cfg.input_modes, cfg.right_inverses, cfg.model_sets):
        combo = f"{mset}_{rinv}_{mode}"
        bundle = bundles[(mode, rinv)]
        model = bundle.mz if mset == "mz" else bundle.cmz
        runs[combo] = propagate_lti(model, cfg.x0, cfg.u_prop, cfg.w,
                                    cfg.horizon, cfg.max_order)
        combos.append(combo)
    runs["model"] = model_based_reference((system.a, system.b), cfg.x0, cfg.u_prop,
                                          cfg.w, cfg.horizon, cfg.max_order)
    combos.append("model")
    report["combos"] = combos
    report["generator_counts"] = {
        c: [[f.set.num_generators for f in s.fragments] for s in runs[c].steps]
        for c in combos
    }

    if cfg.compute_supports:
        rng_dir = np.random.default_rng([cfg.rng_seed, _DIRECTION_STREAM])
        dirs = _unit_directions(rng_dir, cfg.n_directions, system.n_x)
        sup = _support_table(runs, combos, dirs, cfg.horizon)
        report["support_directions"] = dirs.tolist()
        report["supports"] = sup
        orderings = {"cmz_le_mz": {}, "model_within": {}}
        for mode, rinv in product(cfg.input_modes, cfg.right_inverses):
            if "mz" in cfg.model_sets and "cmz" in cfg.model_sets:
                gap = _max_gap(sup[f"cmz_{rinv}_{mode}"], sup[f"mz_{rinv}_{mode}"])
                orderings["cmz_le_mz"][f"{rinv}_{mode}"] = {"max_gap": gap, "ok": gap <= 1e-6}
        for combo in combos:
            if combo != "model":
                gap = _max_gap(sup["model"], sup[combo])
                orderings["model_within"][combo] = {"max_gap": gap, "ok": gap <= 1e-6}
        report["orderings"] = orderings

    # containment self-check: factor certificates for fresh trajectories,
    # cross-checked by a few membership LPs
    rng_chk = np.random.default_rng([cfg.rng_seed, _CHECK_STREAM])
    states, xi0, xi_u, xi_w = simulate_batch(system, cfg.x0, cfg.u_prop,
                                             cfg.horizon, cfg.n_check, rng_chk)
    checks, failed = {}, []
    for combo in combos:
        if combo == "model":
            model = MatrixZonotope(np.hstack([system.a, system.b]))
            beta = np.zeros(0)
        else:
            mset, rinv, mode = _parse_combo(combo)
            bundle = bundles[(mode, rinv)]
            model = bundle.mz if mset == "mz" else bundle.cmz
            beta = true_noise_coefficients(logs[mode])
        _, cert = certify_lti(model, beta, cfg.x0, cfg.u_prop, cfg.w, cfg.horizon,
                              cfg.max_order, states, xi0, xi_u, xi_w)
        spot_failures = _lp_spot_check(runs[combo], states, rng_chk, cfg.n_lp_spot)
        ok = bool(cert.ok() and spot_failures == 0)
        checks[combo] = {
            "trajectories": cfg.n_check,
            "max_factor": cert.max_factor,
            "max_constraint": cert.max_constraint,
            "max_point_error": cert.max_point_error,
            "lp_spot_checks": cfg.n_lp_spot,
            "lp_spot_failures": spot_failures,
            "ok": ok,
        }
        if not ok:
            failed.append(combo)
    report["self_check"] = checks
    if failed:
        report["status"] = "self_check_failed"
        raise HarnessError(f"containment self-check failed for: {', '.join(failed)}",
                           report=report)
    report["status"] = "ok"

    if cfg.compute_volumes:
        vstep = cfg.horizon if cfg.volume_step is None else cfg.volume_step

        def _row_volume(run):
            # cap at 50 generators so the determinant sum stays tractable
            z = reduce_girard(run.steps[vstep].fragments[0].set, 50.0 / system.n_x)
            return volume(z)

        table = [{"method": "model", "volume": _row_volume(runs["model"])}]
        for combo in combos:
            if combo.startswith("mz_"):
                table.append({"method": combo, "volume": _row_volume(runs[combo])})
        base = table[0]["volume"]
        for row in table:
            row["ratio"] = row["volume"] / base
        report["volume_table"] = table
        report["volume_step"] = vstep

    runtime = time.perf_counter() - t0
    if out_dir is not None:
        out = Path(out_dir)
        _emit_common(out, cfg, report, runs, combos, fmt, runtime)
        if "volume_table" in report:
            _write_table(out / "volume_table.csv", ["method", "volume", "ratio"],
                         [[r["method"], r["volume"], r["ratio"]] for r in report["volume_table"]],
                         fmt)
    return report


def run_pwa_experiment(cfg, out_dir=None, fmt="csv"):
    """The piecewise-affine study: per-mode data, guard-split propagation.

    Runs the exact-matrix reference plus one constrained model set per
    requested (input mode, right inverse) variant, self-checks all of them
    with per-mode trajectory certificates, and reports fragment counts,
    interval hulls, and (optionally) union supports.
    """
    t0 = time.perf_counter()
    if cfg.kind != "pwa":
        raise HarnessError(f"config kind is {cfg.kind!r}, expected 'pwa'")
    system = cfg.true_system()
    pwa = system.pwa
    _require_centered_noise(cfg.w)
    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": "pwa",
        "name": cfg.name,
        "config": cfg.to_dict(),
    }

    combos, runs = [], {}
    variant_models, variant_betas = {}, {}
    data_stats, rinv_stats = {}, {}
    for mode, rinv in cfg.pwa_variants:
        combo = f"cmz_{rinv}_{mode}"
        _, log = collect_data(cfg, system, mode)
        parts, indices = partition_data_by_mode(log.trajectories, pwa, return_indices=True)
        models, betas = [], []
        mode_stats = []
        for q, part in enumerate(parts):
            phi_q = part.phi
            res = pinv_right_inverse(phi_q) if rinv == "pinv" else row_norm_right_inverse(phi_q)
            bundle = build_model_sets(part, cfg.w.G, res.h)
            models.append(bundle.cmz)
            betas.append(true_noise_coefficients(log, indices[q]))
            mode_stats.append({
                "mode": q,
                "transitions": part.T,
                "proxy": generator_norm_proxy(bundle.mz),
            })
            rinv_stats[f"{rinv}_{mode}_mode{q}"] = _rinv_summary(res)
        data_stats[mode] = {
            "transitions": sum(s["transitions"] for s in mode_stats),
            "per_mode": mode_stats,
            "trace_inverse": log.trace_inverse,
        }
        variant_models[combo] = models
        variant_betas[combo] = betas
        runs[combo] = propagate_pwa(models, pwa, cfg.x0, cfg.u_prop, cfg.w,
                                    cfg.horizon, cfg.max_order,
                                    fragment_cap=cfg.fragment_cap)
        combos.append(combo)
    runs["model"] = model_based_reference(pwa, cfg.x0, cfg.u_prop, cfg.w,
                                          cfg.horizon, cfg.max_order)
    combos.append("model")
    report["combos"] = combos
    report["data"] = data_stats
    report["right_inverses"] = rinv_stats

    counts = {c: runs[c].fragment_counts() for c in combos}
    report["fragment_counts"] = counts
    report["fragment_bound_ok"] = {
        c: bool(all(n <= 2 ** k for k, n in enumerate(counts[c]))) for c in combos
    }
    hulls = {}
    for c in combos:
        per_step = []
        for k in range(cfg.horizon + 1):
            low, high = runs[c].union_interval_hull(k)
            per_step.append({"low": low.tolist(), "high": high.tolist(),
                             "width": (high - low).tolist()})
        hulls[c] = per_step
    report["interval_hulls"] = hulls

    if cfg.compute_supports:
        rng_dir = np.random.default_rng([cfg.rng_seed, _DIRECTION_STREAM])
        dirs = _unit_directions(rng_dir, cfg.n_directions, system.n_x)
        sup = _support_table(runs, combos, dirs, cfg.horizon)
        report["support_directions"] = dirs.tolist()
        report["supports"] = sup
        report["orderings"] = {
            "model_within": {
                c: {"max_gap": _max_gap(sup["model"], sup[c]),
                    "ok": _max_gap(sup["model"], sup[c]) <= 1e-6}
                for c in combos if c != "model"
            }
        }

    rng_chk = np.random.default_rng([cfg.rng_seed, _CHECK_STREAM])
    states, xi0, xi_u, xi_w = simulate_batch(system, cfg.x0, cfg.u_prop,
                                             cfg.horizon, cfg.n_check, rng_chk)
    checks, failed = {}, []
    for combo in combos:
        if combo == "model":
            models = [MatrixZonotope(np.hstack([m.a, m.b])) for m in pwa.modes]
            betas = [np.zeros(0)] * pwa.n_modes
        else:
            models, betas = variant_models[combo], variant_betas[combo]
        _, cert = certify_pwa(models, betas, pwa, cfg.x0, cfg.u_prop, cfg.w,
                              cfg.horizon, cfg.max_order, states, xi0, xi_u, xi_w,
                              fragment_cap=cfg.fragment_cap)
        spot_failures = _lp_spot_check(runs[combo], states, rng_chk, cfg.n_lp_spot)
        ok = bool(cert.ok() and spot_failures == 0)
        checks[combo] = {
            "trajectories": cfg.n_check,
            "max_factor": cert.max_factor,
            "max_constraint": cert.max_constraint,
            "max_point_error": cert.max_point_error,
            "lp_spot_checks": cfg.n_lp_spot,
            "lp_spot_failures": spot_failures,
            "ok": ok,
        }
        if not ok:
            failed.append(combo)
    report["self_check"] = checks
    if failed:
        report["status"] = "self_check_failed"
        raise HarnessError(f"containment self-check failed for: {', '.join(failed)}",
                           report=report)
    report["status"] = "ok"

    runtime = time.perf_counter() - t0
    if out_dir is not None:
        out = Path(out_dir)
        _emit_common(out, cfg, report, runs, combos, fmt, runtime)
        rows = []
        for c in combos:
            for k, h in enumerate(hulls[c]):
                for dim in range(system.n_x):
                    rows.append([c, k, dim + 1, h["low"][dim], h["high"][dim],
                                 h["width"][dim]])
        _write_table(out / "hull_widths.csv",
                     ["method", "step", "dim", "low", "high", "width"], rows, fmt)
    return report
