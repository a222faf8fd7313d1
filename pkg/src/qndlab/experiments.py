"""Declarative experiment sweeps and their reports.

A config is a YAML mapping; see ``docs/config_schema.md``.  Every sweep point
produces one :class:`ReportRow`.  Rows carry a ``relation`` so the pass flag
can be re-derived from ``measured`` and ``bound`` alone.
"""
from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np
import yaml

from . import __version__
from .catalog import group_from_config
from .config import MAX_ENUMERATION, TOL
from .errors import BudgetExceeded, ConfigError, PreconditionViolation, QNDError
from .flow_lab import (DiscreteGroupSpec, TrajectorySpec, bad_set, diagonal_product, in_X_delta,
                       product_trajectory, verify_theorem_1_1)
from .good_functions import GoodnessGrid, PolyFunction, polynomial_goodness_constants, verify_goodness
from .km_engine import KMConstants, check_km_bound, detect_invariant_sublattice, measure_small_d1, rho
from .lattice_geometry import LatticeBasis
from .lie_core import AlgebraVector, LieAlgebraSpec, algebra

SCHEMA_VERSION = 1
KINDS = ("goodness", "km_bound", "bad_set", "theorem11", "dichotomy", "product")
COLUMNS = ("schema_version", "experiment_id", "index", "kind", "params", "status", "measured",
           "relation", "bound", "pass", "constants", "details", "wall_time")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3


# -- config ------------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    id: str
    seed: int
    budget: int
    body: dict
    source: bytes = b""

    @property
    def sweep(self) -> dict:
        return self.body.get("sweep") or {}

    @property
    def constants(self) -> dict:
        return self.body.get("constants") or {}


def _require(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise ConfigError(f"{where}{key} is required")
    return d[key]


def _positive(x, where: str) -> float:
    try:
        v = float(x)
    except (TypeError, ValueError):
        raise ConfigError(f"{where} must be a number") from None
    if not v > 0 or not math.isfinite(v):
        raise ConfigError(f"{where} must be positive")
    return v


def _grid(cfg: dict, key: str, where: str, default=None) -> list:
    vals = cfg.get(key, default)
    if vals is None:
        raise ConfigError(f"{where}{key} is required")
    if not isinstance(vals, list):
        vals = [vals]
    if not vals:
        raise ConfigError(f"{where}{key} must be a non-empty list")
    return vals


def parse_config(text: str | bytes, *, seed: int | None = None, budget: int | None = None) -> ExperimentConfig:
    raw = text.encode() if isinstance(text, str) else text
    try:
        body = yaml.safe_load(raw)
    except yaml.YAMLError as e:
        raise ConfigError(f"config is not valid YAML: {e}") from None
    if not isinstance(body, dict):
        raise ConfigError("config must be a mapping")
    kind = body.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {', '.join(KINDS)}")
    s = body.get("seed", 0) if seed is None else seed
    if not isinstance(s, int) or s < 0:
        raise ConfigError("seed must be a non-negative integer")
    b = body.get("budget", MAX_ENUMERATION) if budget is None else budget
    if not isinstance(b, int) or b <= 0:
        raise ConfigError("budget must be a positive integer")
    cfg = ExperimentConfig(kind, str(body.get("id", kind)), s, b, body, raw)
    build_points(cfg)          # full validation before anything runs
    return cfg


def load_config(path: str | Path, **kw) -> ExperimentConfig:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from None
    return parse_config(data, **kw)


def git_blob_hash(data: bytes) -> str:
    """The object id git would give ``data`` as a blob."""
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


# -- parsing pieces ---------------------------------------------------------------------------

def _spec_vector(spec: LieAlgebraSpec, raw, where: str, rng: np.random.Generator | None = None) -> AlgebraVector:
    """``"E"``, ``"iE"``, a per-factor list of labels, ``{coords: [...]}``, ``{matrix: ...}`` or ``random``."""
    if raw == "random":
        if rng is None:
            return spec.zero()
        return random_nilpotent(spec, rng)
    if isinstance(raw, str):
        try:
            return sum((spec.named(raw, f) for f in range(spec.n_factors)), spec.zero())
        except QNDError as e:
            raise ConfigError(f"{where}: {e}") from None
    if isinstance(raw, list) and all(isinstance(x, str) for x in raw):
        if len(raw) != spec.n_factors:
            raise ConfigError(f"{where} needs one label per factor")
        return sum((spec.named(lbl, f) for f, lbl in enumerate(raw)), spec.zero())
    if isinstance(raw, dict) and "coords" in raw:
        c = np.asarray(raw["coords"], float)
        if c.shape != (spec.dim,):
            raise ConfigError(f"{where}.coords must have length {spec.dim}")
        return spec.vector(c)
    if isinstance(raw, dict) and "matrix" in raw:
        try:
            return spec.from_matrix(np.asarray(raw["matrix"], complex if spec.is_complex else float))
        except QNDError as e:
            raise ConfigError(f"{where}.matrix: {e}") from None
    raise ConfigError(f"{where} has an unrecognised form")


def random_sl2(rng: np.random.Generator, cond_max: float = 20.0) -> np.ndarray:
    while True:
        M = rng.normal(size=(2, 2))
        d = np.linalg.det(M)
        if abs(d) < 1e-3:
            continue
        M /= math.sqrt(abs(d))
        if d < 0:
            M[:, 0] *= -1
        if np.linalg.cond(M) <= cond_max:
            return M


def random_nilpotent(spec: LieAlgebraSpec, rng: np.random.Generator, norm: float = 2.0) -> AlgebraVector:
    """A random conjugate of ``E`` in every factor, rescaled per factor."""
    out = spec.zero()
    for f in range(spec.n_factors):
        M = random_sl2(rng)
        E = spec.named("E", f)
        X = M @ spec.block(E.matrix(), f) @ np.linalg.inv(M)
        full = np.zeros((spec.matrix_size,) * 2, dtype=complex if spec.is_complex else float)
        full[2 * f:2 * f + 2, 2 * f:2 * f + 2] = X
        v = spec.from_matrix(full)
        out = out + v * (norm / v.norm())
    return out


def _basepoint(spec: LieAlgebraSpec, raw, where: str, rng: np.random.Generator | None) -> np.ndarray:
    dtype = complex if spec.is_complex else float
    n = spec.matrix_size
    if raw is None or raw == "identity":
        return np.eye(n, dtype=dtype)
    if raw == "random":
        g = np.zeros((n, n), dtype=dtype)
        for f in range(spec.n_factors):
            g[2 * f:2 * f + 2, 2 * f:2 * f + 2] = random_sl2(rng) if rng is not None else np.eye(2)
        return g
    if isinstance(raw, dict) and "horocycle" in raw:
        h = raw["horocycle"]
        s2 = _positive(_require(h, "s2", f"{where}.horocycle."), f"{where}.horocycle.s2")
        shift = float(h.get("shift", 0.0))
        s = math.sqrt(s2)
        blk = np.array([[1.0, -shift], [0.0, 1.0]]) @ np.diag([s, 1 / s])
        return np.kron(np.eye(spec.n_factors), blk).astype(dtype)
    try:
        M = np.asarray(raw, dtype=dtype)
    except (TypeError, ValueError):
        raise ConfigError(f"{where} must be 'identity', 'random', a horocycle or a matrix") from None
    if M.ndim == 3:
        g = np.zeros((n, n), dtype=dtype)
        for f, b in enumerate(M):
            g[2 * f:2 * f + 2, 2 * f:2 * f + 2] = b
        M = g
    if M.shape != (n, n):
        raise ConfigError(f"{where} must be {n}x{n}")
    return M


@dataclass(frozen=True)
class _TrajTemplate:
    u: Any
    g: Any
    T: float
    delta: float
    window: tuple | None
    r0: float | None


def _traj_template(raw: dict, where: str) -> _TrajTemplate:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where} must be a mapping")
    T = _positive(_require(raw, "T", where + "."), where + ".T")
    delta = _positive(raw.get("delta", 0.1), where + ".delta")
    window = raw.get("window")
    if window is not None:
        if not (isinstance(window, list) and len(window) == 2 and float(window[1]) > float(window[0])):
            raise ConfigError(f"{where}.window must be [a, b] with a < b")
        window = (float(window[0]), float(window[1]))
    return _TrajTemplate(raw.get("u", "E"), raw.get("g", "identity"), T, delta, window, None)


def _make_traj(spec: LieAlgebraSpec, tpl: _TrajTemplate, where: str, rng, *, T=None, delta=None,
               r0=None) -> TrajectorySpec:
    u = _spec_vector(spec, tpl.u, where + ".u", rng)
    g = _basepoint(spec, tpl.g, where + ".g", rng)
    T = tpl.T if T is None else T
    window = tpl.window if tpl.window is not None else (0.0, T)
    try:
        return TrajectorySpec(u, g, T, tpl.delta if delta is None else delta, r0=r0, window=window,
                              allow_large_delta=True)
    except (QNDError, ValueError) as e:
        raise ConfigError(f"{where}: {e}") from None


def _group(cfg: ExperimentConfig, radius=None) -> DiscreteGroupSpec:
    raw = _require(cfg.body, "group", "")
    grp = group_from_config(raw)
    if cfg.body.get("diagonal"):
        grp = diagonal_product(grp, int(cfg.body["diagonal"]) if cfg.body["diagonal"] is not True else 2,
                               name=f"diag({grp.name})")
    return grp.with_radius(int(radius)) if radius is not None else grp


def _constants_for(spec: LieAlgebraSpec, cfg: ExperimentConfig) -> KMConstants:
    c = cfg.constants
    try:
        return KMConstants.for_algebra(spec, l_M=c.get("l_M"), r0=c.get("r0"))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"constants: {e}") from None


# -- rows -----------------------------------------------------------------------------------------

@dataclass
class ReportRow:
    experiment_id: str
    index: int
    kind: str
    params: dict
    status: str                      # pass, fail, skip, partial, info
    measured: float | None = None
    relation: str = ""               # "<=" or ">="
    bound: float | None = None
    constants: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool | None:
        if self.relation == "<=":
            return self.measured <= self.bound
        if self.relation == ">=":
            return self.measured >= self.bound
        return None

    def as_csv(self) -> list[str]:
        p = self.passed
        return [str(SCHEMA_VERSION), self.experiment_id, str(self.index), self.kind, _json(self.params),
                self.status, _num(self.measured), self.relation, _num(self.bound),
                "" if p is None else str(p).lower(), _json(self.constants), _json(self.details),
                f"{self.wall_time:.6f}"]


def _num(x) -> str:
    return "" if x is None else repr(float(x))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x) if math.isfinite(x) else str(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if x is None or isinstance(x, (str, int, bool)):
        return x
    return str(x)


def _json(x) -> str:
    return json.dumps(_jsonable(x), sort_keys=True, separators=(",", ":"))


def _judged(row: ReportRow) -> ReportRow:
    row.status = "pass" if row.passed else "fail"
    return row


# -- sweep points -------------------------------------------------------------------------------------

Runner = Callable[[ExperimentConfig, dict, np.random.Generator], ReportRow]


def _product(axes: dict[str, list]) -> list[dict]:
    names = list(axes)
    return [dict(zip(names, vals)) for vals in itertools.product(*(axes[n] for n in names))]


def build_points(cfg: ExperimentConfig) -> list[dict]:
    """Validate the config and list its sweep points in a fixed order."""
    return _POINTS[cfg.kind](cfg)


def _points_goodness(cfg):
    polys = _grid(cfg.body, "polynomials", "")
    ivs = _grid(cfg.body, "intervals", "")
    for i, p in enumerate(polys):
        if not isinstance(p, list) or not p or not all(isinstance(c, (int, float)) for c in p):
            raise ConfigError(f"polynomials[{i}] must be a non-empty list of numbers")
    for i, J in enumerate(ivs):
        if not (isinstance(J, list) and len(J) == 2 and float(J[1]) > float(J[0])):
            raise ConfigError(f"intervals[{i}] must be [a, b] with a < b")
    return _product({"polynomial": list(range(len(polys))), "interval": list(range(len(ivs)))})


def _points_km(cfg):
    lat = _require(cfg.body, "lattice", "")
    if "random" in lat:
        r = lat["random"]
        count = int(_positive(_require(r, "count", "lattice.random."), "lattice.random.count"))
        dims = r.get("dims", [2, 3])
        if not dims or any(int(d) < 1 or int(d) > 6 for d in dims):
            raise ConfigError("lattice.random.dims must list dimensions between 1 and 6")
        items = list(range(count))
    else:
        basis = np.asarray(_require(lat, "basis", "lattice."), float)
        if basis.ndim != 2 or basis.shape[0] > basis.shape[1]:
            raise ConfigError("lattice.basis must be a list of rows")
        items = [0]
    B = cfg.body.get("B", [0, 1])
    if not (isinstance(B, list) and len(B) == 2 and float(B[1]) > float(B[0])):
        raise ConfigError("B must be [a, b] with a < b")
    fr = _grid(cfg.sweep, "eps_fraction", "sweep.", default=[0.5])
    for i, f in enumerate(fr):
        if not 0 < float(f) < 1:
            raise ConfigError(f"sweep.eps_fraction[{i}] must lie in (0, 1)")
    return _product({"instance": items, "eps_fraction": fr})


def _traj_points(cfg, axes_extra: dict):
    tpl = _traj_template(_require(cfg.body, "trajectory", ""), "trajectory")
    grp = _group(cfg)
    spec = grp.lie
    for name in ("delta", "T"):
        for i, v in enumerate(_grid(cfg.sweep, name, "sweep.", default=[getattr(tpl, name)])):
            _positive(v, f"sweep.{name}[{i}]")
    radii = _grid(cfg.sweep, "word_radius", "sweep.", default=[grp.word_radius])
    for i, r in enumerate(radii):
        if not isinstance(r, int) or r < 0:
            raise ConfigError(f"sweep.word_radius[{i}] must be a non-negative integer")
    _make_traj(spec, tpl, "trajectory", None)    # shape and form checks
    axes = {"delta": _grid(cfg.sweep, "delta", "sweep.", default=[tpl.delta]),
            "T": _grid(cfg.sweep, "T", "sweep.", default=[tpl.T]),
            "word_radius": radii}
    axes.update(axes_extra)
    n_samples = cfg.body.get("samples", 1)
    if not isinstance(n_samples, int) or n_samples < 1:
        raise ConfigError("samples must be a positive integer")
    axes["sample"] = list(range(n_samples))
    _constants_for(spec, cfg)
    return _product(axes)


def _points_bad_set(cfg):
    return _traj_points(cfg, {})


def _points_theorem(cfg):
    eps = _grid(cfg.sweep, "eps", "sweep.")
    for i, e in enumerate(eps):
        if not 0 < float(e) <= 1:
            raise ConfigError(f"sweep.eps[{i}] must lie in (0, 1]")
    return _traj_points(cfg, {"eps": eps})


def _points_product(cfg):
    trs = _require(cfg.body, "trajectories", "")
    if not isinstance(trs, list) or len(trs) < 2:
        raise ConfigError("trajectories must list one trajectory per factor")
    tpls = [_traj_template(t, f"trajectories[{i}]") for i, t in enumerate(trs)]
    grp = _group(cfg)
    if grp.lie.n_factors != len(tpls):
        raise ConfigError(f"group has {grp.lie.n_factors} factors but {len(tpls)} trajectories are given")
    delta = _positive(cfg.body.get("delta", 0.1), "delta")
    eps = _grid(cfg.sweep, "eps", "sweep.")
    for i, e in enumerate(eps):
        if not 0 < float(e) <= 1:
            raise ConfigError(f"sweep.eps[{i}] must lie in (0, 1]")
    td = cfg.body.get("theorem_delta", 0.01)
    _positive(td, "theorem_delta")
    return [{"check": "bad_set", "delta": delta}] + [{"check": "theorem", "eps": e, "delta": td} for e in eps]


def _points_dichotomy(cfg):
    alg = _require(cfg.body, "algebra", "")
    try:
        algebra(alg)
    except QNDError as e:
        raise ConfigError(f"algebra: {e}") from None
    _require(cfg.body, "lattice", "")
    _positive(cfg.body.get("threshold", 3.0), "threshold")
    Ts = _grid(cfg.sweep, "T", "sweep.", default=[100])
    eps = _grid(cfg.sweep, "eps", "sweep.")
    for i, v in enumerate(Ts):
        _positive(v, f"sweep.T[{i}]")
    for i, v in enumerate(eps):
        _positive(v, f"sweep.eps[{i}]")
    return _product({"T": Ts, "eps": eps})


_POINTS = {"goodness": _points_goodness, "km_bound": _points_km, "bad_set": _points_bad_set,
           "theorem11": _points_theorem, "dichotomy": _points_dichotomy, "product": _points_product}


# -- runners -------------------------------------------------------------------------------------------

def _run_goodness(cfg, pt, rng):
    coeffs = cfg.body["polynomials"][pt["polynomial"]]
    J = tuple(float(x) for x in cfg.body["intervals"][pt["interval"]])
    f = PolyFunction.polynomial(coeffs)
    deg = int(cfg.body.get("degree", max(f.inner.degree, 1)))
    C, alpha = polynomial_goodness_constants(deg)
    C = float(cfg.constants.get("C", C))
    alpha = float(cfg.constants.get("alpha", alpha))
    g = cfg.body.get("grid") or {}
    grid = GoodnessGrid(int(g.get("n_subintervals", 50)), int(g.get("n_eps", 20)), seed=cfg.seed + pt["polynomial"])
    cert = verify_goodness(f, C, alpha, J, grid)
    return _judged(ReportRow(cfg.id, 0, cfg.kind, {"coeffs": coeffs, "interval": J}, "", cert.worst_ratio, "<=",
                             1 + TOL.goodness_slack, {"C": C, "alpha": alpha},
                             {"worst_case": cert.worst_case}))


def _random_km_instance(cfg, rng):
    r = cfg.body["lattice"]["random"]
    dims = [int(d) for d in r.get("dims", [2, 3])]
    k = int(rng.choice(dims))
    while True:
        A = rng.normal(size=(k, k))
        if abs(np.linalg.det(A)) > 0.2:
            break
    A /= abs(np.linalg.det(A)) ** (1 / k)
    lo, hi = r.get("scale", [0.1, 1.0])
    lat = LatticeBasis(A * rng.uniform(lo, hi))
    N = np.triu(rng.uniform(-1, 1, size=(k, k)), 1)
    L = rng.uniform(*cfg.body.get("B_length", [0.5, 3.0]))
    return lat, N, (0.0, float(L))


def _run_km(cfg, pt, rng):
    lat_cfg = cfg.body["lattice"]
    if "random" in lat_cfg:
        lat, N, B = _random_km_instance(cfg, rng)
    else:
        lat = LatticeBasis(np.asarray(lat_cfg["basis"], float),
                           gram=np.asarray(lat_cfg["gram"], float) if "gram" in lat_cfg else None)
        N = np.asarray(cfg.body.get("flow", np.zeros((lat.ambient_dim,) * 2)), float)
        B = tuple(float(x) for x in cfg.body.get("B", [0, 1]))
    consts = KMConstants(lat.ambient_dim, **{k: v for k, v in cfg.constants.items() if k in ("l_M", "r0")})
    r = rho(lat, N, B, consts, budget=cfg.budget)
    eps = float(pt["eps_fraction"]) * r.rho
    rep = check_km_bound(lat, N, B, eps, consts, rho_result=r, budget=cfg.budget)
    params = {"k": lat.ambient_dim, "B": B, "eps": eps, "eps_fraction": pt["eps_fraction"],
              "instance": pt["instance"]}
    return _judged(ReportRow(cfg.id, 0, cfg.kind, params, "", rep.measured, "<=", rep.bound, rep.constants,
                             {"rho": r.rho}))


def _traj_for_point(cfg, pt, rng, tpl=None, require_x_delta=False):
    grp = _group(cfg, pt["word_radius"])
    spec = grp.lie
    tpl = tpl or _traj_template(cfg.body["trajectory"], "trajectory")
    consts = _constants_for(spec, cfg)
    tries = 50 if (tpl.g == "random" and require_x_delta) else 1
    for _ in range(tries):
        tr = _make_traj(spec, tpl, "trajectory", rng, T=float(pt["T"]), delta=float(pt["delta"]), r0=consts.r0)
        if not require_x_delta or in_X_delta(grp, tr):
            break
    return grp, tr, consts


def _traj_params(pt, tr: TrajectorySpec) -> dict:
    return {**pt, "u": tr.u.coords.tolist(), "window": tr.window}


def _run_bad_set(cfg, pt, rng):
    grp, tr, consts = _traj_for_point(cfg, pt, rng)
    res = bad_set(grp, tr)
    lo, hi = res.window
    return _judged(ReportRow(cfg.id, 0, cfg.kind, _traj_params(pt, tr), "", res.measure, "<=", hi - lo,
                             {"r0": tr.r0},
                             {"intervals": res.intervals.to_list(), "flagged": res.flagged.to_list(),
                              "complete": res.certificate.complete, "certificate": res.certificate.reason,
                              "n_enumerated": res.n_enumerated, "notes": res.notes}))


def _run_theorem(cfg, pt, rng):
    grp, tr, consts = _traj_for_point(cfg, pt, rng, require_x_delta=True)
    try:
        rep = verify_theorem_1_1(grp, tr, float(pt["eps"]), consts)
    except PreconditionViolation as e:
        return ReportRow(cfg.id, 0, cfg.kind, _traj_params(pt, tr), "skip", details={"reason": str(e)})
    return _judged(ReportRow(cfg.id, 0, cfg.kind, _traj_params(pt, tr), "", rep.measured, "<=", rep.bound,
                             rep.constants, rep.details))


def _run_product(cfg, pt, rng):
    grp = _group(cfg)
    tpls = [_traj_template(t, f"trajectories[{i}]") for i, t in enumerate(cfg.body["trajectories"])]
    base = group_from_config(cfg.body["group"])
    trs = []
    for i, tpl in enumerate(tpls):
        s = algebra(base.algebra)
        trs.append(_make_traj(s, tpl, f"trajectories[{i}]", rng, delta=pt["delta"]))
    ptraj = product_trajectory(trs, delta=pt["delta"])
    consts = _constants_for(ptraj.spec, cfg)
    ptraj = ptraj.replace(r0=consts.r0)
    if pt["check"] == "bad_set":
        res = bad_set(grp, ptraj)
        singles = [bad_set(base, t) for t in trs]
        # every gamma bad for the product is bad in each factor
        bound = min(s.measure for s in singles)
        return _judged(ReportRow(cfg.id, 0, cfg.kind, dict(pt), "", res.measure, "<=", bound, {"r0": consts.r0},
                                 {"intervals": res.intervals.to_list(),
                                  "factor_intervals": [s.intervals.to_list() for s in singles]}))
    try:
        rep = verify_theorem_1_1(grp, ptraj, float(pt["eps"]), consts)
    except PreconditionViolation as e:
        return ReportRow(cfg.id, 0, cfg.kind, dict(pt), "skip", details={"reason": str(e)})
    return _judged(ReportRow(cfg.id, 0, cfg.kind, dict(pt), "", rep.measured, "<=", rep.bound, rep.constants,
                             rep.details))


def _run_dichotomy(cfg, pt, rng):
    spec = algebra(cfg.body["algebra"])
    lat_cfg = cfg.body["lattice"]
    rows = lat_cfg.get("vectors") if isinstance(lat_cfg, dict) else lat_cfg
    vecs = np.array([_spec_vector(spec, v, "lattice.vectors").coords for v in rows])
    lat = LatticeBasis(vecs, gram=spec.killing_gram)
    u = _spec_vector(spec, cfg.body.get("u", "E"), "u")
    threshold = float(cfg.body.get("threshold", 3.0))
    T, eps = float(pt["T"]), float(pt["eps"])
    det = detect_invariant_sublattice(lat, u, threshold, budget=cfg.budget)
    m, _ = measure_small_d1(lat, u, (0.0, T), eps, budget=cfg.budget)
    prop = m / T
    params = {"T": T, "eps": eps}
    details = {"found": det.found, "constant": det.covolume}
    if det.found and det.subgroup.rank == 1 and eps > det.covolume:
        # the invariant vector stays shorter than eps for all time
        return _judged(ReportRow(cfg.id, 0, cfg.kind, params, "", prop, ">=", 0.9, {}, details))
    consts = KMConstants(spec.dim)
    r = rho(lat, u, (0.0, T), consts, budget=cfg.budget)
    details["rho"] = r.rho
    if eps < r.rho:
        bound = consts.C_k * (eps / r.rho) ** consts.alpha_k
        return _judged(ReportRow(cfg.id, 0, cfg.kind, params, "", prop, "<=", bound, consts.as_dict(), details))
    return ReportRow(cfg.id, 0, cfg.kind, params, "info", prop, "", None, consts.as_dict(), details)


_RUNNERS: dict[str, Runner] = {"goodness": _run_goodness, "km_bound": _run_km, "bad_set": _run_bad_set,
                               "theorem11": _run_theorem, "dichotomy": _run_dichotomy, "product": _run_product}


# -- orchestration ------------------------------------------------------------------------------------------

@dataclass
class RunResult:
    rows: list[ReportRow]
    exit_code: int
    summary: dict


def _run_point(cfg: ExperimentConfig, index: int, pt: dict) -> ReportRow:
    rng = np.random.default_rng([cfg.seed, index])
    t0 = time.perf_counter()
    try:
        row = _RUNNERS[cfg.kind](cfg, pt, rng)
    except BudgetExceeded as e:
        row = ReportRow(cfg.id, index, cfg.kind, dict(pt), "partial", details={"reason": str(e)})
    row.index = index
    row.wall_time = time.perf_counter() - t0
    return row


def run_experiment(cfg: ExperimentConfig, *, threads: int = 1) -> RunResult:
    points = build_points(cfg)
    t0 = time.perf_counter()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda ip: _run_point(cfg, *ip), enumerate(points)))
    else:
        rows = [_run_point(cfg, i, p) for i, p in enumerate(points)]
    rows.sort(key=lambda r: r.index)
    counts = {s: sum(r.status == s for r in rows) for s in ("pass", "fail", "skip", "partial", "info")}
    if counts["fail"]:
        code = EXIT_FAIL
    elif counts["partial"]:
        code = EXIT_BUDGET
    else:
        code = EXIT_OK
    summary = {
        "schema_version": SCHEMA_VERSION,
        "qndlab_version": __version__,
        "experiment_id": cfg.id,
        "kind": cfg.kind,
        "config": _jsonable(cfg.body),
        "seed": cfg.seed,
        "budget": cfg.budget,
        "input_hash": git_blob_hash(cfg.source),
        "totals": {"rows": len(rows), **counts},
        "exit_code": code,
        "wall_time": time.perf_counter() - t0,
        "notes": ["r0 is a configured value, not a certified Zassenhaus radius",
                  "condition (*) and torsion checks cover enumerated elements only"],
    }
    return RunResult(rows, code, summary)


def rows_to_csv(rows: list[ReportRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow(r.as_csv())
    return buf.getvalue()


def write_reports(result: RunResult, out: str | Path) -> tuple[Path, Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = out / "report.csv", out / "summary.json"
    csv_path.write_text(rows_to_csv(result.rows), encoding="utf-8")
    json_path.write_text(json.dumps(result.summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return csv_path, json_path


def builtin_catalog() -> dict:
    """Shipped algebras and groups with their hypothesis flags."""
    from .catalog import BUILTINS
    from .errors import ConditionStarViolation
    from .flow_lab import check_condition_star, find_torsion
    from .lie_core import FACTOR_KINDS

    algebras = {name: {"dim": algebra(name).dim, "default_r0": algebra(name).default_r0,
                       "default_l_M": algebra(name).default_l_M} for name in FACTOR_KINDS}
    groups = {}
    for name, make in BUILTINS.items():
        g = make(3)
        try:
            check_condition_star(g)
            star = True
        except ConditionStarViolation:
            star = False
        groups[name] = {"algebra": g.algebra, "generators": [e.to_strings() for e in g.generators],
                        "torsion_free": g.torsion_free, "lattice": g.is_lattice,
                        "condition_star_on_ball": star, "torsion_found": find_torsion(g) is not None,
                        "notes": g.notes}
    return {"algebras": algebras, "products": "join factor names with '*', e.g. sl2r*sl2r",
            "groups": groups}
