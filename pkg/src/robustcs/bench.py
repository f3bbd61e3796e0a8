"""Monte Carlo harness: oracle mu selection, sparsity sweeps and image recovery.

An experiment is an :class:`ExperimentSpec`, normally read from a flat
``key = value`` file by :func:`load_config`.  Every random draw of a trial
comes from a seed derived from ``(master_seed, kind, K, trial, purpose)``,
so results do not depend on the worker count or on which other methods are
in the run.
"""

from __future__ import annotations

import json
import logging
import math
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .linops import DenseMap, LinearMap, compose, make_gaussian_orthonormal, make_partial_dct
from .prox import Penalty
from .signals import (SUCCESS_THRESHOLD, NoiseSpec, SignalSpec, gen_noise, gen_sparse_signal, psnr_db,
                      relative_error, trial_seed)
from .solvers import (SolverConfig, solve_l1la_admm, solve_l1la_batch,
                      solve_l1ls_batch, solve_l1ls_fista, solve_lqla_admm, solve_lqla_batch,
                      solve_lqls_admm, solve_lqls_batch)
from .wavelets import as_synthesis_map, haar2_forward, haar2_inverse, phantom_shepp_logan, read_pgm, write_pgm

__all__ = [
    "ConfigError",
    "OracleError",
    "MethodSpec",
    "ExperimentSpec",
    "Instance",
    "OracleResult",
    "SweepRow",
    "CSV_HEADER",
    "DEFAULT_MU_GRID",
    "parse_config",
    "load_config",
    "parse_methods",
    "sweep_instance",
    "image_instance",
    "select_mu_oracle",
    "run_single",
    "run_sparsity_sweep",
    "format_sweep_csv",
    "write_sweep_csv",
    "run_image_recovery",
    "save_instance",
    "load_instance",
    "prox_check",
    "ProxCheckRow",
]

log = logging.getLogger(__name__)

CSV_HEADER = "K,method,params,success_rate,mean_rel_err,mean_iters,mean_runtime_ms,mu_selected"
DEFAULT_MU_GRID = tuple(float(v) for v in np.logspace(-4, 2, 15))
KINDS = ("sparsity-sweep", "image-recovery", "single-recover", "prox-check", "config-check")

_SOLVER_ALIASES = {
    "yall1": "yall1", "l1la": "yall1",
    "fista": "fista", "l1ls": "fista", "l1ls-fista": "fista",
    "lqla": "lqla", "lqla-admm": "lqla",
    "lqls": "lqls", "lqls-admm": "lqls",
}
METHOD_NAMES = {"yall1": "YALL1", "fista": "L1LS-FISTA", "lqla": "LqLA-ADMM", "lqls": "LqLS-ADMM"}


class ConfigError(ValueError):
    """Invalid experiment configuration (unknown key, bad value, bad range)."""


class OracleError(RuntimeError):
    """Every mu on the grid diverged."""


@dataclass(frozen=True)
class MethodSpec:
    """A solver together with its penalty (l1 for the two convex baselines)."""

    solver: str
    penalty: Penalty | None = None

    def __post_init__(self):
        s = _SOLVER_ALIASES.get(self.solver.lower())
        if s is None:
            raise ConfigError(f"unknown method {self.solver!r}; expected one of yall1, fista, lqla, lqls")
        object.__setattr__(self, "solver", s)
        if s in ("yall1", "fista"):
            if self.penalty is not None and self.penalty.variant != "soft":
                raise ConfigError(f"{METHOD_NAMES[s]} only supports the l1 penalty")
            object.__setattr__(self, "penalty", None)
        elif self.penalty is None:
            object.__setattr__(self, "penalty", Penalty.lq_norm(0.5))

    @property
    def name(self) -> str:
        return METHOD_NAMES[self.solver]

    @property
    def nonconvex(self) -> bool:
        return self.penalty is not None and not self.penalty.convex

    def params(self) -> str:
        if self.penalty is None:
            return "l1"
        p = self.penalty
        return f"q={p.q:g}" if p.variant == "lq" else p.label()

    def key(self) -> str:
        """File-name friendly identifier."""
        return re.sub(r"[^A-Za-z0-9.=-]+", "_", f"{self.name}_{self.params()}").strip("_")


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str = "sparsity-sweep"
    n: int = 512
    m: int = 200
    k_grid: tuple = (10, 20, 30, 40, 50, 60, 70, 80)
    noise: NoiseSpec = NoiseSpec.sas()
    methods: tuple = (MethodSpec("yall1"), MethodSpec("fista"), MethodSpec("lqls"), MethodSpec("lqla"))
    mu_grid: tuple = DEFAULT_MU_GRID
    trials: int = 50
    master_seed: int = 0
    solver: SolverConfig = SolverConfig()
    init: str = "yall1"
    image: str = "phantom"
    side: int = 256
    sampling: float = 0.4
    keep_dc: bool = True
    scramble: bool = True
    threads: int = 1
    record_runtime: bool = True
    out: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if not self.mu_grid or not all(mu > 0 for mu in self.mu_grid):
            raise ConfigError("mu_grid must be a nonempty list of positive values")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not 0 < self.m <= self.n:
            raise ConfigError(f"need 0 < m <= n, got m={self.m}, n={self.n}")
        if not self.k_grid or any(not 0 < k <= self.n for k in self.k_grid):
            raise ConfigError("every K must satisfy 0 < K <= n")
        if not self.methods:
            raise ConfigError("at least one method is required")
        if self.init not in ("yall1", "zero"):
            raise ConfigError("init must be 'yall1' or 'zero'")
        if not 0 < self.sampling <= 1:
            raise ConfigError("sampling must be in (0, 1]")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def with_(self, **kw) -> "ExperimentSpec":
        return replace(self, **kw)


# ---------------------------------------------------------------- config files

_SOLVER_KEYS = {
    "mu": ("mu", float), "epsilon": ("epsilon", float), "tau1": ("tau1", "auto-float"),
    "tau2": ("tau2", "auto-float"), "rho_target": ("rho_target", "auto-float"),
    "rho0": ("rho0", "auto-float"), "continuation": ("continuation_factor", float),
    "tol": ("tol", float), "max_iter": ("max_iter", int), "v_update": ("v_update", str),
    "strict": ("strict", "bool"), "lambda_max": ("lambda_max", "auto-float"),
    "allow_nonconvergent": ("allow_nonconvergent", "bool"),
}
_PENALTY_KEYS = ("penalty", "q", "lambda", "a", "gamma")
_NOISE_KEYS = ("noise", "snr_db", "xi", "kappa", "alpha", "gamma_disp")
_BENCH_KEYS = {
    "kind": str, "n": int, "m": int, "K": "int-list", "methods": str, "mu_grid": "grid",
    "trials": int, "seed": int, "out": str, "image": str, "side": int, "sampling": float,
    "keep_dc": "bool", "scramble": "bool", "threads": int, "record_runtime": "bool", "init": str,
}


def _convert(kind, text):
    text = text.strip()
    if kind is str:
        return text
    if kind is int:
        return int(text)
    if kind is float:
        return float(text)
    if kind == "bool":
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if kind == "auto-float":
        return None if text.lower() in ("auto", "none") else float(text)
    if kind == "int-list":
        m = re.fullmatch(r"(\d+):(\d+):(\d+)", text)
        if m:
            a, b, s = map(int, m.groups())
            return tuple(range(a, b + 1, s))
        return tuple(int(v) for v in re.split(r"[,\s]+", text) if v)
    if kind == "grid":
        m = re.fullmatch(r"logspace\(\s*([-+.\deE]+)\s*,\s*([-+.\deE]+)\s*,\s*(\d+)\s*\)", text)
        if m:
            return tuple(float(v) for v in np.logspace(float(m[1]), float(m[2]), int(m[3])))
        return tuple(float(v) for v in re.split(r"[,\s]+", text) if v)
    raise AssertionError(kind)


def _penalty_from(d: dict) -> Penalty:
    variant = d.get("penalty", "lq" if "q" in d else "lq").lower()
    if variant == "lq":
        return Penalty.lq_norm(float(d.get("q", 0.5)))
    if variant == "scad":
        return Penalty.scad(float(d.get("lambda", 1.0)), float(d.get("a", 3.7)))
    if variant == "mc":
        return Penalty.mc(float(d.get("lambda", 1.0)), float(d.get("gamma", 2.0)))
    return Penalty(variant)


def parse_methods(text: str, default_penalty: Penalty | None = None) -> tuple:
    """Parse ``yall1, fista, lqls(q=0.5), lqla(penalty=scad;lambda=1;a=3.7)``."""
    items, depth, cur = [], 0, ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            items.append(cur)
            cur = ""
        else:
            cur += ch
    items.append(cur)
    out = []
    for item in (i.strip() for i in items):
        if not item:
            continue
        m = re.fullmatch(r"([A-Za-z0-9_-]+)\s*(?:\((.*)\))?", item)
        if not m:
            raise ConfigError(f"cannot parse method {item!r}")
        name, args = m[1], m[2]
        penalty = default_penalty
        if args:
            d = {}
            for part in args.split(";"):
                if not part.strip():
                    continue
                if "=" not in part:
                    raise ConfigError(f"method argument {part!r} is not key=value")
                k, v = part.split("=", 1)
                k = k.strip()
                if k not in _PENALTY_KEYS:
                    raise ConfigError(f"unknown method argument {k!r} in {item!r}")
                d[k] = v.strip()
            penalty = _penalty_from(d)
        solver = _SOLVER_ALIASES.get(name.lower())
        if solver in ("yall1", "fista"):
            penalty = None
        out.append(MethodSpec(name, penalty))
    if not out:
        raise ConfigError("methods list is empty")
    return tuple(out)


def parse_config(text: str, source: str = "<config>") -> ExperimentSpec:
    """Build an :class:`ExperimentSpec` from flat ``key = value`` lines.

    ``#`` starts a comment.  Unknown keys and unparsable values raise
    :class:`ConfigError` naming the key and the line.
    """
    solver_kw, penalty_kw, noise_kw, bench_kw = {}, {}, {}, {}
    methods_text = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key in _SOLVER_KEYS:
                attr, kind = _SOLVER_KEYS[key]
                solver_kw[attr] = _convert(kind, value)
            elif key in _PENALTY_KEYS:
                penalty_kw[key] = value
            elif key in _NOISE_KEYS:
                noise_kw[key] = value
            elif key in _BENCH_KEYS:
                if key == "methods":
                    methods_text = value
                else:
                    bench_kw[key] = _convert(_BENCH_KEYS[key], value)
            else:
                raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
    try:
        solver = SolverConfig(**solver_kw)
        default_penalty = _penalty_from(penalty_kw) if penalty_kw else None
        noise = _noise_from(noise_kw) if noise_kw else NoiseSpec.sas()
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{source}: {exc}") from None
    kw = {}
    rename = {"K": "k_grid", "seed": "master_seed"}
    for k, v in bench_kw.items():
        kw[rename.get(k, k)] = v
    if methods_text is not None:
        kw["methods"] = parse_methods(methods_text, default_penalty)
    elif default_penalty is not None:
        kw["methods"] = tuple(MethodSpec(s, default_penalty) for s in ("yall1", "fista", "lqls", "lqla"))
    if "side" in kw and "n" not in kw:
        kw["n"] = kw["side"] ** 2
        kw.setdefault("m", round(kw.get("sampling", 0.4) * kw["n"]))
    try:
        return ExperimentSpec(noise=noise, solver=solver, **kw)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def _noise_from(d: dict) -> NoiseSpec:
    variant = d.get("noise", "sas").lower()
    f = {k: float(v) for k, v in d.items() if k != "noise"}
    if variant == "sas":
        return NoiseSpec.sas(f.get("alpha", 1.0), f.get("gamma_disp", 1e-4))
    if variant == "gmm":
        return NoiseSpec.gmm(f.get("snr_db", 30.0), f.get("xi", 0.1), f.get("kappa", 1000.0))
    if variant == "gaussian":
        return NoiseSpec.gaussian(f.get("snr_db", 30.0))
    if variant == "none":
        return NoiseSpec.noiseless()
    raise ValueError(f"unknown noise {variant!r}")


def load_config(path) -> ExperimentSpec:
    with open(path) as fh:
        return parse_config(fh.read(), source=os.fspath(path))


# ---------------------------------------------------------------- instances

@dataclass
class Instance:
    A: LinearMap
    y: np.ndarray
    x_true: np.ndarray
    meta: dict = field(default_factory=dict)


def sweep_instance(spec: ExperimentSpec, K: int, trial: int) -> Instance:
    """Trial ``trial`` of sparsity ``K``: fresh matrix, signal and noise."""
    seeds = {p: trial_seed(spec.master_seed, "sparsity-sweep", K, trial, p)
             for p in ("matrix", "signal", "noise")}
    A = make_gaussian_orthonormal(spec.m, spec.n, seeds["matrix"])
    x = gen_sparse_signal(SignalSpec(spec.n, K, seeds["signal"]))
    s = A.apply(x)
    y = s + gen_noise(spec.noise, spec.m, s, seed=seeds["noise"])
    return Instance(A, y, x, {"K": K, "trial": trial})


def image_instance(spec: ExperimentSpec):
    """``(Instance, image)`` for the image-recovery experiment; unknowns are Haar coefficients."""
    if spec.image == "phantom":
        img = phantom_shepp_logan(spec.side)
    else:
        img = read_pgm(spec.image)
    side = img.shape[0]
    n = side * side
    m = round(spec.sampling * n)
    D = make_partial_dct(n, m, trial_seed(spec.master_seed, "image-recovery", "matrix"),
                         keep_dc=spec.keep_dc, scramble=spec.scramble)
    A = compose(D, as_synthesis_map(side))
    theta = haar2_forward(img)
    s = A.apply(theta)
    y = s + gen_noise(spec.noise, m, s, seed=trial_seed(spec.master_seed, "image-recovery", "noise"))
    return Instance(A, y, theta, {"side": side, "m": m}), img


# ---------------------------------------------------------------- oracle mu

def _run_grid(method: MethodSpec, inst: Instance, mus, cfg: SolverConfig, x0):
    A, y = inst.A, inst.y
    if method.solver == "yall1":
        return solve_l1la_batch(A, y, cfg, mus)
    if method.solver == "fista":
        return solve_l1ls_batch(A, y, cfg, mus)
    if method.solver == "lqla":
        return solve_lqla_batch(A, y, method.penalty, cfg, mus, x0)
    return solve_lqls_batch(A, y, method.penalty, cfg, mus, x0)


def run_single(method: MethodSpec, A: LinearMap, y, cfg: SolverConfig, x0=None):
    """One solve at ``cfg.mu``; returns a :class:`~robustcs.solvers.SolveResult`."""
    if method.solver == "yall1":
        return solve_l1la_admm(A, y, cfg, x0)
    if method.solver == "fista":
        return solve_l1ls_fista(A, y, cfg, x0)
    if method.solver == "lqla":
        return solve_lqla_admm(A, y, method.penalty, cfg, x0)
    return solve_lqls_admm(A, y, method.penalty, cfg, x0)


@dataclass
class OracleResult:
    mu: float
    x_hat: np.ndarray
    rel_err: float
    iterations: int
    converged: bool
    errors: dict
    runtime_s: float


def select_mu_oracle(method: MethodSpec, inst: Instance, mu_grid, cfg: SolverConfig, x0=None) -> OracleResult:
    """Best-relative-error mu on the grid; ties go to the larger mu.

    All grid points run on the same instance from the same start.  Columns
    that diverge count as infinitely bad; if all of them diverge an
    :class:`OracleError` lists the outcome per mu.
    """
    mus = np.sort(np.asarray(mu_grid, dtype=float))
    if mus.size == 0:
        raise ValueError("mu grid is empty")
    t0 = time.perf_counter()
    res = _run_grid(method, inst, mus, cfg, x0)
    errs = np.array([math.inf if res.diverged[j] else relative_error(res.X[:, j], inst.x_true)
                     for j in range(mus.size)])
    errs[~np.isfinite(errs)] = math.inf
    if not np.isfinite(errs).any():
        outcome = ", ".join(f"mu={mu:g}: diverged at iteration {it}" for mu, it in zip(mus, res.iterations))
        raise OracleError(f"{method.name} diverged for every mu on the grid ({outcome})")
    # ascending grid: the last index attaining the minimum is the largest mu
    j = int(np.flatnonzero(errs == errs.min())[-1])
    return OracleResult(float(mus[j]), res.X[:, j].copy(), float(errs[j]), int(res.iterations[j]),
                        bool(res.converged[j]), {float(mu): float(e) for mu, e in zip(mus, errs)},
                        time.perf_counter() - t0)


def _needs_yall1(spec: ExperimentSpec) -> bool:
    return spec.init == "yall1" and any(m.nonconvex for m in spec.methods)


def _evaluate_methods(spec: ExperimentSpec, inst: Instance):
    """Oracle-select every method on one instance; failures become records."""
    yall1 = None
    yall1_method = MethodSpec("yall1")
    if _needs_yall1(spec) or any(m.solver == "yall1" for m in spec.methods):
        try:
            yall1 = select_mu_oracle(yall1_method, inst, spec.mu_grid, spec.solver)
        except Exception as exc:  # noqa: BLE001 - recorded, not fatal
            yall1 = exc
    out = []
    for method in spec.methods:
        rec = {"method": method.name, "params": method.params(), "init": "zero"}
        try:
            if method.solver == "yall1":
                if isinstance(yall1, Exception):
                    raise yall1
                r = yall1
            else:
                x0 = None
                if method.nonconvex and spec.init == "yall1":
                    if isinstance(yall1, Exception):
                        raise RuntimeError(f"YALL1 initialization failed: {yall1}")
                    x0 = yall1.x_hat
                    rec["init"] = f"yall1(mu={yall1.mu:g})"
                r = select_mu_oracle(method, inst, spec.mu_grid, spec.solver, x0)
            rec.update(ok=True, rel_err=r.rel_err, success=r.rel_err <= SUCCESS_THRESHOLD, iterations=r.iterations,
                       converged=r.converged, mu=r.mu, runtime_ms=1e3 * r.runtime_s, x_hat=r.x_hat)
        except Exception as exc:  # noqa: BLE001 - one bad trial must not stop a sweep
            rec.update(ok=False, rel_err=math.nan, success=False, iterations=0, converged=False,
                       mu=math.nan, runtime_ms=math.nan, x_hat=None,
                       error=f"{type(exc).__name__}: {exc}")
        out.append(rec)
    return out


# ---------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class SweepRow:
    K: int
    method: str
    params: str
    success_rate: float
    mean_rel_err: float
    mean_iters: float
    mean_runtime_ms: float
    mu_selected: float
    failures: int = 0

    def __post_init__(self):
        if not 0.0 <= self.success_rate <= 1.0:
            raise ValueError("success_rate must lie in [0, 1]")

    def csv_line(self) -> str:
        return ",".join([
            str(self.K), self.method, self.params, f"{self.success_rate:.4f}",
            f"{self.mean_rel_err:.6e}", f"{self.mean_iters:.1f}",
            "nan" if math.isnan(self.mean_runtime_ms) else f"{self.mean_runtime_ms:.3f}",
            f"{self.mu_selected:.6g}",
        ])


def _sweep_trial(args):
    spec, K, trial = args
    inst = sweep_instance(spec, K, trial)
    recs = _evaluate_methods(spec, inst)
    for r in recs:
        r.pop("x_hat", None)
    return recs


def _map(fn, tasks, threads):
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, tasks, chunksize=1))


def run_sparsity_sweep(spec: ExperimentSpec, progress=None) -> list:
    """Success rate versus sparsity for every method; one row per (K, method).

    ``mean_rel_err``, ``mean_iters`` and ``mu_selected`` (the median of the
    per-trial oracle mu) are taken over the trials that ran to completion;
    ``mean_runtime_ms`` is the wall time of one trial's whole mu scan.
    """
    tasks = [(spec, K, t) for K in spec.k_grid for t in range(spec.trials)]
    results = _map(_sweep_trial, tasks, spec.threads)
    rows = []
    for K in spec.k_grid:
        per_k = [recs for (s, k, t), recs in zip(tasks, results) if k == K]
        for j, method in enumerate(spec.methods):
            recs = [r[j] for r in per_k]
            good = [r for r in recs if r["ok"]]
            for r in recs:
                if not r["ok"]:
                    log.warning("K=%d %s[%s]: trial failed: %s", K, method.name, method.params(), r["error"])
            rate = sum(r["success"] for r in recs) / len(recs)
            mean = (lambda key: float(np.mean([r[key] for r in good])) if good else math.nan)
            rows.append(SweepRow(
                K=K, method=method.name, params=method.params(), success_rate=rate,
                mean_rel_err=mean("rel_err"), mean_iters=mean("iterations"),
                mean_runtime_ms=mean("runtime_ms") if spec.record_runtime else math.nan,
                mu_selected=float(np.median([r["mu"] for r in good])) if good else math.nan,
                failures=len(recs) - len(good),
            ))
            if progress is not None:
                progress(rows[-1])
    return rows


def format_sweep_csv(rows) -> str:
    return "\n".join([CSV_HEADER] + [r.csv_line() for r in rows]) + "\n"


def write_sweep_csv(rows, path):
    with open(path, "w", newline="") as fh:
        fh.write(format_sweep_csv(rows))


# ---------------------------------------------------------------- images

def run_image_recovery(spec: ExperimentSpec, out_dir=None) -> dict:
    """Recover one image with every method; write PGMs and ``report.json``.

    The report lists PSNR, oracle mu and iteration count per method, and
    which YALL1 solution each nonconvex method started from.
    """
    inst, img = image_instance(spec)
    recs = _evaluate_methods(spec, inst)
    side = inst.meta["side"]
    out_dir = out_dir if out_dir is not None else spec.out
    methods = []
    for method, r in zip(spec.methods, recs):
        entry = {"method": r["method"], "params": r["params"], "init": r["init"]}
        if r["ok"]:
            rec_img = haar2_inverse(r["x_hat"], side)
            entry.update(psnr_db=round(psnr_db(rec_img, img), 6), rel_err=round(r["rel_err"], 9),
                         mu_selected=r["mu"], iterations=r["iterations"], converged=r["converged"])
            if spec.record_runtime:
                entry["runtime_ms"] = round(r["runtime_ms"], 3)
            if out_dir is not None:
                fname = f"{method.key()}.pgm"
                write_pgm(rec_img, os.path.join(out_dir, fname))
                entry["output"] = fname
        else:
            entry["error"] = r["error"]
        methods.append(entry)
    report = {
        "image": "shepp-logan" if spec.image == "phantom" else os.path.basename(spec.image),
        "side": side, "n": side * side, "m": inst.meta["m"], "noise": spec.noise.label(),
        "master_seed": spec.master_seed, "keep_dc": spec.keep_dc, "scramble": spec.scramble,
        "mu_grid": [float(v) for v in sorted(spec.mu_grid)], "methods": methods,
    }
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_pgm(img, os.path.join(out_dir, "reference.pgm"))
        with open(os.path.join(out_dir, "report.json"), "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report


# ---------------------------------------------------------------- stored instances

def save_instance(path, A, y, x_true=None):
    """Store a dense instance as ``.npz`` (keys ``A``, ``y`` and optionally ``x_true``)."""
    A = A.matrix if isinstance(A, DenseMap) else np.asarray(A, dtype=float)
    data = {"A": A, "y": np.asarray(y, dtype=float)}
    if x_true is not None:
        data["x_true"] = np.asarray(x_true, dtype=float)
    with open(path, "wb") as fh:
        np.savez(fh, **data)


def load_instance(path):
    """Return ``(DenseMap, y, x_true or None)`` from a file written by :func:`save_instance`."""
    with np.load(path) as data:
        if "A" not in data or "y" not in data:
            raise ConfigError(f"{path}: instance file needs arrays 'A' and 'y'")
        A = DenseMap(data["A"])
        y = data["y"].astype(float)
        x = data["x_true"].astype(float) if "x_true" in data else None
    if y.shape != (A.rows,):
        raise ConfigError(f"{path}: y has length {y.size}, A has {A.rows} rows")
    return A, y, x


def spec_summary(spec: ExperimentSpec) -> dict:
    """JSON-friendly view of a spec (for logs and reports)."""
    d = asdict(spec)
    d["methods"] = [f"{m.name}[{m.params()}]" for m in spec.methods]
    d["noise"] = spec.noise.label()
    return d


# ---------------------------------------------------------------- prox suite

CHECK_PENALTIES = (Penalty.hard(), Penalty.soft(), Penalty.lq_norm(0.5), Penalty.scad(1.0, 3.7),
                   Penalty.mc(1.0, 2.0))


@dataclass(frozen=True)
class ProxCheckRow:
    penalty: str
    points: int
    skipped: int
    max_abs_err: float
    passed: bool


def prox_check(points: int = 200, seed: int = 0, tol: float = 1e-4, jump_margin: float = 1e-6) -> list:
    """Compare the closed-form prox against brute force on random ``(t, eta)``.

    ``t`` is uniform on [-10, 10] and ``eta`` log-uniform on [0.1, 100].  Points
    within ``jump_margin`` of a discontinuity are skipped and counted.
    """
    from .prox import jump_points, prox_oracle, prox_scalar

    rows = []
    for i, p in enumerate(CHECK_PENALTIES):
        rng = np.random.default_rng([seed, i])
        ts = rng.uniform(-10.0, 10.0, points)
        etas = np.exp(rng.uniform(np.log(0.1), np.log(100.0), points))
        worst, skipped = 0.0, 0
        for t, eta in zip(ts, etas):
            if any(abs(abs(t) - j) < jump_margin for j in jump_points(p, eta)):
                skipped += 1
                continue
            worst = max(worst, abs(prox_scalar(p, t, eta) - prox_oracle(p, t, eta)))
        rows.append(ProxCheckRow(p.label(), points, skipped, worst, worst <= tol))
    return rows
