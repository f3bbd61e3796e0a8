"""Sparse recovery solvers and convergence diagnostics.

Four solvers share one convention: ``solve_*(A, y, ..., cfg, x0)`` returns
a :class:`SolveResult` with the estimate and a per-iteration trace.

* :func:`solve_lqla_admm` -- smoothed l1-loss + nonconvex penalty ADMM,
  x-step linearized, v-step linearized (default) or exact soft threshold.
* :func:`solve_l1la_admm` -- l1-loss + l1 penalty ADMM (YALL1 scheme).
* :func:`solve_l1ls_fista` -- l2-loss + l1 penalty, FISTA.
* :func:`solve_lqls_admm` -- l2-loss + l_q penalty, ADMM with x = z splitting.

The l1-loss problem is ``min_x (1/mu) ||A x - y||_{1,eps} + P(x)``; the
l2-loss problems use ``(1/mu) ||A x - y||_2^2``.

Every solver also has a ``*_batch`` variant that runs a list of ``mu``
values side by side, one column each; a column stops as soon as its own
stopping rule fires, so each column follows the same iteration as a
single run.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .linops import LIPSCHITZ_SAFETY, LinearMap, ShapeError, max_eig_gram
from .prox import Penalty, penalty_value, prox_vector

__all__ = [
    "SolverConfig",
    "IterateState",
    "SolveResult",
    "DescentConstants",
    "DivergenceError",
    "rho_lower_bound",
    "descent_constants",
    "smoothed_l1",
    "smoothed_l1_grad",
    "augmented_lagrangian_eps",
    "auxiliary_function",
    "objective_la",
    "objective_ls",
    "stationarity_residual",
    "safe_lambda_max",
    "solve_lqla_admm",
    "solve_l1la_admm",
    "solve_l1ls_fista",
    "solve_lqls_admm",
    "solve_lqla_batch",
    "solve_l1la_batch",
    "solve_l1ls_batch",
    "solve_lqls_batch",
    "BatchResult",
    "lqla_step",
    "yall1_rho",
    "TRACE_FIELDS",
]

# epsilon used to size rho when the smoothing is switched off (eps = 0)
_RHO_EPS_FLOOR = 1e-3
# rho target for the l1-loss ADMM: RHO_SCALE / (mu * eps)
RHO_SCALE = 3.2
# rho target for the l2-loss l_q ADMM: LQLS_RHO_SCALE / mu
LQLS_RHO_SCALE = 10.0
# rho for the l1-l1 ADMM: YALL1_RHO_SCALE * m / ||y||_1 (mu-independent)
YALL1_RHO_SCALE = 200.0

TRACE_FIELDS = ("k", "objective", "L_eps", "L_tilde", "dx", "dv", "dw", "rho_k", "rel_dx")


class DivergenceError(RuntimeError):
    """An iterate became non-finite; ``trace`` holds the history so far."""

    def __init__(self, message, trace=None, iterations=0):
        super().__init__(message)
        self.trace = trace
        self.iterations = iterations


@dataclass(frozen=True)
class SolverConfig:
    """Scalars shared by the solvers.

    ``None`` entries are resolved per solver: ``tau1`` becomes
    ``0.99 / lambda_max(A^T A)``, ``tau2`` becomes ``epsilon``,
    ``rho_target`` becomes ``3.2 / (mu * epsilon)`` for the l1-loss ADMM and
    ``10 / mu`` for the l_q least-squares ADMM (the l1-l1 ADMM sizes rho
    from the data, see :func:`yall1_rho`), ``rho0`` becomes
    ``rho_target / 100``.  ``strict`` raises ``rho_target`` to the
    sufficient-convergence bound :func:`rho_lower_bound`.
    """

    mu: float = 1.0
    epsilon: float = 1e-3
    tau1: float | None = None
    tau2: float | None = None
    rho_target: float | None = None
    rho0: float | None = None
    continuation_factor: float = 1.02
    tol: float = 1e-7
    max_iter: int = 5000
    v_update: str = "linearized"
    strict: bool = False
    allow_nonconvergent: bool = False
    lambda_max: float | None = None

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.tau1 is not None and not self.tau1 > 0:
            raise ValueError("tau1 must be positive")
        if self.tau2 is not None and not self.tau2 > 0:
            raise ValueError("tau2 must be positive")
        if self.continuation_factor < 1:
            raise ValueError("continuation_factor must be >= 1")
        if self.rho_target is not None and self.rho0 is not None and self.rho0 > self.rho_target:
            raise ValueError("rho0 must not exceed rho_target")
        if self.v_update not in ("linearized", "exact-soft"):
            raise ValueError("v_update must be 'linearized' or 'exact-soft'")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    def with_(self, **kw) -> "SolverConfig":
        return replace(self, **kw)

    @property
    def tau2_value(self) -> float:
        if self.tau2 is not None:
            return self.tau2
        return self.epsilon if self.epsilon > 0 else _RHO_EPS_FLOOR

    def rho_la(self) -> float:
        """Resolved rho target for the l1-loss ADMM solvers."""
        if self.rho_target is not None:
            rho = self.rho_target
        else:
            rho = RHO_SCALE / (self.mu * max(self.epsilon, _RHO_EPS_FLOOR))
        if self.strict and self.epsilon > 0:
            rho = max(rho, rho_lower_bound(self.mu, self.tau2_value, self.epsilon))
        return rho

    def rho_ls(self) -> float:
        return self.rho_target if self.rho_target is not None else LQLS_RHO_SCALE / self.mu

    def start_rho(self, target: float) -> float:
        return min(self.rho0, target) if self.rho0 is not None else target / 100.0


@dataclass
class IterateState:
    """ADMM iterate ``(x, v, w)`` with the penalty ``rho_k`` and counter ``k``."""

    x: np.ndarray
    v: np.ndarray
    w: np.ndarray
    rho_k: float
    k: int = 0

    def check(self, A: LinearMap):
        if self.x.shape != (A.cols,) or self.v.shape != (A.rows,) or self.w.shape != (A.rows,):
            raise ShapeError(
                f"iterate shapes x{self.x.shape} v{self.v.shape} w{self.w.shape} "
                f"do not fit a {A.rows}x{A.cols} operator"
            )


@dataclass
class SolveResult:
    x_hat: np.ndarray
    iterations: int
    converged: bool
    trace: dict = field(default_factory=dict)
    stationarity: float = math.nan
    runtime_s: float = 0.0
    state: IterateState | None = None

    def trace_rows(self):
        cols = [self.trace[f] for f in TRACE_FIELDS]
        return list(zip(*cols))

    def write_trace_csv(self, path):
        with open(path, "w") as fh:
            fh.write(",".join(TRACE_FIELDS) + "\n")
            for row in self.trace_rows():
                fh.write(",".join(repr(int(v)) if i == 0 else repr(float(v)) for i, v in enumerate(row)) + "\n")


@dataclass(frozen=True)
class DescentConstants:
    c0: float
    c1: float
    c2: float
    c3: float
    rho: float
    rho_min: float
    lambda_max: float
    tau1: float

    @property
    def sufficient(self) -> bool:
        """Whether ``rho >= rho_min`` and ``tau1 < 1/lambda_max`` both hold."""
        return self.rho >= self.rho_min and self.tau1 * self.lambda_max < 1.0


def rho_lower_bound(mu: float, tau2: float, epsilon: float) -> float:
    """Smallest rho for which the smoothed ADMM is guaranteed to converge."""
    if not (mu > 0 and tau2 > 0 and epsilon > 0):
        raise ValueError("mu, tau2 and epsilon must be positive")
    # numerator and denominator divided by epsilon; keeps round values exact
    r = tau2 / epsilon
    return (math.sqrt(36 + 28 * r + 17 * r * r) + r - 2) / (2 * mu * tau2)


def _c2(rho, mu, eps, tau2):
    return 2.0 / (rho * mu**2) * (1.0 / eps + 1.0 / tau2) ** 2


def descent_constants(cfg: SolverConfig, lambda_max: float) -> DescentConstants:
    """Per-step decrease constants of the smoothed ADMM at ``rho = rho_target``."""
    if not lambda_max > 0:
        raise ValueError("lambda_max must be positive")
    mu, eps, tau2 = cfg.mu, cfg.epsilon, cfg.tau2_value
    if not eps > 0:
        raise ValueError("descent constants need epsilon > 0")
    rho = cfg.rho_la()
    tau1 = cfg.tau1 if cfg.tau1 is not None else 0.99 / lambda_max
    c0 = rho / 2 * (1 / tau1 - lambda_max)
    c1 = 1 / (mu * tau2) + rho / 2 - 1 / (2 * mu * eps)
    c2 = _c2(rho, mu, eps, tau2)
    c3 = (
        rho / 2
        - 2 / (rho * mu**2) * (2 / tau2**2 + 2 / (tau2 * eps) + 1 / eps**2)
        + (2 * eps - tau2) / (2 * mu * tau2 * eps)
    )
    return DescentConstants(c0, c1, c2, c3, rho, rho_lower_bound(mu, tau2, eps), lambda_max, tau1)


def smoothed_l1(v, epsilon: float) -> float:
    v = np.asarray(v, dtype=float)
    if epsilon == 0:
        return float(np.sum(np.abs(v)))
    return float(np.sum(np.sqrt(v * v + epsilon * epsilon)))


def smoothed_l1_grad(v, epsilon: float):
    if epsilon == 0:
        return np.sign(v)
    return v / np.sqrt(v * v + epsilon * epsilon)


def _lagrangian(v, r, w, p, x, mu, eps, rho):
    """L_eps from the pieces; ``r = A x - y - v``."""
    return smoothed_l1(v, eps) / mu + penalty_value(p, x) - float(w @ r) + 0.5 * rho * float(r @ r)


def augmented_lagrangian_eps(state: IterateState, A: LinearMap, y, p: Penalty, cfg: SolverConfig) -> float:
    state.check(A)
    r = A.apply(state.x) - y - state.v
    return _lagrangian(state.v, r, state.w, p, state.x, cfg.mu, cfg.epsilon, state.rho_k)


def auxiliary_function(state: IterateState, v_prev, A: LinearMap, y, p: Penalty, cfg: SolverConfig) -> float:
    """``L_eps + c2 ||v - v_prev||^2`` with ``c2`` taken at ``rho_target``."""
    v_prev = np.asarray(v_prev, dtype=float)
    if v_prev.shape != state.v.shape:
        raise ShapeError("v_prev shape differs from v")
    c2 = _c2(cfg.rho_la(), cfg.mu, cfg.epsilon, cfg.tau2_value)
    dv = state.v - v_prev
    return augmented_lagrangian_eps(state, A, y, p, cfg) + c2 * float(dv @ dv)


def objective_la(A: LinearMap, y, x, p: Penalty, mu: float, epsilon: float) -> float:
    """``(1/mu) ||A x - y||_{1,eps} + P(x)``."""
    return smoothed_l1(A.apply(x) - y, epsilon) / mu + penalty_value(p, x)


def objective_ls(A: LinearMap, y, x, p: Penalty, mu: float) -> float:
    """``(1/mu) ||A x - y||_2^2 + P(x)``."""
    r = A.apply(x) - y
    return float(r @ r) / mu + penalty_value(p, x)


def safe_lambda_max(A: LinearMap, cfg: SolverConfig | None = None) -> float:
    """Upper estimate of lambda_max(A^T A) (power iteration times the safety factor)."""
    if cfg is not None and cfg.lambda_max is not None:
        return cfg.lambda_max
    lam, _ = max_eig_gram(A, tol=1e-9, max_iter=1000, seed=0)
    return lam * LIPSCHITZ_SAFETY


def yall1_rho(y) -> float:
    """Default rho of the l1-l1 ADMM: ``YALL1_RHO_SCALE * m / ||y||_1``."""
    y = np.asarray(y, dtype=float)
    s = float(np.sum(np.abs(y)))
    return YALL1_RHO_SCALE * y.size / s if s > 0 else YALL1_RHO_SCALE


def _tau1(A, cfg):
    if cfg.tau1 is not None:
        return cfg.tau1
    return 0.99 / safe_lambda_max(A, cfg)


def _check_y(A, y):
    y = np.asarray(y, dtype=float)
    if y.shape != (A.rows,):
        raise ShapeError(f"y has shape {y.shape}, operator has {A.rows} rows")
    return y


def _check_x0(A, x0, B=1):
    """Starting point as a ``cols x B`` array (a 1-D x0 is shared by all columns)."""
    if x0 is None:
        return np.zeros((A.cols, B))
    x0 = np.array(x0, dtype=float)
    if x0.shape == (A.cols,):
        return np.repeat(x0[:, None], B, axis=1)
    if x0.shape != (A.cols, B):
        raise ShapeError(f"x0 has shape {x0.shape}, operator has {A.cols} columns")
    return x0


def _soft(t, thr):
    return np.sign(t) * np.maximum(np.abs(t) - thr, 0.0)


def _mus(mus):
    mus = np.atleast_1d(np.asarray(mus, dtype=float))
    if mus.ndim != 1 or mus.size == 0 or not np.all(mus > 0):
        raise ValueError("mu values must be a nonempty list of positive numbers")
    return mus


class _Trace:
    def __init__(self):
        self.cols = {f: [] for f in TRACE_FIELDS}

    def add(self, k, obj, l_eps, l_tilde, dx, dv, dw, rho, prev_norm=1.0):
        # rel_dx is the quantity compared against tol in the stopping rule
        rel = dx / max(prev_norm, 1.0)
        for f, val in zip(TRACE_FIELDS, (k, obj, l_eps, l_tilde, dx, dv, dw, rho, rel)):
            self.cols[f].append(val)

    def arrays(self):
        out = {f: np.asarray(v, dtype=float) for f, v in self.cols.items()}
        out["k"] = out["k"].astype(int)
        return out


def _rel_cols(x_new, x_old):
    return np.linalg.norm(x_new - x_old, axis=0) / np.maximum(np.linalg.norm(x_old, axis=0), 1.0)


def _finite_cols(*arrays):
    ok = np.ones(arrays[0].shape[1], dtype=bool)
    for a in arrays:
        ok &= np.isfinite(a).all(axis=0)
    return ok


@dataclass
class BatchResult:
    """Outcome of one solver run per column (one column per mu value)."""

    mus: np.ndarray
    X: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    diverged: np.ndarray
    runtime_s: float

    def column(self, j: int) -> SolveResult:
        return SolveResult(self.X[:, j].copy(), int(self.iterations[j]), bool(self.converged[j]),
                           runtime_s=self.runtime_s / len(self.mus))


class _Batch:
    """Column-wise iterate storage; converged or diverged columns are frozen."""

    def __init__(self, B, **arrays):
        self.B = B
        self.arr = arrays
        self.act = np.arange(B)
        self.iterations = np.zeros(B, dtype=int)
        self.converged = np.zeros(B, dtype=bool)
        self.diverged = np.zeros(B, dtype=bool)

    def __getitem__(self, name):
        a = self.arr[name]
        return a if self.act.size == self.B else a[..., self.act]

    def commit(self, k, ok, done, **new):
        act = self.act
        full = act.size == self.B and ok.all()
        for name, val in new.items():
            if full:
                self.arr[name] = val
            else:
                self.arr[name][..., act[ok]] = val[..., ok]
        self.iterations[act] = k
        self.diverged[act[~ok]] = True
        self.converged[act[ok & done]] = True
        self.act = act[ok & ~done]

    def result(self, mus, key, t0):
        return BatchResult(mus, self.arr[key], self.iterations, self.converged, self.diverged,
                           time.perf_counter() - t0)


def _check_lqla(p, cfg):
    exact = cfg.v_update == "exact-soft"
    if not p.convex and (cfg.epsilon == 0 or exact) and not cfg.allow_nonconvergent:
        raise ValueError(
            "nonconvex penalty without smoothing (epsilon=0 or exact-soft v-update) has no "
            "convergence guarantee; pass allow_nonconvergent=True to run it anyway"
        )
    if not exact and cfg.epsilon == 0:
        raise ValueError("the linearized v-update needs epsilon > 0")


def _lqla_core(A, y, p, cfg, mus, X0, trace=None):
    B = mus.size
    eps = cfg.epsilon
    exact = cfg.v_update == "exact-soft"
    tau1 = _tau1(A, cfg)
    tau2 = cfg.tau2_value
    cfgs = [cfg.with_(mu=float(m)) for m in mus]
    rho_t = np.array([c.rho_la() for c in cfgs])
    rho = np.array([c.start_rho(r) for c, r in zip(cfgs, rho_t)])
    c2 = _c2(rho_t[0], mus[0], eps, tau2) if eps > 0 else math.nan
    Y = y[:, None]

    t0 = time.perf_counter()
    AX = A.apply_batch(X0)
    st = _Batch(B, x=X0.copy(), ax=AX, v=AX - Y, w=np.zeros((A.rows, B)), rho=rho.copy())
    prev = None
    k = 0
    while st.act.size and k < cfg.max_iter:
        k += 1
        x, ax, v, w, r_ = st["x"], st["ax"], st["v"], st["w"], st["rho"]
        mu, rt = mus[st.act], rho_t[st.act]
        b = x - tau1 * A.adjoint_batch(ax - Y - v - w / r_)
        xn = prox_vector(p, b, r_ / tau1)
        axn = A.apply_batch(xn)
        c = axn - Y - w / r_
        if exact:
            vn = _soft(c, 1.0 / (mu * r_))
        else:
            vn = tau2 / (r_ * mu * tau2 + 1.0) * (v / tau2 - v / np.sqrt(v * v + eps * eps) + r_ * mu * c)
        res = axn - Y - vn
        wn = w - r_ * res
        ok = _finite_cols(xn, vn, wn)
        if trace is not None and ok[0]:
            x1, v1, w1, r1 = xn[:, 0], vn[:, 0], wn[:, 0], res[:, 0]
            l_eps = _lagrangian(v1, r1, w1, p, x1, mus[0], eps, r_[0])
            dv = v1 - v[:, 0]
            obj = smoothed_l1(axn[:, 0] - y, eps) / mus[0] + penalty_value(p, x1)
            trace.add(k, obj, l_eps, l_eps + c2 * float(dv @ dv), np.linalg.norm(x1 - x[:, 0]),
                      np.linalg.norm(dv), np.linalg.norm(w1 - w[:, 0]), r_[0], np.linalg.norm(x[:, 0]))
            prev = IterateState(x[:, 0].copy(), v[:, 0].copy(), w[:, 0].copy(), float(r_[0]), k - 1)
        done = (r_ >= rt) & (k > 1) & (_rel_cols(xn, x) < cfg.tol)
        rho_next = np.minimum(cfg.continuation_factor * r_, rt)
        st.commit(k, ok, done, x=xn, ax=axn, v=vn, w=wn, rho=rho_next)
    out = st.result(mus, "x", t0)
    out.state_arrays = st.arr
    out.prev = prev
    out.tau1 = tau1
    return out


def solve_lqla_admm(A: LinearMap, y, p: Penalty, cfg: SolverConfig, x0=None) -> SolveResult:
    """ADMM for ``min (1/mu) ||A x - y||_{1,eps} + P(x)``.

    Per iteration::

        b  = x - tau1 A^T (A x - y - v - w/rho)
        x+ = prox_{P, rho/tau1}(b)
        v+ = tau2/(rho mu tau2 + 1) [v/tau2 - grad||v||_{1,eps} + rho mu (A x+ - y - w/rho)]
        w+ = w - rho (A x+ - y - v+)

    With ``v_update='exact-soft'`` the v-step is the soft threshold
    ``S_{1/(mu rho)}(A x+ - y - w/rho)`` of the unsmoothed loss. ``rho``
    grows geometrically from ``rho0`` to ``rho_target``; the run stops once
    ``rho`` has reached its target and the relative change of ``x`` drops below
    ``tol`` (never on the first iteration, where ``x`` cannot move).  Without
    ``x0`` a nonconvex penalty starts from the l1-l1 ADMM solution at the
    same ``mu``; the soft penalty starts from zero.
    """
    y = _check_y(A, y)
    _check_lqla(p, cfg)
    if x0 is None and not p.convex:
        x0 = solve_l1la_admm(A, y, cfg).x_hat
    X0 = _check_x0(A, x0)
    trace = _Trace()
    out = _lqla_core(A, y, p, cfg, _mus(cfg.mu), X0, trace)
    if out.diverged[0]:
        raise DivergenceError(f"non-finite iterate at iteration {out.iterations[0]}",
                              trace.arrays(), int(out.iterations[0]))
    arr = out.state_arrays
    rho_last = float(trace.cols["rho_k"][-1]) if trace.cols["rho_k"] else float(arr["rho"][0])
    state = IterateState(arr["x"][:, 0].copy(), arr["v"][:, 0].copy(), arr["w"][:, 0].copy(),
                         rho_last, int(out.iterations[0]))
    res = SolveResult(state.x, state.k, bool(out.converged[0]), trace.arrays(),
                      runtime_s=out.runtime_s, state=state)
    if out.prev is not None:
        res.stationarity = stationarity_residual(state, out.prev, A, y, p, cfg.with_(tau1=out.tau1))
    return res


def solve_lqla_batch(A: LinearMap, y, p: Penalty, cfg: SolverConfig, mus, x0=None) -> BatchResult:
    """Run :func:`solve_lqla_admm` for every ``mu`` in ``mus`` at once (no trace)."""
    y = _check_y(A, y)
    _check_lqla(p, cfg)
    mus = _mus(mus)
    return _lqla_core(A, y, p, cfg, mus, _check_x0(A, x0, mus.size))


def lqla_step(state: IterateState, A: LinearMap, y, p: Penalty, cfg: SolverConfig, tau1: float):
    """One iteration of the smoothed ADMM at fixed ``rho = state.rho_k``.

    Returns ``(after_x, after_v, after_w)``: the state once x, then v, then w
    has been updated.  Meant for inspecting the per-step descent.
    """
    state.check(A)
    y = _check_y(A, y)
    rho, mu, eps, tau2 = state.rho_k, cfg.mu, cfg.epsilon, cfg.tau2_value
    b = state.x - tau1 * A.adjoint(A.apply(state.x) - y - state.v - state.w / rho)
    x = prox_vector(p, b, rho / tau1)
    s1 = IterateState(x, state.v.copy(), state.w.copy(), rho, state.k)
    c = A.apply(x) - y - state.w / rho
    v = state.v
    if cfg.v_update == "exact-soft":
        v = _soft(c, 1.0 / (mu * rho))
    else:
        v = tau2 / (rho * mu * tau2 + 1.0) * (v / tau2 - smoothed_l1_grad(v, eps) + rho * mu * c)
    s2 = IterateState(x, v, state.w.copy(), rho, state.k)
    w = state.w - rho * (A.apply(x) - y - v)
    return s1, s2, IterateState(x, v, w, rho, state.k + 1)


def _l1la_core(A, y, cfg, mus, X0, trace=None):
    B = mus.size
    tau1 = _tau1(A, cfg)
    rt = cfg.rho_target if cfg.rho_target is not None else yall1_rho(y)
    rho0 = cfg.start_rho(rt)
    Y = y[:, None]

    t0 = time.perf_counter()
    AX = A.apply_batch(X0)
    st = _Batch(B, x=X0.copy(), ax=AX, v=AX - Y, w=np.zeros((A.rows, B)))
    rho = rho0
    k = 0
    while st.act.size and k < cfg.max_iter:
        k += 1
        x, ax, v, w = st["x"], st["ax"], st["v"], st["w"]
        mu = mus[st.act]
        b = x - tau1 * A.adjoint_batch(ax - Y - v - w / rho)
        xn = _soft(b, tau1 / rho)
        axn = A.apply_batch(xn)
        vn = _soft(axn - Y - w / rho, 1.0 / (mu * rho))
        res = axn - Y - vn
        wn = w - rho * res
        ok = _finite_cols(xn, vn, wn)
        if trace is not None and ok[0]:
            x1, v1, r1, w1 = xn[:, 0], vn[:, 0], res[:, 0], wn[:, 0]
            l1x = float(np.sum(np.abs(x1)))
            l_eps = float(np.sum(np.abs(v1))) / mus[0] + l1x - float(w1 @ r1) + 0.5 * rho * float(r1 @ r1)
            obj = float(np.sum(np.abs(axn[:, 0] - y))) / mus[0] + l1x
            trace.add(k, obj, l_eps, math.nan, np.linalg.norm(x1 - x[:, 0]),
                      np.linalg.norm(v1 - v[:, 0]), np.linalg.norm(w1 - w[:, 0]), rho, np.linalg.norm(x[:, 0]))
        done = (rho >= rt) & (k > 1) & (_rel_cols(xn, x) < cfg.tol)
        st.commit(k, ok, done, x=xn, ax=axn, v=vn, w=wn)
        rho = min(cfg.continuation_factor * rho, rt)
    out = st.result(mus, "x", t0)
    out.state_arrays = st.arr
    return out


def solve_l1la_admm(A: LinearMap, y, cfg: SolverConfig, x0=None) -> SolveResult:
    """YALL1-style ADMM for ``min (1/mu) ||A x - y||_1 + ||x||_1``.

    Same loop as :func:`solve_lqla_admm` with both steps closed-form soft
    thresholds.  Without an explicit ``rho_target`` the penalty is sized
    from the data, ``rho = 200 m / ||y||_1``, independently of ``mu``.
    """
    y = _check_y(A, y)
    trace = _Trace()
    out = _l1la_core(A, y, cfg, _mus(cfg.mu), _check_x0(A, x0), trace)
    if out.diverged[0]:
        raise DivergenceError(f"non-finite iterate at iteration {out.iterations[0]}",
                              trace.arrays(), int(out.iterations[0]))
    arr = out.state_arrays
    rho_last = float(trace.cols["rho_k"][-1]) if trace.cols["rho_k"] else math.nan
    state = IterateState(arr["x"][:, 0].copy(), arr["v"][:, 0].copy(), arr["w"][:, 0].copy(),
                         rho_last, int(out.iterations[0]))
    return SolveResult(state.x, state.k, bool(out.converged[0]), trace.arrays(),
                       runtime_s=out.runtime_s, state=state)


def solve_l1la_batch(A: LinearMap, y, cfg: SolverConfig, mus, x0=None) -> BatchResult:
    y = _check_y(A, y)
    mus = _mus(mus)
    return _l1la_core(A, y, cfg, mus, _check_x0(A, x0, mus.size))


def _fista_core(A, y, cfg, mus, X0, trace=None):
    B = mus.size
    lam = safe_lambda_max(A, cfg)
    inv_L = mus / (2.0 * lam)
    soft = Penalty.soft()
    Y = y[:, None]

    t0 = time.perf_counter()
    st = _Batch(B, x=X0.copy(), z=X0.copy())
    t = 1.0
    k = 0
    while st.act.size and k < cfg.max_iter:
        k += 1
        x, z = st["x"], st["z"]
        mu, il = mus[st.act], inv_L[st.act]
        grad = (2.0 / mu) * A.adjoint_batch(A.apply_batch(z) - Y)
        xn = _soft(z - il * grad, il)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        zn = xn + ((t - 1.0) / t_new) * (xn - x)
        t = t_new
        ok = _finite_cols(xn, zn)
        if trace is not None and ok[0]:
            trace.add(k, objective_ls(A, y, xn[:, 0], soft, mus[0]), math.nan, math.nan,
                      np.linalg.norm(xn[:, 0] - x[:, 0]), math.nan, math.nan, math.nan, np.linalg.norm(x[:, 0]))
        done = _rel_cols(xn, x) < cfg.tol
        st.commit(k, ok, done, x=xn, z=zn)
    return st.result(mus, "x", t0)


def solve_l1ls_fista(A: LinearMap, y, cfg: SolverConfig, x0=None) -> SolveResult:
    """FISTA for ``min (1/mu) ||A x - y||_2^2 + ||x||_1``.

    Step ``1/L`` with ``L = 2 lambda_max / mu``; the prox is a soft threshold
    at ``1/L``.
    """
    y = _check_y(A, y)
    trace = _Trace()
    out = _fista_core(A, y, cfg, _mus(cfg.mu), _check_x0(A, x0), trace)
    if out.diverged[0]:
        raise DivergenceError(f"non-finite iterate at iteration {out.iterations[0]}",
                              trace.arrays(), int(out.iterations[0]))
    return SolveResult(out.X[:, 0].copy(), int(out.iterations[0]), bool(out.converged[0]),
                       trace.arrays(), runtime_s=out.runtime_s)


def solve_l1ls_batch(A: LinearMap, y, cfg: SolverConfig, mus, x0=None) -> BatchResult:
    y = _check_y(A, y)
    mus = _mus(mus)
    return _fista_core(A, y, cfg, mus, _check_x0(A, x0, mus.size))


def _lqls_core(A, y, p, cfg, mus, X0, trace=None):
    B = mus.size
    lam = safe_lambda_max(A, cfg)
    rho = np.array([cfg.with_(mu=float(m)).rho_ls() for m in mus])
    tau = 0.99 / (2.0 * lam / mus + rho)
    Y = y[:, None]

    t0 = time.perf_counter()
    st = _Batch(B, x=X0.copy(), z=X0.copy(), w=np.zeros((A.cols, B)))
    k = 0
    while st.act.size and k < cfg.max_iter:
        k += 1
        x, z, w = st["x"], st["z"], st["w"]
        act = st.act
        mu, r_, ta = mus[act], rho[act], tau[act]
        zn = prox_vector(p, x + w / r_, r_)
        xn = x - ta * ((2.0 / mu) * A.adjoint_batch(A.apply_batch(x) - Y) + r_ * (x - zn) + w)
        wn = w + r_ * (xn - zn)
        ok = _finite_cols(xn, zn, wn)
        if trace is not None and ok[0]:
            trace.add(k, objective_ls(A, y, zn[:, 0], p, mus[0]), math.nan, math.nan,
                      np.linalg.norm(zn[:, 0] - z[:, 0]), np.linalg.norm(xn[:, 0] - x[:, 0]),
                      np.linalg.norm(wn[:, 0] - w[:, 0]), r_[0], np.linalg.norm(z[:, 0]))
        gap = np.linalg.norm(xn - zn, axis=0) <= cfg.tol * np.maximum(np.linalg.norm(zn, axis=0), 1.0)
        done = (_rel_cols(zn, z) < cfg.tol) & gap
        st.commit(k, ok, done, x=xn, z=zn, w=wn)
    return st.result(mus, "z", t0)


def solve_lqls_admm(A: LinearMap, y, p: Penalty, cfg: SolverConfig, x0=None) -> SolveResult:
    """ADMM for ``min (1/mu) ||A x - y||_2^2 + P(z)`` subject to ``x = z``.

    Per iteration::

        z+ = prox_{P, rho}(x + w/rho)
        x+ = x - tau (2/mu A^T (A x - y) + rho (x - z+) + w)
        w+ = w + rho (x+ - z+)

    where ``tau = 0.99 / (2 lambda_max / mu + rho)`` makes the x-step a
    descent step on its subproblem.  ``rho`` defaults to ``10/mu``.  The
    returned estimate is the sparse block ``z``; without ``x0`` a nonconvex
    penalty starts from the l1-l1 ADMM solution.
    """
    y = _check_y(A, y)
    if x0 is None and not p.convex:
        x0 = solve_l1la_admm(A, y, cfg).x_hat
    trace = _Trace()
    out = _lqls_core(A, y, p, cfg, _mus(cfg.mu), _check_x0(A, x0), trace)
    if out.diverged[0]:
        raise DivergenceError(f"non-finite iterate at iteration {out.iterations[0]}",
                              trace.arrays(), int(out.iterations[0]))
    return SolveResult(out.X[:, 0].copy(), int(out.iterations[0]), bool(out.converged[0]),
                       trace.arrays(), runtime_s=out.runtime_s)


def solve_lqls_batch(A: LinearMap, y, p: Penalty, cfg: SolverConfig, mus, x0=None) -> BatchResult:
    y = _check_y(A, y)
    mus = _mus(mus)
    return _lqls_core(A, y, p, cfg, mus, _check_x0(A, x0, mus.size))


def stationarity_residual(curr: IterateState, prev: IterateState, A: LinearMap, y, p: Penalty,
                          cfg: SolverConfig) -> float:
    """Sup-norm residual of the optimality system between consecutive iterates.

    Three parts, all zero at a fixed point of the linearized ADMM:

    * x: ``(rho/tau1)(b - x+) - A^T w+``, where ``(rho/tau1)(b - x+)`` is the
      subgradient of P at ``x+`` certified by the prox step,
    * v: ``(1/mu) grad||v+||_{1,eps} + w+ + (v+ - v)/(mu tau2)``,
    * primal: ``A x+ - y - v+``.
    """
    curr.check(A)
    prev.check(A)
    y = np.asarray(y, dtype=float)
    rho = prev.rho_k
    tau1 = _tau1(A, cfg)
    mu = cfg.mu
    b = prev.x - tau1 * A.adjoint(A.apply(prev.x) - y - prev.v - prev.w / rho)
    r_x = (rho / tau1) * (b - curr.x) - A.adjoint(curr.w)
    r_v = smoothed_l1_grad(curr.v, cfg.epsilon) / mu + curr.w + (curr.v - prev.v) / (mu * cfg.tau2_value)
    r_p = A.apply(curr.x) - y - curr.v
    return float(max(np.max(np.abs(r_x)), np.max(np.abs(r_v)), np.max(np.abs(r_p))))
