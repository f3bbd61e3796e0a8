import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from robustcs.linops import DenseMap, IdentityMap, make_gaussian_orthonormal
from robustcs.prox import Penalty
from robustcs.signals import NoiseSpec, SignalSpec, gen_noise, gen_sparse_signal, relative_error
from robustcs.solvers import (DivergenceError, IterateState, SolverConfig, augmented_lagrangian_eps,
                              auxiliary_function, descent_constants, lqla_step, objective_la, rho_lower_bound,
                              smoothed_l1, solve_l1la_admm, solve_l1la_batch, solve_l1ls_batch, solve_l1ls_fista,
                              solve_lqla_admm, solve_lqla_batch, solve_lqls_admm, solve_lqls_batch,
                              stationarity_residual, yall1_rho)

ALL_PENALTIES = [Penalty.hard(), Penalty.soft(), Penalty.lq_norm(0.5), Penalty.scad(1.0, 3.7), Penalty.mc(1.0, 2.0)]


def small_instance(seed=0, m=32, n=64, k=4, noise=NoiseSpec.gaussian(30)):
    A = make_gaussian_orthonormal(m, n, seed)
    x = gen_sparse_signal(SignalSpec(n, k, seed + 1))
    s = A.apply(x)
    return A, s + gen_noise(noise, m, s, seed=seed + 2), x


# ---------------------------------------------------------------- config and constants

def test_rho_lower_bound_examples():
    assert rho_lower_bound(1, 1e-3, 1e-3) == 4000
    assert rho_lower_bound(2, 1e-3, 1e-3) == 2000
    assert rho_lower_bound(1, 1e-2, 1e-2) == pytest.approx(400, rel=1e-12)


@given(st.floats(1e-3, 1e3), st.floats(1e-5, 1.0), st.floats(1e-5, 1.0))
def test_rho_lower_bound_homogeneous_in_mu(mu, tau2, eps):
    assert rho_lower_bound(mu, tau2, eps) * mu == pytest.approx(rho_lower_bound(1.0, tau2, eps), rel=1e-12)


def test_descent_constant_examples():
    dc = descent_constants(SolverConfig(rho_target=10, tau1=0.5), lambda_max=1.0)
    assert dc.c0 == 5
    dc = descent_constants(SolverConfig(rho_target=4000, tau2=1e-3), lambda_max=1.0)
    # 1/(mu tau2) + rho/2 - 1/(2 mu eps)
    assert dc.c1 == pytest.approx(1e3 + 2000 - 500)
    assert dc.c2 == pytest.approx(2 / 4000 * (2e3) ** 2)
    # at rho = rho_min the auxiliary-function margin is zero up to rounding
    assert abs(dc.c3) < 1e-9
    assert dc.sufficient


def test_default_config_flagged():
    dc = descent_constants(SolverConfig(mu=1.0), 1.0)
    assert dc.rho == pytest.approx(3200) and dc.rho_min == 4000 and not dc.sufficient
    assert descent_constants(SolverConfig(mu=1.0, strict=True), 1.0).sufficient


@pytest.mark.parametrize("kw", [dict(mu=0), dict(epsilon=-1), dict(rho_target=1, rho0=2), dict(continuation_factor=0.9),
                                dict(v_update="exact"), dict(max_iter=0), dict(tol=0), dict(tau1=-1)])
def test_invalid_configs(kw):
    with pytest.raises(ValueError):
        SolverConfig(**kw)


def test_nonconvex_without_smoothing_needs_flag():
    A, y, _ = small_instance()
    with pytest.raises(ValueError):
        solve_lqla_admm(A, y, Penalty.lq_norm(0.5), SolverConfig(epsilon=0, v_update="exact-soft"))
    with pytest.raises(ValueError):
        solve_lqla_admm(A, y, Penalty.soft(), SolverConfig(epsilon=0))  # linearized step needs eps > 0
    solve_lqla_admm(A, y, Penalty.lq_norm(0.5), SolverConfig(epsilon=0, v_update="exact-soft", max_iter=5,
                                                              allow_nonconvergent=True))


def test_yall1_rho():
    assert yall1_rho(np.array([1.0, -1.0])) == 200.0
    assert yall1_rho(np.zeros(3)) == 200.0


# ---------------------------------------------------------------- objective pieces

def test_smoothed_l1_examples():
    assert smoothed_l1(np.array([3.0, -4.0]), 0) == 7
    assert smoothed_l1(np.zeros(2), 1e-3) == pytest.approx(2e-3)
    assert smoothed_l1(np.array([1.0]), 1) == pytest.approx(math.sqrt(2))


def test_lagrangian_examples():
    A = DenseMap(np.random.default_rng(0).standard_normal((3, 3)))
    y = np.array([0.3, -0.1, 0.4])
    x = np.array([0.5, 0.0, -1.0])
    p, cfg = Penalty.lq_norm(0.5), SolverConfig(mu=0.7, epsilon=1e-2)
    st_ = IterateState(x, A.apply(x) - y, np.zeros(3), 5.0)
    assert augmented_lagrangian_eps(st_, A, y, p, cfg) == pytest.approx(objective_la(A, y, x, p, 0.7, 1e-2))
    z = IterateState(np.zeros(3), np.zeros(3), np.zeros(3), 5.0)
    assert augmented_lagrangian_eps(z, IdentityMap(3), np.zeros(3), p, cfg) == pytest.approx(3 * 1e-2 / 0.7)
    # hand evaluation of a generic state
    v, w = np.array([0.1, -0.2, 0.05]), np.array([0.3, 0.0, -0.4])
    r = A.matrix @ x - y - v
    hand = np.sum(np.sqrt(v**2 + 1e-4)) / 0.7 + np.sqrt(0.5) + 1.0 - w @ r + 2.5 * r @ r
    assert augmented_lagrangian_eps(IterateState(x, v, w, 5.0), A, y, p, cfg) == pytest.approx(hand, rel=1e-13)


def test_auxiliary_function_examples():
    A, y = IdentityMap(3), np.array([1.0, 2.0, 3.0])
    p = Penalty.soft()
    # c2 = 2/(rho mu^2) (1/eps + 1/tau2)^2 = 8 / rho = 5 at rho = 1.6
    cfg = SolverConfig(mu=1.0, epsilon=1.0, tau2=1.0, rho_target=1.6)
    s = IterateState(np.ones(3), np.array([0.5, 0.0, 0.0]), np.zeros(3), 1.6)
    base = augmented_lagrangian_eps(s, A, y, p, cfg)
    assert auxiliary_function(s, s.v, A, y, p, cfg) == base
    assert auxiliary_function(s, s.v - np.array([1.0, 0, 0]), A, y, p, cfg) == pytest.approx(base + 5)


# ---------------------------------------------------------------- closed-form cases

def test_identity_soft_returns_measurements():
    y = np.array([0.3, -1.2, 2.0, 0.05])
    A = IdentityMap(4)
    cfg = SolverConfig(mu=0.5, epsilon=0.0, v_update="exact-soft", tol=1e-12, max_iter=20000)
    assert np.max(np.abs(solve_lqla_admm(A, y, Penalty.soft(), cfg).x_hat - y)) < 1e-5
    assert np.max(np.abs(solve_l1la_admm(A, y, SolverConfig(mu=0.5, tol=1e-12, max_iter=20000)).x_hat - y)) < 1e-5


def test_zero_measurements_give_zero():
    A = make_gaussian_orthonormal(10, 20, 0)
    y = np.zeros(10)
    assert np.array_equal(solve_l1ls_fista(A, y, SolverConfig()).x_hat, np.zeros(20))
    assert np.max(np.abs(solve_lqls_admm(A, y, Penalty.lq_norm(0.5), SolverConfig()).x_hat)) == 0


def test_fista_noiseless_exact_recovery():
    A, y, x = small_instance(seed=3, k=3, noise=NoiseSpec.noiseless())
    errs = [relative_error(solve_l1ls_fista(A, y, SolverConfig(mu=mu, max_iter=20000)).x_hat, x)
            for mu in np.logspace(-6, -2, 5)]
    assert min(errs) <= 1e-2


# ---------------------------------------------------------------- 2-D brute force

M2 = np.array([[0.9, 0.35], [0.25, 0.8]])
Y2 = M2 @ np.array([1.2, -0.8]) + np.array([0.05, -0.03])


def _grid_min(f):
    g = np.linspace(-3, 3, 601)
    X, Y = np.meshgrid(g, g, indexing="ij")
    V = f(X, Y)
    i = np.unravel_index(np.argmin(V), V.shape)
    best, h = np.array([X[i], Y[i]]), g[1] - g[0]
    for _ in range(5):
        loc = np.linspace(-h, h, 41)
        X, Y = np.meshgrid(best[0] + loc, best[1] + loc, indexing="ij")
        V = f(X, Y)
        i = np.unravel_index(np.argmin(V), V.shape)
        best, h = np.array([X[i], Y[i]]), loc[1] - loc[0]
    return best


def _objective(kind, mu, eps=1e-3, q=0.5):
    def res(X, Y):
        return [M2[i, 0] * X + M2[i, 1] * Y - Y2[i] for i in range(2)]
    lq = lambda X, Y: np.abs(X) ** q + np.abs(Y) ** q
    l1 = lambda X, Y: np.abs(X) + np.abs(Y)
    return {
        "lqla": lambda X, Y: sum(np.sqrt(r * r + eps * eps) for r in res(X, Y)) / mu + lq(X, Y),
        "yall1": lambda X, Y: sum(np.abs(r) for r in res(X, Y)) / mu + l1(X, Y),
        "fista": lambda X, Y: sum(r * r for r in res(X, Y)) / mu + l1(X, Y),
        "lqls": lambda X, Y: sum(r * r for r in res(X, Y)) / mu + lq(X, Y),
    }[kind]


@pytest.mark.parametrize("kind", ["lqla", "yall1", "fista", "lqls"])
@pytest.mark.parametrize("mu", [0.1, 0.3])
def test_brute_force_equivalence(kind, mu):
    best = _grid_min(_objective(kind, mu))
    A, cfg, p = DenseMap(M2), SolverConfig(mu=mu, epsilon=1e-3, tol=1e-12, max_iter=200000), Penalty.lq_norm(0.5)
    x0 = best + 0.1
    x = {"lqla": lambda: solve_lqla_admm(A, Y2, p, cfg, x0), "yall1": lambda: solve_l1la_admm(A, Y2, cfg, x0),
         "fista": lambda: solve_l1ls_fista(A, Y2, cfg, x0), "lqls": lambda: solve_lqls_admm(A, Y2, p, cfg, x0)}[kind]().x_hat
    assert np.max(np.abs(x - best)) <= 1e-3


# ---------------------------------------------------------------- descent properties

def _descent_setup(seed, p):
    A, y, _ = small_instance(seed, noise=NoiseSpec.gmm(30))
    cfg = SolverConfig(mu=0.5, epsilon=1e-3, strict=True, continuation_factor=1.0, lambda_max=1.0)
    rho = cfg.rho_la()
    cfg = cfg.with_(rho_target=rho, rho0=rho, tau1=0.99)
    return A, y, cfg, rho


@pytest.mark.parametrize("p", ALL_PENALTIES, ids=lambda p: p.variant)
def test_x_and_v_steps_decrease_lagrangian(p):
    A, y, cfg, rho = _descent_setup(5, p)
    dc = descent_constants(cfg, 1.0)
    assert dc.c0 > 0 and dc.c1 > 0
    x0 = np.random.default_rng(1).standard_normal(A.cols) * 0.1
    s = IterateState(x0, A.apply(x0) - y, np.zeros(A.rows), rho)
    for _ in range(60):
        before = augmented_lagrangian_eps(s, A, y, p, cfg)
        s1, s2, s3 = lqla_step(s, A, y, p, cfg, cfg.tau1)
        after_x = augmented_lagrangian_eps(s1, A, y, p, cfg)
        after_v = augmented_lagrangian_eps(s2, A, y, p, cfg)
        dx, dv = s1.x - s.x, s2.v - s1.v
        assert after_x <= before - dc.c0 * (dx @ dx) + 1e-9 * abs(before)
        assert after_v <= after_x - dc.c1 * (dv @ dv) + 1e-9 * abs(after_x)
        s = s3


@pytest.mark.parametrize("p", ALL_PENALTIES, ids=lambda p: p.variant)
def test_auxiliary_function_nonincreasing(p):
    A, y, cfg, _ = _descent_setup(7, p)
    res = solve_lqla_admm(A, y, p, cfg.with_(max_iter=300))
    L = res.trace["L_tilde"]
    assert np.all(np.diff(L) <= 1e-9 * np.abs(L[:-1]))


def test_trace_length_matches_iterations():
    A, y, _ = small_instance()
    for res in (solve_lqla_admm(A, y, Penalty.lq_norm(0.5), SolverConfig(max_iter=50)),
                solve_l1la_admm(A, y, SolverConfig(max_iter=50)), solve_l1ls_fista(A, y, SolverConfig(max_iter=50)),
                solve_lqls_admm(A, y, Penalty.lq_norm(0.5), SolverConfig(max_iter=50))):
        assert all(len(v) == res.iterations for v in res.trace.values())


def test_iterate_gap_vanishes_on_converged_run():
    A, y, _ = small_instance(2, noise=NoiseSpec.sas())
    res = solve_lqla_admm(A, y, Penalty.lq_norm(0.5), SolverConfig(mu=0.1))
    assert res.converged
    t = res.trace
    assert t["dx"][-1] + t["dv"][-1] + t["dw"][-1] < 10 * 1e-7 * (1 + np.linalg.norm(res.x_hat))
    assert res.stationarity < 1e-4


def test_stationarity_zero_at_fixed_point():
    rng = np.random.default_rng(0)
    n, mu, eps, rho = 5, 2.0, 1e-3, 50.0
    v = rng.standard_normal(n) * 0.1
    w = -(1 / mu) * v / np.sqrt(v * v + eps * eps)
    x = np.zeros(n)
    y = -v
    st_ = IterateState(x, v, w, rho)
    cfg = SolverConfig(mu=mu, epsilon=eps, tau1=0.5)
    assert stationarity_residual(st_, st_, IdentityMap(n), y, Penalty.soft(), cfg) < 1e-10


def test_divergent_v_update_does_not_settle():
    # exact soft v-step and hard penalty without smoothing: rho_min is unbounded as eps -> 0
    A, y, _ = small_instance(4, m=100, n=256, k=15, noise=NoiseSpec.gmm(30))
    cfg = SolverConfig(mu=0.3, epsilon=0.0, v_update="exact-soft", allow_nonconvergent=True, lambda_max=1.0,
                       max_iter=1000)
    res = solve_lqla_admm(A, y, Penalty.hard(), cfg)
    rel = res.trace["rel_dx"]
    assert not res.converged and res.iterations == 1000
    assert np.median(rel[-100:]) > 10 * cfg.tol
    assert np.median(rel[-100:]) > 0.1 * np.median(rel[400:500])


def test_divergent_config_stationarity_does_not_decay():
    A, y, _ = small_instance(4, m=100, n=256, k=15, noise=NoiseSpec.gmm(30))
    cfg = SolverConfig(mu=0.3, epsilon=0.0, v_update="exact-soft", allow_nonconvergent=True, lambda_max=1.0)
    r = [solve_lqla_admm(A, y, Penalty.hard(), cfg.with_(max_iter=k)).stationarity for k in (250, 500, 1000)]
    assert min(r) > 1e-4
    assert r[2] > 0.5 * r[0]


def test_divergence_error_carries_trace():
    A, y, _ = small_instance()
    cfg = SolverConfig(tau1=50.0, max_iter=5000, rho_target=1e4, rho0=1e4)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        with pytest.raises(DivergenceError) as info:
            solve_lqla_admm(A, y, Penalty.soft(), cfg)
    assert info.value.trace["k"].size > 0 and info.value.iterations > 0


# ---------------------------------------------------------------- structure

def test_default_start_is_yall1_solution():
    A, y, _ = small_instance(6, noise=NoiseSpec.sas())
    p, cfg = Penalty.lq_norm(0.5), SolverConfig(mu=0.2)
    a = solve_lqla_admm(A, y, p, cfg)
    b = solve_lqla_admm(A, y, p, cfg, x0=solve_l1la_admm(A, y, cfg).x_hat)
    assert np.array_equal(a.x_hat, b.x_hat)


def test_reduction_to_yall1_iterate_for_iterate():
    A, y, _ = small_instance(8, m=100, n=256, k=10, noise=NoiseSpec.sas())
    base = SolverConfig(mu=0.5, epsilon=0.0, v_update="exact-soft", rho_target=yall1_rho(y), tol=1e-30)
    for k in (1, 2, 5, 10, 37, 100):
        a = solve_lqla_admm(A, y, Penalty.soft(), base.with_(max_iter=k)).x_hat
        b = solve_l1la_admm(A, y, base.with_(max_iter=k)).x_hat
        assert np.max(np.abs(a - b)) <= 1e-12


@pytest.mark.parametrize("solver", ["lqla", "yall1", "fista", "lqls"])
def test_batch_matches_single_runs(solver):
    A, y, _ = small_instance(9, noise=NoiseSpec.sas())
    p = Penalty.lq_norm(0.5)
    mus = np.array([0.01, 0.1, 1.0])
    cfg = SolverConfig(max_iter=3000)
    x0 = solve_l1la_admm(A, y, cfg.with_(mu=0.1)).x_hat
    batch = {"lqla": lambda: solve_lqla_batch(A, y, p, cfg, mus, x0), "yall1": lambda: solve_l1la_batch(A, y, cfg, mus),
             "fista": lambda: solve_l1ls_batch(A, y, cfg, mus), "lqls": lambda: solve_lqls_batch(A, y, p, cfg, mus, x0)}[solver]()
    for j, mu in enumerate(mus):
        c = cfg.with_(mu=float(mu))
        single = {"lqla": lambda: solve_lqla_admm(A, y, p, c, x0), "yall1": lambda: solve_l1la_admm(A, y, c),
                  "fista": lambda: solve_l1ls_fista(A, y, c), "lqls": lambda: solve_lqls_admm(A, y, p, c, x0)}[solver]()
        assert np.max(np.abs(batch.X[:, j] - single.x_hat)) <= 1e-11
        assert batch.iterations[j] == single.iterations


def test_shape_errors():
    A, y, _ = small_instance()
    from robustcs.linops import ShapeError
    with pytest.raises(ShapeError):
        solve_l1la_admm(A, y[:-1], SolverConfig())
    with pytest.raises(ShapeError):
        solve_lqla_admm(A, y, Penalty.soft(), SolverConfig(), x0=np.zeros(3))
