"""Sparsity penalties and their proximity operators.

``prox(t) = argmin_x P(x) + (eta/2) (x - t)^2``, evaluated elementwise.
All thresholding rules work on ``|t|`` and restore the sign at the end, so
every operator is exactly odd.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Penalty",
    "penalty_value",
    "prox_scalar",
    "prox_vector",
    "prox_oracle",
    "jump_points",
    "lq_params",
]

VARIANTS = ("hard", "soft", "lq", "scad", "mc")

_NEWTON_MAXITER = 100


@dataclass(frozen=True)
class Penalty:
    """A sparsity penalty and its parameters.

    ``hard`` is the l0 count, ``soft`` the l1 norm, ``lq`` the l_q
    quasi-norm with ``0 < q < 1``, ``scad`` takes ``lam`` and ``a > 2``,
    ``mc`` (minimax concave) takes ``lam`` and ``gamma > 1``.
    """

    variant: str
    q: float | None = None
    lam: float | None = None
    a: float | None = None
    gamma: float | None = None

    def __post_init__(self):
        v = self.variant.lower()
        object.__setattr__(self, "variant", v)
        if v not in VARIANTS:
            raise ValueError(f"unknown penalty {self.variant!r}; expected one of {VARIANTS}")
        if v == "lq":
            if self.q is None or not 0.0 < self.q < 1.0:
                raise ValueError("lq penalty needs 0 < q < 1 (q=1 is soft, q=0 is hard)")
        if v == "scad":
            if self.lam is None or self.lam <= 0:
                raise ValueError("scad needs lam > 0")
            if self.a is None or self.a <= 2:
                raise ValueError("scad needs a > 2")
        if v == "mc":
            if self.lam is None or self.lam <= 0:
                raise ValueError("mc needs lam > 0")
            if self.gamma is None or self.gamma <= 1:
                raise ValueError("mc needs gamma > 1")

    @classmethod
    def hard(cls):
        return cls("hard")

    @classmethod
    def soft(cls):
        return cls("soft")

    @classmethod
    def lq_norm(cls, q: float):
        return cls("lq", q=q)

    @classmethod
    def scad(cls, lam: float = 1.0, a: float = 3.7):
        return cls("scad", lam=lam, a=a)

    @classmethod
    def mc(cls, lam: float = 1.0, gamma: float = 2.0):
        return cls("mc", lam=lam, gamma=gamma)

    @property
    def convex(self) -> bool:
        return self.variant == "soft"

    def label(self) -> str:
        if self.variant == "lq":
            return f"lq(q={self.q:g})"
        if self.variant == "scad":
            return f"scad(lambda={self.lam:g};a={self.a:g})"
        if self.variant == "mc":
            return f"mc(lambda={self.lam:g};gamma={self.gamma:g})"
        return self.variant


def _elementwise_penalty(p: Penalty, x):
    ax = np.abs(x)
    v = p.variant
    if v == "hard":
        return (ax > 0).astype(float)
    if v == "soft":
        return ax
    if v == "lq":
        return ax**p.q
    if v == "scad":
        lam, a = p.lam, p.a
        mid = (2 * a * lam * ax - ax**2 - lam**2) / (2 * (a - 1))
        return np.where(ax < lam, lam * ax, np.where(ax < a * lam, mid, (a + 1) * lam**2 / 2))
    # mc: closed form of lam * int_0^|x| max(1 - s/(gamma lam), 0) ds
    lam, g = p.lam, p.gamma
    return np.where(ax <= g * lam, lam * ax - ax**2 / (2 * g), g * lam**2 / 2)


def penalty_value(p: Penalty, x) -> float:
    """Sum of the elementwise penalty over ``x``."""
    return float(np.sum(_elementwise_penalty(p, np.asarray(x, dtype=float))))


def lq_params(q: float, eta: float):
    """Return ``(beta, tau)``: the smallest nonzero output and the threshold."""
    beta = (2.0 * (1.0 - q) / eta) ** (1.0 / (2.0 - q))
    tau = beta + q * beta ** (q - 1.0) / eta
    return beta, tau


def _lq_magnitude(at, q, eta):
    beta, tau = lq_params(q, eta)
    out = np.zeros_like(at)
    big = at > tau
    if not np.any(big):
        return out
    t, eta, beta = at[big], eta[big], beta[big]
    # h(y) = q y^(q-1) + eta y - eta t is convex and increasing on (beta, t);
    # Newton from the right end decreases monotonically to the root.
    y = t.copy()
    idx = np.arange(t.size)
    for _ in range(_NEWTON_MAXITER):
        yk, tk, ek = y[idx], t[idx], eta[idx]
        pk = yk ** (q - 2.0)
        step = (q * pk * yk + ek * (yk - tk)) / (q * (q - 1.0) * pk + ek)
        yk = np.maximum(yk - step, beta[idx])
        y[idx] = yk
        idx = idx[np.abs(step) > 1e-14 * yk]
        if idx.size == 0:
            break
    else:
        y = _lq_bisect(t, q, eta, beta, y)
    out[big] = y
    return out


def _lq_bisect(t, q, eta, beta, y):
    """Bisection fallback for entries whose Newton residual is still large."""
    h = q * y ** (q - 1.0) + eta * (y - t)
    bad = np.abs(h) > 1e-12 * eta * (1.0 + t)
    if not np.any(bad):
        return y
    lo = beta[bad].copy()
    hi = t[bad].copy()
    tb, eb = t[bad], eta[bad]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        hm = q * mid ** (q - 1.0) + eb * (mid - tb)
        pos = hm > 0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    y = y.copy()
    y[bad] = 0.5 * (lo + hi)
    return y


def _scad_magnitude(at, lam, a, eta):
    r1 = np.maximum(at - lam / eta, 0.0)
    r2 = ((a - 1.0) * eta * at - a * lam) / ((a - 1.0) * eta - 1.0)
    return np.where(at <= lam / eta + lam, r1, np.where(at <= a * lam, r2, at))


def _mc_magnitude(at, lam, g, eta):
    # MC scaled by 1/eta is MC with (lam/eta, gamma*eta); the middle branch
    # therefore has denominator 1 - 1/(gamma eta) and ends at gamma*lam.
    mid = (at - lam / eta) / (1.0 - 1.0 / (g * eta))
    return np.where(at <= lam / eta, 0.0, np.where(at <= g * lam, mid, at))


def _closed_or_oracle(p, at, eta, ok, closed):
    """Closed form where ``ok`` holds, brute force elsewhere."""
    mag = np.empty_like(at)
    if np.any(ok):
        mag[ok] = closed(at[ok], eta[ok])
    for i in np.flatnonzero(~ok):
        # a nondecreasing penalty never moves the minimizer outside [0, |t|]
        x = prox_oracle(p, float(at[i]), float(eta[i]), half_width=float(at[i]) + 1.0)
        mag[i] = min(max(x, 0.0), at[i])
    return mag


def prox_vector(p: Penalty, t, eta):
    """Elementwise proximity operator of ``p``.

    ``eta`` is a positive scalar or an array broadcastable to ``t`` (e.g. one
    weight per column of a 2-D batch).
    """
    t = np.asarray(t, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if not np.all(eta > 0):
        raise ValueError("eta must be positive")
    shape = t.shape
    eta = np.broadcast_to(eta, shape).reshape(-1)
    t = t.reshape(-1)
    at = np.abs(t)
    v = p.variant
    if v == "soft":
        mag = np.maximum(at - 1.0 / eta, 0.0)
    elif v == "hard":
        mag = np.where(at > np.sqrt(2.0 / eta), at, 0.0)
    elif v == "lq":
        mag = _lq_magnitude(at, p.q, eta)
    elif v == "scad":
        mag = _closed_or_oracle(p, at, eta, (p.a - 1.0) * eta > 1.0,
                                lambda a_, e_: _scad_magnitude(a_, p.lam, p.a, e_))
    else:
        mag = _closed_or_oracle(p, at, eta, p.gamma * eta > 1.0,
                                lambda a_, e_: _mc_magnitude(a_, p.lam, p.gamma, e_))
    return np.copysign(mag, t).reshape(shape)


def prox_scalar(p: Penalty, t: float, eta: float) -> float:
    if not eta > 0:
        raise ValueError("eta must be positive")
    return float(prox_vector(p, np.array([t]), eta)[0])


def jump_points(p: Penalty, eta: float) -> list[float]:
    """Values of ``|t|`` where the closed-form operator is discontinuous.

    The nonconvex SCAD/MC regimes delegate to :func:`prox_oracle` and report
    no jumps.
    """
    if p.variant == "hard":
        return [float(np.sqrt(2.0 / eta))]
    if p.variant == "lq":
        return [lq_params(p.q, eta)[1]]
    return []


def prox_oracle(p: Penalty, t: float, eta: float, half_width: float = 12.0,
                coarse_points: int = 24001) -> float:
    """Brute-force minimizer of ``P(x) + (eta/2)(x - t)^2``.

    Coarse grid on ``[-half_width, half_width]`` (always containing 0), then
    three rounds of 10x refinement around the incumbent.
    """
    if coarse_points < 1000:
        raise ValueError("coarse_points must be at least 1000")
    if coarse_points % 2 == 0:
        coarse_points += 1

    def f(x):
        return _elementwise_penalty(p, x) + 0.5 * eta * (x - t) ** 2

    grid = np.linspace(-half_width, half_width, coarse_points)
    vals = f(grid)
    best = grid[np.argmin(vals)]
    h = grid[1] - grid[0]
    for _ in range(3):
        local = np.linspace(best - h, best + h, 21)
        local = np.append(local, 0.0)
        lv = f(local)
        best = local[np.argmin(lv)]
        h /= 10.0
    return float(best)
