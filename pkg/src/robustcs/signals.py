"""Test signals, impulsive noise models and recovery metrics.

Random numbers come from numpy's Philox counter-based generator.  A whole
experiment is reproducible from one master seed: :func:`stream` derives an
independent generator for each (experiment, K, trial, purpose) tuple, so
adding a method or a purpose never shifts the draws of another.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NoiseSpec",
    "SignalSpec",
    "stream",
    "derive_seed",
    "trial_seed",
    "gen_sparse_signal",
    "gen_noise",
    "sas_samples",
    "snr_db",
    "relative_error",
    "is_success",
    "psnr_db",
    "SUCCESS_THRESHOLD",
]

SUCCESS_THRESHOLD = 1e-2


def _tag(value) -> int:
    if isinstance(value, str):
        return zlib.crc32(value.encode())
    return int(value)


def derive_seed(master_seed: int, *keys) -> np.random.SeedSequence:
    """Seed sequence for ``hash(master_seed, *keys)``; strings are CRC32-tagged."""
    return np.random.SeedSequence([int(master_seed)] + [_tag(k) for k in keys])


def trial_seed(master_seed: int, *keys) -> int:
    """64-bit integer seed derived from ``(master_seed, *keys)``."""
    return int(derive_seed(master_seed, *keys).generate_state(1, np.uint64)[0])


def stream(master_seed: int, *keys) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(derive_seed(master_seed, *keys)))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class SignalSpec:
    n: int
    k: int
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.k <= self.n:
            raise ValueError(f"need 0 < K <= n, got K={self.k}, n={self.n}")


@dataclass(frozen=True)
class NoiseSpec:
    """Measurement noise description.

    ``gaussian`` and ``gmm`` are calibrated by ``snr_db``; ``gmm`` draws from
    ``(1 - xi) N(0, s^2) + xi N(0, kappa s^2)``.  ``sas`` is symmetric
    alpha-stable with exponent ``alpha`` and dispersion ``gamma``.  ``none``
    gives noiseless measurements.
    """

    variant: str = "gaussian"
    snr_db: float | None = None
    xi: float = 0.0
    kappa: float = 1.0
    alpha: float = 2.0
    gamma: float = 1.0

    def __post_init__(self):
        v = self.variant.lower()
        object.__setattr__(self, "variant", v)
        if v not in ("none", "gaussian", "gmm", "sas"):
            raise ValueError(f"unknown noise variant {self.variant!r}")
        if v in ("gaussian", "gmm") and self.snr_db is None:
            raise ValueError(f"{v} noise needs snr_db")
        if v == "gmm":
            if not 0.0 <= self.xi < 1.0:
                raise ValueError("gmm needs 0 <= xi < 1")
            if not self.kappa > 1.0:
                raise ValueError("gmm needs kappa > 1")
        if v == "sas":
            if not 0.0 < self.alpha <= 2.0:
                raise ValueError("sas needs 0 < alpha <= 2")
            if not self.gamma > 0.0:
                raise ValueError("sas needs gamma > 0")

    @classmethod
    def gaussian(cls, snr_db: float):
        return cls("gaussian", snr_db=snr_db)

    @classmethod
    def gmm(cls, snr_db: float, xi: float = 0.1, kappa: float = 1000.0):
        return cls("gmm", snr_db=snr_db, xi=xi, kappa=kappa)

    @classmethod
    def sas(cls, alpha: float = 1.0, gamma: float = 1e-4):
        return cls("sas", alpha=alpha, gamma=gamma)

    @classmethod
    def noiseless(cls):
        return cls("none")

    def label(self) -> str:
        if self.variant == "gaussian":
            return f"gaussian(snr={self.snr_db:g}dB)"
        if self.variant == "gmm":
            return f"gmm(xi={self.xi:g};kappa={self.kappa:g};snr={self.snr_db:g}dB)"
        if self.variant == "sas":
            return f"sas(alpha={self.alpha:g};gamma={self.gamma:g})"
        return "none"


def gen_sparse_signal(spec: SignalSpec, rng=None):
    """K-sparse vector with N(0, 1) amplitudes on a uniform support, unit norm."""
    rng = _rng(spec.seed if rng is None else rng)
    x = np.zeros(spec.n)
    support = rng.choice(spec.n, size=spec.k, replace=False)
    amp = rng.standard_normal(spec.k)
    while np.any(amp == 0.0):
        amp[amp == 0.0] = rng.standard_normal(int(np.sum(amp == 0.0)))
    x[support] = amp
    return x / np.linalg.norm(x)


def sas_samples(alpha: float, gamma: float, size, rng) -> np.ndarray:
    """Chambers-Mallows-Stuck sampler for zero-location symmetric stable noise.

    Characteristic function ``exp(-gamma^alpha |w|^alpha)``; alpha=2 gives
    N(0, 2 gamma^2), alpha=1 the Cauchy law with scale gamma.
    """
    rng = _rng(rng)
    u = rng.uniform(-np.pi / 2, np.pi / 2, size)
    if alpha == 1.0:
        return gamma * np.tan(u)
    w = rng.standard_exponential(size)
    return gamma * (
        np.sin(alpha * u) / np.cos(u) ** (1.0 / alpha)
        * (np.cos(u - alpha * u) / w) ** ((1.0 - alpha) / alpha)
    )


def mixture_sigma(spec: NoiseSpec, signal_image) -> float:
    """Nominal std so that E||n||^2 matches the SNR target."""
    s = np.asarray(signal_image, dtype=float)
    m = s.size
    centered = np.linalg.norm(s - s.mean())
    xi = spec.xi if spec.variant == "gmm" else 0.0
    kappa = spec.kappa if spec.variant == "gmm" else 1.0
    target = centered * 10.0 ** (-spec.snr_db / 20.0)
    return target / math.sqrt(m * (1.0 - xi + xi * kappa))


def gen_noise(spec: NoiseSpec, m: int, signal_image=None, seed=0, return_outliers: bool = False):
    """Draw an m-vector of noise.

    Gaussian and mixture noise are calibrated in expectation from
    ``signal_image`` (the clean measurements ``A x``); the realized noise is
    not rescaled.  With ``return_outliers`` the boolean mask of samples drawn
    from the wide mixture component is returned as well.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = _rng(seed)
    outliers = np.zeros(m, dtype=bool)
    if spec.variant == "none":
        noise = np.zeros(m)
    elif spec.variant == "sas":
        noise = sas_samples(spec.alpha, spec.gamma, m, rng)
    else:
        if signal_image is None or len(signal_image) != m:
            raise ValueError("SNR-calibrated noise needs the length-m clean measurements")
        sigma = mixture_sigma(spec, signal_image)
        noise = sigma * rng.standard_normal(m)
        if spec.variant == "gmm" and spec.xi > 0:
            outliers = rng.uniform(size=m) < spec.xi
            noise[outliers] *= math.sqrt(spec.kappa)
    if return_outliers:
        return noise, outliers
    return noise


def snr_db(signal_image, noise) -> float:
    s = np.asarray(signal_image, dtype=float)
    n = np.asarray(noise, dtype=float)
    if s.shape != n.shape:
        raise ValueError("signal and noise lengths differ")
    nn = np.linalg.norm(n)
    if nn == 0.0:
        return math.inf
    return 20.0 * math.log10(np.linalg.norm(s - s.mean()) / nn)


def relative_error(x_hat, x_true) -> float:
    x_hat = np.asarray(x_hat, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    if x_hat.shape != x_true.shape:
        raise ValueError("shape mismatch")
    ref = np.linalg.norm(x_true)
    if ref == 0.0:
        raise ValueError("relative error undefined for a zero reference signal")
    return float(np.linalg.norm(x_hat - x_true) / ref)


def is_success(x_hat, x_true, threshold: float = SUCCESS_THRESHOLD) -> bool:
    return relative_error(x_hat, x_true) <= threshold


def psnr_db(estimate, reference) -> float:
    """10 log10(MAX^2 / MSE), MAX taken from the reference image."""
    estimate = np.asarray(estimate, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if estimate.shape != reference.shape:
        raise ValueError("image shapes differ")
    mse = float(np.mean((estimate - reference) ** 2))
    if mse == 0.0:
        return math.inf
    peak = float(reference.max())
    return 10.0 * math.log10(peak**2 / mse)
