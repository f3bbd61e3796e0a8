import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from robustcs.signals import (NoiseSpec, SignalSpec, gen_noise, gen_sparse_signal, is_success, psnr_db,
                              relative_error, sas_samples, snr_db, stream, trial_seed)


@given(st.integers(1, 300), st.integers(0, 2**63 - 1), st.data())
def test_sparse_signal_support_and_norm(n, seed, data):
    k = data.draw(st.integers(1, n))
    x = gen_sparse_signal(SignalSpec(n, k, seed))
    assert np.count_nonzero(x) == k
    assert abs(np.linalg.norm(x) - 1) < 1e-12
    assert np.array_equal(x, gen_sparse_signal(SignalSpec(n, k, seed)))


def test_dense_signal_when_k_equals_n():
    assert np.count_nonzero(gen_sparse_signal(SignalSpec(10, 10, 1))) == 10


def test_k_larger_than_n_rejected():
    with pytest.raises(ValueError):
        SignalSpec(5, 6)


@pytest.mark.parametrize("kw", [dict(variant="gmm", snr_db=10, xi=1.2, kappa=10), dict(variant="gmm", snr_db=10, xi=0.1, kappa=1),
                                dict(variant="sas", alpha=2.5), dict(variant="sas", gamma=0), dict(variant="gaussian"),
                                dict(variant="laplace")])
def test_invalid_noise_specs(kw):
    with pytest.raises(ValueError):
        NoiseSpec(**kw)


def test_gmm_xi_zero_is_gaussian_at_target_snr():
    rng = np.random.default_rng(0)
    s = rng.standard_normal(10_000)
    n = gen_noise(NoiseSpec("gmm", snr_db=25, xi=0.0, kappa=100), s.size, s, seed=1)
    assert abs(snr_db(s, n) - 25) <= 1


def test_gmm_realized_snr():
    s = np.random.default_rng(1).standard_normal(20_000)
    n = gen_noise(NoiseSpec.gmm(30), s.size, s, seed=2)
    assert abs(snr_db(s, n) - 30) <= 1


def test_gmm_outlier_fraction():
    m, xi = 100_000, 0.1
    s = np.ones(m) + np.random.default_rng(0).standard_normal(m)
    _, out = gen_noise(NoiseSpec.gmm(20, xi, 1000), m, s, seed=3, return_outliers=True)
    sd = math.sqrt(m * xi * (1 - xi))
    assert abs(out.sum() - m * xi) <= 3 * sd


def test_sas_gaussian_limit_variance():
    z = sas_samples(2.0, 1.0, 1_000_000, np.random.default_rng(4))
    assert abs(z.var() - 2.0) <= 0.03 * 2.0


def test_sas_cauchy_quartiles():
    z = sas_samples(1.0, 1.0, 1_000_000, np.random.default_rng(5))
    q1, med, q3 = np.percentile(z, [25, 50, 75])
    assert abs(med) < 0.03
    assert abs((q3 - q1) - 2.0) <= 0.03 * 2.0


def test_sas_heavy_tail():
    g = 1e-4
    z = gen_noise(NoiseSpec.sas(1.0, g), 1_000_000, seed=6)
    assert np.quantile(z, 0.999) > 100 * g


def test_sas_general_alpha_symmetric():
    z = sas_samples(1.5, 1.0, 200_000, np.random.default_rng(7))
    assert abs(np.median(z)) < 0.02


def test_noise_determinism_and_seed_isolation():
    s = np.random.default_rng(0).standard_normal(50)
    a = gen_noise(NoiseSpec.gmm(20), 50, s, seed=trial_seed(1, "sparsity-sweep", 30, 0, "noise"))
    b = gen_noise(NoiseSpec.gmm(20), 50, s, seed=trial_seed(1, "sparsity-sweep", 30, 0, "noise"))
    c = gen_noise(NoiseSpec.gmm(20), 50, s, seed=trial_seed(1, "sparsity-sweep", 30, 1, "noise"))
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    assert stream(3, "x").random() == stream(3, "x").random()


def test_noiseless_and_snr_needs_signal():
    assert np.array_equal(gen_noise(NoiseSpec.noiseless(), 4), np.zeros(4))
    with pytest.raises(ValueError):
        gen_noise(NoiseSpec.gaussian(10), 4)


def test_snr_examples():
    s = np.array([1.0, -1.0, 2.0, -2.0])
    assert snr_db(s, s / 10) == pytest.approx(20)
    assert snr_db(s, s) == pytest.approx(0)
    assert snr_db(s, np.zeros(4)) == math.inf


def test_relative_error_examples():
    x = gen_sparse_signal(SignalSpec(20, 3, 0))
    assert relative_error(x, x) == 0 and is_success(x, x)
    assert relative_error(1.005 * x, x) == pytest.approx(0.005) and is_success(1.005 * x, x)
    assert relative_error(np.zeros(20), x) == 1.0 and not is_success(np.zeros(20), x)
    with pytest.raises(ValueError):
        relative_error(x, np.zeros(20))


def test_psnr_examples():
    ref = np.zeros((4, 4))
    ref[0, 0] = 1.0
    assert psnr_db(ref + 1.0 - ref + ref, ref) == pytest.approx(10 * math.log10(1 / 1.0))
    assert psnr_db(ref + 0.01, ref) == pytest.approx(40)
    assert psnr_db(ref, ref) == math.inf
    est = ref.copy()
    est[:] = ref + np.where(np.arange(16).reshape(4, 4) % 2 == 0, 1.0, -1.0)
    assert psnr_db(est, ref) == pytest.approx(0.0)
