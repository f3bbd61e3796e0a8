"""Robust compressive sensing with l1-loss ADMM and nonconvex penalties.

Submodules: :mod:`~robustcs.linops` (sensing operators),
:mod:`~robustcs.prox` (penalties and proximity operators),
:mod:`~robustcs.solvers` (LqLA-ADMM and the baselines),
:mod:`~robustcs.signals` (signals, noise, metrics),
:mod:`~robustcs.wavelets` (Haar, phantom, PGM) and
:mod:`~robustcs.bench` (experiment harness, used by the ``robustcs`` CLI).
"""

from .linops import DenseMap, LinearMap, PartialDCT, compose, make_gaussian_orthonormal, make_partial_dct
from .prox import Penalty, prox_oracle, prox_scalar, prox_vector
from .signals import NoiseSpec, SignalSpec, gen_noise, gen_sparse_signal, psnr_db, relative_error
from .solvers import (DivergenceError, SolverConfig, SolveResult, rho_lower_bound, solve_l1la_admm,
                      solve_l1ls_fista, solve_lqla_admm, solve_lqls_admm)

__version__ = "0.1.0"
