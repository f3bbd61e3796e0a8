"""Matrix-free linear operators used as sensing and synthesis maps.

Every map exposes ``apply`` (x -> A x) and ``adjoint`` (y -> A^T y) on
1-D float arrays, plus ``apply_batch``/``adjoint_batch`` acting on the
columns of a 2-D array.  Maps are immutable once built and can be shared
freely between worker processes.
"""

from __future__ import annotations

import numpy as np
from scipy import fft as _fft

__all__ = [
    "ShapeError",
    "LinearMap",
    "DenseMap",
    "IdentityMap",
    "PartialDCT",
    "ComposedMap",
    "CallableMap",
    "apply",
    "adjoint_apply",
    "make_dense",
    "make_gaussian_orthonormal",
    "make_partial_dct",
    "compose",
    "max_eig_gram",
    "to_dense",
    "LIPSCHITZ_SAFETY",
]

# Power iteration under-estimates lambda_max; callers that need a strict
# upper bound multiply the estimate by this factor.
LIPSCHITZ_SAFETY = 1.01


class ShapeError(ValueError):
    """Operand length does not match the operator dimensions."""


class LinearMap:
    """Base class: an ``rows x cols`` real linear operator."""

    kind = "abstract"

    def __init__(self, rows: int, cols: int):
        if rows <= 0 or cols <= 0:
            raise ValueError(f"dimensions must be positive, got {rows}x{cols}")
        self.rows = int(rows)
        self.cols = int(cols)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.cols,):
            raise ShapeError(f"{self.kind} map expects length {self.cols}, got shape {x.shape}")
        return self._apply(x)

    def adjoint(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape != (self.rows,):
            raise ShapeError(f"{self.kind} adjoint expects length {self.rows}, got shape {y.shape}")
        return self._adjoint(y)

    def apply_batch(self, X):
        """Apply to every column of an ``cols x B`` array."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] != self.cols:
            raise ShapeError(f"{self.kind} map expects {self.cols} x B, got shape {X.shape}")
        return self._apply_batch(X)

    def adjoint_batch(self, Y):
        Y = np.asarray(Y, dtype=float)
        if Y.ndim != 2 or Y.shape[0] != self.rows:
            raise ShapeError(f"{self.kind} adjoint expects {self.rows} x B, got shape {Y.shape}")
        return self._adjoint_batch(Y)

    def _apply(self, x):
        raise NotImplementedError

    def _adjoint(self, y):
        raise NotImplementedError

    def _apply_batch(self, X):
        out = np.empty((self.rows, X.shape[1]))
        for j in range(X.shape[1]):
            out[:, j] = self._apply(np.ascontiguousarray(X[:, j]))
        return out

    def _adjoint_batch(self, Y):
        out = np.empty((self.cols, Y.shape[1]))
        for j in range(Y.shape[1]):
            out[:, j] = self._adjoint(np.ascontiguousarray(Y[:, j]))
        return out

    def __repr__(self):
        return f"<{type(self).__name__} kind={self.kind} {self.rows}x{self.cols}>"


class DenseMap(LinearMap):
    """Explicit matrix, stored row-major."""

    kind = "dense"

    def __init__(self, matrix, kind: str = "dense", seed: int | None = None):
        matrix = np.ascontiguousarray(matrix, dtype=float)
        if matrix.ndim != 2:
            raise ShapeError("dense map needs a 2-D matrix")
        super().__init__(*matrix.shape)
        matrix.setflags(write=False)
        self.matrix = matrix
        self.kind = kind
        self.seed = seed

    def _apply(self, x):
        return self.matrix @ x

    def _adjoint(self, y):
        return self.matrix.T @ y

    _apply_batch = _apply
    _adjoint_batch = _adjoint


class IdentityMap(LinearMap):
    kind = "identity"

    def __init__(self, n: int):
        super().__init__(n, n)

    def _apply(self, x):
        return x.copy()

    def _adjoint(self, y):
        return y.copy()

    _apply_batch = _apply
    _adjoint_batch = _adjoint


class PartialDCT(LinearMap):
    """Rows ``indices`` of the n-point orthonormal DCT-II, never materialized.

    With ``perm`` the input is scrambled first, ``A x = (C x[perm])[indices]``;
    the rows stay orthonormal.
    """

    kind = "partial-dct"

    def __init__(self, n: int, indices, seed: int | None = None, perm=None):
        indices = np.asarray(indices, dtype=np.intp)
        super().__init__(len(indices), n)
        if len(np.unique(indices)) != len(indices):
            raise ValueError("partial-dct row indices must be distinct")
        if indices.min() < 0 or indices.max() >= n:
            raise ValueError("partial-dct row index out of range")
        indices.setflags(write=False)
        self.n = int(n)
        self.indices = indices
        self.seed = seed
        self.perm = None
        self._inv = None
        if perm is not None:
            perm = np.asarray(perm, dtype=np.intp)
            if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
                raise ValueError("perm must be a permutation of range(n)")
            perm.setflags(write=False)
            self.perm = perm
            self._inv = np.argsort(perm)

    def _apply(self, x):
        if self.perm is not None:
            x = x[self.perm]
        return _fft.dct(x, type=2, norm="ortho")[self.indices]

    def _adjoint(self, y):
        z = np.zeros(self.n)
        z[self.indices] = y
        z = _fft.idct(z, type=2, norm="ortho")
        return z if self._inv is None else z[self._inv]


class ComposedMap(LinearMap):
    """``outer @ inner`` evaluated lazily."""

    kind = "composed"

    def __init__(self, outer: LinearMap, inner: LinearMap):
        if outer.cols != inner.rows:
            raise ShapeError(
                f"cannot compose {outer.rows}x{outer.cols} with {inner.rows}x{inner.cols}"
            )
        super().__init__(outer.rows, inner.cols)
        self.outer = outer
        self.inner = inner

    def _apply(self, x):
        return self.outer._apply(self.inner._apply(x))

    def _adjoint(self, y):
        return self.inner._adjoint(self.outer._adjoint(y))

    def _apply_batch(self, X):
        return self.outer._apply_batch(self.inner._apply_batch(X))

    def _adjoint_batch(self, Y):
        return self.inner._adjoint_batch(self.outer._adjoint_batch(Y))


class CallableMap(LinearMap):
    """Wrap a pair of forward/adjoint callables as a map.

    Optional ``forward_batch``/``adjoint_batch`` act on ``dim x B`` arrays;
    without them batches are processed column by column.
    """

    def __init__(self, rows: int, cols: int, forward, adjoint, kind: str = "callable",
                 forward_batch=None, adjoint_batch=None):
        super().__init__(rows, cols)
        self._forward = forward
        self._backward = adjoint
        self._forward_b = forward_batch
        self._backward_b = adjoint_batch
        self.kind = kind

    def _apply_batch(self, X):
        if self._forward_b is None:
            return super()._apply_batch(X)
        return np.asarray(self._forward_b(X), dtype=float)

    def _adjoint_batch(self, Y):
        if self._backward_b is None:
            return super()._adjoint_batch(Y)
        return np.asarray(self._backward_b(Y), dtype=float)

    def _apply(self, x):
        return np.asarray(self._forward(x), dtype=float)

    def _adjoint(self, y):
        return np.asarray(self._backward(y), dtype=float)


def apply(A: LinearMap, x):
    return A.apply(x)


def adjoint_apply(A: LinearMap, y):
    return A.adjoint(y)


def make_dense(matrix) -> DenseMap:
    return DenseMap(matrix)


def _check_dims(m: int, n: int):
    if not 0 < m <= n:
        raise ValueError(f"need 0 < m <= n, got m={m}, n={n}")


def make_gaussian_orthonormal(m: int, n: int, seed: int) -> DenseMap:
    """Gaussian m x n matrix with orthonormalized rows (QR of the transpose)."""
    _check_dims(m, n)
    rng = np.random.Generator(np.random.Philox(seed))
    G = rng.standard_normal((m, n))
    Q, R = np.linalg.qr(G.T)
    # fix the sign ambiguity of QR so the rows follow the Gaussian draw
    Q = Q * np.sign(np.diag(R))
    return DenseMap(Q.T, kind="gaussian-orthonormal", seed=seed)


def make_partial_dct(n: int, m: int, seed: int, keep_dc: bool = False,
                     scramble: bool = False) -> PartialDCT:
    """Select m of the n orthonormal DCT-II rows uniformly without replacement.

    ``keep_dc`` always includes row 0 and draws the other m - 1 rows at
    random; ``scramble`` adds a random input permutation.  Both matter for
    images in a Haar basis: without row 0 the image mean is invisible, and
    the unscrambled DCT is coherent with the coarse Haar atoms.
    """
    _check_dims(m, n)
    rng = np.random.Generator(np.random.Philox(seed))
    if keep_dc:
        idx = np.sort(np.r_[0, 1 + rng.choice(n - 1, size=m - 1, replace=False)])
    else:
        idx = np.sort(rng.choice(n, size=m, replace=False))
    perm = rng.permutation(n) if scramble else None
    return PartialDCT(n, idx, seed=seed, perm=perm)


def compose(outer: LinearMap, inner: LinearMap) -> ComposedMap:
    return ComposedMap(outer, inner)


def to_dense(A: LinearMap):
    """Materialize a map column by column (small maps only)."""
    out = np.empty((A.rows, A.cols))
    e = np.zeros(A.cols)
    for j in range(A.cols):
        e[j] = 1.0
        out[:, j] = A.apply(e)
        e[j] = 0.0
    return out


def max_eig_gram(A: LinearMap, tol: float = 1e-9, max_iter: int = 500, seed: int = 0):
    """Largest eigenvalue of A^T A by power iteration.

    Returns ``(estimate, converged)``.  The Rayleigh quotient approaches the
    true value from below, so the estimate is a lower bound; multiply by
    :data:`LIPSCHITZ_SAFETY` when a safe Lipschitz constant is needed.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rng = np.random.Generator(np.random.Philox(seed))
    x = rng.standard_normal(A.cols)
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(max_iter):
        z = A.adjoint(A.apply(x))
        lam_new = float(x @ z)
        nz = np.linalg.norm(z)
        if nz == 0.0:
            return 0.0, True
        x = z / nz
        if abs(lam_new - lam) <= tol * abs(lam_new):
            return lam_new, True
        lam = lam_new
    return lam, False
