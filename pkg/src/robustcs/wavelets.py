"""Orthonormal 2-D Haar transform, Shepp-Logan phantom and PGM file I/O.

Images are square ``float`` arrays with a power-of-two side and pixel
values in ``[0, 1]``.  Coefficients are stored in the usual pyramid layout
(coarsest approximation in the top-left corner) and flattened row-major.
"""

from __future__ import annotations

import os

import numpy as np

from .linops import CallableMap

__all__ = [
    "PGMError",
    "haar2_forward",
    "haar2_inverse",
    "as_synthesis_map",
    "phantom_shepp_logan",
    "read_pgm",
    "write_pgm",
    "check_side",
]

_SQRT_HALF = np.sqrt(0.5)


class PGMError(ValueError):
    """Malformed or unsupported portable graymap."""


def check_side(side: int) -> int:
    side = int(side)
    if side < 1 or side & (side - 1):
        raise ValueError(f"image side must be a power of two, got {side}")
    return side


def _analysis(c):
    """In-place pyramid analysis over the first two axes of ``c``."""
    s = c.shape[0]
    while s > 1:
        blk = c[:s, :s]
        lo = (blk[:, 0::2] + blk[:, 1::2]) * _SQRT_HALF
        hi = (blk[:, 0::2] - blk[:, 1::2]) * _SQRT_HALF
        blk = np.concatenate([lo, hi], axis=1)
        lo = (blk[0::2] + blk[1::2]) * _SQRT_HALF
        hi = (blk[0::2] - blk[1::2]) * _SQRT_HALF
        c[:s, :s] = np.concatenate([lo, hi], axis=0)
        s //= 2
    return c


def _synthesis(c):
    side = c.shape[0]
    s = 2
    while s <= side:
        h = s // 2
        blk = c[:s, :s]
        lo, hi = blk[:h], blk[h:]
        rows = np.empty_like(blk)
        rows[0::2] = (lo + hi) * _SQRT_HALF
        rows[1::2] = (lo - hi) * _SQRT_HALF
        lo, hi = rows[:, :h], rows[:, h:]
        out = np.empty_like(blk)
        out[:, 0::2] = (lo + hi) * _SQRT_HALF
        out[:, 1::2] = (lo - hi) * _SQRT_HALF
        c[:s, :s] = out
        s *= 2
    return c


def haar2_forward(img):
    """Full-depth separable Haar analysis; returns the flattened coefficients."""
    c = np.array(img, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"expected a square image, got shape {c.shape}")
    check_side(c.shape[0])
    return _analysis(c).ravel()


def haar2_inverse(coeffs, side: int | None = None):
    """Inverse of :func:`haar2_forward`; returns a ``side x side`` image."""
    coeffs = np.asarray(coeffs, dtype=float)
    if side is None:
        side = int(round(np.sqrt(coeffs.size))) if coeffs.ndim == 1 else coeffs.shape[0]
    side = check_side(side)
    if coeffs.size != side * side:
        raise ValueError(f"need {side * side} coefficients, got {coeffs.size}")
    return _synthesis(coeffs.reshape(side, side).copy())


def as_synthesis_map(side: int) -> CallableMap:
    """``Psi``: n x n map from Haar coefficients to the flattened image."""
    side = check_side(side)
    n = side * side
    return CallableMap(
        n,
        n,
        forward=lambda theta: haar2_inverse(theta, side).ravel(),
        adjoint=lambda x: haar2_forward(x.reshape(side, side)),
        kind="haar-synthesis",
    )


# Shepp-Logan head: (intensity, semi-axis a, semi-axis b, x0, y0, angle deg).
# Geometry of the original 10-ellipse table with the higher-contrast
# intensities of Toft's modified version, so the phantom spans [0, 1].
SHEPP_LOGAN = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
)


def phantom_shepp_logan(side: int = 256):
    """Rasterize the Shepp-Logan ellipses on a ``side x side`` grid over [-1, 1]^2."""
    if side < 16:
        raise ValueError("phantom side must be >= 16")
    ax = (np.arange(side) - (side - 1) / 2) / ((side - 1) / 2)
    x = np.tile(ax, (side, 1))
    y = x.T[::-1, :]  # row 0 is the top of the head (y = +1)
    img = np.zeros((side, side))
    for amp, a, b, x0, y0, deg in SHEPP_LOGAN:
        phi = np.deg2rad(deg)
        dx, dy = x - x0, y - y0
        c, s = np.cos(phi), np.sin(phi)
        inside = ((dx * c + dy * s) / a) ** 2 + ((dy * c - dx * s) / b) ** 2 <= 1.0
        img[inside] += amp
    return np.clip(img, 0.0, 1.0)


def _pgm_tokens(data: bytes, count: int):
    """Read ``count`` whitespace-separated header tokens; return (tokens, offset)."""
    toks = []
    i = 0
    n = len(data)
    while len(toks) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        if i >= n:
            raise PGMError(f"truncated header at byte {i}")
        j = i
        while j < n and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
            j += 1
        toks.append((data[i:j], i))
        i = j
    return toks, i


def read_pgm(path):
    """Load a P2/P5 graymap (maxval 255) as a float image in [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] not in (b"P2", b"P5"):
        raise PGMError(f"bad magic {data[:2]!r} at byte 0; expected P2 or P5")
    magic = data[:2]
    toks, off = _pgm_tokens(data[2:], 3)
    vals = []
    for tok, pos in toks:
        try:
            vals.append(int(tok))
        except ValueError:
            raise PGMError(f"non-integer header field {tok!r} at byte {pos + 2}") from None
    width, height, maxval = vals
    off += 2
    if maxval != 255:
        raise PGMError(f"unsupported maxval {maxval} at byte {toks[2][1] + 2}")
    if width != height:
        raise PGMError(f"image is {width}x{height}; only square images are supported (byte {toks[0][1] + 2})")
    if width < 1 or width & (width - 1):
        raise PGMError(f"side {width} is not a power of two (byte {toks[0][1] + 2})")
    npix = width * height
    if magic == b"P5":
        start = off + 1  # exactly one whitespace byte after maxval
        raw = data[start : start + npix]
        if len(raw) < npix:
            raise PGMError(f"truncated raster: expected {npix} bytes from byte {start}, got {len(raw)}")
        pix = np.frombuffer(raw, dtype=np.uint8).astype(float)
    else:
        body = data[off:]
        fields = body.split()
        if len(fields) < npix:
            raise PGMError(f"truncated raster: expected {npix} values after byte {off}, got {len(fields)}")
        try:
            pix = np.array([int(f) for f in fields[:npix]], dtype=float)
        except ValueError:
            raise PGMError(f"non-integer pixel value in raster after byte {off}") from None
        if pix.min() < 0 or pix.max() > 255:
            raise PGMError(f"pixel value out of range in raster after byte {off}")
    return pix.reshape(height, width) / 255.0


def write_pgm(img, path, binary: bool = True):
    """Save an image in [0, 1] as an 8-bit graymap (P5 unless ``binary=False``)."""
    img = np.asarray(img, dtype=float)
    if img.ndim != 2:
        raise ValueError("expected a 2-D image")
    q = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    h, w = q.shape
    with open(os.fspath(path), "wb") as fh:
        if binary:
            fh.write(f"P5\n{w} {h}\n255\n".encode())
            fh.write(q.tobytes())
        else:
            fh.write(f"P2\n{w} {h}\n255\n".encode())
            for row in q:
                fh.write((" ".join(str(int(v)) for v in row) + "\n").encode())
