"""Write fixtures/mri.pgm: a procedural axial brain slice (256 x 256).

Skull ring, cortex with sulcal folds, white matter, ventricles and a few
small nuclei.  Fully deterministic; no external image data involved.
"""

import argparse
import os

import numpy as np

from robustcs.wavelets import write_pgm


def brain_slice(side: int = 256) -> np.ndarray:
    ax = (np.arange(side) - (side - 1) / 2) / ((side - 1) / 2)
    x, y = np.meshgrid(ax, -ax)
    r = np.hypot(x / 0.78, y / 0.92)
    th = np.arctan2(y, x)
    img = np.zeros((side, side))
    img[(r > 0.93) & (r <= 1.0)] = 0.85  # skull
    img[(r > 0.88) & (r <= 0.93)] = 0.15  # csf gap
    folds = 0.04 * np.sin(14 * th) + 0.02 * np.sin(23 * th + 1.0)
    brain = r <= 0.88
    img[brain] = 0.55  # gray matter
    white = r <= 0.72 + folds
    img[white] = 0.78
    for cx, cy, a, b, val in [(-0.12, 0.08, 0.08, 0.22, 0.2), (0.12, 0.08, 0.08, 0.22, 0.2),
                              (0.0, -0.25, 0.05, 0.07, 0.25), (-0.3, -0.1, 0.09, 0.06, 0.62),
                              (0.3, -0.1, 0.09, 0.06, 0.62), (0.0, 0.45, 0.03, 0.03, 0.95)]:
        img[((x - cx) / a) ** 2 + ((y - cy) / b) ** 2 <= 1.0] = val
    return np.clip(img, 0.0, 1.0)


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--side", type=int, default=256)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "fixtures", "mri.pgm"))
    args = ap.parse_args()
    write_pgm(brain_slice(args.side), args.out)
    print(f"wrote {args.out}")
