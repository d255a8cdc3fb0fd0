#!/usr/bin/env python3
"""Reference pHash used to freeze tests/data/golden_hashes.txt.

Independent of the C++ code path: Pillow decoding, dense resampling
matrices and scipy's DCT.

    python3 tests/oracle/phash_oracle.py tests/data > tests/data/golden_hashes.txt
"""
import sys
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.fft import dctn


def triangle_matrix(src: int, out: int) -> np.ndarray:
    """Row i holds the normalized triangle weights for output sample i."""
    scale = src / out
    support = max(scale, 1.0)
    centers = (np.arange(out) + 0.5) * scale
    pos = np.arange(src) + 0.5
    w = np.clip(1.0 - np.abs(pos[None, :] - centers[:, None]) / support, 0.0, None)
    return w / w.sum(axis=1, keepdims=True)


def luma(rgb: np.ndarray) -> np.ndarray:
    r, g, b = (rgb[..., i].astype(np.int64) for i in range(3))
    return (299 * r + 587 * g + 114 * b + 500) // 1000


def phash(path: Path) -> str:
    rgb = np.asarray(Image.open(path).convert("RGB"))
    y = luma(rgb).astype(np.float64)
    h, w = y.shape
    grid = triangle_matrix(h, 32) @ y @ triangle_matrix(w, 32).T
    # scipy's unnormalized type-II carries a factor 2 per axis.
    coeffs = dctn(grid, type=2, norm=None)[:8, :8] / 4.0
    coeffs = np.round(coeffs * 1e6) / 1e6
    flat = coeffs.reshape(-1)  # row-major: index = v * 8 + u
    med = np.median(flat)
    value = 0
    for i, c in enumerate(flat):
        if c > med:
            value |= 1 << i
    return f"{value:016X}"


def main() -> None:
    root = Path(sys.argv[1])
    files = sorted((root / "fixtures").glob("*.png"))
    files += sorted((root / "corpus" / "originals").glob("*.png"))[:16]
    files += sorted((root / "corpus" / "negatives").glob("*.png"))[:8]
    for f in files:
        print(f"{f.relative_to(root).as_posix()} {phash(f)}")


if __name__ == "__main__":
    main()
