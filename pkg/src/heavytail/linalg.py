"""Small dense operator-norm helpers (largest singular value).

Accuracy target is 1e-12 relative. The 2x2 closed form is used where it is
provably accurate and falls back to LAPACK SVD when the two singular values
nearly coincide (where the closed form loses half the mantissa).
"""

from __future__ import annotations

import numpy as np

# below this relative discriminant the 2x2 closed form cancels; use SVD
_DISC_REL_FLOOR = 1e-10


def batch_operator_norms(p: np.ndarray) -> np.ndarray:
    """Largest singular value per matrix of a (n, d, d) stack."""
    p = np.asarray(p, dtype=float)
    if p.ndim == 2:
        return batch_operator_norms(p[None])[0]
    d = p.shape[-1]
    if d == 1:
        return np.abs(p[:, 0, 0])
    if d == 2:
        a, b = p[:, 0, 0], p[:, 0, 1]
        c, e = p[:, 1, 0], p[:, 1, 1]
        f = a * a + b * b + c * c + e * e
        det = a * e - b * c
        disc2 = f * f - 4.0 * det * det
        out = np.sqrt((f + np.sqrt(np.maximum(disc2, 0.0))) / 2.0)
        shaky = disc2 < _DISC_REL_FLOOR * f * f
        if shaky.any():
            out[shaky] = np.linalg.svd(p[shaky], compute_uv=False)[:, 0]
        return out
    return np.linalg.svd(p, compute_uv=False)[..., 0]


def operator_norm(m: np.ndarray) -> float:
    return float(batch_operator_norms(np.asarray(m, dtype=float)[None])[0])
