"""Small numerical helpers used across modules.

Everything here broadcasts over leading axes; points live on the last axis,
matrices on the last two.
"""

from __future__ import annotations

import numpy as np

from .errors import RankDeficient


def wrap_unit(x: np.ndarray) -> np.ndarray:
    """Map coordinates into the canonical cell [0, 1).

    ``np.mod`` can round values like -1e-18 up to exactly 1.0; fold those back.
    """
    y = np.mod(np.asarray(x, dtype=float), 1.0)
    return np.where(y >= 1.0, y - 1.0, y)


def wrap_half(d: np.ndarray) -> np.ndarray:
    """Wrap coordinate differences into [-0.5, 0.5)."""
    return np.mod(np.asarray(d, dtype=float) + 0.5, 1.0) - 0.5


def torus_distance(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Flat-metric distance on the unit torus, broadcasting over leading axes."""
    return np.linalg.norm(wrap_half(np.asarray(x) - np.asarray(y)), axis=-1)


def plane_distance(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float), axis=-1)


def inv2(m: np.ndarray) -> np.ndarray:
    """Inverse of a 2x2 matrix (batched) via the adjugate."""
    m = np.asarray(m, dtype=float)
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    out[..., 1, 1] = m[..., 0, 0]
    return out / det[..., None, None]


def det2(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def qr_frame(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Thin QR of a (..., D, r) frame with positive R diagonal, r in {1, 2}.

    Hand-rolled Gram-Schmidt: called in hot per-step loops where LAPACK call
    overhead dominates for tiny frames.
    """
    m = np.asarray(m, dtype=float)
    r = m.shape[-1]
    if r == 1:
        n = np.linalg.norm(m, axis=-2, keepdims=True)
        if np.any(n == 0.0):
            raise RankDeficient("zero column in frame")
        return m / n, np.swapaxes(n, -1, -2)
    if r == 2:
        a = m[..., 0]
        b = m[..., 1]
        na = np.linalg.norm(a, axis=-1)
        if np.any(na == 0.0):
            raise RankDeficient("zero column in frame")
        q1 = a / na[..., None]
        proj = np.sum(q1 * b, axis=-1)
        v = b - proj[..., None] * q1
        nv = np.linalg.norm(v, axis=-1)
        if np.any(nv == 0.0):
            raise RankDeficient("frame lost rank during orthonormalization")
        q2 = v / nv[..., None]
        q = np.stack([q1, q2], axis=-1)
        rr = np.zeros(m.shape[:-2] + (2, 2), dtype=float)
        rr[..., 0, 0] = na
        rr[..., 0, 1] = proj
        rr[..., 1, 1] = nv
        return q, rr
    q, rr = np.linalg.qr(m)
    sign = np.sign(np.einsum("...ii->...i", rr))
    sign = np.where(sign == 0.0, 1.0, sign)
    return q * sign[..., None, :], rr * sign[..., :, None]


def singular_values_2x2(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(sigma_max, sigma_min) of a (..., 2, 2) matrix, closed form."""
    m = np.asarray(m, dtype=float)
    a = m[..., 0, 0] ** 2 + m[..., 1, 0] ** 2
    b = m[..., 0, 1] ** 2 + m[..., 1, 1] ** 2
    c = m[..., 0, 0] * m[..., 0, 1] + m[..., 1, 0] * m[..., 1, 1]
    half = 0.5 * (a + b)
    gap = 0.5 * np.sqrt((a - b) ** 2 + 4.0 * c * c)
    hi = np.sqrt(np.maximum(half + gap, 0.0))
    lo = np.sqrt(np.maximum(half - gap, 0.0))
    return hi, lo


def grassmann_distance(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Distance between equal-dimensional subspaces: sin of the largest
    principal angle, i.e. the spectral norm of the projector difference.

    ``u`` and ``v`` are orthonormal (..., D, r) frames.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape[-1] == 1 and u.shape[-2] == 2:
        cross = u[..., 0, 0] * v[..., 1, 0] - u[..., 1, 0] * v[..., 0, 0]
        return np.abs(cross)
    overlap = np.swapaxes(u, -1, -2) @ v
    s = np.linalg.svd(overlap, compute_uv=False)
    smin = np.clip(s[..., -1], -1.0, 1.0)
    return np.sqrt(np.maximum(1.0 - smin * smin, 0.0))


def generic_frame(dimension: int, columns: int) -> np.ndarray:
    """Deterministic full-rank frame with no special alignment.

    A fixed irrational rotation of the identity avoids accidental coincidence
    with stable or unstable directions of the built-in systems.
    """
    angle = 0.5574770619
    c, s = np.cos(angle), np.sin(angle)
    rot = np.eye(dimension)
    rot[0, 0] = c
    rot[0, 1] = -s
    rot[1, 0] = s
    rot[1, 1] = c
    return rot[:, :columns].copy()


def task_seed_sequence(root_seed: int, index: int) -> np.random.SeedSequence:
    """Per-task seed derived from a root seed, independent of scheduling."""
    return np.random.SeedSequence(entropy=root_seed, spawn_key=(index,))


def least_squares_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Fit y ~ intercept + slope*x. Returns (slope, intercept, r_squared)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm = x.mean()
    ym = y.mean()
    sxx = np.sum((x - xm) ** 2)
    if sxx == 0.0:
        return 0.0, float(ym), 0.0
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    resid = y - (intercept + slope * x)
    sst = float(np.sum((y - ym) ** 2))
    r2 = 1.0 if sst == 0.0 else 1.0 - float(np.sum(resid**2)) / sst
    return slope, intercept, r2
