"""Independent reference computations used to freeze expected test values.

Everything here deliberately avoids the package's own numerical paths:
dense numpy solves, integer matrix arithmetic, plain finite differences and
a standalone QR exponent iteration.
"""

import numpy as np

CAT = np.array([[2, 1], [1, 1]], dtype=object)


def cat_matrix_power(n: int) -> np.ndarray:
    """Exact integer power of the cat matrix."""
    out = np.eye(2, dtype=object)
    base = CAT.copy()
    e = n
    while e > 0:
        if e & 1:
            out = out @ base
        base = base @ base
        e >>= 1
    return out


def cat_period_count(n: int) -> int:
    """|det(A^n - I)| = trace(A^n) - 2: number of points with A^n x = x."""
    power = cat_matrix_power(n)
    return int(power[0, 0] + power[1, 1]) - 2


def wrap_half(d):
    return np.mod(np.asarray(d, dtype=float) + 0.5, 1.0) - 0.5


def dense_periodic_affine_solve(matrix: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Per-index correction magnitudes for the periodic affine orbit system.

    Solves A delta_j - delta_{j+1} = -(A p_j - p_{j+1}) (wrapped residuals)
    with a dense LU, independent of the production sparse path.
    """
    n = pts.shape[0]
    residual = wrap_half(pts @ matrix.T - np.roll(pts, -1, axis=0))
    big = np.zeros((2 * n, 2 * n))
    for j in range(n):
        big[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] = matrix
        k = (j + 1) % n
        big[2 * j : 2 * j + 2, 2 * k : 2 * k + 2] -= np.eye(2)
    delta = np.linalg.solve(big, -residual.reshape(-1)).reshape(n, 2)
    return np.linalg.norm(delta, axis=-1)


def finite_difference_jacobian(fn, x: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of a 2-d map."""
    out = np.zeros((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = step
        out[:, j] = (fn(x + e) - fn(x - e)) / (2.0 * step)
    return out


def qr_exponents(jac_fn, step_fn, x0: np.ndarray, n: int) -> np.ndarray:
    """Standalone QR (Benettin) Lyapunov exponent iteration, ascending."""
    q = np.eye(2)
    sums = np.zeros(2)
    x = np.asarray(x0, dtype=float)
    for _ in range(n):
        q, r = np.linalg.qr(jac_fn(x) @ q)
        sums += np.log(np.abs(np.diag(r)))
        x = step_fn(x)
    return np.sort(sums / n)
