"""Finite-time derivative-cocycle analysis.

Norm products are never formed raw beyond short windows: every routine keeps
per-step QR factors and accumulates logarithms, so growth rates up to
e^(+-700) per singular value stay representable. For 2x2 restricted products
the smallest singular value is recovered exactly from the running
log-determinant, which avoids the underflow that kills a naive SVD of a long
product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import (
    generic_frame,
    grassmann_distance,
    inv2,
    qr_frame,
    singular_values_2x2,
)
from .errors import DegenerateSplitting, RankDeficient
from .systems import MapSystem, orbit_points

_RESIDUAL_FLOOR = 1e-12
_RANK_TOL = 1e-12


# ---------------------------------------------------------------------------
# Orbit-wise Jacobian sequences
# ---------------------------------------------------------------------------


def jacobians_along(
    system: MapSystem,
    x: np.ndarray,
    n: int,
    direction: str = "forward",
) -> tuple[np.ndarray, np.ndarray]:
    """Jacobian factors of the n-step cocycle starting at x, time axis first.

    Forward: factor t is Df(f^t(x)), so the ordered product (last factor
    leftmost) is Df^n(x). Inverse: factor t is Df^{-1}(f^{-t}(x)).

    Returns (jacs, points) with shapes (n, ..., 2, 2) and (n+1, ..., 2);
    points[t] is the orbit point the t-th factor is evaluated at.
    """
    if direction == "forward":
        pts = orbit_points(system, x, n)
        jacs = system.jacobian(pts[:-1])
    elif direction == "inverse":
        pts = orbit_points(system, x, 0, n)[::-1]
        # Df^{-1} at f^{-t}(x) equals inv(Df(f^{-t-1}(x))).
        jacs = inv2(system.jacobian(pts[1:]))
    else:
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    return jacs, pts


def push_vector_lognorms(
    jacs: np.ndarray, v0: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Push a single vector through a factor sequence, renormalizing each step.

    jacs has time axis first, (n, ..., 2, 2); v0 is (..., 2). Returns
    (prefix, v_final): prefix[t] is log ||J_t ... J_1 v0|| / ||v0||, exact in
    log scale at any length.
    """
    n = jacs.shape[0]
    v = np.asarray(v0, dtype=float)
    norm0 = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(norm0 == 0.0):
        raise RankDeficient("zero vector cannot be pushed")
    v = v / norm0
    prefix = np.empty((n,) + v.shape[:-1], dtype=float)
    acc = np.zeros(v.shape[:-1], dtype=float)
    for t in range(n):
        v = np.einsum("...ij,...j->...i", jacs[t], v)
        nrm = np.linalg.norm(v, axis=-1)
        if np.any(nrm == 0.0):
            raise RankDeficient("vector annihilated during push-forward")
        acc = acc + np.log(nrm)
        prefix[t] = acc
        v = v / nrm[..., None]
    return prefix, v


def push_frame(
    jacs: np.ndarray, q0: np.ndarray
) -> tuple[np.ndarray, list[np.ndarray]]:
    """QR push of an orthonormal frame; returns (q_final, per-step R factors).

    Each R factor is a single-step triangular factor with positive diagonal,
    bounded by the one-step derivative norm, so the list is overflow-free.
    """
    q = np.asarray(q0, dtype=float)
    factors: list[np.ndarray] = []
    for t in range(jacs.shape[0]):
        q, r = qr_frame(jacs[t] @ q)
        factors.append(r)
    return q, factors


# ---------------------------------------------------------------------------
# Factored cocycle products
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CocycleProduct:
    """Df^n(x) (optionally restricted to a subspace) in QR-factored form.

    The evaluated product equals q @ r_factors[-1] @ ... @ r_factors[0]
    applied to the initial orthonormal frame. Log singular values are computed
    from a running rescaled triangular product plus the exact log-determinant.
    """

    point: np.ndarray
    steps: int
    q: np.ndarray
    r_factors: tuple[np.ndarray, ...]
    frame: np.ndarray

    @property
    def rank(self) -> int:
        return self.frame.shape[-1]

    def evaluate(self) -> np.ndarray:
        """Raw matrix of the restricted product; overflows past ~700 log units,
        intended for short windows only."""
        t = np.eye(self.rank)
        for r in self.r_factors:
            t = r @ t
        return self.q @ t @ self.frame.T if self.rank == self.frame.shape[0] else self.q @ t

    def log_singular_values(self) -> np.ndarray:
        """Ascending log singular values of the restricted product."""
        if self.rank == 1:
            total = sum(float(np.log(r[0, 0])) for r in self.r_factors)
            return np.array([total])
        t_hat = np.eye(self.rank)
        scale = 0.0
        logdet = 0.0
        for r in self.r_factors:
            t_hat = r @ t_hat
            m = float(np.max(np.abs(t_hat)))
            t_hat /= m
            scale += np.log(m)
            logdet += float(np.sum(np.log(np.diagonal(r))))
        hi, _ = singular_values_2x2(t_hat)
        log_hi = scale + float(np.log(hi))
        return np.array([logdet - log_hi, log_hi])

    def full_scaled(self) -> tuple[np.ndarray, float]:
        """(well-scaled matrix, log scale) with product = matrix * exp(scale)."""
        t_hat = np.eye(self.rank)
        scale = 0.0
        for r in self.r_factors:
            t_hat = r @ t_hat
            m = float(np.max(np.abs(t_hat)))
            t_hat /= m
            scale += np.log(m)
        return self.q @ t_hat, scale

    def log_abs_det(self) -> float:
        return float(sum(np.sum(np.log(np.diagonal(r))) for r in self.r_factors))

    def det_sign(self) -> float:
        """Sign of the determinant; the R factors have positive diagonals so
        the sign lives entirely in the orthogonal factor."""
        return float(np.sign(np.linalg.det(self.q)))

    def eigenvalue_log_moduli(self) -> np.ndarray:
        """Ascending log |eigenvalues| of the full-space 2x2 product.

        Works at any window length: the characteristic polynomial is evaluated
        on the rescaled product and the small root is recovered from the exact
        log-determinant rather than by cancellation-prone subtraction.
        """
        if self.rank != 2 or self.frame.shape != (2, 2):
            raise ValueError("eigenvalue moduli need the unrestricted 2x2 product")
        m_hat, scale = self.full_scaled()
        logdet = self.log_abs_det()
        sign = self.det_sign()
        trace_hat = float(np.trace(m_hat))
        # det of the scaled matrix, reconstructed without cancellation.
        det_hat = sign * float(np.exp(np.clip(logdet - 2.0 * scale, -745.0, 700.0)))
        disc = trace_hat * trace_hat - 4.0 * det_hat
        if disc < 0.0:
            # Complex pair: both moduli are sqrt(|det|).
            half = 0.5 * logdet
            return np.array([half, half])
        root = np.sqrt(disc)
        lead = trace_hat if trace_hat != 0.0 else 1.0
        big = 0.5 * (trace_hat + np.copysign(root, lead))
        if big == 0.0:
            return np.array([0.5 * logdet, 0.5 * logdet])
        log_big = scale + float(np.log(abs(big)))
        log_small = logdet - log_big
        return np.sort(np.array([log_small, log_big]))


def factored_product(jacs: np.ndarray, point: np.ndarray | None = None) -> CocycleProduct:
    """QR-factored product of an explicit (n, 2, 2) factor stack (first factor
    applied first); used for products along refined orbit sequences."""
    jacs = np.asarray(jacs, dtype=float)
    q0 = np.eye(jacs.shape[-1])
    q, factors = push_frame(jacs, q0)
    return CocycleProduct(
        point=np.zeros(jacs.shape[-1]) if point is None else np.asarray(point, dtype=float),
        steps=jacs.shape[0],
        q=q,
        r_factors=tuple(factors),
        frame=q0,
    )


def cocycle_product(
    system: MapSystem,
    x: np.ndarray,
    n: int,
    subspace: np.ndarray | None = None,
    direction: str = "forward",
) -> CocycleProduct:
    """QR-factored product of n Jacobians along the orbit of x.

    With ``subspace`` (a full-rank (2, r) basis) the product is restricted:
    its singular values are those of Df^n composed with an orthonormal basis
    of the subspace, measured in the ambient norm.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    x = system.wrap(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise ValueError("cocycle_product expects a single point")
    if subspace is None:
        frame = np.eye(2)
    else:
        frame = np.asarray(subspace, dtype=float)
        if frame.ndim != 2 or frame.shape[0] != 2:
            raise ValueError("subspace must be a (2, r) basis")
        sv = np.linalg.svd(frame, compute_uv=False)
        if sv[-1] < _RANK_TOL * max(1.0, sv[0]):
            raise RankDeficient("subspace basis is rank deficient")
    q0, _ = qr_frame(frame)
    jacs, _ = jacobians_along(system, x, n, direction)
    q, factors = push_frame(jacs, q0)
    return CocycleProduct(point=x, steps=n, q=q, r_factors=tuple(factors), frame=q0)


# ---------------------------------------------------------------------------
# Lyapunov spectrum
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LyapunovSpectrum:
    """Finite-horizon exponents, ascending, with cluster multiplicities."""

    exponents: np.ndarray
    multiplicities: tuple[int, ...]
    horizon: int

    @property
    def top(self) -> float:
        return float(self.exponents[-1])

    @property
    def bottom(self) -> float:
        return float(self.exponents[0])


def finite_time_exponents(
    system: MapSystem, x: np.ndarray, n: int, gap_tol: float = 0.05
) -> LyapunovSpectrum:
    """Exponents (1/n) log sigma_i(Df^n(x)), clustered at ``gap_tol``."""
    if n < 10:
        raise ValueError("horizon must be >= 10")
    product = cocycle_product(system, x, n)
    exps = product.log_singular_values() / n
    mults: list[int] = [1]
    for a, b in zip(exps[:-1], exps[1:]):
        if b - a < gap_tol:
            mults[-1] += 1
        else:
            mults.append(1)
    return LyapunovSpectrum(exponents=exps, multiplicities=tuple(mults), horizon=n)


# ---------------------------------------------------------------------------
# Oseledec splitting estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SplittingEstimate:
    """Numerically estimated stable/unstable bundles at a point (batched OK)."""

    point: np.ndarray
    stable_basis: np.ndarray
    unstable_basis: np.ndarray
    forward_horizon: int
    backward_horizon: int
    residual: np.ndarray


def _frame_estimate(jacs: np.ndarray, frame: np.ndarray) -> np.ndarray:
    q = frame
    for t in range(jacs.shape[0]):
        q, _ = qr_frame(jacs[t] @ q)
    return q


def _diagnose_residual_history(jacs: np.ndarray, frame: np.ndarray, m: int) -> bool:
    """True when the estimate still makes net progress near horizon m.

    Recomputes the last few horizon estimates; horizon h uses the trailing h
    factors of ``jacs`` (which holds m of them).
    """
    h_lo = max(1, m - 11)
    estimates = {h: _frame_estimate(jacs[m - h :], frame) for h in range(h_lo, m + 1)}
    residuals = [
        float(grassmann_distance(estimates[h], estimates[h - 1]))
        for h in range(h_lo + 1, m + 1)
    ]
    if not residuals or residuals[-1] <= _RESIDUAL_FLOOR:
        return True
    if len(residuals) < 4:
        return True
    # Net progress test: the running minimum must improve between the older
    # and the recent half of the history. Oscillating (elliptic) estimates
    # cycle through the same residuals and fail this; slow polynomial
    # convergence still passes.
    half = len(residuals) // 2
    old_min = min(residuals[:half])
    new_min = min(residuals[half:])
    return new_min < old_min * (1.0 - 1e-9)


def _flatten_batch(jacs: np.ndarray, m: int) -> np.ndarray:
    """View a (m, ..., 2, 2) factor stack as (m, B, 2, 2)."""
    return jacs.reshape((m, -1, 2, 2))


def estimate_splitting(system: MapSystem, x: np.ndarray, m: int) -> SplittingEstimate:
    """Power-iteration estimate of the stable/unstable splitting at x.

    The unstable basis is the orthonormalized image of a generic frame pushed
    m steps forward from f^{-m}(x); the stable basis comes from the same push
    under f^{-1} starting at f^{m}(x). The residual is the Grassmannian gap
    between the horizon-m and horizon-(m-1) estimates; when it stalls above
    floor for five consecutive horizons the point is flagged as degenerate.
    """
    if m < 10:
        raise ValueError("splitting horizon must be >= 10")
    x = system.wrap(np.asarray(x, dtype=float))
    dim = system.dimension
    r_unstable = dim - system.stable_index
    r_stable = system.stable_index
    frame_u = generic_frame(dim, r_unstable)
    frame_s = generic_frame(dim, r_stable)

    back_pts = orbit_points(system, x, 0, m)
    jacs_fwd = system.jacobian(back_pts[:-1])
    fwd_pts = orbit_points(system, x, m)
    # Df^{-1} at f^{t+1}(x) is inv(Df(f^t(x))); order factors from time m down.
    jacs_bwd = inv2(system.jacobian(fwd_pts[:-1]))[::-1]

    est_u = _frame_estimate(jacs_fwd, frame_u)
    est_u_prev = _frame_estimate(jacs_fwd[1:], frame_u)
    est_s = _frame_estimate(jacs_bwd, frame_s)
    est_s_prev = _frame_estimate(jacs_bwd[1:], frame_s)

    res_u = grassmann_distance(est_u, est_u_prev)
    res_s = grassmann_distance(est_s, est_s_prev)
    residual = np.maximum(res_u, res_s)

    resid_flat = np.reshape(residual, (-1,))
    if np.any(resid_flat > _RESIDUAL_FLOOR):
        jf = _flatten_batch(jacs_fwd, m)
        jb = _flatten_batch(jacs_bwd, m)
        for i in np.nonzero(resid_flat > _RESIDUAL_FLOOR)[0]:
            ok_u = _diagnose_residual_history(jf[:, i], frame_u, m)
            ok_s = _diagnose_residual_history(jb[:, i], frame_s, m)
            if not (ok_u and ok_s):
                raise DegenerateSplitting(
                    f"splitting residual stalled at {resid_flat[i]:.3e} "
                    f"for horizon {m} (non-hyperbolic point?)"
                )

    return SplittingEstimate(
        point=x,
        stable_basis=est_s,
        unstable_basis=est_u,
        forward_horizon=m,
        backward_horizon=m,
        residual=residual,
    )


# ---------------------------------------------------------------------------
# Restricted norms and domination
# ---------------------------------------------------------------------------


def _validated_frame(subspace: np.ndarray) -> np.ndarray:
    frame = np.asarray(subspace, dtype=float)
    if frame.ndim == 1:
        frame = frame[:, None]
    sv = np.linalg.svd(frame, compute_uv=False)
    if sv[-1] < _RANK_TOL * max(1.0, sv[0]):
        raise RankDeficient("subspace basis is rank deficient")
    q, _ = qr_frame(frame)
    return q


@dataclass(frozen=True)
class RestrictedCocycle:
    """Prefix data of Df^S restricted to a subspace, S = 1..n, in log scale."""

    log_norms: np.ndarray
    log_conorms: np.ndarray

    def log_norm(self, s: int) -> float:
        return float(self.log_norms[s - 1])

    def log_conorm(self, s: int) -> float:
        return float(self.log_conorms[s - 1])


def restricted_cocycle(
    system: MapSystem,
    x: np.ndarray,
    n: int,
    subspace: np.ndarray,
    direction: str = "forward",
) -> RestrictedCocycle:
    """Largest/smallest log singular value of every prefix of the restricted
    product; rank-1 subspaces reduce to a renormalized vector push."""
    if n < 1:
        raise ValueError("n must be >= 1")
    q0 = _validated_frame(subspace)
    jacs, _ = jacobians_along(system, system.wrap(np.asarray(x, dtype=float)), n, direction)
    if q0.shape[1] == 1:
        prefix, _ = push_vector_lognorms(jacs, q0[:, 0])
        return RestrictedCocycle(log_norms=prefix, log_conorms=prefix.copy())
    t_hat = np.eye(q0.shape[1])
    scale = 0.0
    logdet = 0.0
    q = q0
    log_norms = np.empty(n)
    log_conorms = np.empty(n)
    for t in range(n):
        q, r = qr_frame(jacs[t] @ q)
        t_hat = r @ t_hat
        m = float(np.max(np.abs(t_hat)))
        if m == 0.0:
            raise RankDeficient("restricted product vanished")
        t_hat /= m
        scale += np.log(m)
        logdet += float(np.sum(np.log(np.diagonal(r))))
        hi, _ = singular_values_2x2(t_hat)
        log_norms[t] = scale + np.log(hi)
        log_conorms[t] = logdet - log_norms[t]
    return RestrictedCocycle(log_norms=log_norms, log_conorms=log_conorms)


def restricted_norm(
    system: MapSystem, x: np.ndarray, n: int, subspace: np.ndarray
) -> float:
    """log ||Df^n(x) restricted to the subspace|| (largest singular value)."""
    return restricted_cocycle(system, x, n, subspace).log_norm(n)


def restricted_conorm(
    system: MapSystem, x: np.ndarray, n: int, subspace: np.ndarray
) -> float:
    """log m(Df^n(x) restricted to the subspace), m(A) = ||A^{-1}||^{-1}."""
    return restricted_cocycle(system, x, n, subspace).log_conorm(n)


# ---------------------------------------------------------------------------
# Per-point bundle factors
# ---------------------------------------------------------------------------
#
# Restricted norms over long windows are computed as sums of one-step factors
# along the invariant line bundles, re-estimated at every orbit point. For a
# line bundle the block norm factors exactly (the restriction is
# multiplicative), and the per-point estimates come from converged power
# iteration, so no step amplifies the error of a previous one. A single frame
# pushed forward many steps cannot do this: float rounding feeds the unstable
# direction, which swamps a contracting push after ~35/log(lam_u/lam_s) steps.


@dataclass(frozen=True)
class BundleFactors:
    """One-step log expansion factors along the estimated stable/unstable
    line bundles over the orbit window [t_min, t_max).

    stable[i]/unstable[i] is log ||Df(y_t) e(y_t)|| at t = t_min + i, with e
    the re-estimated unit bundle direction; directions are stored for
    t in [t_min, t_max]. Leading batch axes of the seed point are preserved
    after the time axis.
    """

    t_min: int
    t_max: int
    stable: np.ndarray
    unstable: np.ndarray
    stable_dirs: np.ndarray
    unstable_dirs: np.ndarray
    points: np.ndarray
    residual: np.ndarray

    def window(self, t_start: int, length: int, which: str) -> np.ndarray:
        """Sum of factors over [t_start, t_start + length), batched."""
        i = t_start - self.t_min
        if i < 0 or i + length > self.stable.shape[0]:
            raise ValueError("window outside precomputed factor range")
        seq = self.stable if which == "stable" else self.unstable
        return np.sum(seq[i : i + length], axis=0)


def _sweep_direction(jacs: np.ndarray, frame: np.ndarray, upto: int) -> np.ndarray:
    v = frame
    for t in range(upto):
        w = np.einsum("...ij,...j->...i", jacs[t], v)
        v = w / np.linalg.norm(w, axis=-1, keepdims=True)
    return v


def bundle_step_factors(
    system: MapSystem,
    x: np.ndarray,
    t_min: int,
    t_max: int,
    horizon: int = 20,
) -> BundleFactors:
    """Estimate invariant line bundles at every orbit point of the window and
    record the one-step log factors along them.

    The unstable direction at orbit time t comes from a forward power sweep
    started ``horizon`` steps before the window, the stable direction from the
    backward sweep started past its end; both carry at least ``horizon`` steps
    of burn-in at every reported point. Batched over leading axes of x.
    """
    if t_max <= t_min:
        raise ValueError("need t_max > t_min")
    if horizon < 10:
        raise ValueError("horizon must be >= 10")
    if system.dimension != 2 or system.stable_index != 1:
        raise ValueError("bundle factors are implemented for 2-d systems with 1-d bundles")
    x = system.wrap(np.asarray(x, dtype=float))
    n_back = max(horizon - t_min, 0)
    n_fwd = max(t_max + horizon, 0)
    pts = orbit_points(system, x, n_fwd, n_back)
    jacs = system.jacobian(pts[:-1])

    def idx(t: int) -> int:
        return t + n_back

    p_lo, p_hi = idx(t_min), idx(t_max)
    batch = x.shape[:-1]
    frame_u = np.broadcast_to(generic_frame(2, 1)[:, 0], batch + (2,)).copy()
    frame_s = np.broadcast_to(generic_frame(2, 1)[:, 0], batch + (2,)).copy()

    width = p_hi - p_lo + 1
    dirs_u = np.empty((width,) + batch + (2,), dtype=float)
    v = _sweep_direction(jacs, frame_u, p_lo)
    v_short = _sweep_direction(jacs[1:], frame_u, p_lo - 1)
    res_u = grassmann_distance(v[..., None], v_short[..., None])
    dirs_u[0] = v
    for t in range(p_lo, p_hi):
        w = np.einsum("...ij,...j->...i", jacs[t], v)
        v = w / np.linalg.norm(w, axis=-1, keepdims=True)
        dirs_u[t - p_lo + 1] = v

    dirs_s = np.empty((width,) + batch + (2,), dtype=float)
    inv_jacs = inv2(jacs)
    total = jacs.shape[0]
    v = frame_s
    for t in range(total - 1, p_hi - 1, -1):
        w = np.einsum("...ij,...j->...i", inv_jacs[t], v)
        v = w / np.linalg.norm(w, axis=-1, keepdims=True)
    v_short = frame_s
    for t in range(total - 2, p_hi - 1, -1):
        w = np.einsum("...ij,...j->...i", inv_jacs[t], v_short)
        v_short = w / np.linalg.norm(w, axis=-1, keepdims=True)
    res_s = grassmann_distance(v[..., None], v_short[..., None])
    dirs_s[width - 1] = v
    for t in range(p_hi - 1, p_lo - 1, -1):
        w = np.einsum("...ij,...j->...i", inv_jacs[t], v)
        v = w / np.linalg.norm(w, axis=-1, keepdims=True)
        dirs_s[t - p_lo] = v

    residual = np.maximum(res_u, res_s)
    resid_flat = np.reshape(residual, (-1,))
    if np.any(resid_flat > _RESIDUAL_FLOOR):
        jf = _flatten_batch(jacs[p_lo - horizon : p_lo], horizon)
        jb = _flatten_batch(inv_jacs[p_hi : p_hi + horizon][::-1], horizon)
        frame = generic_frame(2, 1)
        for i in np.nonzero(resid_flat > _RESIDUAL_FLOOR)[0]:
            ok_u = _diagnose_residual_history(jf[:, i], frame, horizon)
            ok_s = _diagnose_residual_history(jb[:, i], frame, horizon)
            if not (ok_u and ok_s):
                raise DegenerateSplitting(
                    f"bundle sweep residual stalled at {resid_flat[i]:.3e} "
                    "(non-hyperbolic orbit?)"
                )

    jac_win = jacs[p_lo:p_hi]
    push_s = np.einsum("t...ij,t...j->t...i", jac_win, dirs_s[:-1])
    push_u = np.einsum("t...ij,t...j->t...i", jac_win, dirs_u[:-1])
    return BundleFactors(
        t_min=t_min,
        t_max=t_max,
        stable=np.log(np.linalg.norm(push_s, axis=-1)),
        unstable=np.log(np.linalg.norm(push_u, axis=-1)),
        stable_dirs=dirs_s,
        unstable_dirs=dirs_u,
        points=pts[p_lo : p_hi + 1],
        residual=residual,
    )


def domination_margin(
    system: MapSystem,
    x: np.ndarray,
    e_subspace: np.ndarray,
    f_subspace: np.ndarray,
    s_min: int,
    s_max: int,
    splitting_horizon: int = 20,
) -> float:
    """Worst domination gap of the E-role bundle under the F-role bundle over
    block lengths S in [s_min, s_max].

    Returns min_S -(1/S) (log ||Df^S|_E|| - log m(Df^S|_F)); the splitting is
    (s_min, lambda)-dominated over the tested window iff the result >= 2 lambda.

    The supplied frames select which invariant line bundle plays each role
    (matched at x by subspace distance); the norms themselves are accumulated
    along per-point re-estimated bundles, which is the only float-stable way
    to follow a contracting restriction over long blocks.
    """
    if not 1 <= s_min <= s_max:
        raise ValueError("need 1 <= s_min <= s_max")
    x = system.wrap(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise ValueError("domination_margin expects a single point")
    factors = bundle_step_factors(system, x, 0, s_max, horizon=splitting_horizon)

    def role(frame: np.ndarray) -> str:
        q = _validated_frame(frame)
        d_s = grassmann_distance(q, factors.stable_dirs[0][:, None])
        d_u = grassmann_distance(q, factors.unstable_dirs[0][:, None])
        return "stable" if d_s <= d_u else "unstable"

    role_e, role_f = role(e_subspace), role(f_subspace)
    if role_e == role_f:
        raise ValueError("E and F must select complementary bundles")
    seq_e = factors.stable if role_e == "stable" else factors.unstable
    seq_f = factors.stable if role_f == "stable" else factors.unstable
    prefix_e = np.cumsum(seq_e)
    prefix_f = np.cumsum(seq_f)
    s_values = np.arange(s_min, s_max + 1)
    gaps = prefix_e[s_min - 1 :] - prefix_f[s_min - 1 :]
    return float(np.min(-gaps / s_values))


def birkhoff_block_average(
    system: MapSystem,
    x: np.ndarray,
    block: int,
    blocks: int,
    subspace_selector: str,
    splitting_horizon: int = 20,
) -> float:
    """Block-averaged restricted log norms along the orbit.

    (1 / (blocks * block)) sum over j of log ||Df^block|_E(f^{j*block}(x))||
    with E the stable bundle re-estimated along the orbit (selector "stable"),
    or the conorm on the unstable bundle (selector "unstable"). For line
    bundles the block norm factors exactly into the per-point steps summed
    here.
    """
    if block < 1 or blocks < 1:
        raise ValueError("block and blocks must be >= 1")
    if subspace_selector not in ("stable", "unstable"):
        raise ValueError("subspace_selector must be 'stable' or 'unstable'")
    x = system.wrap(np.asarray(x, dtype=float))
    factors = bundle_step_factors(system, x, 0, block * blocks, horizon=splitting_horizon)
    seq = factors.stable if subspace_selector == "stable" else factors.unstable
    return float(np.mean(seq))
