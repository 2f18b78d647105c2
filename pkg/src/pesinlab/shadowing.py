"""Pseudo-orbits, Newton multiple-shooting refinement, orbit closing and
rate fitting.

A pseudo-orbit is a chain of true orbit segments with small jumps at the
seams. Refinement solves the orbit equations f(y_j) = y_{j+1} over the whole
window at once: each Newton step solves the block-bidiagonal linear system
exactly (sparse LU), with periodic windows closed by a corner block and free
windows closed by the minimum-norm correction of the underdetermined system.
The refined orbit is verified a posteriori against the exponential deviation
bound; the verifier, not the solver, is what certifies a result.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu
from scipy.spatial import cKDTree

from ._util import least_squares_line
from .cocycle import factored_product
from .errors import (
    IllConditioned,
    InsufficientData,
    NewtonDiverged,
    NoRecurrence,
    PoolExhausted,
)
from .systems import MapSystem, orbit_points

_PIVOT_FLOOR = 1e-14
_DEVIATION_FLOOR = 1e-15
_RECURRENCE_BUDGET = 10**6


# ---------------------------------------------------------------------------
# Pseudo-orbits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PseudoOrbit:
    """Finite chain of orbit segments {(x_i, n_i)} with recorded seam jumps.

    ``jump_sizes[i]`` is the distance from f^{n_i}(x_i) to the next segment
    start; periodic chains include the wrap jump back to x_0 as the last
    entry. ``delta`` is the jump bound recorded at construction.
    """

    system: MapSystem
    segments: tuple[tuple[np.ndarray, int], ...]
    jump_sizes: np.ndarray
    delta: float
    periodic: bool

    @property
    def period(self) -> int | None:
        return len(self.segments) if self.periodic else None

    def offsets(self) -> list[int]:
        """Start index c_i of each segment in the concatenated window:
        c_0 = 0 and c_i is the sum of the preceding segment lengths."""
        offs = [0]
        for _, n in self.segments[:-1]:
            offs.append(offs[-1] + n)
        return offs

    def total_length(self) -> int:
        return sum(n for _, n in self.segments)

    def seed_points(self) -> np.ndarray:
        """Concatenated pseudo-orbit points; the free (non-periodic) window
        carries the final endpoint as an extra row."""
        rows = []
        for x, n in self.segments:
            rows.append(orbit_points(self.system, x, n)[:-1])
        pts = np.concatenate(rows, axis=0)
        if not self.periodic:
            last_x, last_n = self.segments[-1]
            end = orbit_points(self.system, last_x, last_n)[-1]
            pts = np.concatenate([pts, end[None]], axis=0)
        return pts


def pseudo_orbit(
    system: MapSystem,
    segments,
    periodic: bool = False,
    delta: float | None = None,
) -> PseudoOrbit:
    """Assemble a pseudo-orbit from (point, length) pairs, measuring jumps.

    With ``delta`` given, jumps at or above it are rejected; otherwise the
    recorded bound is set just above the largest measured jump.
    """
    segs = tuple(
        (system.wrap(np.asarray(x, dtype=float)), int(n)) for x, n in segments
    )
    if not segs:
        raise ValueError("pseudo-orbit needs at least one segment")
    if any(n < 1 for _, n in segs):
        raise ValueError("segment lengths must be positive")
    jumps = []
    for i in range(len(segs) - 1):
        end = orbit_points(system, segs[i][0], segs[i][1])[-1]
        jumps.append(float(system.distance(end, segs[i + 1][0])))
    if periodic:
        end = orbit_points(system, segs[-1][0], segs[-1][1])[-1]
        jumps.append(float(system.distance(end, segs[0][0])))
    jump_sizes = np.asarray(jumps, dtype=float)
    if delta is None:
        biggest = float(jump_sizes.max()) if jump_sizes.size else 0.0
        delta = biggest * (1.0 + 1e-9) + 1e-15
    elif jump_sizes.size and float(jump_sizes.max()) >= delta:
        raise ValueError(
            f"segment jump {float(jump_sizes.max()):.3e} exceeds delta={delta:.3e}"
        )
    return PseudoOrbit(
        system=system,
        segments=segs,
        jump_sizes=jump_sizes,
        delta=float(delta),
        periodic=periodic,
    )


def build_recurrent_pseudo_orbit(
    system: MapSystem,
    x: np.ndarray,
    block_test,
    delta: float,
    min_segment_length: int,
    max_segments: int,
    pool: np.ndarray | None = None,
    periodic: bool = False,
    budget: int = _RECURRENCE_BUDGET,
) -> PseudoOrbit:
    """Cut the forward orbit of x into segments at accepted return times.

    A cut happens at the first time t >= min_segment_length where
    ``block_test`` accepts the orbit point and a restart target is available:
    the point itself (no pool, jump 0), a pool point within ``delta`` (the
    jumps then are genuine), or, for the closing segment of a periodic chain,
    x itself within ``delta``.
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    if min_segment_length < 1:
        raise ValueError("min_segment_length must be >= 1")
    if max_segments < 1:
        raise ValueError("max_segments must be >= 1")
    x0 = system.wrap(np.asarray(x, dtype=float))
    if not block_test(x0):
        raise ValueError("block_test must accept the starting point")

    tree = None
    pool_pts = None
    if pool is not None:
        pool_pts = system.wrap(np.asarray(pool, dtype=float))
        boxsize = 1.0 if system.domain == "torus" else None
        tree = cKDTree(pool_pts, boxsize=boxsize)

    segments: list[tuple[np.ndarray, int]] = []
    current = x0
    steps_left = int(budget)
    saw_return = False
    for seg_index in range(max_segments):
        closing = periodic and seg_index == max_segments - 1
        y = current
        t = 0
        next_start = None
        while True:
            y = system.forward(y)
            system._check_escape(y, t + 1)
            t += 1
            steps_left -= 1
            if steps_left <= 0:
                if saw_return and tree is not None:
                    raise PoolExhausted(
                        f"no pool point within delta={delta:.3e} of any accepted "
                        f"return in {budget} iterates"
                    )
                raise NoRecurrence(
                    f"no acceptable return within {budget} iterates"
                )
            if t < min_segment_length or not block_test(y):
                continue
            saw_return = True
            if closing:
                if system.distance(y, x0) < delta:
                    break
            elif tree is None:
                next_start = y
                break
            else:
                dist, idx = tree.query(y, k=1)
                if dist < delta:
                    next_start = pool_pts[idx]
                    break
        segments.append((current, t))
        if closing:
            break
        current = next_start
    return pseudo_orbit(system, segments, periodic=periodic, delta=delta)


# ---------------------------------------------------------------------------
# Newton refinement
# ---------------------------------------------------------------------------


@dataclass
class ShadowResult:
    """Refined orbit with per-index deviations from the pseudo-orbit.

    ``orbit`` holds N points for a periodic window (wrap implied) and N+1 for
    a free window. ``deviations[i][j]`` compares the refined orbit against
    f^j(x_i) for j = 0..n_i. ``eta``/``theta`` are fitted from the deviation
    profile when enough positive deviations exist.
    """

    orbit: np.ndarray
    orbit_residual: float
    deviations: list[np.ndarray] = field(default_factory=list)
    eta: float = 0.0
    theta: float = 0.0
    newton_iterations: int = 0
    converged: bool = False
    periodic: bool = False
    pseudo: PseudoOrbit | None = None

    def deviation_samples(self) -> list[tuple[int, float]]:
        """(separation, deviation) pairs with separation min(j, n_i - j)."""
        samples = []
        for (_, n), devs in zip(self.pseudo.segments, self.deviations):
            for j, d in enumerate(devs):
                samples.append((min(j, n - j), float(d)))
        return samples

    @property
    def max_deviation(self) -> float:
        return max(float(np.max(d)) for d in self.deviations)


_factor_cache: dict[tuple, object] = {}


def _orbit_matrix(jacs: np.ndarray, periodic: bool) -> sparse.csc_matrix:
    """Jacobian of the orbit equations: rows j hold [Df(y_j), -I] at block
    columns (j, j+1), wrapping for periodic windows."""
    n = jacs.shape[0]
    cols_of_identity = (np.arange(n) + 1) % n if periodic else np.arange(n) + 1
    row_idx = []
    col_idx = []
    data = []
    rows = 2 * np.arange(n)
    for a in range(2):
        for b in range(2):
            row_idx.append(rows + a)
            col_idx.append(2 * np.arange(n) + b)
            data.append(jacs[:, a, b])
    for a in range(2):
        row_idx.append(rows + a)
        col_idx.append(2 * cols_of_identity + a)
        data.append(np.full(n, -1.0))
    cols_total = 2 * n if periodic else 2 * (n + 1)
    return sparse.csc_matrix(
        (np.concatenate(data), (np.concatenate(row_idx), np.concatenate(col_idx))),
        shape=(2 * n, cols_total),
    )


def _checked_splu(matrix: sparse.csc_matrix):
    try:
        lu = splu(matrix)
    except RuntimeError as exc:  # SuperLU reports exact singularity this way
        raise IllConditioned(f"orbit linear system is singular: {exc}") from exc
    pivots = np.abs(lu.U.diagonal())
    if pivots.min() < _PIVOT_FLOOR:
        raise IllConditioned(
            f"orbit linear system pivot {pivots.min():.3e} below {_PIVOT_FLOOR:.0e} "
            "(non-hyperbolic window?)"
        )
    return lu


def _newton_step(system: MapSystem, jacs: np.ndarray, residual: np.ndarray, periodic: bool) -> np.ndarray:
    """Solve for the orbit correction. Periodic windows give a square system;
    free windows take the minimum-norm solution via the normal equations of
    the underdetermined banded system (well-posed under hyperbolicity,
    monitored through the pivot floor)."""
    n = jacs.shape[0]
    cache_key = None
    if getattr(system, "constant_jacobian", False):
        cache_key = (id(system), n, periodic)
    jmat = _orbit_matrix(jacs, periodic)
    rhs = -residual.reshape(-1)
    if periodic:
        lu = _factor_cache.get(cache_key) if cache_key else None
        if lu is None:
            lu = _checked_splu(jmat)
            if cache_key:
                if len(_factor_cache) > 64:
                    _factor_cache.clear()
                _factor_cache[cache_key] = lu
        delta = lu.solve(rhs)
        return delta.reshape(n, 2)
    normal_key = ("normal",) + cache_key if cache_key else None
    lu = _factor_cache.get(normal_key) if normal_key else None
    if lu is None:
        lu = _checked_splu((jmat @ jmat.T).tocsc())
        if normal_key:
            if len(_factor_cache) > 64:
                _factor_cache.clear()
            _factor_cache[normal_key] = lu
    w = lu.solve(rhs)
    delta = jmat.T @ w
    return delta.reshape(n + 1, 2)


def _orbit_residual(system: MapSystem, pts: np.ndarray, periodic: bool) -> np.ndarray:
    if periodic:
        nxt = np.roll(pts, -1, axis=0)
        return system.displacement(system.forward(pts), nxt)
    return system.displacement(system.forward(pts[:-1]), pts[1:])


def newton_shadow(
    system: MapSystem,
    pseudo: PseudoOrbit,
    tol: float = 1e-12,
    max_iter: int = 25,
) -> ShadowResult:
    """Refine a pseudo-orbit into a true orbit by damped Newton iteration.

    Seeded with the concatenated pseudo-orbit; success when the largest orbit
    equation residual drops below ``tol``. Steps are damped by halving until
    the residual decreases (30 halvings max); a damped update larger than the
    trust radius (0.25 on the torus) raises NewtonDiverged carrying the best
    iterate.
    """
    total = pseudo.total_length()
    if total > 10**5:
        raise ValueError("pseudo-orbit window exceeds 1e5 points")
    y = pseudo.seed_points().copy()
    periodic = pseudo.periodic
    step_limit = 0.25 if system.domain == "torus" else 10.0

    def residual_norm(res: np.ndarray) -> float:
        return float(np.max(np.linalg.norm(res, axis=-1)))

    res = _orbit_residual(system, y, periodic)
    best = (residual_norm(res), y.copy(), 0)
    iterations = 0
    converged = residual_norm(res) < tol
    while not converged and iterations < max_iter:
        jacs = system.jacobian(y if periodic else y[:-1])
        delta = _newton_step(system, jacs, res, periodic)
        current = residual_norm(res)
        scale = 1.0
        for _ in range(31):
            trial = system.wrap(y + scale * delta)
            trial_res = _orbit_residual(system, trial, periodic)
            if residual_norm(trial_res) < current:
                break
            scale *= 0.5
        else:
            raise NewtonDiverged(
                "no residual decrease after 30 step halvings",
                result=_finish(system, pseudo, best[1], best[2], converged=False),
            )
        step_size = float(np.max(np.linalg.norm(scale * delta, axis=-1)))
        if step_size > step_limit:
            raise NewtonDiverged(
                f"update step {step_size:.3f} exceeds trust radius {step_limit}",
                result=_finish(system, pseudo, best[1], best[2], converged=False),
            )
        y = trial
        res = trial_res
        iterations += 1
        if residual_norm(res) < best[0]:
            best = (residual_norm(res), y.copy(), iterations)
        converged = residual_norm(res) < tol
    if not converged:
        raise NewtonDiverged(
            f"residual {residual_norm(res):.3e} above tol after {max_iter} iterations",
            result=_finish(system, pseudo, best[1], best[2], converged=False),
        )
    return _finish(system, pseudo, y, iterations, converged=True)


def _finish(
    system: MapSystem,
    pseudo: PseudoOrbit,
    y: np.ndarray,
    iterations: int,
    converged: bool,
) -> ShadowResult:
    res = _orbit_residual(system, y, pseudo.periodic)
    total = pseudo.total_length()
    deviations = []
    for (x_i, n_i), c_i in zip(pseudo.segments, pseudo.offsets()):
        seg = orbit_points(system, x_i, n_i)
        idx = np.arange(c_i, c_i + n_i + 1)
        if pseudo.periodic:
            idx = idx % total
        deviations.append(np.asarray(system.distance(y[idx], seg), dtype=float))
    result = ShadowResult(
        orbit=y,
        orbit_residual=float(np.max(np.linalg.norm(res, axis=-1))),
        deviations=deviations,
        newton_iterations=iterations,
        converged=converged,
        periodic=pseudo.periodic,
        pseudo=pseudo,
    )
    try:
        fit = fit_rates(result.deviation_samples())
        result.theta = fit.theta
        result.eta = fit.eta
    except InsufficientData:
        result.theta = 0.0
        result.eta = result.max_deviation
    return result


# ---------------------------------------------------------------------------
# Exponential bound verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShadowVerification:
    passed: bool
    worst_margin: float
    margins: list[np.ndarray]


def verify_exponential_shadowing(
    system: MapSystem,
    result: ShadowResult,
    eta: float,
    theta: float,
) -> ShadowVerification:
    """Check every deviation against eta * exp(-min(j, n_i - j) * theta).

    Positive margins certify the bound; theta = 0 reduces to plain
    eta-shadowing.
    """
    margins = []
    worst = np.inf
    for (_, n_i), devs in zip(result.pseudo.segments, result.deviations):
        j = np.arange(n_i + 1)
        bound = eta * np.exp(-np.minimum(j, n_i - j) * theta)
        m = bound - devs
        margins.append(m)
        worst = min(worst, float(np.min(m)))
    return ShadowVerification(passed=worst > 0.0, worst_margin=worst, margins=margins)


# ---------------------------------------------------------------------------
# Orbit closing and periodic censuses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PeriodicPoint:
    """Periodic point with Floquet data and the closing deviation profile."""

    z: np.ndarray
    period: int
    floquet_log_moduli: np.ndarray
    hyperbolicity_margin: float
    closing_deviations: np.ndarray
    residual: float
    newton_iterations: int

    @property
    def hyperbolic(self) -> bool:
        return self.hyperbolicity_margin > 1e-6


def periodic_point_at(
    system: MapSystem,
    z: np.ndarray,
    n: int,
    tol: float = 1e-10,
) -> PeriodicPoint:
    """Package an already-periodic point (residual below tol) with its
    Floquet data; handy for exact fixed points that need no Newton refinement."""
    if n < 1:
        raise ValueError("period must be >= 1")
    z = system.wrap(np.asarray(z, dtype=float))
    pts = orbit_points(system, z, n)
    residual = float(system.distance(pts[-1], z))
    if residual >= tol:
        raise ValueError(f"point is not {n}-periodic: residual {residual:.3e}")
    jacs = system.jacobian(pts[:-1])
    product = factored_product(jacs, point=z)
    moduli = product.eigenvalue_log_moduli()
    return PeriodicPoint(
        z=z,
        period=n,
        floquet_log_moduli=moduli,
        hyperbolicity_margin=float(np.min(np.abs(moduli))),
        closing_deviations=np.zeros(n),
        residual=residual,
        newton_iterations=0,
    )


def close_orbit(
    system: MapSystem,
    x: np.ndarray,
    n: int,
    tol: float = 1e-12,
    max_iter: int = 25,
) -> PeriodicPoint:
    """Refine the orbit segment {x, n} into a genuine period-n point.

    Intended for nearly recurrent segments (distance(x, f^n(x)) small),
    though the solver runs regardless. Floquet log-moduli come from the
    factored derivative product along the refined cycle; a margin at or below
    1e-6 marks the point as non-hyperbolic (data, not an error).
    """
    if n < 2:
        raise ValueError("period must be >= 2")
    return _close_orbit_impl(system, x, n, tol, max_iter)


def _close_orbit_impl(
    system: MapSystem,
    x: np.ndarray,
    n: int,
    tol: float = 1e-12,
    max_iter: int = 25,
) -> PeriodicPoint:
    # Fixed-point searches (n = 1) reuse the same machinery; the public
    # close_orbit keeps the recurrent-segment contract of n >= 2.
    pseudo = pseudo_orbit(system, [(x, n)], periodic=True)
    result = newton_shadow(system, pseudo, tol=tol, max_iter=max_iter)
    jacs = system.jacobian(result.orbit)
    product = factored_product(jacs, point=result.orbit[0])
    moduli = product.eigenvalue_log_moduli()
    margin = float(np.min(np.abs(moduli)))
    return PeriodicPoint(
        z=result.orbit[0],
        period=n,
        floquet_log_moduli=moduli,
        hyperbolicity_margin=margin,
        closing_deviations=result.deviations[0][:-1],
        residual=result.orbit_residual,
        newton_iterations=result.newton_iterations,
    )


def periodic_census(
    system: MapSystem,
    n: int,
    grid_side: int,
    tol: float = 1e-10,
    max_iter: int = 25,
    dedup_radius: float = 1e-6,
) -> list[PeriodicPoint]:
    """Sweep close_orbit over a grid of seeds and deduplicate the results.

    Returns one representative per distinct point z with f^n(z) = z found by
    the sweep (period dividing n), merged at ``dedup_radius``.
    """
    if system.domain != "torus":
        raise ValueError("census sweeps are implemented for torus systems")
    if n < 1:
        raise ValueError("period must be >= 1")
    axis = (np.arange(grid_side) + 0.5) / grid_side
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    seeds = np.stack([gx.ravel(), gy.ravel()], axis=-1)
    found: list[PeriodicPoint] = []
    points = []
    for seed in seeds:
        try:
            p = _close_orbit_impl(system, seed, n, tol=tol, max_iter=max_iter)
        except (NewtonDiverged, IllConditioned):
            continue
        found.append(p)
        points.append(p.z)
    if not found:
        return []
    pts = np.asarray(points)
    tree = cKDTree(pts, boxsize=1.0 if system.domain == "torus" else None)
    pairs = tree.query_pairs(r=dedup_radius, output_type="ndarray")
    parent = np.arange(len(found))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in pairs:
        ra, rb = find(int(a)), find(int(b))
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    representatives = sorted({find(i) for i in range(len(found))})
    return [found[i] for i in representatives]


def find_recurrences(
    system: MapSystem,
    x: np.ndarray,
    n_min: int,
    n_max: int,
    beta: float,
    max_events: int,
    burn_in: int = 100,
    budget: int = 200_000,
) -> list[tuple[np.ndarray, int]]:
    """Collect (point, n) recurrence events with distance(x_t, f^n(x_t)) < beta
    and n in [n_min, n_max], scanning a single forward orbit.

    Events are non-overlapping: after a hit at time t with return time n the
    scan resumes at t + n.
    """
    if not 2 <= n_min <= n_max:
        raise ValueError("need 2 <= n_min <= n_max")
    pts = orbit_points(system, x, burn_in + budget + n_max)[burn_in:]
    events: list[tuple[np.ndarray, int]] = []
    t = 0
    limit = pts.shape[0] - n_max - 1
    while t < limit and len(events) < max_events:
        window = pts[t + n_min : t + n_max + 1]
        dists = system.distance(pts[t], window)
        hits = np.nonzero(dists < beta)[0]
        if hits.size:
            n = n_min + int(hits[0])
            events.append((pts[t], n))
            t += n
        else:
            t += 1
    return events


def single_jump_pseudo_orbit(
    system: MapSystem,
    x: np.ndarray,
    piece: int,
    pieces: int,
    delta: float,
    tol: float = 1e-12,
) -> PseudoOrbit:
    """Periodic pseudo-orbit whose seam jumps are one controlled delta plus
    solver-drift dust.

    A period-(piece*pieces) cycle is Newton-refined first and cut into
    ``pieces`` true segments; one segment start is then displaced by delta
    along the estimated stable direction. Displacing along the stable
    direction keeps the downstream seam at lambda_s^piece * delta, and short
    pieces keep the float drift of recomputed segments far below delta, so a
    single dominant jump is all that remains. (A long float orbit on an
    expansive map cannot close on its own, which rules out the naive
    one-segment construction.)
    """
    from .cocycle import estimate_splitting

    if pieces < 2:
        raise ValueError("need at least 2 pieces to place a seam jump")
    n = piece * pieces
    # Seed the cycle from a near-recurrence so the closing residual starts
    # inside the Newton trust radius; a generic point's n-step closing defect
    # is order one and the solve would be rejected.
    seed = system.wrap(np.asarray(x, dtype=float))
    for beta in (0.02, 0.05, 0.1, 0.2):
        events = find_recurrences(system, seed, n, n, beta, max_events=1, burn_in=0)
        if events:
            seed = events[0][0]
            break
    cycle = newton_shadow(
        system, pseudo_orbit(system, [(seed, n)], periodic=True), tol=tol
    )
    y = cycle.orbit
    e_s = estimate_splitting(system, y[piece], 20).stable_basis[:, 0]
    starts = [y[k * piece] for k in range(pieces)]
    starts[1] = system.wrap(starts[1] + delta * e_s)
    return pseudo_orbit(system, [(s, piece) for s in starts], periodic=True)


# ---------------------------------------------------------------------------
# Rate fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RateFit:
    theta: float
    eta: float
    r2: float
    samples: int


@dataclass(frozen=True)
class LipschitzFit:
    constant: float
    r2: float
    samples: int


def fit_rates(samples) -> RateFit:
    """Least-squares fit of log deviation against separation.

    Deviations at or below the floor (1e-15) are excluded; at least 5 usable
    samples are required.
    """
    pairs = [(float(s), float(d)) for s, d in samples if d > _DEVIATION_FLOOR]
    if len(pairs) < 5:
        raise InsufficientData(
            f"rate fit needs >= 5 positive-deviation samples, got {len(pairs)}"
        )
    sep = np.array([p[0] for p in pairs])
    logd = np.log(np.array([p[1] for p in pairs]))
    slope, intercept, r2 = least_squares_line(sep, logd)
    return RateFit(theta=-slope, eta=float(np.exp(intercept)), r2=r2, samples=len(pairs))


def fit_lipschitz(samples) -> LipschitzFit:
    """Zero-intercept least squares of max deviation against jump size."""
    pairs = [(float(d), float(m)) for d, m in samples if m > _DEVIATION_FLOOR]
    if len(pairs) < 2:
        raise InsufficientData(
            f"lipschitz fit needs >= 2 positive samples, got {len(pairs)}"
        )
    delta = np.array([p[0] for p in pairs])
    dev = np.array([p[1] for p in pairs])
    constant = float(np.sum(delta * dev) / np.sum(delta * delta))
    resid = dev - constant * delta
    sst = float(np.sum((dev - dev.mean()) ** 2))
    r2 = 1.0 if sst == 0.0 else 1.0 - float(np.sum(resid**2)) / sst
    return LipschitzFit(constant=constant, r2=r2, samples=len(pairs))
