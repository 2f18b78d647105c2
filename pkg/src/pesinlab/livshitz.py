"""Coboundary analysis: periodic obstruction sums, transfer-function
reconstruction along an orbit and near-return consistency certificates.

An observable phi is a coboundary when phi = g(f(x)) - g(x) for some
continuous g. Vanishing sums over every periodic orbit are the necessary
condition; the candidate transfer function is reconstructed as running
Birkhoff sums along one long orbit and certified through the spread of its
values over near-returns (a continuous extension exists only when that
spread vanishes with the return radius).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from ._util import least_squares_line
from .errors import InsufficientData, NoPairs
from .shadowing import PeriodicPoint, periodic_census
from .systems import MapSystem, orbit_points

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Observable:
    """Named real-valued function of a point, batched over leading axes.

    ``holder`` optionally declares a modulus bound (C, kappa) with
    |phi(x) - phi(y)| <= C d(x, y)^kappa.
    """

    name: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    holder: tuple[float, float] | None = None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.evaluator(np.asarray(x, dtype=float))


def coboundary_observable(system: MapSystem, g: Observable) -> Observable:
    """The coboundary g o f - g; its modulus constant follows from g's and
    the derivative bound of the map."""
    holder = None
    if g.holder is not None:
        c_g, kappa = g.holder
        holder = (c_g * (np.exp(kappa * system.derivative_bound) + 1.0), kappa)
    return Observable(
        name=f"cb_{g.name}",
        evaluator=lambda x: g.evaluator(system.forward(x)) - g.evaluator(x),
        holder=holder,
    )


def generator_library() -> list[Observable]:
    """Trigonometric transfer-function generators, all normalized to
    Lipschitz constant 2 pi."""
    root2 = np.sqrt(2.0)
    return [
        Observable("sin_x1", lambda x: np.sin(TWO_PI * x[..., 0]), (TWO_PI, 1.0)),
        Observable("cos_x2", lambda x: np.cos(TWO_PI * x[..., 1]), (TWO_PI, 1.0)),
        Observable(
            "sin_sum",
            lambda x: np.sin(TWO_PI * (x[..., 0] + x[..., 1])) / root2,
            (TWO_PI, 1.0),
        ),
        Observable(
            "cos_sin",
            lambda x: np.cos(TWO_PI * x[..., 0]) * np.sin(TWO_PI * x[..., 1]),
            (TWO_PI, 1.0),
        ),
        Observable(
            "sin2_x1", lambda x: 0.5 * np.sin(2 * TWO_PI * x[..., 0]), (TWO_PI, 1.0)
        ),
    ]


def builtin_observables(system: MapSystem) -> dict[str, Observable]:
    """Named observables for experiments: five coboundaries from the
    generator library plus two non-coboundary probes."""
    out: dict[str, Observable] = {}
    for g in generator_library():
        cb = coboundary_observable(system, g)
        out[cb.name] = cb
    out["sin_x1"] = Observable(
        "sin_x1", lambda x: np.sin(TWO_PI * x[..., 0]), (TWO_PI, 1.0)
    )
    out["x1_centered"] = Observable("x1_centered", lambda x: x[..., 0] - 0.5, None)
    return out


# ---------------------------------------------------------------------------
# Obstruction sums
# ---------------------------------------------------------------------------


def periodic_sum(system: MapSystem, phi: Observable, p: PeriodicPoint) -> float:
    """Sum of phi over one period of a verified periodic point."""
    if p.residual >= 1e-10:
        raise ValueError(
            f"periodic point residual {p.residual:.3e} too large for an obstruction sum"
        )
    pts = orbit_points(system, p.z, p.period - 1) if p.period > 1 else p.z[None]
    return float(np.sum(phi(pts)))


@dataclass(frozen=True)
class ObstructionScan:
    """Per-orbit obstruction sums up to a maximal period."""

    items: list[tuple[PeriodicPoint, float]]
    complete: bool

    def worst(self) -> float:
        """Largest |sum| / period over the scanned orbits."""
        if not self.items:
            return 0.0
        return max(abs(s) / p.period for p, s in self.items)

    def all_zero(self, tol_per_period: float = 1e-9) -> bool:
        return all(abs(s) <= tol_per_period * p.period for p, s in self.items)


def obstruction_scan_many(
    system: MapSystem,
    phis: list[Observable],
    max_period: int,
    grid_side: int | None = None,
    censuses: dict[int, list[PeriodicPoint]] | None = None,
) -> dict[str, ObstructionScan]:
    """Obstruction scans for several observables sharing one census sweep.

    Precomputed per-period censuses can be passed to avoid repeating the
    sweep across scans.
    """
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    per_phi: dict[str, list[tuple[PeriodicPoint, float]]] = {p.name: [] for p in phis}
    claimed: list[np.ndarray] = []
    complete = True
    for n in range(1, max_period + 1):
        side = grid_side
        if side is None:
            growth = np.exp(0.5 * n * min(system.derivative_bound, 1.1))
            side = int(np.ceil(3.0 * growth)) + 4
        try:
            if censuses is not None and n in censuses:
                found = censuses[n]
            else:
                found = periodic_census(system, n, grid_side=side)
        except Exception:
            complete = False
            continue
        for p in found:
            orbit = orbit_points(system, p.z, p.period)[:-1]
            if claimed and np.min(
                system.distance(np.asarray(claimed)[:, None, :], orbit[None, :, :])
            ) < 1e-6:
                continue
            claimed.extend(list(orbit))
            for phi in phis:
                per_phi[phi.name].append((p, periodic_sum(system, phi, p)))
    return {
        name: ObstructionScan(items=items, complete=complete)
        for name, items in per_phi.items()
    }


def obstruction_scan(
    system: MapSystem,
    phi: Observable,
    max_period: int,
    grid_side: int | None = None,
) -> ObstructionScan:
    """Periodic sums of phi over all orbits found by censuses up to
    ``max_period``, one entry per orbit (smallest period representation).

    All-zero sums (within 1e-9 per period step) are the necessary coboundary
    condition. Census failures mark the scan incomplete instead of raising.
    """
    return obstruction_scan_many(system, [phi], max_period, grid_side)[phi.name]


# ---------------------------------------------------------------------------
# Transfer function reconstruction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransferTable:
    """Sampled transfer function along one orbit: psi[n] is the Birkhoff sum
    of phi over the first n steps (psi[0] = 0)."""

    system: MapSystem
    observable: Observable
    base: np.ndarray
    points: np.ndarray
    psi: np.ndarray

    def __len__(self) -> int:
        return int(self.psi.shape[0])


def reconstruct_transfer(
    system: MapSystem, phi: Observable, x: np.ndarray, n_steps: int
) -> TransferTable:
    """Running Birkhoff sums of phi along the orbit of x.

    Kahan-compensated so 1e5-step tables keep residual signals at the 1e-12
    scale.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    x = system.wrap(np.asarray(x, dtype=float))
    pts = orbit_points(system, x, n_steps)
    values = phi(pts[:-1])
    psi = np.empty(n_steps + 1)
    psi[0] = 0.0
    total = 0.0
    carry = 0.0
    for n in range(n_steps):
        term = float(values[n]) - carry
        fresh = total + term
        carry = (fresh - total) - term
        total = fresh
        psi[n + 1] = total
    return TransferTable(system=system, observable=phi, base=x, points=pts, psi=psi)


def _near_return_pairs(table: TransferTable, radius: float):
    boxsize = 1.0 if table.system.domain == "torus" else None
    tree = cKDTree(table.points, boxsize=boxsize)
    pairs = tree.query_pairs(r=radius, output_type="ndarray")
    return pairs


def coboundary_residual(
    system: MapSystem, phi: Observable, table: TransferTable, radius: float
) -> float:
    """Largest spread of psi over orbit near-returns within ``radius``.

    The defining identity holds on the orbit by construction; what certifies
    a continuous transfer function is this near-return consistency: for a
    genuine coboundary the spread is bounded by the generator's modulus at
    ``radius``, while a non-coboundary keeps a positive floor as the radius
    shrinks.
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    pairs = _near_return_pairs(table, radius)
    if pairs.shape[0] == 0:
        raise NoPairs(
            f"no orbit near-returns within radius {radius:g}; extend the table"
        )
    spread = np.abs(table.psi[pairs[:, 0]] - table.psi[pairs[:, 1]])
    return float(np.max(spread))


@dataclass(frozen=True)
class HolderFit:
    constant: float
    exponent: float
    r2: float
    degenerate: bool


def holder_estimate(table: TransferTable, radius_grid) -> HolderFit:
    """Log-log fit of the near-return psi spread against the return radius.

    Radii without pairs are skipped; fewer than 3 usable radii raise
    InsufficientData. All-zero spreads report a degenerate fit.
    """
    radii = sorted(float(r) for r in radius_grid)
    if not radii:
        raise InsufficientData("empty radius grid")
    pairs = _near_return_pairs(table, max(radii))
    if pairs.shape[0] == 0:
        raise InsufficientData("no near-return pairs at the largest radius")
    d = table.system.distance(table.points[pairs[:, 0]], table.points[pairs[:, 1]])
    spread = np.abs(table.psi[pairs[:, 0]] - table.psi[pairs[:, 1]])
    discrepancies = []
    used_radii = []
    for r in radii:
        mask = d < r
        if not np.any(mask):
            continue
        used_radii.append(r)
        discrepancies.append(float(np.max(spread[mask])))
    if len(used_radii) < 3:
        raise InsufficientData(
            f"near-return pairs available at only {len(used_radii)} radii"
        )
    disc = np.asarray(discrepancies)
    if np.all(disc <= 0.0):
        return HolderFit(constant=0.0, exponent=0.0, r2=0.0, degenerate=True)
    keep = disc > 0.0
    slope, intercept, r2 = least_squares_line(
        np.log(np.asarray(used_radii)[keep]), np.log(disc[keep])
    )
    return HolderFit(
        constant=float(np.exp(intercept)), exponent=slope, r2=r2, degenerate=False
    )


def validate_holder(
    system: MapSystem,
    phi: Observable,
    pairs: int = 10_000,
    seed: int = 0,
) -> float:
    """Worst ratio |phi(x)-phi(y)| / (C d^kappa) over random pairs; <= 1 means
    the declared modulus holds on the sample."""
    if phi.holder is None:
        raise ValueError(f"observable {phi.name!r} declares no modulus")
    c, kappa = phi.holder
    rng = np.random.default_rng(seed)
    if system.domain == "torus":
        xs = rng.random((pairs, 2))
        ys = rng.random((pairs, 2))
    else:
        xs = rng.uniform(-1.5, 1.5, (pairs, 2))
        ys = xs + rng.uniform(-0.1, 0.1, (pairs, 2))
    d = system.distance(xs, ys)
    good = d > 0
    ratio = np.abs(phi(xs[good]) - phi(ys[good])) / (c * d[good] ** kappa)
    return float(np.max(ratio))


def write_transfer_csv(table: TransferTable, path) -> None:
    """Export the table as CSV with columns n, x1, x2, psi."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("n,x1,x2,psi\n")
        for n in range(len(table)):
            x1, x2 = table.points[n]
            fh.write(f"{n},{x1:.17g},{x2:.17g},{table.psi[n]:.17g}\n")
