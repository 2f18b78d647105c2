"""Invariant manifolds of hyperbolic periodic points as polylines.

Manifolds are grown by iterating a short fundamental segment along the
relevant Floquet eigendirection and re-interpolating to a maximum segment
length, which is adequate for one-dimensional manifolds of surface maps.
Contraction profiles, transverse intersections (torus-aware) and coverage of
the torus by a patch are the quantitative outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ._util import least_squares_line
from .errors import DomainUnsupported, NonHyperbolicAnchor
from .shadowing import PeriodicPoint
from .systems import MapSystem, orbit_points

_SEED_LENGTH = 1e-6
_GENERATION_CAP = 60
_TURNING_LIMIT = np.pi / 3.0


@dataclass(frozen=True)
class ManifoldPatch:
    """Polyline approximation of a local stable or unstable manifold.

    Vertices are stored canonically (wrapped on the torus); consecutive
    vertices are closer than ``h`` so segment lifts are unambiguous.
    ``curvature_flag`` marks growth stopped by a turning angle above 60
    degrees (h too coarse for the local curvature).
    """

    system: MapSystem
    anchor: PeriodicPoint
    kind: str
    polyline: np.ndarray
    generation: int
    total_length: float
    h: float
    curvature_flag: bool = False

    def segment_deltas(self) -> np.ndarray:
        return self.system.displacement(self.polyline[1:], self.polyline[:-1])

    def segment_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.segment_deltas(), axis=-1)


def _dominant_eigvec(m: np.ndarray) -> np.ndarray | None:
    """Unit eigenvector of the larger-|eigenvalue| root of a real 2x2 matrix;
    None when the eigenvalues are complex."""
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = tr * tr - 4.0 * det
    if disc < 0.0:
        return None
    lead = tr if tr != 0.0 else 1.0
    lam = 0.5 * (tr + np.copysign(np.sqrt(disc), lead))
    r1 = np.array([m[0, 0] - lam, m[0, 1]])
    r2 = np.array([m[1, 0], m[1, 1] - lam])
    row = r1 if np.linalg.norm(r1) >= np.linalg.norm(r2) else r2
    if np.linalg.norm(row) == 0.0:
        return np.array([1.0, 0.0])
    v = np.array([-row[1], row[0]])
    v /= np.linalg.norm(v)
    # Deterministic branch orientation: largest component positive.
    lead = v[np.argmax(np.abs(v))]
    return v if lead > 0.0 else -v


def _floquet_directions(system: MapSystem, p: PeriodicPoint) -> tuple[np.ndarray, np.ndarray, float]:
    """(unstable dir, stable dir, signed leading eigenvalue) of Df^period."""
    pts = orbit_points(system, p.z, p.period)
    jacs = system.jacobian(pts[:-1])
    m = np.eye(2)
    for j in range(p.period):
        m = jacs[j] @ m
        scale = np.max(np.abs(m))
        if scale > 1e100:
            m /= scale
    v_u = _dominant_eigvec(m)
    adj = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])
    v_s = _dominant_eigvec(adj)
    if v_u is None or v_s is None:
        raise NonHyperbolicAnchor("complex Floquet multipliers at the anchor")
    tr = m[0, 0] + m[1, 1]
    disc = tr * tr - 4.0 * (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    lead = tr if tr != 0.0 else 1.0
    lam = 0.5 * (tr + np.copysign(np.sqrt(disc), lead))
    return v_u, v_s, float(lam)


def _apply_cycle(system: MapSystem, pts: np.ndarray, period: int, inverse: bool) -> np.ndarray:
    for _ in range(period):
        pts = system.inverse(pts) if inverse else system.forward(pts)
    return pts


def _refine(system: MapSystem, source: np.ndarray, image: np.ndarray, h: float, inverse: bool, period: int):
    """Insert mapped midpoints of source segments until image gaps are <= h."""
    for _ in range(64):
        gaps = np.linalg.norm(system.displacement(image[1:], image[:-1]), axis=-1)
        bad = np.nonzero(gaps > h)[0]
        if bad.size == 0:
            return source, image
        mids = system.wrap(
            source[bad] + 0.5 * system.displacement(source[bad + 1], source[bad])
        )
        mid_imgs = _apply_cycle(system, mids, period, inverse)
        new_source = np.empty((source.shape[0] + bad.size, 2))
        new_image = np.empty_like(new_source)
        insert_at = bad + 1
        idx = np.arange(source.shape[0])
        pos = idx + np.searchsorted(insert_at, idx, side="right")
        new_source[pos] = source
        new_image[pos] = image
        mid_pos = insert_at + np.arange(bad.size)
        new_source[mid_pos] = mids
        new_image[mid_pos] = mid_imgs
        source, image = new_source, new_image
    raise RuntimeError("segment refinement failed to terminate")


def grow_manifold(
    system: MapSystem,
    p: PeriodicPoint,
    kind: str,
    target_length: float,
    h: float,
) -> ManifoldPatch:
    """Grow the local stable or unstable manifold at a hyperbolic periodic
    point as an arc-length polyline.

    Starts from a fundamental segment of length 1e-6 along the corresponding
    Floquet eigendirection and repeatedly applies the return map (inverse map
    for the stable side), re-interpolating so segment lengths stay below h,
    until the requested length or the generation cap of 60. A turning angle
    above 60 degrees stops growth and flags the (partial) patch.
    """
    if kind not in ("stable", "unstable"):
        raise ValueError("kind must be 'stable' or 'unstable'")
    if h <= 0.0 or target_length <= 0.0:
        raise ValueError("h and target_length must be positive")
    if not p.hyperbolic:
        raise NonHyperbolicAnchor(
            f"anchor hyperbolicity margin {p.hyperbolicity_margin:.3e} is not positive"
        )
    v_u, v_s, lam = _floquet_directions(system, p)
    inverse = kind == "stable"
    direction = v_s if inverse else v_u
    # The relevant multiplier for the stable side is det/lam.
    z = system.wrap(np.asarray(p.z, dtype=float))
    polyline = np.stack([z, system.wrap(z + _SEED_LENGTH * direction)])
    # Orientation-reversing return maps flip the branch; squaring restores it.
    period = p.period
    pts_check = _apply_cycle(system, polyline, period, inverse)
    flipped = np.dot(system.displacement(pts_check[1], pts_check[0]), direction) < 0.0
    if flipped:
        period *= 2

    generation = 0
    # Nominal seed length; wrapping roundoff must not trigger a growth pass
    # when the target is the seed itself.
    total = max(
        float(np.linalg.norm(system.displacement(polyline[1], polyline[0]))),
        _SEED_LENGTH,
    )
    curvature_flag = False
    while total < target_length and generation < _GENERATION_CAP:
        image = _apply_cycle(system, polyline, period, inverse)
        image[0] = z  # the anchor is exactly invariant
        polyline, image = _refine(system, polyline, image, h, inverse, period)
        polyline = image
        generation += 1
        deltas = system.displacement(polyline[1:], polyline[:-1])
        lengths = np.linalg.norm(deltas, axis=-1)
        total = float(np.sum(lengths))
        if len(polyline) > 2:
            dirs = deltas / lengths[:, None]
            cosines = np.clip(np.sum(dirs[1:] * dirs[:-1], axis=-1), -1.0, 1.0)
            if np.any(np.arccos(cosines) > _TURNING_LIMIT):
                curvature_flag = True
                break
    return ManifoldPatch(
        system=system,
        anchor=p,
        kind=kind,
        polyline=polyline,
        generation=generation,
        total_length=total,
        h=h,
        curvature_flag=curvature_flag,
    )


# ---------------------------------------------------------------------------
# Contraction profiles
# ---------------------------------------------------------------------------


def _diameter(system: MapSystem, pts: np.ndarray) -> float:
    if pts.shape[0] > 2000:
        keep = np.linspace(0, pts.shape[0] - 1, 2000).astype(int)
        pts = pts[keep]
    diffs = system.distance(pts[:, None, :], pts[None, :, :])
    return float(np.max(diffs))


def contraction_profile(
    system: MapSystem, patch: ManifoldPatch, n_max: int
) -> tuple[np.ndarray, np.ndarray]:
    """Diameter ratios diam(f^n(patch)) / diam(patch) for n = 0..n_max
    (inverse map for unstable patches, so the profile always contracts).

    The image sets are read off the fundamental-segment growth: the growth
    stages satisfy f(W_k) = W_{k-1} exactly as sets, so the n-step image of
    the patch is the stage n applications earlier, and images below the seed
    scale contract the seed segment along the per-point bundle factors.
    Forward-iterating the vertex set would instead amplify float noise along
    the expanding direction by e^(lambda n), swamping the true diameter after
    roughly 35 steps; the stages are computed along the expanding direction
    of their own iteration and stay exact.
    """
    from .cocycle import bundle_step_factors

    if n_max < 0 or n_max > 60:
        raise ValueError("n_max must lie in [0, 60]")
    inverse_growth = patch.kind == "stable"
    v_u, v_s, _ = _floquet_directions(system, patch.anchor)
    direction = v_s if inverse_growth else v_u
    z = system.wrap(np.asarray(patch.anchor.z, dtype=float))
    stage = np.stack([z, system.wrap(z + _SEED_LENGTH * direction)])
    diameters = [_diameter(system, stage)]
    target = max(patch.total_length, _SEED_LENGTH)
    cap = _GENERATION_CAP * max(patch.anchor.period, 1) + n_max
    while True:
        lengths = np.linalg.norm(
            system.displacement(stage[1:], stage[:-1]), axis=-1
        )
        if float(np.sum(lengths)) >= target or len(diameters) > cap:
            break
        image = _apply_cycle(system, stage, 1, inverse_growth)
        if patch.anchor.period == 1:
            image[0] = z  # the anchor is exactly invariant
        stage, image = _refine(system, stage, image, patch.h, inverse_growth, 1)
        stage = image
        diameters.append(_diameter(system, stage))
    base = diameters[-1]
    top = len(diameters) - 1
    ns = np.arange(n_max + 1)
    ratios = np.empty(n_max + 1)
    deep = n_max - top
    if deep > 0:
        if inverse_growth:
            # Stable profile: forward map contracts the seed along E^s.
            factors = bundle_step_factors(system, z, 0, deep)
            seed_logs = np.cumsum(factors.stable)
        else:
            # Unstable profile: inverse map contracts the seed along E^u.
            factors = bundle_step_factors(system, z, -deep, 0)
            seed_logs = np.cumsum(-factors.unstable[::-1])
    for n in range(n_max + 1):
        if n <= top:
            ratios[n] = diameters[top - n] / base
        else:
            # Image below the seed: the seed segment contracted along the
            # bundle; exact in log scale for a short fundamental segment.
            ratios[n] = diameters[0] * float(np.exp(seed_logs[n - top - 1])) / base
    return ns, ratios


@dataclass(frozen=True)
class ContractionFit:
    """Certified bound ratio(n) <= c_bar * exp(-zeta_bar * n) over measured n."""

    c_bar: float
    zeta_bar: float
    r2: float
    residuals: np.ndarray


def fit_contraction_bound(ns: np.ndarray, ratios: np.ndarray) -> ContractionFit:
    """Fit a decay rate to a contraction profile and lift the prefactor until
    the exponential bound covers every measured point."""
    ns = np.asarray(ns, dtype=float)
    ratios = np.asarray(ratios, dtype=float)
    mask = (ns >= 1) & (ratios > 0.0)
    if np.sum(mask) < 2:
        raise ValueError("need at least two positive ratios to fit")
    slope, intercept, r2 = least_squares_line(ns[mask], np.log(ratios[mask]))
    zeta_bar = -slope
    c_bar = float(np.exp(np.max(np.log(ratios[mask]) + zeta_bar * ns[mask])))
    c_bar = max(c_bar, 1.0)
    residuals = np.log(ratios[mask]) - (np.log(c_bar) - zeta_bar * ns[mask])
    return ContractionFit(c_bar=c_bar, zeta_bar=float(zeta_bar), r2=r2, residuals=residuals)


# ---------------------------------------------------------------------------
# Transverse intersections
# ---------------------------------------------------------------------------


def _segments(patch: ManifoldPatch) -> tuple[np.ndarray, np.ndarray]:
    starts = patch.polyline[:-1]
    deltas = patch.system.displacement(patch.polyline[1:], patch.polyline[:-1])
    return starts, deltas


def _pair_intersections(a0, da, b0, db):
    """Batched segment-segment intersection in the plane.

    a0, da: (M, 2); b0, db: (K, 2). Returns (points, cos_angles) stacked over
    all crossing pairs with parameters strictly inside [0, 1].
    """
    denom = da[:, None, 0] * db[None, :, 1] - da[:, None, 1] * db[None, :, 0]
    diff = b0[None, :, :] - a0[:, None, :]
    s_num = diff[..., 0] * db[None, :, 1] - diff[..., 1] * db[None, :, 0]
    t_num = diff[..., 0] * da[:, None, 1] - diff[..., 1] * da[:, None, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = s_num / denom
        t = t_num / denom
    ok = (np.abs(denom) > 1e-15) & (s >= 0.0) & (s <= 1.0) & (t >= 0.0) & (t <= 1.0)
    if not np.any(ok):
        return np.empty((0, 2)), np.empty(0)
    ai, bi = np.nonzero(ok)
    pts = a0[ai] + s[ai, bi][:, None] * da[ai]
    na = da[ai] / np.linalg.norm(da[ai], axis=-1, keepdims=True)
    nb = db[bi] / np.linalg.norm(db[bi], axis=-1, keepdims=True)
    cosang = np.abs(np.sum(na * nb, axis=-1))
    return pts, cosang


def find_transverse_intersections(
    patch_u: ManifoldPatch,
    patch_s: ManifoldPatch,
    min_angle: float = 0.1,
) -> list[tuple[np.ndarray, float]]:
    """All transverse crossings between an unstable and a stable patch.

    Torus patches are tested against the nine translated copies of the
    fundamental domain and reported canonically; crossings flatter than
    ``min_angle`` (near-tangencies) are dropped, and duplicates within the
    finer segment length are merged. The returned list is sorted by position.
    """
    if patch_u.kind == patch_s.kind:
        raise ValueError("need patches of opposite kind")
    system = patch_u.system
    a0, da = _segments(patch_u)
    b0, db = _segments(patch_s)
    offsets = (
        [np.array([i, j], dtype=float) for i in (-1, 0, 1) for j in (-1, 0, 1)]
        if system.domain == "torus"
        else [np.zeros(2)]
    )
    all_pts = []
    all_cos = []
    chunk = max(1, int(5e6) // max(b0.shape[0], 1))
    for off in offsets:
        for lo in range(0, a0.shape[0], chunk):
            pts, cosang = _pair_intersections(
                a0[lo : lo + chunk], da[lo : lo + chunk], b0 + off, db
            )
            if pts.shape[0]:
                all_pts.append(pts)
                all_cos.append(cosang)
    if not all_pts:
        return []
    pts = system.wrap(np.concatenate(all_pts, axis=0))
    angles = np.arccos(np.clip(np.concatenate(all_cos), -1.0, 1.0))
    keep = angles >= min_angle
    pts, angles = pts[keep], angles[keep]
    if pts.shape[0] == 0:
        return []
    radius = min(patch_u.h, patch_s.h)
    tree = cKDTree(pts, boxsize=1.0 if system.domain == "torus" else None)
    parent = np.arange(pts.shape[0])

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in tree.query_pairs(r=radius, output_type="ndarray"):
        ra, rb = find(int(a)), find(int(b))
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    reps = sorted({find(i) for i in range(pts.shape[0])})
    out = [(pts[i], float(angles[i])) for i in reps]
    out.sort(key=lambda item: (item[0][0], item[0][1]))
    return out


# ---------------------------------------------------------------------------
# Coverage and geometry helpers
# ---------------------------------------------------------------------------


def closure_coverage(
    patch: ManifoldPatch,
    grid_n: int,
    bbox: tuple[np.ndarray, np.ndarray] | None = None,
) -> float:
    """Fraction of grid cells the polyline passes through.

    Torus patches use the unit square; plane patches need an explicit
    bounding box (lower, upper) and raise DomainUnsupported without one.
    Cells are collected from points sampled along each segment at a quarter
    of the cell size, so the count is monotone under patch extension.
    """
    if grid_n < 1:
        raise ValueError("grid_n must be >= 1")
    system = patch.system
    if system.domain == "torus":
        lo = np.zeros(2)
        scale = float(grid_n)
    else:
        if bbox is None:
            raise DomainUnsupported(
                "coverage on a plane domain needs an explicit bounding box"
            )
        lo = np.asarray(bbox[0], dtype=float)
        hi = np.asarray(bbox[1], dtype=float)
        scale = grid_n / float(np.max(hi - lo))
    cells: set[tuple[int, int]] = set()
    step = 0.25 / scale
    starts = patch.polyline[:-1]
    deltas = system.displacement(patch.polyline[1:], patch.polyline[:-1])
    lengths = np.linalg.norm(deltas, axis=-1)
    for start, delta, length in zip(starts, deltas, lengths):
        count = max(2, int(np.ceil(length / step)) + 1)
        ts = np.linspace(0.0, 1.0, count)
        pts = system.wrap(start[None, :] + ts[:, None] * delta[None, :])
        idx = np.floor((pts - lo) * scale).astype(int)
        if system.domain == "torus":
            idx = np.mod(idx, grid_n)
        for i, j in idx:
            cells.add((int(i), int(j)))
    if patch.polyline.shape[0] == 1:
        pt = system.wrap(patch.polyline[0])
        idx = np.floor((pt - lo) * scale).astype(int)
        cells.add((int(idx[0]), int(idx[1])))
    return len(cells) / float(grid_n * grid_n)


def polyline_point_distance(system: MapSystem, points: np.ndarray, patch: ManifoldPatch) -> np.ndarray:
    """Distance from each point to the patch polyline (segment-exact)."""
    starts = patch.polyline[:-1]
    deltas = system.displacement(patch.polyline[1:], patch.polyline[:-1])
    lengths2 = np.sum(deltas**2, axis=-1)
    pts = np.asarray(points, dtype=float)
    rel = system.displacement(pts[:, None, :], starts[None, :, :])
    t = np.clip(
        np.sum(rel * deltas[None, :, :], axis=-1) / np.where(lengths2 > 0, lengths2, 1.0),
        0.0,
        1.0,
    )
    closest = rel - t[..., None] * deltas[None, :, :]
    return np.min(np.linalg.norm(closest, axis=-1), axis=-1)


def write_polyline_csv(patch: ManifoldPatch, path) -> None:
    """Export the polyline as CSV with columns index, x, y."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("index,x,y\n")
        for i, (x, y) in enumerate(patch.polyline):
            fh.write(f"{i},{x:.17g},{y:.17g}\n")
