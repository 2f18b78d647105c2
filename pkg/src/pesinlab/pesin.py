"""Finite-horizon Pesin-block classification and block-measure estimation.

A point belongs to block k when three families of windowed averages of the
one-step bundle factors stay on the right side of the rate zeta:

(a) forward stable-bundle averages over lengths l*K + r are <= -zeta for all
    l >= k and 0 <= r < K;
(b) the backward unstable-conorm averages over the same lengths are >= zeta;
(c) averaged domination gaps stay <= -2 zeta along the sampled orbit window.

Everything is truncated at the configured horizon and reported as margins
(positive = satisfied with that much slack), which keeps the truncation
honest. Restricted block norms factor exactly over line bundles, so all three
conditions reduce to prefix sums of the two per-point factor sequences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cocycle import BundleFactors, bundle_step_factors
from .errors import OrbitEscape, WitnessInvalid
from .systems import MapSystem, orbit_points

__all__ = [
    "PesinParams",
    "BlockVerdict",
    "Sampler",
    "BlockMeasure",
    "check_block_conditions",
    "classify_block",
    "estimate_block_measure",
    "extended_block_membership",
]


@dataclass(frozen=True)
class PesinParams:
    """Block parameters: block length K, rate zeta, largest block index k_max
    tested, truncation horizon (in units of K-blocks) for the 'for all l'
    quantifiers."""

    K: int
    zeta: float
    k_max: int = 8
    horizon: int = 8
    splitting_horizon: int = 20

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.zeta <= 0.0:
            raise ValueError("zeta must be positive")
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if self.horizon < self.k_max:
            raise ValueError("horizon must be >= k_max")


@dataclass(frozen=True)
class BlockVerdict:
    """Classification outcome at a point. ``k`` is the smallest block index
    within the horizon whose margins are all nonnegative, or None."""

    point: np.ndarray
    k: int | None
    margin_a: float
    margin_b: float
    margin_c: float

    @property
    def margins(self) -> tuple[float, float, float]:
        return (self.margin_a, self.margin_b, self.margin_c)


def _factor_window(params: PesinParams) -> tuple[int, int]:
    K, H = params.K, params.horizon
    return -(H * K + K - 1), 2 * H * K


def _margin_tables(
    factors: BundleFactors, params: PesinParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-k margins of conditions (a) and (b) plus the shared (c) margin.

    Returns (margins_a, margins_b, margin_c) where the tables have shape
    (k_max,) + batch and entry [k-1] is the margin at block index k.
    """
    K, H, zeta = params.K, params.horizon, params.zeta
    t_min, _ = _factor_window(params)
    batch = factors.stable.shape[1:]

    i0 = -t_min  # array index of orbit time 0
    a = factors.stable
    b = factors.unstable

    # Forward prefix sums of stable factors from time 0 and backward suffix
    # sums of unstable factors ending at time -1.
    max_len = H * K + K - 1
    fwd = np.cumsum(a[i0 : i0 + max_len], axis=0)
    bwd = np.cumsum(b[i0 - max_len : i0][::-1], axis=0)

    lengths_all = np.arange(1, max_len + 1)
    mean_a = fwd / lengths_all.reshape((-1,) + (1,) * len(batch))
    mean_b = bwd / lengths_all.reshape((-1,) + (1,) * len(batch))

    # Worst average per block level l: lengths l*K + r, r = 0..K-1.
    worst_a = np.empty((H,) + batch)
    worst_b = np.empty((H,) + batch)
    for l in range(1, H + 1):
        sl = slice(l * K - 1, l * K - 1 + K)
        worst_a[l - 1] = np.max(mean_a[sl], axis=0)
        worst_b[l - 1] = np.min(mean_b[sl], axis=0)

    # Suffix extrema over l >= k give the per-k margins; monotone in k by
    # construction, which realizes the block nesting exactly.
    suffix_max_a = np.flip(np.maximum.accumulate(np.flip(worst_a, axis=0), axis=0), axis=0)
    suffix_min_b = np.flip(np.minimum.accumulate(np.flip(worst_b, axis=0), axis=0), axis=0)
    margins_a = (-zeta - suffix_max_a)[: params.k_max]
    margins_b = (suffix_min_b - zeta)[: params.k_max]

    # Condition (c): domination averages at sampled window offsets and
    # geometrically sampled block lengths.
    gap = a - b
    gap_prefix = np.concatenate(
        [np.zeros((1,) + batch), np.cumsum(gap, axis=0)], axis=0
    )
    lengths = []
    length = K
    while length < K * H:
        lengths.append(length)
        length *= 2
    lengths.append(K * H)
    worst_c = None
    for l in range(-H, H + 1):
        start = i0 + l * K
        for length in lengths:
            avg = (gap_prefix[start + length] - gap_prefix[start]) / length
            worst_c = avg if worst_c is None else np.maximum(worst_c, avg)
    margin_c = -2.0 * zeta - worst_c
    return margins_a, margins_b, margin_c


def _classify_from_tables(
    margins_a: np.ndarray, margins_b: np.ndarray, margin_c: np.ndarray, k_max: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(k, margin_a, margin_b, margin_c) arrays; k = 0 encodes 'no block'."""
    ok = (margins_a >= 0.0) & (margins_b >= 0.0) & (margin_c[None] >= 0.0)
    any_ok = np.any(ok, axis=0)
    first = np.argmax(ok, axis=0)  # first k index with all margins nonnegative
    k_arr = np.where(any_ok, first + 1, 0)
    report = np.where(any_ok, first, k_max - 1)
    idx = report[None]
    ma = np.take_along_axis(margins_a, idx, axis=0)[0]
    mb = np.take_along_axis(margins_b, idx, axis=0)[0]
    return k_arr, ma, mb, margin_c


def classify_batch(
    system: MapSystem, x: np.ndarray, params: PesinParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized classification; returns (k, margin_a, margin_b, margin_c)
    with k = 0 meaning no block level within the horizon."""
    t_min, t_max = _factor_window(params)
    factors = bundle_step_factors(
        system, x, t_min, t_max, horizon=params.splitting_horizon
    )
    margins_a, margins_b, margin_c = _margin_tables(factors, params)
    return _classify_from_tables(margins_a, margins_b, margin_c, params.k_max)


def check_block_conditions(
    system: MapSystem,
    x: np.ndarray,
    params: PesinParams,
    k: int,
    factors: BundleFactors | None = None,
) -> tuple[float, float, float]:
    """Margins of the three block conditions at level k for a single point.

    ``factors`` plays the role of the splitting provider: precomputed bundle
    factors are reused, otherwise they are estimated fresh along the orbit.
    """
    if not 1 <= k <= params.k_max:
        raise ValueError(f"k must lie in [1, {params.k_max}]")
    x = system.wrap(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise ValueError("check_block_conditions expects a single point")
    if factors is None:
        t_min, t_max = _factor_window(params)
        factors = bundle_step_factors(
            system, x, t_min, t_max, horizon=params.splitting_horizon
        )
    margins_a, margins_b, margin_c = _margin_tables(factors, params)
    return float(margins_a[k - 1]), float(margins_b[k - 1]), float(margin_c)


def classify_block(system: MapSystem, x: np.ndarray, params: PesinParams) -> BlockVerdict:
    """Smallest block index within the horizon whose conditions all hold.

    Margins are reported at the returned level (or at k_max if no level
    works). Nesting is honored exactly: the per-k margins are suffix extrema,
    so any level above a passing one passes as well.
    """
    x = system.wrap(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise ValueError("classify_block expects a single point; use classify_batch")
    k_arr, ma, mb, mc = classify_batch(system, x, params)
    k = int(k_arr)
    return BlockVerdict(
        point=x,
        k=k if k > 0 else None,
        margin_a=float(ma),
        margin_b=float(mb),
        margin_c=float(mc),
    )


# ---------------------------------------------------------------------------
# Block measure estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Sampler:
    count: int
    burn_in: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.count < 100:
            raise ValueError("sampler count must be >= 100")


@dataclass(frozen=True)
class BlockMeasure:
    fraction: float
    classified: int
    total: int
    escaped: int


def _draw_samples(system: MapSystem, sampler: Sampler) -> tuple[np.ndarray, int]:
    """Sample points approximating the system's natural measure.

    Torus maps built in here preserve area, so uniform sampling plus burn-in
    already matches the invariant measure; plane maps are seeded near the
    attractor and escapes are discarded (counted separately).
    """
    rng = np.random.default_rng(np.random.SeedSequence(sampler.seed))
    if system.domain == "torus":
        pts = rng.random((sampler.count, 2))
        for _ in range(sampler.burn_in):
            pts = system.forward(pts)
        return pts, 0
    lo = np.array([-1.5, -0.45])
    hi = np.array([1.5, 0.45])
    pts = lo + (hi - lo) * rng.random((sampler.count, 2))
    alive = np.ones(sampler.count, dtype=bool)
    burn = max(sampler.burn_in, 1)
    for _ in range(burn):
        pts[alive] = system.forward(pts[alive])
        alive &= np.all(np.isfinite(pts), axis=-1) & (
            np.max(np.abs(pts), axis=-1) <= 10.0
        )
        pts[~alive] = 0.0
    return pts[alive], int(np.sum(~alive))


def estimate_block_measure(
    system: MapSystem,
    params: PesinParams,
    k: int,
    sampler: Sampler,
    return_details: bool = False,
):
    """Fraction of sampled points whose block level is <= k.

    k = 0 is the empty block and returns 0 by convention. Deterministic for a
    fixed sampler seed; escaped plane-map samples are excluded from the
    denominator and reported in the details.
    """
    if k == 0:
        result = BlockMeasure(0.0, 0, sampler.count, 0)
        return result if return_details else 0.0
    if not 1 <= k <= params.k_max:
        raise ValueError(f"k must lie in [0, {params.k_max}]")
    pts, escaped = _draw_samples(system, sampler)
    if system.domain == "torus":
        k_arr, _, _, _ = classify_batch(system, pts, params)
        hits = int(np.sum((k_arr > 0) & (k_arr <= k)))
        total = int(pts.shape[0])
    else:
        # Plane maps can escape inside the classification window (backward
        # orbits leave the trapping region); those samples are discarded.
        hits = 0
        total = 0
        for p in pts:
            try:
                k_arr, _, _, _ = classify_batch(system, p, params)
            except OrbitEscape:
                escaped += 1
                continue
            total += 1
            if 0 < int(k_arr) <= k:
                hits += 1
    fraction = hits / total if total else 0.0
    if return_details:
        return BlockMeasure(fraction, hits, total, escaped)
    return fraction


# ---------------------------------------------------------------------------
# Extended block membership
# ---------------------------------------------------------------------------


def extended_block_membership(
    system: MapSystem,
    z: np.ndarray,
    params: PesinParams,
    k: int,
    sigma: float,
    witness,
) -> bool:
    """Does the orbit of z sigma-shadow the witness pseudo-orbit?

    The witness must have all segment lengths >= 2 k K and segment endpoints
    classified in block k; violating either raises WitnessInvalid. Membership
    itself is the plain shadowing check over the finite window.
    """
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    z = system.wrap(np.asarray(z, dtype=float))
    min_len = 2 * k * params.K
    for i, (xi, ni) in enumerate(witness.segments):
        if ni < min_len:
            raise WitnessInvalid(
                f"segment {i} has length {ni} < 2kK = {min_len}"
            )
        for endpoint in (xi, orbit_points(system, xi, ni)[-1]):
            verdict = classify_block(system, endpoint, params)
            if verdict.k is None or verdict.k > k:
                raise WitnessInvalid(
                    f"segment {i} endpoint not classified in block {k}"
                )
    offsets = witness.offsets()
    try:
        for i, (xi, ni) in enumerate(witness.segments):
            seg = orbit_points(system, xi, ni)
            shadow = orbit_points(system, z, offsets[i] + ni)[offsets[i] :]
            if np.any(system.distance(shadow, seg) >= sigma):
                return False
    except OrbitEscape:
        return False
    return True
