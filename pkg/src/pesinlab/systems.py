"""Built-in diffeomorphisms with exact Jacobians, inverses and a domain metric.

All point operations broadcast over leading axes: a point is the last axis of
shape (2,), a batch of points is (..., 2). Torus points are kept canonically
in [0, 1)^2; wrapping happens inside the maps and the metric, never in caller
code.

Built-ins:

* ``cat``            hyperbolic toral automorphism x -> A x mod 1, A = [[2,1],[1,1]]
* ``perturbed_cat``  x -> A x + eps (sin 2 pi x2, sin 2 pi x1) mod 1
* ``henon``          (x, y) -> (1 + y - a x^2, b x) on the plane
* ``standard``       kicked rotor on the unit torus, shear [[1,1],[0,1]] at K = 0
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._util import (
    inv2,
    plane_distance,
    singular_values_2x2,
    torus_distance,
    wrap_half,
    wrap_unit,
)
from .errors import OrbitEscape

ESCAPE_RADIUS = 10.0
_GRID_SIDE = 256
TWO_PI = 2.0 * np.pi


class MapSystem:
    """A concrete diffeomorphism of the torus or the plane.

    Subclasses implement ``forward``, ``inverse`` and ``jacobian``; everything
    else (metric, orbits, derivative bound) is shared. Instances are immutable
    after construction and safe to share between threads.
    """

    name: str = "abstract"
    dimension: int = 2
    domain: str = "torus"  # "torus" or "plane"
    stable_index: int = 1

    def __init__(self, parameters: dict[str, float] | None = None):
        self.parameters = dict(parameters or {})
        self.derivative_bound = self._compute_derivative_bound()

    # -- map interface -------------------------------------------------

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inverse(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """Exact Jacobian of the forward map, shape (..., 2, 2)."""
        raise NotImplementedError

    def jacobian_inverse(self, x: np.ndarray) -> np.ndarray:
        """Jacobian of the inverse map at x: inv(Df(f^{-1}(x)))."""
        return inv2(self.jacobian(self.inverse(x)))

    # -- geometry ------------------------------------------------------

    def wrap(self, x: np.ndarray) -> np.ndarray:
        if self.domain == "torus":
            return wrap_unit(x)
        return np.asarray(x, dtype=float)

    def displacement(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Shortest vector from y to x (wrapped on the torus)."""
        d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        if self.domain == "torus":
            return wrap_half(d)
        return d

    def distance(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.domain == "torus":
            return torus_distance(x, y)
        return plane_distance(x, y)

    # -- orbits ----------------------------------------------------------

    def step(self, x: np.ndarray, direction: str = "forward") -> np.ndarray:
        if direction == "forward":
            return self.forward(x)
        if direction == "inverse":
            return self.inverse(x)
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")

    def _check_escape(self, x: np.ndarray, index: int) -> None:
        if self.domain == "plane":
            if not np.all(np.isfinite(x)) or np.any(np.abs(x) > ESCAPE_RADIUS):
                raise OrbitEscape(index)

    def sample_grid(self, side: int = _GRID_SIDE) -> np.ndarray:
        """Deterministic sampling grid used for construction-time checks."""
        if self.domain == "torus":
            axis = (np.arange(side) + 0.5) / side
        else:
            axis = np.linspace(-2.0, 2.0, side)
        gx, gy = np.meshgrid(axis, axis, indexing="ij")
        return np.stack([gx.ravel(), gy.ravel()], axis=-1)

    def _compute_derivative_bound(self) -> float:
        pts = self.sample_grid()
        jac = self.jacobian(pts)
        hi, lo = singular_values_2x2(jac)
        # sup over the grid of max(log||Df||, log||Df^-1||); ||Df^-1|| = 1/sigma_min.
        bound = float(np.max(np.maximum(np.log(hi), -np.log(lo))))
        return max(1.0, bound)

    def __repr__(self) -> str:  # pragma: no cover
        params = ", ".join(f"{k}={v}" for k, v in self.parameters.items())
        return f"{type(self).__name__}({params})"


def apply(system: MapSystem, x: np.ndarray, direction: str = "forward") -> np.ndarray:
    """Apply f or f^{-1} once, wrapped into the domain."""
    return system.step(system.wrap(x), direction)


def jacobian(system: MapSystem, x: np.ndarray) -> np.ndarray:
    return system.jacobian(system.wrap(x))


def distance(system: MapSystem, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return system.distance(x, y)


def orbit_points(
    system: MapSystem,
    x: np.ndarray,
    n_forward: int,
    n_backward: int = 0,
) -> np.ndarray:
    """Orbit window around x, time axis first.

    Returns an array of shape (n_backward + n_forward + 1,) + x.shape where
    entry ``t`` holds f^(t - n_backward)(x). Raises OrbitEscape with the
    signed orbit index for plane maps that leave the escape ball.
    """
    x = system.wrap(np.asarray(x, dtype=float))
    out = np.empty((n_backward + n_forward + 1,) + x.shape, dtype=float)
    out[n_backward] = x
    y = x
    for j in range(1, n_forward + 1):
        y = system.forward(y)
        system._check_escape(y, j)
        out[n_backward + j] = y
    y = x
    for j in range(1, n_backward + 1):
        y = system.inverse(y)
        system._check_escape(y, -j)
        out[n_backward - j] = y
    return out


@dataclass(frozen=True)
class OrbitSegment:
    """The orbit piece from ``base`` to f^length(base)."""

    system: MapSystem
    base: np.ndarray
    length: int

    def iterate(self, j: int) -> np.ndarray:
        if not 0 <= j <= self.length:
            raise ValueError(f"iterate index {j} outside [0, {self.length}]")
        y = self.system.wrap(self.base)
        for _ in range(j):
            y = self.system.forward(y)
        return y

    def points(self) -> np.ndarray:
        return orbit_points(self.system, self.base, self.length)

    def endpoint(self) -> np.ndarray:
        return self.iterate(self.length)


# ---------------------------------------------------------------------------
# Built-in systems
# ---------------------------------------------------------------------------


class CatMap(MapSystem):
    """Hyperbolic toral automorphism with matrix [[2, 1], [1, 1]]."""

    name = "cat"
    domain = "torus"

    def __init__(self):
        self.matrix = np.array([[2.0, 1.0], [1.0, 1.0]])
        self.matrix_inverse = np.array([[1.0, -1.0], [-1.0, 2.0]])
        trace = self.matrix[0, 0] + self.matrix[1, 1]
        self.expansion = (trace + np.sqrt(trace * trace - 4.0)) / 2.0
        self.log_expansion = float(np.log(self.expansion))
        super().__init__({})
        self.constant_jacobian = True

    def forward(self, x):
        return wrap_unit(np.asarray(x, dtype=float) @ self.matrix.T)

    def inverse(self, x):
        return wrap_unit(np.asarray(x, dtype=float) @ self.matrix_inverse.T)

    def jacobian(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.matrix, x.shape[:-1] + (2, 2)).copy()

    def jacobian_inverse(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.matrix_inverse, x.shape[:-1] + (2, 2)).copy()

    def unstable_direction(self) -> np.ndarray:
        """Unit eigenvector for the expanding eigenvalue, slope (sqrt(5)-1)/2."""
        v = np.array([1.0, self.expansion - self.matrix[0, 0]])
        return v / np.linalg.norm(v)

    def stable_direction(self) -> np.ndarray:
        """Unit eigenvector for the contracting eigenvalue; A is symmetric so
        this is orthogonal to the unstable direction (slope -(1+sqrt(5))/2)."""
        u = self.unstable_direction()
        return np.array([-u[1], u[0]])


class PerturbedCatMap(MapSystem):
    """Cat map plus a trigonometric perturbation, still Anosov for small eps.

    f(x) = A x + eps (sin 2 pi x2, sin 2 pi x1) mod 1. Invertibility of Df is
    guaranteed for 2 pi eps < sigma_min(A) = 0.382; construction rejects eps
    outside [0, 0.06).
    """

    name = "perturbed_cat"
    domain = "torus"
    EPS_MAX = 0.06

    def __init__(self, epsilon: float = 0.05):
        if not 0.0 <= epsilon < self.EPS_MAX:
            raise ValueError(
                f"epsilon must lie in [0, {self.EPS_MAX}) to keep the map invertible; "
                f"got {epsilon}"
            )
        self.epsilon = float(epsilon)
        self.matrix = np.array([[2.0, 1.0], [1.0, 1.0]])
        self.matrix_inverse = np.array([[1.0, -1.0], [-1.0, 2.0]])
        super().__init__({"epsilon": self.epsilon})
        self.constant_jacobian = epsilon == 0.0

    def _kick(self, x: np.ndarray) -> np.ndarray:
        return self.epsilon * np.stack(
            [np.sin(TWO_PI * x[..., 1]), np.sin(TWO_PI * x[..., 0])], axis=-1
        )

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        return wrap_unit(x @ self.matrix.T + self._kick(x))

    def inverse(self, x):
        """Newton solve of f(z) = x on the torus.

        Seeded by the unperturbed inverse; a few damped fixed-point sweeps land
        in the quadratic basin, then Newton polishes to ~1e-15.
        """
        y = wrap_unit(np.asarray(x, dtype=float))
        z = wrap_unit(y @ self.matrix_inverse.T)
        for _ in range(4):
            z = wrap_unit((y - self._kick(z)) @ self.matrix_inverse.T)
        for _ in range(40):
            resid = wrap_half(self.forward(z) - y)
            if np.max(np.abs(resid)) < 1e-15:
                break
            step = np.einsum("...ij,...j->...i", inv2(self.jacobian(z)), resid)
            z = wrap_unit(z - step)
        return z

    def jacobian(self, x):
        x = np.asarray(x, dtype=float)
        jac = np.broadcast_to(self.matrix, x.shape[:-1] + (2, 2)).copy()
        scale = self.epsilon * TWO_PI
        jac[..., 0, 1] += scale * np.cos(TWO_PI * x[..., 1])
        jac[..., 1, 0] += scale * np.cos(TWO_PI * x[..., 0])
        return jac


class HenonMap(MapSystem):
    """The quadratic map (x, y) -> (1 + y - a x^2, b x) on the plane.

    b = 0 collapses the plane onto a line and is rejected at construction.
    Orbit helpers flag divergence once |coordinate| exceeds ESCAPE_RADIUS.
    """

    name = "henon"
    domain = "plane"

    def __init__(self, a: float = 1.4, b: float = 0.3):
        if b == 0.0:
            raise ValueError("henon map with b=0 is not invertible")
        self.a = float(a)
        self.b = float(b)
        super().__init__({"a": self.a, "b": self.b})
        self.constant_jacobian = False

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        return np.stack(
            [1.0 + x[..., 1] - self.a * x[..., 0] ** 2, self.b * x[..., 0]], axis=-1
        )

    def inverse(self, x):
        x = np.asarray(x, dtype=float)
        x0 = x[..., 1] / self.b
        return np.stack([x0, x[..., 0] - 1.0 + self.a * x0**2], axis=-1)

    def jacobian(self, x):
        x = np.asarray(x, dtype=float)
        jac = np.zeros(x.shape[:-1] + (2, 2), dtype=float)
        jac[..., 0, 0] = -2.0 * self.a * x[..., 0]
        jac[..., 0, 1] = 1.0
        jac[..., 1, 0] = self.b
        return jac

    def attractor_point(self, burn_in: int = 1000) -> np.ndarray:
        y = np.zeros(2)
        for j in range(burn_in):
            y = self.forward(y)
            self._check_escape(y, j + 1)
        return y


class StandardMap(MapSystem):
    """Chirikov kicked rotor on the unit torus, state (theta, p).

    p' = p + (K / 2 pi) sin(2 pi theta), theta' = theta + p'. The kick is
    normalized so K is the usual stirring parameter and the K = 0 Jacobian is
    the unit shear [[1, 1], [0, 1]].
    """

    name = "standard"
    domain = "torus"

    def __init__(self, k: float = 1.0):
        self.k = float(k)
        super().__init__({"k": self.k})
        self.constant_jacobian = k == 0.0

    def _kick(self, theta: np.ndarray) -> np.ndarray:
        return (self.k / TWO_PI) * np.sin(TWO_PI * theta)

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        p_new = x[..., 1] + self._kick(x[..., 0])
        return wrap_unit(np.stack([x[..., 0] + p_new, p_new], axis=-1))

    def inverse(self, x):
        x = np.asarray(x, dtype=float)
        theta = wrap_unit(x[..., 0] - x[..., 1])
        p = x[..., 1] - self._kick(theta)
        return wrap_unit(np.stack([theta, p], axis=-1))

    def jacobian(self, x):
        x = np.asarray(x, dtype=float)
        g = self.k * np.cos(TWO_PI * x[..., 0])
        jac = np.empty(x.shape[:-1] + (2, 2), dtype=float)
        jac[..., 0, 0] = 1.0 + g
        jac[..., 0, 1] = 1.0
        jac[..., 1, 0] = g
        jac[..., 1, 1] = 1.0
        return jac


class InvertedSystem(MapSystem):
    """View of a system with time reversed; stable and unstable roles swap."""

    def __init__(self, base: MapSystem):
        self.base = base
        self.name = base.name + "_inverted"
        self.domain = base.domain
        self.dimension = base.dimension
        self.stable_index = base.dimension - base.stable_index
        self.parameters = dict(base.parameters)
        self.derivative_bound = base.derivative_bound
        self.constant_jacobian = getattr(base, "constant_jacobian", False)

    def forward(self, x):
        return self.base.inverse(x)

    def inverse(self, x):
        return self.base.forward(x)

    def jacobian(self, x):
        return self.base.jacobian_inverse(x)

    def jacobian_inverse(self, x):
        return self.base.jacobian(self.base.forward(x))


_REGISTRY: dict[str, Callable[..., MapSystem]] = {
    "cat": CatMap,
    "perturbed_cat": PerturbedCatMap,
    "henon": HenonMap,
    "standard": StandardMap,
}

_DEFAULT_PARAMS: dict[str, dict[str, float]] = {
    "cat": {},
    "perturbed_cat": {"epsilon": 0.05},
    "henon": {"a": 1.4, "b": 0.3},
    "standard": {"k": 1.0},
}


def available_systems() -> dict[str, dict[str, float]]:
    """Registry names with their default parameters."""
    return {name: dict(params) for name, params in _DEFAULT_PARAMS.items()}


def make_system(name: str, **params) -> MapSystem:
    """Instantiate a registered system by name, rejecting unknown parameters."""
    if name not in _REGISTRY:
        raise ValueError(f"unknown system {name!r}; known: {sorted(_REGISTRY)}")
    allowed = set(_DEFAULT_PARAMS[name])
    unknown = set(params) - allowed
    if unknown:
        raise ValueError(f"unknown parameters for {name!r}: {sorted(unknown)}")
    return _REGISTRY[name](**params)
