"""Exception types shared across the package."""

from __future__ import annotations


class PesinLabError(Exception):
    """Base class for all package-specific errors."""


class OrbitEscape(PesinLabError):
    """An orbit left the admissible region (plane maps only).

    Carries the iteration index at which the escape was detected.
    """

    def __init__(self, index: int, message: str | None = None):
        self.index = index
        super().__init__(message or f"orbit escaped at iterate {index}")


class DegenerateSplitting(PesinLabError):
    """Power iteration for the invariant splitting failed to settle."""


class RankDeficient(PesinLabError):
    """A subspace frame lost rank during push-forward."""


class NoRecurrence(PesinLabError):
    """No acceptable orbit return was found within the iteration budget."""


class PoolExhausted(PesinLabError):
    """No pool point lies within the requested jump size of a segment end."""


class NewtonDiverged(PesinLabError):
    """Newton refinement failed; the best iterate is attached as ``result``."""

    def __init__(self, message: str, result=None):
        self.result = result
        super().__init__(message)


class IllConditioned(PesinLabError):
    """A pivot of the orbit linear system fell below the safe threshold."""


class WitnessInvalid(PesinLabError):
    """A witness pseudo-orbit violates its own preconditions."""


class InsufficientData(PesinLabError):
    """Not enough samples for the requested fit."""


class NoPairs(PesinLabError):
    """No near-return pairs within the requested radius."""


class NonHyperbolicAnchor(PesinLabError):
    """Manifold growth requested at a periodic point without a spectral gap."""


class DomainUnsupported(PesinLabError):
    """Operation needs a torus domain (or an explicit bounding box)."""


class ConfigInvalid(PesinLabError):
    """Experiment configuration failed validation."""
