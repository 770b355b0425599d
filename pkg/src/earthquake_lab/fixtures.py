"""Standard genus-2 fixtures shared by tests, scripts and the CLI."""

from __future__ import annotations

import numpy as np

from .curves import WeightedMulticurve
from .teichmueller import FNCoords

PANTS_WORDS = ("a1", "a2", "a1b1A1B1")
DUAL_WORDS = ("b1", "b2", "b1b2")

# a generic point away from all symmetric loci
GENERIC_FN = FNCoords((1.3, 1.7, 1.1), (0.2, -0.3, 0.4))


def pants_multicurve(weights=(1.0, 1.0, 1.0)) -> WeightedMulticurve:
    return WeightedMulticurve(tuple(zip(PANTS_WORDS, map(float, weights))))


def dual_multicurve(weights=(1.0, 1.0, 1.0)) -> WeightedMulticurve:
    """b1, b2 and the simple curve b1b2; together with the pants curves they fill."""
    return WeightedMulticurve(tuple(zip(DUAL_WORDS, map(float, weights))))


def filling_pair():
    return pants_multicurve(), dual_multicurve()


def thick_fn(rng: np.random.Generator, length_range=(1.0, 3.0)) -> FNCoords:
    """Random FN coordinates: lengths uniform in ``length_range``, each twist in
    the Dehn-twist fundamental domain [-l/2, l/2]."""
    lengths = rng.uniform(*length_range, 3)
    twists = rng.uniform(-0.5, 0.5, 3) * lengths
    return FNCoords(tuple(map(float, lengths)), tuple(map(float, twists)))


def random_weights(rng: np.random.Generator, n: int = 3, low: float = 0.2, high: float = 2.0) -> tuple:
    return tuple(map(float, rng.uniform(low, high, n)))


__all__ = ["PANTS_WORDS", "DUAL_WORDS", "GENERIC_FN", "pants_multicurve", "dual_multicurve",
           "filling_pair", "thick_fn", "random_weights"]
