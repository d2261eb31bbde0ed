"""Global linear quantization of impact scores into b-bit integers.

One scale for the whole index: a score s maps to
clamp(round(s / s_max * (2^b - 1)), 1, 2^b - 1) with round half away
from zero. The map is documented bit-exactly because index bytes must be
reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

MIN_BITS = 2
MAX_BITS = 16


@dataclass(frozen=True)
class LinearQuantizer:
    bits: int
    s_max: float

    def __post_init__(self):
        if not MIN_BITS <= self.bits <= MAX_BITS:
            raise ConfigError(f"bits must be in [{MIN_BITS}, {MAX_BITS}], got {self.bits}")
        if not self.s_max > 0:
            raise ConfigError(f"s_max must be > 0, got {self.s_max}")

    @property
    def levels(self) -> int:
        """Largest quantized value, 2^bits - 1."""
        return (1 << self.bits) - 1

    def quantize(self, score: float) -> int:
        """Map a positive score into [1, 2^bits - 1].

        Scores above s_max clamp to the top level (the quantizer may be
        reused on data it was not fitted on); scores rounding to 0 are
        floored to 1 so every indexed posting contributes.
        """
        if score <= 0:
            raise DomainError(f"cannot quantize non-positive score {score}")
        q = math.floor(score / self.s_max * self.levels + 0.5)
        return min(max(q, 1), self.levels)

    def quantize_many(self, scores: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`quantize`; same arithmetic, element order preserved."""
        scores = np.asarray(scores, dtype=np.float64)
        if scores.size and scores.min() <= 0:
            raise DomainError("cannot quantize non-positive scores")
        q = np.floor(scores / self.s_max * self.levels + 0.5).astype(np.int64)
        return np.clip(q, 1, self.levels).astype(np.int32)


def fit(collection, bits: int) -> LinearQuantizer:
    """Fit the global scale: s_max is the maximum impact in the collection."""
    if not MIN_BITS <= bits <= MAX_BITS:
        raise ConfigError(f"bits must be in [{MIN_BITS}, {MAX_BITS}], got {bits}")
    s_max = collection.max_impact()
    if s_max <= 0:
        raise ConfigError("cannot fit a quantizer on a collection with no impacts")
    return LinearQuantizer(bits=bits, s_max=s_max)
