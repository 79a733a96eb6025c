"""Decimal-to-binary quantization of normalized features into a key."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import InvalidBitCount, OutOfRange
from .features import FEATURE_NAMES, NormalizedFeatureVector

MAX_NB = 16
FEATURE_COUNT = len(FEATURE_NAMES)
_BITS = re.compile(r"^[01]+$")


@dataclass(frozen=True)
class Key:
    """A key as an ASCII '0'/'1' string of ``FEATURE_COUNT * nb`` bits."""

    bits: str
    nb: int

    def __post_init__(self):
        if not isinstance(self.nb, int) or not 1 <= self.nb <= MAX_NB:
            raise InvalidBitCount(f"nb must be an integer in [1, {MAX_NB}], got {self.nb}")
        if not _BITS.match(self.bits) or len(self.bits) != FEATURE_COUNT * self.nb:
            raise ValueError(
                f"expected {FEATURE_COUNT * self.nb} bits of '0'/'1', got {self.bits!r}"
            )

    @property
    def feature_count(self) -> int:
        return FEATURE_COUNT

    def __len__(self):
        return len(self.bits)

    def __str__(self):
        return self.bits

    def groups(self) -> list:
        """Decoded per-feature bin indices."""
        return [int(self.bits[i:i + self.nb], 2) for i in range(0, len(self.bits), self.nb)]


def quantize_value(v: float, nb: int) -> int:
    """Uniform ``2**nb`` bins over [0, 1], with v == 1 folded into the top bin."""
    if not isinstance(nb, int) or not 1 <= nb <= MAX_NB:
        raise InvalidBitCount(f"nb must be an integer in [1, {MAX_NB}], got {nb}")
    if not 0.0 <= v <= 1.0:
        raise OutOfRange(f"value {v} outside [0, 1]")
    levels = 1 << nb
    return min(math.floor(v * levels), levels - 1)


def generate_key(nfv: NormalizedFeatureVector, nb: int) -> Key:
    codes = [quantize_value(float(v), nb) for v in nfv.as_array()]
    return Key("".join(format(c, f"0{nb}b") for c in codes), nb)
