"""Strict and relaxed key confirmation."""
from __future__ import annotations

import math

from .errors import InvalidFraction, LengthMismatch
from .keygen import Key

DEFAULT_AGREE_FRACTION = 0.9
MODES = ("strict", "relaxed")


def hamming_distance(k1: Key, k2: Key) -> int:
    if k1.nb != k2.nb or len(k1.bits) != len(k2.bits):
        raise LengthMismatch(
            f"keys not comparable: {len(k1.bits)} bits/nb={k1.nb} vs {len(k2.bits)} bits/nb={k2.nb}"
        )
    return (int(k1.bits, 2) ^ int(k2.bits, 2)).bit_count()


def strict_match(k1: Key, k2: Key) -> bool:
    return hamming_distance(k1, k2) == 0


def required_agreement(length: int, agree_fraction: float) -> int:
    """Minimum number of equal bits for a relaxed match."""
    if not 0.0 < agree_fraction <= 1.0:
        raise InvalidFraction(f"agree_fraction must be in (0, 1], got {agree_fraction}")
    # round first so 0.9 * 40 = 36.00000000000001 does not become 37
    return math.ceil(round(agree_fraction * length, 9))


def relaxed_match(k1: Key, k2: Key, agree_fraction: float = DEFAULT_AGREE_FRACTION) -> bool:
    need = required_agreement(len(k1.bits), agree_fraction)
    return len(k1.bits) - hamming_distance(k1, k2) >= need


def keys_match(k1: Key, k2: Key, mode: str = "relaxed",
               agree_fraction: float = DEFAULT_AGREE_FRACTION) -> bool:
    if mode == "strict":
        return strict_match(k1, k2)
    if mode == "relaxed":
        return relaxed_match(k1, k2, agree_fraction)
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
