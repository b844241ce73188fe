"""Well-formedness rules for binary rhythmic patterns.

A pattern is a word over {0, 1}; ``1`` is an attack and ``0`` a rest.  A word
is well formed when

* it starts with an attack,
* no attack is isolated by two rests on each side (``00100``),
* it neither starts with ``100`` nor ends with ``001``,
* it contains no run of four rests (``0000``).
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .network import ShapeError

WORD_LENGTH = 10


@dataclass(frozen=True, order=True)
class Pattern:
    """A binary word; ``bits`` is the {0,1} string, ``sign_form`` the ±1 vector."""

    bits: str

    def __post_init__(self):
        if not isinstance(self.bits, str) or set(self.bits) - {"0", "1"}:
            raise ValueError(f"pattern must be a string over {{0,1}}, got {self.bits!r}")

    def __len__(self):
        return len(self.bits)

    def __str__(self):
        return self.bits

    @property
    def sign_form(self) -> np.ndarray:
        return np.fromiter((1.0 if c == "1" else -1.0 for c in self.bits),
                           dtype=float, count=len(self.bits))

    @classmethod
    def from_signs(cls, signs) -> "Pattern":
        return cls("".join("1" if s > 0 else "0" for s in signs))


class Rule(enum.Enum):
    R1_START = "R1_start"
    R2_ISOLATED_MID = "R2_isolated_mid"
    R2_ISOLATED_START = "R2_isolated_start"
    R2_ISOLATED_END = "R2_isolated_end"
    R3_BREAK = "R3_break"


@dataclass(frozen=True)
class RuleViolation:
    rule: Rule
    position: int

    def __str__(self):
        return f"{self.rule.value}@{self.position}"


def _word(p, length: int) -> str:
    bits = p.bits if isinstance(p, Pattern) else str(p)
    if len(bits) != length:
        raise ShapeError(f"expected a word of length {length}, got {len(bits)}")
    if set(bits) - {"0", "1"}:
        raise ValueError(f"word must be over {{0,1}}: {bits!r}")
    return bits


def _windows(word: str, needle: str):
    # every start index, overlapping occurrences included
    return [i for i in range(len(word) - len(needle) + 1)
            if word.startswith(needle, i)]


def violations(p, length: int = WORD_LENGTH) -> list[RuleViolation]:
    """All rule violations of ``p``, ordered by window start position.

    Overlapping forbidden windows are reported separately.
    """
    word = _word(p, length)
    found = []
    if word[0] != "1":
        found.append(RuleViolation(Rule.R1_START, 0))
    if word.startswith("100"):
        found.append(RuleViolation(Rule.R2_ISOLATED_START, 0))
    found.extend(RuleViolation(Rule.R2_ISOLATED_MID, i) for i in _windows(word, "00100"))
    if len(word) >= 3 and word.endswith("001"):
        found.append(RuleViolation(Rule.R2_ISOLATED_END, len(word) - 3))
    found.extend(RuleViolation(Rule.R3_BREAK, i) for i in _windows(word, "0000"))
    order = list(Rule)
    found.sort(key=lambda v: (v.position, order.index(v.rule)))
    return found


def is_well_formed(p, length: int = WORD_LENGTH) -> bool:
    word = _word(p, length)
    return (word[0] == "1"
            and "00100" not in word
            and not word.startswith("100")
            and not word.endswith("001")
            and "0000" not in word)


@lru_cache(maxsize=None)
def _enumerate(length: int) -> tuple[Pattern, ...]:
    words = ("".join(bits) for bits in itertools.product("01", repeat=length))
    return tuple(Pattern(w) for w in words if is_well_formed(w, length))


def enumerate_wellformed(length: int = WORD_LENGTH) -> list[Pattern]:
    """Every well-formed word of ``length`` bits, in lexicographic order."""
    return list(_enumerate(length))


def wellformed_signs(length: int = WORD_LENGTH) -> np.ndarray:
    """Well-formed words stacked as a (W, length) ±1 matrix."""
    return np.array([p.sign_form for p in _enumerate(length)])


def valid_mask(signs: np.ndarray) -> np.ndarray:
    """Vectorized well-formedness over the rows of a ±1 (or 0/1) matrix."""
    b = np.asarray(signs) > 0
    n = b.shape[-1]
    z = ~b
    ok = b[..., 0].copy()
    ok &= ~(b[..., 0] & z[..., 1] & z[..., 2])
    ok &= ~(z[..., n - 3] & z[..., n - 2] & b[..., n - 1])
    for i in range(n - 3):
        ok &= ~(z[..., i] & z[..., i + 1] & z[..., i + 2] & z[..., i + 3])
    for i in range(n - 4):
        ok &= ~(z[..., i] & z[..., i + 1] & b[..., i + 2] & z[..., i + 3] & z[..., i + 4])
    return ok


def pattern_codes(signs: np.ndarray) -> np.ndarray:
    """Integer code of each row, most significant bit first (lexicographic rank)."""
    b = (np.asarray(signs) > 0).astype(np.int64)
    n = b.shape[-1]
    return b @ (1 << np.arange(n - 1, -1, -1, dtype=np.int64))
