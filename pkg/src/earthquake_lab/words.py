"""Words in the closed genus-g surface group.

Letters are nonzero integers: generator ``k`` (0-based, ordered a1, b1, a2,
b2, ...) is ``k + 1`` and its inverse ``-(k + 1)``.  The string format is
the concatenation of tokens ``a1 A1 b1 B1 ...`` with capitals for inverses,
e.g. ``"a1b1A1B1"``; whitespace is ignored.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property

from .errors import TrivialWord, ValidationError

_TOKEN = re.compile(r"([aAbB])(\d+)")


def letter_name(x: int) -> str:
    k = abs(x) - 1
    base = "a" if k % 2 == 0 else "b"
    name = f"{base}{k // 2 + 1}"
    return name if x > 0 else name.capitalize()


def parse_word(text: str, genus: int | None = None) -> tuple:
    s = "".join(text.split())
    pos = 0
    out = []
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if m is None:
            raise ValidationError(f"cannot parse word {text!r} at position {pos}")
        ch, idx = m.group(1), int(m.group(2))
        if idx < 1 or (genus is not None and idx > genus):
            raise ValidationError(f"generator index {idx} out of range in {text!r}")
        k = 2 * (idx - 1) + (0 if ch.lower() == "a" else 1)
        out.append(k + 1 if ch.islower() else -(k + 1))
        pos = m.end()
    return tuple(out)


def format_word(letters) -> str:
    return "".join(letter_name(x) for x in letters)


def free_reduce(letters) -> tuple:
    out = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inverse(letters) -> tuple:
    return tuple(-x for x in reversed(letters))


def _cyclic_reduce_letters(letters) -> tuple:
    w = list(free_reduce(letters))
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


def is_proper_power(letters) -> bool:
    n = len(letters)
    for p in range(1, n // 2 + 1):
        if n % p == 0 and tuple(letters[:p]) * (n // p) == tuple(letters):
            return True
    return False


@dataclass(frozen=True)
class CurveWord:
    """Cyclically reduced, nonempty word; a free homotopy class of closed curve."""

    letters: tuple

    def __post_init__(self):
        letters = tuple(int(x) for x in self.letters)
        if not letters:
            raise TrivialWord("empty curve word")
        if _cyclic_reduce_letters(letters) != letters:
            raise ValidationError(f"{format_word(letters)} is not cyclically reduced")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def parse(cls, text: str, genus: int | None = None) -> "CurveWord":
        return cyclic_reduce(parse_word(text, genus))

    def __str__(self):
        return format_word(self.letters)

    def __len__(self):
        return len(self.letters)

    @property
    def primitive(self) -> bool:
        return not is_proper_power(self.letters)

    def inverse(self) -> "CurveWord":
        return CurveWord(inverse(self.letters))

    @cached_property
    def canonical(self) -> tuple:
        """Lexicographically least rotation of the word or of its inverse."""
        cands = []
        for w in (self.letters, inverse(self.letters)):
            cands.extend(w[i:] + w[:i] for i in range(len(w)))
        return min(cands)


def cyclic_reduce(word) -> CurveWord:
    """Cyclically reduced representative; raises TrivialWord if nothing is left."""
    if isinstance(word, str):
        word = parse_word(word)
    elif isinstance(word, CurveWord):
        word = word.letters
    if len(word) == 0:
        raise TrivialWord("empty word")
    reduced = _cyclic_reduce_letters(word)
    if not reduced:
        raise TrivialWord(f"{format_word(word)} reduces to the identity")
    return CurveWord(reduced)


def as_curve(c, genus: int | None = None) -> CurveWord:
    if isinstance(c, CurveWord):
        return c
    if isinstance(c, str):
        return CurveWord.parse(c, genus)
    return cyclic_reduce(tuple(c))


@dataclass(frozen=True)
class SurfaceGroup:
    """pi_1 of the closed genus-g surface: <a1, b1, ..., ag, bg | [a1,b1]...[ag,bg]>."""

    genus: int = 2

    def __post_init__(self):
        if self.genus < 2:
            raise ValidationError("genus must be at least 2")

    @property
    def rank(self) -> int:
        return 2 * self.genus

    @property
    def generator_names(self) -> list:
        return [letter_name(k + 1) for k in range(self.rank)]

    @property
    def relator(self) -> tuple:
        out = []
        for i in range(self.genus):
            a, b = 2 * i + 1, 2 * i + 2
            out.extend([a, b, -a, -b])
        return tuple(out)

    @property
    def letters(self) -> list:
        return [x for k in range(self.rank) for x in (k + 1, -(k + 1))]

    def check(self, letters) -> tuple:
        for x in letters:
            if x == 0 or abs(x) > self.rank:
                raise ValidationError(f"letter {x} outside the alphabet of genus {self.genus}")
        return tuple(letters)

    def cyclic_words(self, max_length: int, primitive_only: bool = True) -> list:
        """One representative per class of cyclically reduced words up to rotation and inversion."""
        seen = set()
        out = []
        alphabet = self.letters
        for n in range(1, max_length + 1):
            for letters in itertools.product(alphabet, repeat=n):
                if any(letters[i] == -letters[i + 1] for i in range(n - 1)):
                    continue
                if n > 1 and letters[0] == -letters[-1]:
                    continue
                w = CurveWord(letters)
                if primitive_only and not w.primitive:
                    continue
                key = w.canonical
                if key in seen:
                    continue
                seen.add(key)
                out.append(CurveWord(key))
        return out
