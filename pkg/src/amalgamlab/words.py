"""Free words, presentations, small cancellation and Dehn's algorithm.

A word is a tuple of nonzero ints: generator ``i`` (1-based) is ``i`` and its
inverse is ``-i``.  Text uses lowercase generator names and uppercase for
inverses, so ``"aB"`` is ``(1, -2)`` over the alphabet ``a b``.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

Word = tuple  # tuple[int, ...]

_TOKEN = re.compile(r"\s*([A-Za-z][0-9]*)")


class AlphabetError(ValueError):
    """A letter or symbol does not belong to the alphabet in use."""


class DegenerateInput(ValueError):
    pass


class UnsupportedPresentation(ValueError):
    """Dehn's algorithm was asked to run on a presentation that is not C'(1/6)."""


class CapExceeded(RuntimeError):
    """A capped search gave up; ``best`` is the best answer found so far."""

    def __init__(self, message: str, cap: int, best=None):
        super().__init__(message)
        self.cap = cap
        self.best = best


class Alphabet:
    """Generator names in declaration order.

    Letter order (used for shortlex tie-breaks everywhere) is
    ``a < A < b < B < ...`` following the declaration order.
    """

    def __init__(self, names: Sequence[str]):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise AlphabetError(f"duplicate generator names in {names}")
        for name in names:
            if not re.fullmatch(r"[a-z][0-9]*", name):
                raise AlphabetError(f"bad generator name {name!r}")
        self.names = names
        self._index = {name: i + 1 for i, name in enumerate(names)}

    def __len__(self):
        return len(self.names)

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"Alphabet({' '.join(self.names)})"

    @property
    def letters(self) -> tuple[int, ...]:
        """All letters, in shortlex order."""
        out = []
        for i in range(1, len(self.names) + 1):
            out += [i, -i]
        return tuple(out)

    def check(self, word: Iterable[int]) -> None:
        n = len(self.names)
        for letter in word:
            if letter == 0 or abs(letter) > n:
                raise AlphabetError(f"letter {letter} outside alphabet {self.names}")

    def symbol(self, letter: int) -> str:
        name = self.names[abs(letter) - 1]
        return name if letter > 0 else name[0].upper() + name[1:]

    def letter(self, symbol: str) -> int:
        lower = symbol[0].lower() + symbol[1:]
        if lower not in self._index:
            raise AlphabetError(f"unknown generator {symbol!r} (alphabet {' '.join(self.names)})")
        i = self._index[lower]
        return i if symbol[0].islower() else -i

    def parse(self, text: str) -> Word:
        """Parse ``"a b A"`` or ``"abA"`` (spaces optional) into a raw letter tuple."""
        out = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                raise AlphabetError(f"cannot parse {text[pos:]!r}")
            out.append(self.letter(m.group(1)))
            pos = m.end()
            while pos < len(text) and text[pos].isspace():
                pos += 1
        return tuple(out)

    def format(self, word: Iterable[int], sep: str = "") -> str:
        return sep.join(self.symbol(x) for x in word)


def letter_rank(letter: int) -> int:
    return 2 * abs(letter) - (1 if letter > 0 else 0)


def shortlex_key(word: Word):
    return (len(word), tuple(2 * abs(x) - (x > 0) for x in word))


def free_reduce(letters: Iterable[int], alphabet: Alphabet | None = None) -> Word:
    if alphabet is not None:
        letters = tuple(letters)
        alphabet.check(letters)
    stack: list[int] = []
    for x in letters:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


def word_mul(u: Word, v: Word) -> Word:
    """Product of two freely reduced words (cancels only at the junction)."""
    i = 0
    n = min(len(u), len(v))
    while i < n and u[-1 - i] == -v[i]:
        i += 1
    if i == 0:
        return u + v
    return u[: len(u) - i] + v[i:]


def word_inv(u: Word) -> Word:
    return tuple(-x for x in reversed(u))


def word_pow(u: Word, n: int) -> Word:
    if n < 0:
        u, n = word_inv(u), -n
    out: Word = ()
    for _ in range(n):
        out = word_mul(out, u)
    return out


def cyclic_reduce(w: Word) -> tuple[Word, Word]:
    """Return ``(s, r)`` with ``w = s r s^-1`` and ``r`` cyclically reduced."""
    w = free_reduce(w)
    i = 0
    while 2 * i + 1 < len(w) and w[i] == -w[-1 - i]:
        i += 1
    return w[:i], w[i: len(w) - i]


def is_cyclically_reduced(w: Word) -> bool:
    w = tuple(w)
    return free_reduce(w) == w and not (len(w) > 1 and w[0] == -w[-1])


def primitive_root(w: Word) -> tuple[Word, int]:
    """Least root ``r`` and exponent ``k`` with the cyclic word of ``w`` equal to ``r^k``."""
    _, r = cyclic_reduce(w)
    if not r:
        raise DegenerateInput("primitive_root of the empty word")
    n = len(r)
    for d in range(1, n + 1):
        if n % d == 0 and r[:d] * (n // d) == r:
            return r[:d], n // d
    raise AssertionError("unreachable")


def rotations(w: Word) -> list[Word]:
    return [w[i:] + w[:i] for i in range(len(w))]


# ---------------------------------------------------------------------------
# Presentations


@dataclass(frozen=True)
class Presentation:
    alphabet: Alphabet
    relators: tuple = ()

    def __post_init__(self):
        rels = tuple(tuple(r) for r in self.relators)
        for r in rels:
            if not r:
                raise DegenerateInput("empty relator")
            self.alphabet.check(r)
            if not is_cyclically_reduced(r):
                raise DegenerateInput(f"relator {self.alphabet.format(r)} is not cyclically reduced")
        object.__setattr__(self, "relators", rels)

    def symmetrized(self) -> list[Word]:
        out = []
        for r in self.relators:
            out += rotations(r)
            out += rotations(word_inv(r))
        return out


def parse_presentation(text: str) -> Presentation:
    """Parse the two-line-kind text format::

        gens: a b c d
        rel: a b A B c d C D
    """
    gens = None
    rels_text = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, rest = line.partition(":")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'gens:' or 'rel:'")
        head = head.strip()
        if head == "gens":
            if gens is not None:
                raise ValueError(f"line {lineno}: duplicate gens line")
            gens = Alphabet(rest.split())
        elif head == "rel":
            rels_text.append((lineno, rest))
        else:
            raise ValueError(f"line {lineno}: unknown header {head!r}")
    if gens is None:
        raise ValueError("missing 'gens:' line")
    rels = []
    for lineno, body in rels_text:
        try:
            rels.append(gens.parse(body))
        except AlphabetError as exc:
            raise AlphabetError(f"line {lineno}: {exc}") from None
    return Presentation(gens, tuple(rels))


def format_presentation(p: Presentation) -> str:
    lines = ["gens: " + " ".join(p.alphabet.names)]
    lines += ["rel: " + p.alphabet.format(r, sep=" ") for r in p.relators]
    return "\n".join(lines) + "\n"


def surface_presentation(genus: int = 2) -> Presentation:
    """``<a1 b1 ... | [a1,b1]...[ag,bg]>`` with names a, b, c, d, ... ."""
    names = [chr(ord("a") + i) for i in range(2 * genus)]
    rel = []
    for i in range(genus):
        x, y = 2 * i + 1, 2 * i + 2
        rel += [x, y, -x, -y]
    return Presentation(Alphabet(names), (tuple(rel),))


@dataclass(frozen=True)
class PieceReport:
    max_piece_length: int
    min_relator_length: int
    metric_ratio: Fraction
    threshold: Fraction
    satisfies: bool
    vacuous: bool = False


def _lcp(u: Word, v: Word) -> int:
    n = min(len(u), len(v))
    i = 0
    while i < n and u[i] == v[i]:
        i += 1
    return i


def check_small_cancellation(p: Presentation, threshold=Fraction(1, 6)) -> PieceReport:
    threshold = Fraction(threshold)
    if not p.relators:
        return PieceReport(0, 0, Fraction(0), threshold, True, vacuous=True)
    # a piece is a common prefix of two entries at distinct positions of the
    # symmetrized set; after sorting, the longest one sits between neighbours
    entries = sorted(p.symmetrized())
    best = 0
    for u, v in zip(entries, entries[1:]):
        best = max(best, _lcp(u, v))
    shortest = min(len(r) for r in p.relators)
    ratio = Fraction(best, shortest)
    return PieceReport(best, shortest, ratio, threshold, ratio < threshold)


# ---------------------------------------------------------------------------
# Dehn's algorithm


class _DehnTable:
    def __init__(self, p: Presentation):
        # prefix (more than half a relator conjugate) -> replacement word
        self.table: dict[Word, Word] = {}
        self.lengths: list[int] = []
        for r in p.symmetrized():
            n = len(r)
            for size in range(n // 2 + 1, n + 1):
                s = r[:size]
                repl = word_inv(r[size:])
                old = self.table.get(s)
                if old is None or shortlex_key(repl) < shortlex_key(old):
                    self.table[s] = repl
                self.lengths.append(size)
        self.lengths = sorted(set(self.lengths), reverse=True)


_DEHN_CACHE: dict[Presentation, _DehnTable] = {}


def _dehn_table(p: Presentation) -> _DehnTable:
    table = _DEHN_CACHE.get(p)
    if table is None:
        report = check_small_cancellation(p, Fraction(1, 6))
        if not report.satisfies:
            raise UnsupportedPresentation(
                f"presentation fails C'(1/6): piece ratio {report.metric_ratio}")
        table = _DEHN_CACHE[p] = _DehnTable(p)
    return table


def dehn_reduce(w: Word, p: Presentation) -> Word:
    """Dehn's algorithm: leftmost, then longest, more-than-half relator subword first."""
    table = _dehn_table(p)
    w = list(free_reduce(w))
    while True:
        hit = None
        for i in range(len(w)):
            for size in table.lengths:
                if i + size > len(w):
                    continue
                repl = table.table.get(tuple(w[i: i + size]))
                if repl is not None:
                    hit = (i, size, repl)
                    break
            if hit:
                break
        if hit is None:
            return tuple(w)
        i, size, repl = hit
        w = list(free_reduce(w[:i] + list(repl) + w[i + size:]))


# ---------------------------------------------------------------------------
# Base groups: free groups and C'(1/6) surface groups


class FreeGroup:
    """Free group on an alphabet; elements are reduced words."""

    mode = "free"

    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet
        self.letters = alphabet.letters
        self.identity: Word = ()

    def __repr__(self):
        return f"FreeGroup({' '.join(self.alphabet.names)})"

    def reduce(self, word: Iterable[int]) -> Word:
        return free_reduce(word)

    def element(self, word: Iterable[int]) -> Word:
        return free_reduce(word, self.alphabet)

    def mul(self, u: Word, v: Word) -> Word:
        return word_mul(u, v)

    def mul_letter(self, u: Word, x: int) -> Word:
        if u and u[-1] == -x:
            return u[:-1]
        return u + (x,)

    def inverse(self, u: Word) -> Word:
        return word_inv(u)

    def is_identity(self, u: Word) -> bool:
        return not free_reduce(u)

    def length(self, u: Word) -> int:
        return len(free_reduce(u))

    def spell(self, u: Word) -> Word:
        return u


class SurfaceGroup:
    """Group of a C'(1/6) presentation with shortlex-geodesic canonical words.

    Canonical words come from a memoized shortlex breadth-first enumeration of
    the ball of radius ``cap``; anything longer raises :class:`CapExceeded`.
    """

    mode = "surface"

    def __init__(self, presentation: Presentation, cap: int = 4):
        _dehn_table(presentation)
        self.presentation = presentation
        self.alphabet = presentation.alphabet
        self.letters = self.alphabet.letters
        self.identity: Word = ()
        self.cap = cap
        self._radius = 0
        self._layers: list[list[Word]] = [[()]]
        self._buckets: dict[tuple, list[Word]] = {self._abel(()): [()]}
        self._memo: dict[Word, Word] = {(): ()}

    def __repr__(self):
        return f"SurfaceGroup({format_presentation(self.presentation).strip()!r}, cap={self.cap})"

    def _abel(self, w: Word) -> tuple:
        v = [0] * len(self.alphabet)
        for x in w:
            v[abs(x) - 1] += 1 if x > 0 else -1
        return tuple(v)

    def _lookup(self, w: Word) -> Word | None:
        for v in self._buckets.get(self._abel(w), ()):
            if not dehn_reduce(w + word_inv(v), self.presentation):
                return v
        return None

    def _grow(self, radius: int) -> None:
        while self._radius < radius:
            nxt = []
            for w in self._layers[-1]:
                for x in self.letters:
                    if w and w[-1] == -x:
                        continue
                    v = w + (x,)
                    if self._lookup(v) is None:
                        self._buckets.setdefault(self._abel(v), []).append(v)
                        nxt.append(v)
            self._layers.append(nxt)
            self._radius += 1

    def reduce(self, word: Iterable[int]) -> Word:
        w = dehn_reduce(tuple(word), self.presentation)
        hit = self._memo.get(w)
        if hit is not None:
            return hit
        self._grow(min(len(w), self.cap))
        found = self._lookup(w)
        if found is None:
            raise CapExceeded(f"no geodesic of length <= {self.cap}", self.cap, best=w)
        self._memo[w] = found
        return found

    def element(self, word: Iterable[int]) -> Word:
        word = tuple(word)
        self.alphabet.check(word)
        return self.reduce(word)

    def mul(self, u: Word, v: Word) -> Word:
        return self.reduce(u + v)

    def mul_letter(self, u: Word, x: int) -> Word:
        return self.reduce(u + (x,))

    def inverse(self, u: Word) -> Word:
        return self.reduce(word_inv(u))

    def is_identity(self, u: Word) -> bool:
        return not dehn_reduce(tuple(u), self.presentation)

    def length(self, u: Word) -> int:
        return len(self.reduce(u))

    def spell(self, u: Word) -> Word:
        return u

    def ball_words(self, radius: int) -> list[Word]:
        self._grow(radius)
        return [w for layer in self._layers[: radius + 1] for w in layer]
