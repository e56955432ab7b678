"""Mapping tori ``G = <F, t | t f t^-1 = phi(f)>`` with normal forms ``u t^k``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .words import (
    Alphabet,
    AlphabetError,
    CapExceeded,
    FreeGroup,
    SurfaceGroup,
    Word,
    word_inv,
)


class AutomorphismError(ValueError):
    pass


class TorusElement(NamedTuple):
    """The element ``u t^k`` of a mapping torus."""

    u: Word
    k: int


class Automorphism:
    """An automorphism of a base group given by generator image tables.

    Images of powers are memoized per exponent on generators only.  The memo
    grows monotonically and is never mutated in place.
    """

    def __init__(self, base, forward: dict[int, Word], backward: dict[int, Word]):
        self.base = base
        n = len(base.alphabet)
        for name, table in (("forward", forward), ("backward", backward)):
            missing = [base.alphabet.names[i - 1] for i in range(1, n + 1) if i not in table]
            if missing:
                raise AutomorphismError(f"{name} table missing generators {missing}")
        self.forward = {g: base.element(w) for g, w in forward.items()}
        self.backward = {g: base.element(w) for g, w in backward.items()}
        self._powers: dict[int, dict[int, Word]] = {
            0: {g: (g,) for g in range(1, n + 1)},
            1: dict(self.forward),
            -1: dict(self.backward),
        }

    @classmethod
    def from_text(cls, base, forward: dict[str, str], backward: dict[str, str]):
        a = base.alphabet
        try:
            fw = {a.letter(k): a.parse(v) for k, v in forward.items()}
            bw = {a.letter(k): a.parse(v) for k, v in backward.items()}
        except AlphabetError as exc:
            raise AutomorphismError(str(exc)) from None
        return cls(base, fw, bw)

    def images(self, n: int) -> dict[int, Word]:
        table = self._powers.get(n)
        if table is None:
            step = 1 if n > 0 else -1
            prev = self.images(n - step)
            one = self._powers[step]
            table = {g: self._substitute(one, w, strict=False) for g, w in prev.items()}
            self._powers[n] = table
        return table

    def _substitute(self, table: dict[int, Word], w: Iterable[int], strict: bool = True) -> Word:
        out = []
        for x in w:
            out.extend(table[x] if x > 0 else word_inv(table[-x]))
        try:
            return self.base.reduce(out)
        except CapExceeded as exc:
            # past the canonical-form cap: keep the Dehn-reduced word
            if strict:
                raise
            return exc.best

    def image_word(self, n: int, w: Word) -> Word:
        """A word for ``phi^n(w)``; canonical unless a surface cap was hit."""
        self.base.alphabet.check(w)
        return self._substitute(self.images(n), w, strict=False)

    def apply(self, w: Word, direction: str = "forward") -> Word:
        if direction not in ("forward", "backward"):
            raise ValueError(f"direction must be forward or backward, not {direction!r}")
        self.base.alphabet.check(w)
        return self._substitute(self.forward if direction == "forward" else self.backward, w)

    def power_apply(self, n: int, w: Word) -> Word:
        self.base.alphabet.check(w)
        if n == 0:
            return self.base.reduce(w)
        return self._substitute(self.images(n), w)

    def validate(self, samples: Iterable[Word] = ()) -> None:
        """Check ``backward o forward`` and ``forward o backward`` fix generators and samples.

        For a surface base the images of each relator must also be trivial.
        """
        base = self.base
        n = len(base.alphabet)
        words = [(g,) for g in range(1, n + 1)] + [tuple(w) for w in samples]
        for w in words:
            there = self.apply(self.apply(w, "forward"), "backward")
            back = self.apply(self.apply(w, "backward"), "forward")
            if not base.is_identity(there + word_inv(w)) or not base.is_identity(back + word_inv(w)):
                raise AutomorphismError(
                    f"tables are not mutually inverse on {base.alphabet.format(w)}")
        if isinstance(base, SurfaceGroup):
            for r in base.presentation.relators:
                for table in (self.forward, self.backward):
                    image = []
                    for x in r:
                        image.extend(table[x] if x > 0 else word_inv(table[-x]))
                    if not base.is_identity(tuple(image)):
                        raise AutomorphismError("relator image is not trivial")


def aut_power_apply(phi: Automorphism, n: int, w: Word) -> Word:
    return phi.power_apply(n, w)


class TorusGroup:
    """The mapping torus of ``phi``; the stable letter ``t`` is letter ``len(base)+1``."""

    def __init__(self, base, phi: Automorphism, t_name: str = "t"):
        if phi.base is not base:
            raise AutomorphismError("automorphism belongs to a different base group")
        self.base = base
        self.phi = phi
        self.n = len(base.alphabet)
        self.t = self.n + 1
        names = list(base.alphabet.names)
        if t_name in names:
            raise AlphabetError(f"stable letter {t_name!r} clashes with a base generator")
        self.alphabet = Alphabet(names + [t_name])
        self.letters = self.alphabet.letters
        self.identity = TorusElement((), 0)

    def __repr__(self):
        return f"TorusGroup({self.base!r})"

    @property
    def mode(self):
        return self.base.mode

    def _twist(self, k: int, x: int) -> Word:
        img = self.phi.images(k)
        return img[x] if x > 0 else word_inv(img[-x])

    def mul_letter(self, g: TorusElement, x: int) -> TorusElement:
        if x == self.t:
            return TorusElement(g.u, g.k + 1)
        if x == -self.t:
            return TorusElement(g.u, g.k - 1)
        if g.k == 0:
            return TorusElement(self.base.mul_letter(g.u, x), 0)
        return TorusElement(self.base.mul(g.u, self._twist(g.k, x)), g.k)

    def normalize(self, raw: Iterable[int]) -> TorusElement:
        """Collect a word over base letters and ``t`` into ``u t^k``."""
        raw = tuple(raw)
        self.alphabet.check(raw)
        g = self.identity
        for x in raw:
            g = self.mul_letter(g, x)
        return g

    element = normalize

    def mul(self, g: TorusElement, h: TorusElement) -> TorusElement:
        return TorusElement(self.base.mul(g.u, self.phi.power_apply(g.k, h.u)), g.k + h.k)

    def inverse(self, g: TorusElement) -> TorusElement:
        return TorusElement(self.phi.power_apply(-g.k, self.base.inverse(g.u)), -g.k)

    def is_identity(self, g: TorusElement) -> bool:
        return g.k == 0 and self.base.is_identity(g.u)

    def spell(self, g: TorusElement) -> Word:
        t = self.t if g.k > 0 else -self.t
        return tuple(g.u) + (t,) * abs(g.k)

    def format(self, g: TorusElement) -> str:
        return self.alphabet.format(self.spell(g))


def base_membership(g: TorusElement) -> bool:
    return g.k == 0


@dataclass(frozen=True)
class GrowthProfile:
    lengths: tuple
    estimated_rate: float


def growth_profile(phi: Automorphism, w: Word, N: int) -> GrowthProfile:
    if not w:
        raise ValueError("growth profile needs a nonempty word")
    lengths = tuple(phi.base.length(phi.power_apply(n, w)) for n in range(N + 1))
    rate = lengths[-1] / lengths[-2] if N >= 1 else 1.0
    return GrowthProfile(lengths, rate)


# presets ----------------------------------------------------------------

DEFAULT_FORWARD = {"a": "b", "b": "c", "c": "ab"}
DEFAULT_BACKWARD = {"a": "cA", "b": "a", "c": "b"}

SURFACE_FORWARD = {"a": "a", "b": "ba", "c": "c", "d": "dc"}
SURFACE_BACKWARD = {"a": "a", "b": "bA", "c": "c", "d": "dC"}


def default_free_torus(t_name: str = "t") -> TorusGroup:
    base = FreeGroup(Alphabet(["a", "b", "c"]))
    phi = Automorphism.from_text(base, DEFAULT_FORWARD, DEFAULT_BACKWARD)
    return TorusGroup(base, phi, t_name)
