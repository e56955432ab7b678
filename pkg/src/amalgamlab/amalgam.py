"""The cyclic amalgam ``M = G *_C G1`` and its coset-shortest normal form.

Elements are kept as :class:`AmalgamNF`: a strictly alternating tuple of
syllables in which every syllable but the last is the shortest (then
shortlex-least) element of its coset ``e C``, with the leftover power of the
edge generator carried into the next syllable.  The last syllable is the
full remaining element.  Spelling the syllables out gives the rewriting of
the automatic-structure construction for cyclic amalgams, and two elements
are equal iff their spellings agree.

An element of ``C`` is always stored as a single left syllable ``x^m``.
"""

from __future__ import annotations

import math
from typing import Iterable, NamedTuple

from .torus import TorusElement, TorusGroup
from .words import (
    Alphabet,
    CapExceeded,
    FreeGroup,
    Word,
    cyclic_reduce,
    is_cyclically_reduced,
    primitive_root,
    shortlex_key,
    word_inv,
    word_mul,
    word_pow,
)

LEFT, RIGHT = 0, 1


class HypothesisError(ValueError):
    """An input violates a hypothesis of the construction; ``reason`` is a short code."""

    def __init__(self, message: str, reason: str):
        super().__init__(message)
        self.reason = reason


class Syllable(NamedTuple):
    factor: int
    value: TorusElement


class AmalgamNF(NamedTuple):
    syllables: tuple = ()


class CosetDecomposition(NamedTuple):
    """``g = x^m u`` with ``u`` shortest in the coset ``C g``."""

    m: int
    u: TorusElement


IDENTITY = AmalgamNF(())


class AmalgamGroup:
    """``left *_C right`` with ``C = <x_left> = <x_right>``.

    Letters: left torus letters keep their codes ``1..nL+1``; right torus
    letter ``l`` becomes ``sign(l) * (|l| + nL + 1)``.  Right-hand generators
    print with a ``1`` suffix.
    """

    def __init__(self, left: TorusGroup, right: TorusGroup, x_left: Word, x_right: Word,
                 coset_window: int = 16):
        self.tori = (left, right)
        self.offset = left.n + 1
        xs = (left.base.element(x_left), right.base.element(x_right))
        for f, x in enumerate(xs):
            if not x:
                raise HypothesisError("edge word must be nonempty", "empty")
            if isinstance(self.tori[f].base, FreeGroup) and not is_cyclically_reduced(x):
                raise HypothesisError("edge word must be cyclically reduced", "not-cyclically-reduced")
        self.xs = xs
        self.coset_window = coset_window
        names = list(left.alphabet.names) + [n + "1" for n in right.alphabet.names]
        self.alphabet = Alphabet(names)
        self.letters = self.alphabet.letters
        self.identity = IDENTITY
        self._right_memo: dict = {}
        self._left_memo: dict = {}
        self._cpow_memo: dict = {}
        self._celem_memo: dict = {}

    def __repr__(self):
        return (f"AmalgamGroup(x={self.tori[0].base.alphabet.format(self.xs[0])}, "
                f"x1={self.tori[1].base.alphabet.format(self.xs[1])})")

    @property
    def mode(self):
        return self.tori[0].mode

    # -- letters ---------------------------------------------------------

    def split(self, code: int) -> tuple[int, int]:
        a = abs(code)
        if a <= self.offset:
            return LEFT, code
        return RIGHT, (a - self.offset) * (1 if code > 0 else -1)

    def join(self, factor: int, letter: int) -> int:
        if factor == LEFT:
            return letter
        return letter + self.offset if letter > 0 else letter - self.offset

    def t_letter(self, factor: int) -> int:
        return self.join(factor, self.tori[factor].t)

    # -- edge group ------------------------------------------------------

    def edge_membership(self, factor: int, g: TorusElement) -> int | None:
        """``m`` with ``g = x^m`` in the given factor, or ``None``."""
        key = (factor, g)
        if key in self._cpow_memo:
            return self._cpow_memo[key]
        out = self._edge_power(factor, g)
        self._cpow_memo[key] = out
        return out

    def _edge_power(self, factor, g):
        if g.k != 0:
            return None
        u = g.u
        if not u:
            return 0
        x = self.xs[factor]
        base = self.tori[factor].base
        if isinstance(base, FreeGroup):
            if len(u) % len(x):
                return None
            m = len(u) // len(x)
            if u == x * m:
                return m
            if u == word_inv(x) * m:
                return -m
            return None
        # Dehn's algorithm decides u x^-m = 1 without any cap
        for m in range(1, self.coset_window + 1):
            for s in (m, -m):
                if base.is_identity(u + word_pow(x, -s)):
                    return s
        return None

    def c_element(self, factor: int, m: int) -> TorusElement:
        key = (factor, m)
        e = self._celem_memo.get(key)
        if e is None:
            base = self.tori[factor].base
            e = self._celem_memo[key] = TorusElement(base.reduce(word_pow(self.xs[factor], m)), 0)
        return e

    # -- coset-shortest representatives -----------------------------------

    def coset_right(self, factor: int, g: TorusElement) -> tuple[TorusElement, int]:
        """``(w, m)`` with ``g = w x^m`` and ``w`` shortest, then shortlex-least, in ``g C``."""
        key = (factor, g)
        hit = self._right_memo.get(key)
        if hit is not None:
            return hit
        torus = self.tori[factor]
        # g x^m = (u phi^k(x)^m, k)
        z = torus.phi.power_apply(g.k, self.xs[factor])
        best = None
        if isinstance(torus.base, FreeGroup):
            s, r = cyclic_reduce(z)
            us = word_mul(g.u, s)
            window = math.ceil((len(g.u) + len(us) + len(s)) / len(r))
            tail = word_inv(s)
            for m in range(-window, window + 1):
                cand = word_mul(word_mul(us, word_pow(r, m)), tail)
                ck = shortlex_key(cand)
                if best is None or ck < best[0]:
                    best = (ck, cand, m)
        else:
            for m in range(-self.coset_window, self.coset_window + 1):
                try:
                    cand = torus.base.reduce(g.u + word_pow(z, m))
                except CapExceeded:
                    # longer than the cap, hence longer than m = 0
                    continue
                ck = shortlex_key(cand)
                if best is None or ck < best[0]:
                    best = (ck, cand, m)
        # cand = g x^m, so g = cand x^-m
        out = (TorusElement(best[1], g.k), -best[2])
        self._right_memo[key] = out
        return out

    def coset_shortest(self, factor: int, g: TorusElement) -> CosetDecomposition:
        """``g = x^m u`` with ``u`` shortest, then shortlex-least, in ``C g``."""
        key = (factor, g)
        hit = self._left_memo.get(key)
        if hit is not None:
            return hit
        base = self.tori[factor].base
        x = self.xs[factor]
        best = None
        if isinstance(base, FreeGroup):
            # x cyclically reduced: |x^-m u| >= |m||x| - |u|
            window = len(g.u) + 1
            for m in range(-window, window + 1):
                cand = word_mul(word_pow(x, -m), g.u)
                ck = shortlex_key(cand)
                if best is None or ck < best[0]:
                    best = (ck, cand, m)
        else:
            for m in range(-self.coset_window, self.coset_window + 1):
                try:
                    cand = base.reduce(word_pow(x, -m) + g.u)
                except CapExceeded:
                    continue
                ck = shortlex_key(cand)
                if best is None or ck < best[0]:
                    best = (ck, cand, m)
        out = CosetDecomposition(best[2], TorusElement(best[1], g.k))
        self._left_memo[key] = out
        return out

    # -- normal forms ------------------------------------------------------

    def _single(self, factor: int, g: TorusElement) -> AmalgamNF:
        torus = self.tori[factor]
        if torus.is_identity(g):
            return IDENTITY
        p = self.edge_membership(factor, g)
        if p is not None:
            return AmalgamNF((Syllable(LEFT, self.c_element(LEFT, p)),))
        return AmalgamNF((Syllable(factor, g),))

    def _replace_last(self, prefix: tuple, factor: int, g: TorusElement) -> AmalgamNF:
        if not prefix:
            return self._single(factor, g)
        if self.tori[factor].is_identity(g):
            return AmalgamNF(prefix)
        p = self.edge_membership(factor, g)
        if p is None:
            return AmalgamNF(prefix + (Syllable(factor, g),))
        prev = prefix[-1]
        merged = self.tori[prev.factor].mul(prev.value, self.c_element(prev.factor, p))
        return AmalgamNF(prefix[:-1] + (Syllable(prev.factor, merged),))

    def mul_letter(self, z: AmalgamNF, code: int) -> AmalgamNF:
        f, letter = self.split(code)
        torus = self.tori[f]
        syl = z.syllables
        if not syl:
            return self._single(f, torus.mul_letter(torus.identity, letter))
        last = syl[-1]
        if last.factor == f:
            return self._replace_last(syl[:-1], f, torus.mul_letter(last.value, letter))
        y = last.factor
        if len(syl) == 1:
            p = self.edge_membership(y, last.value)
            if p is not None:
                return self._single(f, torus.mul_letter(self.c_element(f, p), letter))
        rep, m = self.coset_right(y, last.value)
        new = torus.mul_letter(self.c_element(f, m), letter)
        p = self.edge_membership(f, new)
        if p is not None:
            merged = self.tori[y].mul(last.value, self.c_element(y, p - m))
            return AmalgamNF(syl[:-1] + (Syllable(y, merged),))
        return AmalgamNF(syl[:-1] + (Syllable(y, rep), Syllable(f, new)))

    def reduce_syllables(self, syllables: Iterable[tuple[int, TorusElement]]) -> list[Syllable]:
        """Merge an arbitrary syllable sequence into a strictly alternating one.

        No syllable of the result lies in ``C`` unless it is the only one, in
        which case it sits in the left factor.
        """
        stack: list[Syllable] = []
        for f, g in syllables:
            torus = self.tori[f]
            if stack and stack[-1].factor == f:
                g = torus.mul(stack.pop().value, g)
            if torus.is_identity(g):
                continue
            p = self.edge_membership(f, g)
            if p is not None:
                if stack:
                    top = stack.pop()
                    merged = self.tori[top.factor].mul(top.value, self.c_element(top.factor, p))
                    if not self.tori[top.factor].is_identity(merged):
                        stack.append(Syllable(top.factor, merged))
                else:
                    stack.append(Syllable(LEFT, self.c_element(LEFT, p)))
                continue
            if len(stack) == 1:
                q = self.edge_membership(stack[0].factor, stack[0].value)
                if q is not None:
                    stack.pop()
                    g = torus.mul(self.c_element(f, q), g)
            stack.append(Syllable(f, g))
        return stack

    def canonicalize(self, syllables: Iterable[tuple[int, TorusElement]]) -> AmalgamNF:
        stack = self.reduce_syllables(syllables)
        if len(stack) <= 1:
            return AmalgamNF(tuple(stack))
        out = []
        carry = 0
        for f, g in stack[:-1]:
            if carry:
                g = self.tori[f].mul(self.c_element(f, carry), g)
            rep, carry = self.coset_right(f, g)
            out.append(Syllable(f, rep))
        f, g = stack[-1]
        if carry:
            g = self.tori[f].mul(self.c_element(f, carry), g)
        out.append(Syllable(f, g))
        return AmalgamNF(tuple(out))

    def runs(self, raw: Iterable[int]) -> list[tuple[int, TorusElement]]:
        """Split a raw word into maximal single-factor runs, torus-normalized."""
        out = []
        current, letters = None, []
        for code in raw:
            f, letter = self.split(code)
            if f != current and letters:
                out.append((current, self.tori[current].normalize(letters)))
                letters = []
            current = f
            letters.append(letter)
        if letters:
            out.append((current, self.tori[current].normalize(letters)))
        return out

    def normalize(self, raw: Iterable[int]) -> AmalgamNF:
        raw = tuple(raw)
        self.alphabet.check(raw)
        return self.canonicalize(self.runs(raw))

    element = normalize

    def parse(self, text: str) -> AmalgamNF:
        return self.normalize(self.alphabet.parse(text))

    def mul(self, a: AmalgamNF, b: AmalgamNF) -> AmalgamNF:
        if not b.syllables:
            return a
        if not a.syllables:
            return b
        return self.canonicalize(a.syllables + b.syllables)

    def inverse(self, z: AmalgamNF) -> AmalgamNF:
        return self.canonicalize(
            (s.factor, self.tori[s.factor].inverse(s.value)) for s in reversed(z.syllables))

    # -- queries -------------------------------------------------------------

    def rewrite(self, z: AmalgamNF) -> Word:
        """Spell the normal form as a word over the combined alphabet."""
        out = []
        for f, g in z.syllables:
            out.extend(self.join(f, x) for x in self.tori[f].spell(g))
        return tuple(out)

    spell = rewrite

    def format(self, z: AmalgamNF, sep: str = "") -> str:
        return self.alphabet.format(self.rewrite(z), sep)

    def equal(self, a: AmalgamNF, b: AmalgamNF) -> bool:
        return self.rewrite(a) == self.rewrite(b)

    def in_c(self, z: AmalgamNF) -> bool:
        syl = z.syllables
        if not syl:
            return True
        return len(syl) == 1 and self.edge_membership(syl[0].factor, syl[0].value) is not None

    def syllable_length(self, z: AmalgamNF) -> int:
        return 0 if self.in_c(z) else len(z.syllables)

    def is_identity(self, z: AmalgamNF) -> bool:
        return not z.syllables

    def t_exponents(self, z: AmalgamNF) -> tuple[int, int]:
        """Images under the two maps ``M -> Z`` counting ``t`` and ``t1``."""
        k = [0, 0]
        for f, g in z.syllables:
            k[f] += g.k
        return k[0], k[1]

    def mirror_form(self, z: AmalgamNF) -> tuple:
        """Right-to-left normal form: every syllable but the first is shortest in ``C e``.

        Independent of :meth:`coset_right`; used as a cross-check and for
        right-coset keys of ``H``.
        """
        syl = z.syllables
        if len(syl) <= 1:
            return tuple(syl)
        out = []
        carry = 0
        for f, g in reversed(syl[1:]):
            if carry:
                g = self.tori[f].mul(g, self.c_element(f, carry))
            carry, u = self.coset_shortest(f, g)
            out.append(Syllable(f, u))
        f, g = syl[0]
        if carry:
            g = self.tori[f].mul(g, self.c_element(f, carry))
        out.append(Syllable(f, g))
        return tuple(reversed(out))

    def h_coset_key(self, z: AmalgamNF) -> tuple:
        """A key that is equal for ``z``, ``z'`` iff ``H z = H z'``.

        Strip the leading syllables that lie in ``F`` or ``F1``; the coset is
        then fixed by the factor and ``t``-exponent of the first remaining
        syllable together with the mirror-form tail after it.
        """
        form = self.mirror_form(z)
        for i, (f, g) in enumerate(form):
            if g.k != 0:
                return (f, g.k) + tuple(form[i + 1:])
        return ()


def h_membership(z: AmalgamNF) -> bool:
    """``z`` lies in ``H = <F, F1>`` iff every syllable has ``t``-exponent 0."""
    return all(s.value.k == 0 for s in z.syllables)


def bgss_rewrite(group: AmalgamGroup, z: AmalgamNF) -> Word:
    return group.rewrite(z)


def equal_in_M(group: AmalgamGroup, a: AmalgamNF, b: AmalgamNF) -> bool:
    return group.equal(a, b)


def check_edge_word(base, x: Word) -> None:
    """Raise :class:`HypothesisError` unless ``x`` is a usable edge generator."""
    x = base.element(x)
    if not x:
        raise HypothesisError("edge word is empty", "empty")
    if isinstance(base, FreeGroup) and not is_cyclically_reduced(x):
        raise HypothesisError("edge word is not cyclically reduced", "not-cyclically-reduced")
    root, k = primitive_root(x)
    if k > 1:
        raise HypothesisError(
            f"edge word {base.alphabet.format(x)} is a proper power "
            f"({base.alphabet.format(root)})^{k}", "proper-power")


def default_amalgam() -> AmalgamGroup:
    from .torus import default_free_torus

    g = default_free_torus()
    return AmalgamGroup(g, g, (1,), (1,))
