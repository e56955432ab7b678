import pytest
from hypothesis import given
from hypothesis import strategies as st

from amalgamlab.torus import (
    DEFAULT_BACKWARD,
    DEFAULT_FORWARD,
    SURFACE_BACKWARD,
    SURFACE_FORWARD,
    Automorphism,
    AutomorphismError,
    TorusElement,
    TorusGroup,
    aut_power_apply,
    base_membership,
    default_free_torus,
    growth_profile,
)
from amalgamlab.words import (
    Alphabet,
    AlphabetError,
    FreeGroup,
    SurfaceGroup,
    free_reduce,
    surface_presentation,
    word_inv,
)

G = default_free_torus()
F = G.base
phi = G.phi
p = F.alphabet.parse


def recurrence(n):
    L = [1, 1, 1]
    while len(L) <= n:
        L.append(L[-2] + L[-3])
    return L[n]


def fold_right(word):
    """Oracle: build ``u t^k`` by multiplying letters on the left."""
    u, k = (), 0
    for x in reversed(word):
        if abs(x) == G.t:
            u = phi.apply(u, "forward" if x > 0 else "backward")
            k += 1 if x > 0 else -1
        else:
            u = free_reduce((x,) + u)
    return TorusElement(u, k)


torus_words = st.lists(st.sampled_from(G.letters), max_size=14)
base_words = st.lists(st.sampled_from(F.letters), max_size=10)


def test_apply_examples():
    assert phi.apply(()) == ()
    assert phi.apply(p("ab")) == p("bc")
    assert phi.apply(p("b"), "backward") == p("a")
    with pytest.raises(ValueError):
        phi.apply(p("a"), "sideways")


def test_power_examples():
    assert aut_power_apply(phi, 0, p("abC")) == p("abC")
    assert aut_power_apply(phi, 3, p("a")) == p("ab")
    assert len(aut_power_apply(phi, 10, p("a"))) == 12
    assert aut_power_apply(phi, -1, p("a")) == p("cA")


def test_normalize_examples():
    q = G.alphabet.parse
    assert G.normalize(q("taT")) == TorusElement(p("b"), 0)
    assert G.normalize(q("at")) == TorusElement(p("a"), 1)
    assert G.normalize(q("tt")) == TorusElement((), 2)


def test_mul_inv_examples():
    assert G.mul(TorusElement(p("a"), 1), TorusElement((), -1)) == TorusElement(p("a"), 0)
    assert G.mul(TorusElement((), 1), TorusElement(p("a"), 0)) == TorusElement(p("b"), 1)
    assert G.inverse(TorusElement(p("a"), 1)) == TorusElement(p("aC"), -1)


def test_base_membership_examples():
    assert base_membership(TorusElement(p("ab"), 0))
    assert not base_membership(TorusElement((), 1))
    assert base_membership(G.normalize(G.alphabet.parse("taT")))


def test_growth_matches_recurrence():
    prof = growth_profile(phi, p("a"), 10)
    assert prof.lengths == (1, 1, 1, 2, 2, 3, 4, 5, 7, 9, 12)
    long = growth_profile(phi, p("a"), 30)
    assert long.lengths[30] == 3329 == recurrence(30)
    assert all(long.lengths[n] == recurrence(n) for n in range(31))
    assert abs(long.estimated_rate - 1.3247) < 1e-3
    ident = Automorphism(F, {1: (1,), 2: (2,), 3: (3,)}, {1: (1,), 2: (2,), 3: (3,)})
    flat = growth_profile(ident, p("ab"), 6)
    assert set(flat.lengths) == {2} and flat.estimated_rate == 1
    assert growth_profile(phi, p("a"), 0).lengths == (1,)
    with pytest.raises(ValueError):
        growth_profile(phi, (), 3)


def test_missing_table_rejected():
    with pytest.raises(AutomorphismError):
        Automorphism.from_text(F, DEFAULT_FORWARD, {"a": "cA", "b": "a"})


def test_non_inverse_tables_rejected():
    bad = Automorphism.from_text(F, DEFAULT_FORWARD, {"a": "a", "b": "a", "c": "b"})
    with pytest.raises(AutomorphismError):
        bad.validate()


def test_surface_automorphism_validates():
    S = SurfaceGroup(surface_presentation(2))
    psi = Automorphism.from_text(S, SURFACE_FORWARD, SURFACE_BACKWARD)
    psi.validate([S.alphabet.parse("abA")])
    T = TorusGroup(S, psi)
    b = S.alphabet.parse("b")
    assert T.normalize((T.t,) + b + (-T.t,)) == TorusElement(S.alphabet.parse("ba"), 0)


def test_surface_automorphism_must_preserve_relator():
    S = SurfaceGroup(surface_presentation(2))
    psi = Automorphism.from_text(S, {"a": "b", "b": "a", "c": "c", "d": "d"},
                                 {"a": "b", "b": "a", "c": "c", "d": "d"})
    with pytest.raises(AutomorphismError):
        psi.validate()


@given(torus_words)
def test_normalize_matches_right_fold(w):
    assert G.normalize(w) == fold_right(w)


@given(torus_words, torus_words)
def test_mul_agrees_with_concatenation(w1, w2):
    assert G.mul(G.normalize(w1), G.normalize(w2)) == G.normalize(w1 + w2)


@given(torus_words)
def test_inverse_law(w):
    g = G.normalize(w)
    assert G.is_identity(G.mul(g, G.inverse(g)))
    assert G.is_identity(G.mul(G.inverse(g), g))


@given(base_words, st.integers(-8, 8))
def test_conjugation_law(f, n):
    t = (G.t,) if n >= 0 else (-G.t,)
    word = t * abs(n) + tuple(f) + tuple(-x for x in t) * abs(n)
    assert G.normalize(word) == TorusElement(phi.power_apply(n, free_reduce(f)), 0)


@given(base_words, base_words)
def test_automorphism_is_invertible_homomorphism(u, v):
    u, v = free_reduce(u), free_reduce(v)
    assert phi.apply(phi.apply(u), "backward") == u
    assert phi.apply(free_reduce(u + v)) == free_reduce(phi.apply(u) + phi.apply(v))


def test_stable_letter_name_clash():
    base = FreeGroup(Alphabet(["a", "t"]))
    ident = Automorphism(base, {1: (1,), 2: (2,)}, {1: (1,), 2: (2,)})
    with pytest.raises(AlphabetError):
        TorusGroup(base, ident, "t")
    with pytest.raises(AutomorphismError):
        TorusGroup(FreeGroup(Alphabet(["a", "t"])), ident, "s")


def test_format_round_trip():
    g = G.normalize(G.alphabet.parse("abTT"))
    assert G.alphabet.parse(G.format(g)) == G.spell(g)
    assert G.normalize(G.spell(g)) == g
    assert G.normalize(word_inv(G.spell(g))) == G.inverse(g)
