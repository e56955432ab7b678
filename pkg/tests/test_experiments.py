import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from amalgamlab.amalgam import HypothesisError, h_membership
from amalgamlab.experiments import (
    ExperimentSpec,
    exp_claim1,
    exp_claim2,
    exp_distortion,
    exp_gromov_escape,
    exp_vn_index,
    h_ball,
    least_d,
    ls_slope,
    twisted_conjugacy,
    validate_y,
)
from amalgamlab.metric import ball, distance
from amalgamlab.torus import Automorphism, TorusGroup, default_free_torus
from amalgamlab.words import (
    FreeGroup,
    SurfaceGroup,
    shortlex_key,
    surface_presentation,
    word_mul,
    word_pow,
)

G = default_free_torus()
F = G.base
p = F.alphabet.parse
Y = p("ab")


def brute_decomposition(n):
    u = word_pow(Y, n)
    span = 2 * len(u) + 4
    return min((shortlex_key(word_mul(word_pow((1,), -m), u)), m)
               for m in range(-span, span + 1))[1]


def test_validate_y_examples():
    assert validate_y(F, p("a"), p("ab"))
    res = validate_y(F, p("a"), p("aa"))
    assert not res and res.reason == "conjugate-power"
    res = validate_y(F, p("a"), p("abA"))
    assert not res and res.reason == "periodic-geodesic"
    assert validate_y(F, p("a"), ()).reason == "empty"
    assert validate_y(F, p("a"), p("A")).reason == "conjugate-power"
    # rotations count: y = ba^2... y^1 = b a B is not cyclically reduced, but aab vs x = aba
    assert validate_y(F, p("aab"), p("baa")).reason == "conjugate-power"


def test_validate_y_surface_is_partial():
    S = SurfaceGroup(surface_presentation(2))
    res = validate_y(S, (1,), (2,))
    assert res and res.partial


def test_twisted_conjugacy_detects_default_choice():
    assert twisted_conjugacy(G, p("a"), Y) == (-3, 1, 1)
    ident = Automorphism(F, {i: (i,) for i in (1, 2, 3)}, {i: (i,) for i in (1, 2, 3)})
    assert twisted_conjugacy(TorusGroup(F, ident), p("a"), Y) is None


def test_claim1_matches_brute_force(M):
    tab = exp_claim1(M, Y, range(-20, 21))
    assert tab.summary["K_hat"] == 1
    for n, m, c_len, u_len in tab.rows:
        assert m == brute_decomposition(n)
        assert c_len == abs(m) and u_len == 2 * abs(n) - (1 if m else 0)
    rows = {r[0]: r for r in tab.rows}
    assert all(rows[n][1] == 1 for n in range(1, 21))
    assert all(rows[n][1] == 0 for n in range(-20, 0))
    assert rows[0] == (0, 0, 0, 0)


def test_claim1_window_stable(M):
    ks = [exp_claim1(M, Y, range(1, N + 1)).summary["K_hat"] for N in range(5, 16)]
    assert set(ks) == {1}


def test_claim1_rejects_bad_y(M):
    with pytest.raises(HypothesisError) as info:
        exp_claim1(M, p("aa"), range(3))
    assert info.value.reason == "conjugate-power"


def test_claim2_tables(M, oracle):
    tab = exp_claim2(M, ["", "t1", "aaa"], Y, 8, exact_n_max=3, cap=6, oracle=oracle)
    rows = {(q, n): r for q, n, *r in tab.rows}
    assert all(rows[("1", n)][0] == 2 * n for n in range(9))
    assert all(rows[("t1", n)][0] == 2 * n + 1 for n in range(1, 9))
    assert all(rows[("aaa", n)][0] - 2 * n == 3 for n in range(9))
    assert tab.summary["slopes"] == {"1": "2", "t1": "2", "aaa": "2"}
    for (q, n), (proxy, exact, capped) in rows.items():
        if n <= 3:
            assert capped == "" and 0 <= proxy - exact <= 2
        else:
            assert exact == ""
    D = tab.summary["D_hat"]
    for (q, n), (proxy, exact, _) in rows.items():
        if exact != "":
            assert exact >= n / D - D - 1e-12


def test_claim2_rejects_bad_ending(M, oracle):
    with pytest.raises(HypothesisError) as info:
        exp_claim2(M, ["b"], Y, 2, oracle=oracle)
    assert info.value.reason == "bad-ending"
    exp_claim2(M, ["b t1"], Y, 1, exact_n_max=0, oracle=oracle)


@given(st.lists(st.tuples(st.integers(1, 30), st.integers(0, 60)), min_size=1, max_size=8))
def test_least_d_is_least(points):
    D = least_d(points)
    for n, l in points:
        assert l >= n / D - D - 1e-9
    # any smaller D breaks some point
    smaller = D * (1 - 1e-6)
    assert any(l < n / smaller - smaller for n, l in points)


def test_ls_slope_exact():
    assert ls_slope([0, 1, 2, 3], [1, 3, 5, 7]) == 2
    assert ls_slope([1], [4]) == 0
    assert ls_slope([0, 1, 2], [0, 1, 1]) == Fraction(1, 2)


def _brute_escape(M, z, n, radius):
    g = M.mul(M.parse(z), M.normalize(Y * n))
    lg = distance(M, M.identity, g, 6).value
    best = None
    for h, lh in h_ball(M, radius).dist.items():
        d = distance(M, h, g, 6).value
        prod = Fraction(lh + lg - d, 2)
        best = prod if best is None else max(best, prod)
    return best


@pytest.mark.parametrize("z", ["", "a", "t1"])
def test_escape_rows_match_brute_force(M, oracle, z):
    tab = exp_gromov_escape(M, z, Y, 2, 2, 6, oracle=oracle)
    for n, val, witness, capped in tab.rows:
        assert capped == ""
        assert Fraction(val) == _brute_escape(M, z, n, 2)
        h = M.parse(witness)
        assert h_membership(h)


def test_escape_identity_witness(M, oracle):
    tab = exp_gromov_escape(M, "", Y, 2, 1, 6, oracle=oracle)
    # h = y itself lies in the ball and has product |y|
    assert tab.rows[0] == (1, "2", "ab", "")


def test_escape_flags_caps(M):
    from amalgamlab.metric import DistanceOracle

    tiny = DistanceOracle(M, forward_radius=1)
    tab = exp_gromov_escape(M, "t1", Y, 2, 2, 1, oracle=tiny)
    assert any(r[3] == "1" for r in tab.rows)


def test_h_ball_is_exact(M):
    hb = h_ball(M, 3)
    full = ball(M, 3)
    assert hb.dist == {e: d for e, d in full.dist.items() if h_membership(e)}


def _brute_vn(M, g, radius):
    """Union-find over pairwise membership tests."""
    members = [h for h, d in h_ball(M, radius).dist.items()]
    gi = M.inverse(g)
    reps = []
    for h in members:
        for r in reps:
            k = M.mul(h, M.inverse(r))
            if h_membership(k) and h_membership(M.mul(M.mul(gi, k), g)):
                break
        else:
            reps.append(h)
    return len(reps)


@pytest.mark.parametrize("g", ["", "a", "aaa", "t", "t1", "b t"])
def test_vn_counts_match_pairwise_oracle(M, g):
    tab = exp_vn_index(M, g, [1, 2])
    for _, r, count in tab.rows:
        assert count == _brute_vn(M, M.parse(g), r)


def test_vn_examples(M):
    for g in ("", "a", "aaa"):
        assert {r[2] for r in exp_vn_index(M, g, range(1, 6)).rows} == {1}
    counts = [r[2] for r in exp_vn_index(M, "t", range(1, 6)).rows]
    assert all(a < b for a, b in zip(counts, counts[1:]))
    for g in ("t1", "b t", "t a1"):
        counts = [r[2] for r in exp_vn_index(M, g, range(0, 4)).rows]
        assert counts == sorted(counts)


def test_distortion_table_strings():
    tab = exp_distortion(G, (1,), 30)
    assert tab.rows[30][:3] == (30, 61, 3329)
    assert math.isclose(float(tab.rows[30][3]), 3329 / 61, abs_tol=1e-6)


def test_experiment_spec_label():
    assert ExperimentSpec("vn").output == "vn"
    assert ExperimentSpec("vn", label="vn_t").output == "vn_t"


def test_free_group_escape_sanity():
    assert FreeGroup(F.alphabet).length(p("abBA")) == 0
