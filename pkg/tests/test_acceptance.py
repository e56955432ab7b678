"""Acceptance criteria 1-10, each at its stated scale and tolerance.

Every test prints ``criterion N: PASS`` or ``criterion N: FAIL (...)``; the
lines are repeated in the terminal summary (see ``conftest.py``).  Run this
file alone with ``pytest tests/test_acceptance.py -v``.
"""

import random
import time
from fractions import Fraction

import pytest

from amalgamlab.amalgam import bgss_rewrite, default_amalgam, equal_in_M
from amalgamlab.config import ConfigError, parse_config
from amalgamlab.experiments import exp_claim1, exp_claim2, exp_distortion, exp_gromov_escape, exp_vn_index
from amalgamlab.metric import DistanceOracle, MirrorAmalgam, ball, estimate_delta
from amalgamlab.torus import default_free_torus
from amalgamlab.words import Alphabet, FreeGroup, shortlex_key, word_mul, word_pow

RESULTS: dict[int, str] = {}

M = default_amalgam()
G = default_free_torus()
Y = G.base.alphabet.parse("ab")


def verdict(n: int, failures: list) -> None:
    line = f"criterion {n}: " + ("PASS" if not failures else "FAIL (" + "; ".join(failures) + ")")
    RESULTS[n] = line
    print(line)
    assert not failures, line


def random_word(rng, max_len):
    return tuple(rng.choice(M.letters) for _ in range(rng.randint(0, max_len)))


@pytest.fixture(scope="module")
def oracle():
    return DistanceOracle(M, forward_radius=4)


def test_criterion_1_normal_form_soundness():
    rng = random.Random(1)
    mirror = MirrorAmalgam(M)
    failures = []
    start = time.perf_counter()
    for _ in range(10_000):
        w = random_word(rng, 12)
        z = M.normalize(w)
        rewritten = bgss_rewrite(M, z)
        z2 = M.normalize(rewritten)
        if z2 != z or bgss_rewrite(M, z2) != rewritten:
            failures.append(f"not idempotent on {M.alphabet.format(w)}")
        elif mirror.element(rewritten) != mirror.element(w):
            failures.append(f"value changed on {M.alphabet.format(w)}")
        if len(failures) > 3:
            break
    elapsed = time.perf_counter() - start
    if elapsed >= 10:
        failures.append(f"runtime {elapsed:.1f}s")
    verdict(1, failures)


def _perturb(rng, w):
    """An equal word: insert a cancelling pair or a defining relation somewhere."""
    i = rng.randint(0, len(w))
    kind = rng.randrange(3)
    if kind == 0:
        s = rng.choice(M.letters)
        ins = (s, -s)
    elif kind == 1:
        # a = a1 across the edge
        ins = (1, -5) if rng.random() < 0.5 else (-5, 1)
    else:
        # t f T = phi(f) in the left factor
        ins = (4, 1, -4, -2)
    return w[:i] + ins + w[i:]


def test_criterion_2_oracle_equivalence():
    mirror = MirrorAmalgam(M)
    b = ball(mirror, 6)
    index = {form: i for i, form in enumerate(sorted(b.dist, key=repr))}

    def key(w):
        form = mirror.element(w)
        if b.dist.get(form, 99) > len(w):
            raise AssertionError(f"{M.alphabet.format(w)} escaped the radius-6 ball")
        return index[form]

    rng = random.Random(2)
    failures, equal_pairs = [], 0
    for i in range(10_000):
        w1 = random_word(rng, 5)
        w2 = _perturb(rng, w1)[:5] if i % 2 else random_word(rng, 5)
        if i % 4 == 1:
            w2 = _perturb(rng, w1[:1])
            w1 = w1[:1]
        truth = key(w1) == key(w2)
        equal_pairs += truth
        if equal_in_M(M, M.normalize(w1), M.normalize(w2)) != truth:
            failures.append(f"{M.alphabet.format(w1)} vs {M.alphabet.format(w2)}")
            if len(failures) > 3:
                break
    if equal_pairs < 1000:
        failures.append(f"only {equal_pairs} equal pairs sampled")
    verdict(2, failures)


def test_criterion_3_growth_table():
    lengths = [len(G.phi.power_apply(n, (1,))) for n in range(31)]
    rec = [1, 1, 1]
    while len(rec) < 31:
        rec.append(rec[-2] + rec[-3])
    failures = []
    if lengths[:11] != [1, 1, 1, 2, 2, 3, 4, 5, 7, 9, 12]:
        failures.append(f"n<=10 gives {lengths[:11]}")
    if lengths[30] != 3329:
        failures.append(f"n=30 gives {lengths[30]}")
    if lengths != rec:
        failures.append("recurrence oracle disagrees")
    verdict(3, failures)


def test_criterion_4_distortion():
    tab = exp_distortion(G, (1,), 30)
    rows = tab.rows
    ratios = [Fraction(r[2], r[1]) for r in rows]
    failures = []
    if rows[30][2] / rows[30][1] < 50:
        failures.append(f"ratio at 30 is {rows[30][3]}")
    if tab.summary["capped_rows"]:
        failures.append("capped rows present")
    if any(a >= b for a, b in zip(ratios[10:], ratios[11:])):
        failures.append("ratio not strictly increasing from n=10")
    verdict(4, failures)


def test_criterion_5_claim1():
    tab = exp_claim1(M, Y, range(-20, 21))
    failures = []
    if tab.summary["K_hat"] != 1:
        failures.append(f"K_hat = {tab.summary['K_hat']}")
    for n, m, *_ in tab.rows:
        u = word_pow(Y, n)
        span = 2 * len(u) + 4
        brute = min((shortlex_key(word_mul(word_pow((1,), -j), u)), j)
                    for j in range(-span, span + 1))[1]
        if brute != m:
            failures.append(f"n={n}: m={m}, brute force {brute}")
    verdict(5, failures)


def test_criterion_6_claim2(oracle):
    tab = exp_claim2(M, ["", "t1"], Y, 8, exact_n_max=3, cap=6, oracle=oracle)
    D = tab.summary["D_hat"]
    failures = []
    if tab.summary["slopes"]["1"] != "2":
        failures.append(f"identity slope {tab.summary['slopes']['1']}")
    for q, n, proxy, exact, capped in tab.rows:
        if q == "1" and proxy != 2 * n:
            failures.append(f"identity proxy {proxy} at n={n}")
        if q != "t1" or n > 3:
            continue
        if capped or exact == "":
            failures.append(f"t1 n={n} not resolved")
            continue
        if exact < n / D - D - 1e-12:
            failures.append(f"t1 n={n}: {exact} < n/D - D")
        if not 0 <= proxy - exact <= 2:
            failures.append(f"t1 n={n}: proxy {proxy} vs exact {exact}")
    verdict(6, failures)


def test_criterion_7_escape_dichotomy(oracle):
    start = time.perf_counter()
    tables = {z: exp_gromov_escape(M, z, Y, 3, 3, 6, oracle=oracle) for z in ("a", "t1")}
    elapsed = time.perf_counter() - start
    failures = []
    maxima = {}
    for z, tab in tables.items():
        maxima[z] = [Fraction(r[1]) for r in tab.rows]
        if any(r[3] for r in tab.rows):
            failures.append(f"z={z} has capped rows")
        print(f"  z={z}: " + ", ".join(f"n={r[0]} max={r[1]} via {r[2] or '1'}" for r in tab.rows))
    a, t1 = maxima["a"], maxima["t1"]
    if any(x >= y for x, y in zip(a, a[1:])):
        failures.append(f"z=a maxima {', '.join(map(str, a))} not strictly increasing")
    if len(set(t1)) != 1:
        failures.append(f"z=t1 maxima {', '.join(map(str, t1))} not constant")
    if elapsed >= 300:
        failures.append(f"runtime {elapsed:.0f}s")
    verdict(7, failures)


def test_criterion_8_virtual_normalizer():
    failures = []
    t_counts = [r[2] for r in exp_vn_index(M, "t", range(1, 6)).rows]
    if any(x >= y for x, y in zip(t_counts, t_counts[1:])):
        failures.append(f"g=t counts {t_counts}")
    for g in ("", "a", "aaa"):
        counts = {r[2] for r in exp_vn_index(M, g, range(1, 6)).rows}
        if counts != {1}:
            failures.append(f"g={g or '1'} counts {sorted(counts)}")
    verdict(8, failures)


def test_criterion_9_metric_substrate(oracle):
    F2 = FreeGroup(Alphabet(["a", "b"]))
    failures = []
    sizes = [len(ball(F2, r)) for r in range(4)]
    closed = [1 + sum(4 * 3 ** i for i in range(r)) for r in range(4)]
    if sizes != closed or sizes != [1, 5, 17, 53]:
        failures.append(f"ball sizes {sizes}")
    est = estimate_delta(F2, 3, exhaustive=True)
    if est.delta_hat != 0:
        failures.append(f"free delta {est.delta_hat}")
    rng = random.Random(9)
    checked = 0
    while checked < 1000:
        g, h, k = (M.normalize(random_word(rng, 4)) for _ in range(3))
        pairs = [oracle.distance(u, v, 6) for u, v in ((g, h), (h, g), (g, k), (k, h))]
        if not all(r.exact for r in pairs):
            continue
        checked += 1
        dgh, dhg, dgk, dkh = (r.value for r in pairs)
        if dgh != dhg or dgh > dgk + dkh or (dgh == 0) != (g == h):
            failures.append(f"axioms fail on {M.format(g)}, {M.format(h)}, {M.format(k)}")
            break
    verdict(9, failures)


def test_criterion_10_hypothesis_gates():
    failures = []
    for edge, reason in (('x = "aa"', "proper-power"),
                         ('y = "a"', "conjugate-power"),
                         ('y = "abA"', "periodic-geodesic")):
        try:
            parse_config(f"[edge]\n{edge}\n")
            failures.append(f"{edge} accepted")
        except ConfigError as exc:
            if exc.reason != reason:
                failures.append(f"{edge}: reason {exc.reason}, expected {reason}")
    verdict(10, failures)
