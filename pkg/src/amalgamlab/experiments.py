"""Reproducible desk-scale experiments on the amalgam ``M = G *_C G1``.

Every experiment returns an object with ``header`` and ``rows`` suitable for
CSV output, plus whatever summary constants it estimates.  Nothing here
extrapolates past a cap: rows that could not be certified carry a flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .amalgam import (
    LEFT,
    AmalgamGroup,
    AmalgamNF,
    HypothesisError,
    check_edge_word,
    h_membership,
)
from .metric import (
    Ball,
    DistanceOracle,
    DistortionRow,
    ball,
    distortion_profile,
    estimate_delta,
    quasiconvexity_profile,
)
from .torus import TorusElement
from .words import (
    FreeGroup,
    Word,
    cyclic_reduce,
    is_cyclically_reduced,
    rotations,
    shortlex_key,
    word_inv,
    word_pow,
)


@dataclass(frozen=True)
class ExperimentSpec:
    """One named experiment with its parameters; ``seed`` feeds any sampling.

    ``label`` names the output file and defaults to ``name``.
    """

    name: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    label: str = ""

    @property
    def output(self) -> str:
        return self.label or self.name


@dataclass
class Table:
    name: str
    header: tuple
    rows: list
    summary: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# hypothesis gates


@dataclass(frozen=True)
class YCheck:
    ok: bool
    reason: str | None = None
    partial: bool = False
    detail: str = ""

    def __bool__(self):
        return self.ok


def _conjugate_powers(x: Word, y: Word, window: int):
    """First ``(k, m)`` with ``y^k`` a rotation of ``x^m``, both cyclically reduced."""
    for k in range(1, window + 1):
        yk = word_pow(y, k)
        if len(yk) % len(x):
            continue
        m = len(yk) // len(x)
        rots = set(rotations(yk))
        for s in (m, -m):
            if word_pow(x, s) in rots:
                return k, s
    return None


def validate_y(base, x: Word, y: Word, window: int = 8) -> YCheck:
    """Check the standing hypotheses on ``y`` relative to the edge word ``x``.

    In a free base ``y`` must be cyclically reduced (so ``|y^n| = |n||y|``)
    and no ``y^k`` with ``k <= window`` may be a cyclic rotation of a power
    of ``x``.  Lengths decide most pairs: equal-length powers are the only
    ones compared letter by letter.
    """
    if not isinstance(base, FreeGroup):
        try:
            y = base.element(y)
        except Exception as exc:  # capped surface reduction
            return YCheck(False, "capped", True, str(exc))
        if not y:
            return YCheck(False, "empty")
        return YCheck(True, None, True, "surface base: only emptiness is checked")
    y = tuple(y)
    if not y:
        return YCheck(False, "empty")
    if base.reduce(y) != y or not is_cyclically_reduced(y):
        return YCheck(False, "periodic-geodesic",
                      detail=f"|{base.alphabet.format(y)}^2| != 2|y|")
    hit = _conjugate_powers(base.reduce(x), y, window)
    if hit is not None:
        k, m = hit
        return YCheck(False, "conjugate-power", detail=f"y^{k} is conjugate to x^{m}")
    return YCheck(True)


def twisted_conjugacy(torus, x: Word, y: Word, window: int = 8, depth: int = 8):
    """Search ``phi^j(y^k) ~ x^m`` for ``|j| <= depth``, ``k <= window``.

    Such a hit means a power of ``y`` is conjugate to a power of ``x`` inside
    the mapping torus even though the free-group test passes.  Returns the
    first ``(j, k, m)`` found or ``None``.
    """
    if not isinstance(torus.base, FreeGroup):
        return None
    for j in sorted(range(-depth, depth + 1), key=abs):
        _, core = cyclic_reduce(torus.phi.power_apply(j, y))
        if not core:
            continue
        hit = _conjugate_powers(x, core, window)
        if hit is not None:
            return j, hit[0], hit[1]
    return None


def require_y(group: AmalgamGroup, y: Word, window: int = 8) -> YCheck:
    check_edge_word(group.tori[LEFT].base, group.xs[LEFT])
    res = validate_y(group.tori[LEFT].base, group.xs[LEFT], y, window)
    if not res:
        raise HypothesisError(f"y rejected: {res.reason} {res.detail}".strip(), res.reason)
    return res


def _y_element(group: AmalgamGroup, y: Word, n: int) -> AmalgamNF:
    """``y^n`` as an element of ``M``, ``y`` a word over the left base."""
    torus = group.tori[LEFT]
    return group._single(LEFT, TorusElement(torus.base.reduce(word_pow(y, n)), 0))


# ---------------------------------------------------------------------------
# Claim 1: bounded coset corrections


def exp_claim1(group: AmalgamGroup, y: Word, n_range: Iterable[int]) -> Table:
    """Decompose ``y^n = x^m u`` with ``u`` shortest in ``C y^n`` for each ``n``.

    ``K_hat`` is the largest ``|x^m|`` seen over the window.
    """
    require_y(group, y)
    torus = group.tori[LEFT]
    rows = []
    for n in n_range:
        g = TorusElement(torus.base.reduce(word_pow(y, n)), 0)
        dec = group.coset_shortest(LEFT, g)
        c_len = len(group.c_element(LEFT, dec.m).u)
        rows.append((n, dec.m, c_len, len(dec.u.u)))
    k_hat = max((r[2] for r in rows), default=0)
    return Table("claim1", ("n", "m", "c_length", "u_length"), rows, {"K_hat": k_hat})


# ---------------------------------------------------------------------------
# Claim 2: linear lower bound on l_M(q y^n)


def check_q(group: AmalgamGroup, q: AmalgamNF) -> None:
    """``q`` must lie in ``C`` or end with a syllable of ``G1 - C``."""
    if group.in_c(q):
        return
    last = q.syllables[-1]
    if last.factor != LEFT ^ 1:
        raise HypothesisError(
            f"{group.format(q) or '1'} neither lies in C nor ends in G1 - C", "bad-ending")


def least_d(points: Iterable[tuple[int, int]]) -> float:
    """Least ``D > 0`` with ``l >= n / D - D`` at every ``(n, l)``."""
    best = 0.0
    for n, l in points:
        if n > 0:
            best = max(best, (-l + math.sqrt(l * l + 4 * n)) / 2)
    return best


def ls_slope(xs: Sequence[int], ys: Sequence[int]) -> Fraction:
    n = len(xs)
    if n < 2:
        return Fraction(0)
    mx = Fraction(sum(xs), n)
    my = Fraction(sum(ys), n)
    num = sum((a - mx) * (b - my) for a, b in zip(xs, ys))
    den = sum((a - mx) ** 2 for a in xs)
    return num / den


def exp_claim2(group: AmalgamGroup, q_list: Sequence[str], y: Word, n_max: int,
               exact_n_max: int = 3, cap: int = 6,
               oracle: DistanceOracle | None = None) -> Table:
    require_y(group, y)
    if oracle is None:
        oracle = DistanceOracle(group)
    rows = []
    slopes, fits = {}, {}
    for text in q_list:
        q = group.parse(text)
        check_q(group, q)
        label = group.format(q) or "1"
        ns, proxies, exact_pts = [], [], []
        for n in range(n_max + 1):
            z = group.mul(q, _y_element(group, y, n))
            proxy = len(group.rewrite(z))
            exact, capped = "", ""
            if n <= exact_n_max:
                res = oracle.length(z, cap)
                if res.exact:
                    exact = res.value
                    exact_pts.append((n, res.value))
                else:
                    capped = "1"
            rows.append((label, n, proxy, exact, capped))
            ns.append(n)
            proxies.append(proxy)
        slopes[label] = ls_slope(ns, proxies)
        fits[label] = least_d(exact_pts)
    d_hat = max(fits.values(), default=0.0)
    return Table("claim2", ("q", "n", "proxy_len", "exact_len_or_blank", "capped_flag"), rows,
                 {"D_hat": d_hat, "slopes": {k: str(v) for k, v in slopes.items()},
                  "D_fits": fits})


# ---------------------------------------------------------------------------
# escape of Gromov products


def h_ball(group: AmalgamGroup, radius: int) -> Ball:
    """Elements of ``H`` within ``radius``, with exact ``M``-lengths.

    The two ``t``-exponent maps are 1-Lipschitz and vanish on ``H``, so a
    vertex at distance ``j`` on a geodesic to an ``H``-element of length
    ``<= radius`` has total ``t``-exponent at most ``radius - j``.  Pruning
    everything else keeps every such geodesic intact.
    """
    def keep(e, j):
        t0, t1 = group.t_exponents(e)
        return abs(t0) + abs(t1) <= radius - j

    b = ball(group, radius, keep=keep)
    return Ball(radius, {e: d for e, d in b.dist.items() if h_membership(e)})


@dataclass(frozen=True)
class EscapeRow:
    n: int
    max_product: Fraction | None
    witness: str
    capped: bool


def _escape_row(group, oracle, hb: Ball, g, n, cap) -> EscapeRow:
    lg = oracle.length(g, cap)
    if not lg.exact:
        return EscapeRow(n, None, "", True)
    G = lg.value
    best = None
    found = []
    # (upper bound on the product, h, |h|, h^-1 g)
    pending = [(Fraction(min(lh, G)), h, lh, group.mul(group.inverse(h), g))
               for h, lh in hb.dist.items()]
    for c in range(cap + 1):
        if best is not None:
            pending = [p for p in pending if p[0] >= best]
        if not pending:
            break
        left = []
        for ub, h, lh, k in pending:
            res = oracle.length(k, c)
            if res.exact:
                prod = Fraction(lh + G - res.value, 2)
                found.append((prod, h))
                if best is None or prod > best:
                    best = prod
            else:
                left.append((min(ub, Fraction(lh + G - res.lower_bound, 2)), h, lh, k))
        pending = left
    capped = any(best is None or ub > best for ub, *_ in pending)
    if best is None:
        return EscapeRow(n, None, "", True)
    # witness: shortlex-least maximizer
    wit = min((h for p, h in found if p == best), key=lambda h: shortlex_key(group.rewrite(h)))
    return EscapeRow(n, best, group.format(wit), capped)


def exp_gromov_escape(group: AmalgamGroup, z: str, y: Word, h_radius: int, n_max: int,
                      cap: int = 6, oracle: DistanceOracle | None = None,
                      n_min: int = 1) -> Table:
    """Max over ``h`` in the ``H``-ball of ``(h, z y^n)`` based at the identity.

    Products are only ever computed from exact distances.  Candidates are
    visited in decreasing order of the bound ``min(|h|, |z y^n|)`` and each
    distance is searched with a growing cap, so an ``h`` is dropped as soon as
    a proven lower bound on its distance rules it out.  A row is flagged when
    some ``h`` could neither be resolved nor ruled out within ``cap``.
    """
    require_y(group, y)
    if oracle is None:
        oracle = DistanceOracle(group)
    hb = h_ball(group, h_radius)
    zz = group.parse(z)
    rows = []
    for n in range(n_min, n_max + 1):
        g = group.mul(zz, _y_element(group, y, n))
        r = _escape_row(group, oracle, hb, g, n, cap)
        rows.append((n, "" if r.max_product is None else _fmt_frac(r.max_product),
                     r.witness, "1" if r.capped else ""))
    return Table("escape", ("n", "max_product", "witness", "capped_flag"), rows,
                 {"z": group.format(zz) or "1", "h_ball_size": len(hb.dist)})


def _fmt_frac(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


# ---------------------------------------------------------------------------
# virtual-normalizer cosets


def exp_vn_index(group: AmalgamGroup, g_text: str, radii: Iterable[int]) -> Table:
    """Count cosets of ``H ∩ gHg^-1`` met by the ``H``-ball of each radius.

    ``h1, h2`` share a coset iff ``g^-1 h1`` and ``g^-1 h2`` lie in the same
    right coset of ``H``, which :meth:`AmalgamGroup.h_coset_key` decides.
    """
    radii = sorted(radii)
    g = group.parse(g_text)
    gi = group.inverse(g)
    hb = h_ball(group, max(radii, default=0))
    keyed = sorted((d, group.h_coset_key(group.mul(gi, h))) for h, d in hb.dist.items())
    label = group.format(g) or "1"
    rows = []
    for r in radii:
        rows.append((label, r, len({k for d, k in keyed if d <= r})))
    return Table("vn", ("g", "radius", "coset_count"), rows)


# ---------------------------------------------------------------------------
# metric wrappers


def exp_distortion(torus, x: Word, N: int) -> Table:
    rows = distortion_profile(torus, x, N)
    return Table("distortion", ("n", "ambient_upper", "subgroup_exact", "ratio"),
                 [(r.n, r.ambient_upper, r.subgroup_exact, f"{r.ratio:.6f}") for r in rows],
                 {"distortion_table": [list(r[:3]) for r in rows],
                  "capped_rows": [r.n for r in rows if r.capped]})


def exp_delta(ctx, radii: Iterable[int], sample_count: int, seed: int,
              exhaustive: bool, cap: int) -> Table:
    rows = []
    for r in radii:
        est = estimate_delta(ctx, r, sample_count=sample_count, seed=seed,
                             exhaustive=exhaustive, cap=cap)
        rows.append((r, f"{est.delta_hat:g}", est.mode))
    worst = max((float(r[1]) for r in rows), default=0.0)
    return Table("delta", ("radius", "delta_hat", "mode"), rows, {"delta_hat": worst})


def exp_quasiconvexity(ctx, member, radius: int) -> Table:
    prof = quasiconvexity_profile(ctx, member, radius)
    return Table("quasiconvexity", ("radius", "epsilon_hat"), sorted(prof.items()),
                 {"epsilon_profile": {str(k): v for k, v in sorted(prof.items())}})


__all__ = [
    "DistortionRow", "EscapeRow", "ExperimentSpec", "Table", "YCheck", "check_q",
    "exp_claim1", "exp_claim2", "exp_delta", "exp_distortion", "exp_gromov_escape",
    "exp_quasiconvexity", "exp_vn_index", "h_ball", "least_d", "ls_slope", "require_y",
    "twisted_conjugacy", "validate_y",
]
