"""Radius-capped metric substrate over Cayley graphs.

A *context* is any group object exposing ``letters``, ``identity``,
``mul_letter(e, x)``, ``mul``, ``inverse`` and ``element(word)``; elements
must be hashable canonical keys.  :class:`~amalgamlab.words.FreeGroup`,
:class:`~amalgamlab.torus.TorusGroup` and
:class:`~amalgamlab.amalgam.AmalgamGroup` all qualify.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np

from .amalgam import LEFT, AmalgamGroup, AmalgamNF, Syllable
from .words import CapExceeded, FreeGroup


class DistanceResult(NamedTuple):
    """Exact ``value`` or, when ``value is None``, a proven ``lower_bound``."""

    value: int | None
    cap: int
    lower_bound: int = 0

    @property
    def exact(self) -> bool:
        return self.value is not None


class ExceedsCap(CapExceeded):
    pass


@dataclass
class Ball:
    radius: int
    dist: dict
    preds: dict | None = None
    start: object = None

    def __len__(self):
        return len(self.dist)

    def sphere_sizes(self) -> list[int]:
        sizes = [0] * (self.radius + 1)
        for d in self.dist.values():
            sizes[d] += 1
        return sizes

    def members(self, max_radius: int | None = None) -> list:
        r = self.radius if max_radius is None else max_radius
        return [e for e, d in self.dist.items() if d <= r]


class PartialBall(RuntimeError):
    def __init__(self, ball: Ball, achieved_radius: int):
        super().__init__(f"ball budget exhausted after radius {achieved_radius}")
        self.ball = ball
        self.achieved_radius = achieved_radius


def ball(ctx, radius: int, budget: int | None = None, keep: Callable | None = None,
         dag: bool = False, start=None, step: Callable | None = None) -> Ball:
    """Breadth-first closure from ``start`` (default identity) up to ``radius``.

    ``keep(e, d)`` may prune elements that cannot matter; pruned elements are
    neither stored nor expanded.  With ``dag=True`` every member records all
    predecessors one step closer, i.e. the geodesic DAG.
    """
    step = step or ctx.mul_letter
    origin = ctx.identity if start is None else start
    dist = {origin: 0}
    preds = {origin: []} if dag else None
    frontier = [origin]
    letters = ctx.letters
    for r in range(1, radius + 1):
        nxt = []
        for e in frontier:
            for x in letters:
                f = step(e, x)
                d = dist.get(f)
                if d is None:
                    if keep is not None and not keep(f, r):
                        continue
                    dist[f] = r
                    nxt.append(f)
                    if dag:
                        preds[f] = [(e, x)]
                elif dag and d == r:
                    preds[f].append((e, x))
        frontier = nxt
        if budget is not None and len(dist) > budget:
            raise PartialBall(Ball(r, dist, preds, origin), r)
    return Ball(radius, dist, preds, origin)


def distance(ctx, g, h, cap: int, budget: int | None = None) -> DistanceResult:
    """Bidirectional breadth-first search between ``g`` and ``h``, ``cap`` layers per side."""
    if g == h:
        return DistanceResult(0, cap)
    sides = [{g: 0}, {h: 0}]
    frontiers = [[g], [h]]
    depth = [0, 0]
    while True:
        # expand the cheaper side that still has room
        order = sorted((0, 1), key=lambda i: len(frontiers[i]))
        i = next((i for i in order if depth[i] < cap and frontiers[i]), None)
        if i is None:
            return DistanceResult(None, cap, depth[0] + depth[1] + 1)
        mine, other = sides[i], sides[1 - i]
        nxt = []
        depth[i] += 1
        best = None
        for e in frontiers[i]:
            for x in ctx.letters:
                f = ctx.mul_letter(e, x)
                if f in mine:
                    continue
                mine[f] = depth[i]
                nxt.append(f)
                if f in other:
                    cand = depth[i] + other[f]
                    best = cand if best is None else min(best, cand)
        frontiers[i] = nxt
        if best is not None:
            return DistanceResult(best, cap)
        if budget is not None and len(mine) > budget:
            return DistanceResult(None, cap, depth[0] + depth[1] + 1)


class DistanceOracle:
    """Meet-in-the-middle lengths against a cached ball around the identity.

    ``length(g, cap)`` searches outward from ``g`` for at most ``cap`` layers
    and is exact whenever ``|g| <= forward_radius + cap``.
    """

    def __init__(self, ctx, forward_radius: int = 4, budget: int | None = None):
        self.ctx = ctx
        self.forward = ball(ctx, forward_radius)
        self.forward_radius = forward_radius
        self.budget = budget
        self._memo: dict = {}

    def length(self, g, cap: int) -> DistanceResult:
        key = (g, cap)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        out = self._length(g, cap)
        self._memo[key] = out
        return out

    def _length(self, g, cap):
        fwd = self.forward.dist
        R = self.forward_radius
        d = fwd.get(g)
        if d is not None:
            return DistanceResult(d, cap)
        best = None
        seen = {g}
        frontier = [g]
        for j in range(1, cap + 1):
            nxt = []
            for e in frontier:
                for x in self.ctx.letters:
                    f = self.ctx.mul_letter(e, x)
                    if f in seen:
                        continue
                    seen.add(f)
                    nxt.append(f)
                    d = fwd.get(f)
                    if d is not None and (best is None or d + j < best):
                        best = d + j
            frontier = nxt
            # every geodesic of length <= R + j has been seen by now
            if best is not None and best <= R + j:
                return DistanceResult(best, cap)
            if self.budget is not None and len(seen) > self.budget:
                return DistanceResult(None, cap, R + j + 1)
        return DistanceResult(None, cap, R + cap + 1)

    def distance(self, g, h, cap: int) -> DistanceResult:
        return self.length(self.ctx.mul(self.ctx.inverse(g), h), cap)


def gromov_product(ctx, g, h, cap: int, oracle: DistanceOracle | None = None) -> Fraction:
    """``(|g| + |h| - d(g, h)) / 2`` based at the identity."""
    if oracle is None:
        def measure(a, b):
            return distance(ctx, a, b, cap)
    else:
        def measure(a, b):
            return oracle.distance(a, b, cap)
    one = ctx.identity
    parts = [measure(one, g), measure(one, h), measure(g, h)]
    for p in parts:
        if not p.exact:
            raise ExceedsCap(f"distance exceeds cap {cap}", cap)
    return Fraction(parts[0].value + parts[1].value - parts[2].value, 2)


# ---------------------------------------------------------------------------
# hyperbolicity


@dataclass(frozen=True)
class DeltaEstimate:
    delta_hat: float
    radius: int
    mode: str
    quadruples: int
    skipped: int = 0


def _pair_length(ctx, oracle, cap):
    if isinstance(ctx, FreeGroup):
        return lambda a, b: len(ctx.mul(ctx.inverse(a), b))
    def d(a, b):
        res = oracle.distance(a, b, cap)
        return res.value
    return d


def _ordered_members(ctx, b: Ball) -> list:
    from .words import shortlex_key
    return sorted(b.dist, key=lambda e: shortlex_key(tuple(ctx.spell(e))))


def estimate_delta(ctx, radius: int, sample_count: int = 1000, seed: int = 0,
                   exhaustive: bool = False, cap: int = 4,
                   oracle: DistanceOracle | None = None) -> DeltaEstimate:
    """Least ``delta`` with ``(x,y)_w >= min((x,z)_w, (z,y)_w) - delta`` on the quadruples checked."""
    b = ball(ctx, radius)
    pts = _ordered_members(ctx, b)
    if oracle is None and not isinstance(ctx, FreeGroup):
        oracle = DistanceOracle(ctx, forward_radius=radius)
    dfun = _pair_length(ctx, oracle, cap)
    if exhaustive:
        n = len(pts)
        if n > 400:
            raise ValueError(f"exhaustive four-point scan over {n} points is too large")
        D = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                v = dfun(pts[i], pts[j])
                if v is None:
                    raise ExceedsCap(f"pair distance exceeds cap {cap}", cap)
                D[i, j] = D[j, i] = v
        worst = 0.0
        for w in range(n):
            G = (D[w][:, None] + D[w][None, :] - D) / 2
            # G[x,z] vs G[z,y] -> min over z broadcast as [x, z, y]
            m = np.minimum(G[:, :, None], G[None, :, :])
            worst = max(worst, float((m - G[:, None, :]).max()))
        return DeltaEstimate(worst, radius, "exhaustive", n ** 4)
    rng = random.Random(seed)
    memo: dict = {}

    def d(a, b):
        if a == b:
            return 0
        key = (a, b) if id(a) <= id(b) else (b, a)
        if key not in memo:
            memo[key] = dfun(a, b)
        return memo[key]

    worst = 0.0
    skipped = 0
    for _ in range(sample_count):
        x, y, z, w = (pts[rng.randrange(len(pts))] for _ in range(4))
        vals = [d(w, x), d(w, y), d(x, y), d(w, z), d(x, z), d(z, y)]
        if any(v is None for v in vals):
            skipped += 1
            continue
        wx, wy, xy, wz, xz, zy = vals
        xy_w = (wx + wy - xy) / 2
        xz_w = (wx + wz - xz) / 2
        zy_w = (wz + wy - zy) / 2
        worst = max(worst, min(xz_w, zy_w) - xy_w)
    return DeltaEstimate(worst, radius, "sampled", sample_count - skipped, skipped)


# ---------------------------------------------------------------------------
# quasiconvexity and distortion


def quasiconvexity_profile(ctx, member: Callable, radius: int,
                           budget: int | None = None) -> dict[int, int]:
    """``r -> max distance from a geodesic vertex to the subgroup``, over ball geodesics.

    For every subgroup element ``h`` with ``|h| <= r`` every vertex of every
    geodesic from the identity to ``h`` (the stored DAG) is measured against
    the subgroup elements of the ball, with distances taken inside the ball.
    By left-invariance this covers geodesics between any two subgroup
    elements at distance ``<= r``.
    """
    b = ball(ctx, radius, budget=budget, dag=True)
    inside = b.dist
    sub = [e for e in inside if member(e)]
    # multi-source BFS from the subgroup, restricted to the ball
    to_sub = {e: 0 for e in sub}
    frontier = list(sub)
    while frontier:
        nxt = []
        for e in frontier:
            for x in ctx.letters:
                f = ctx.mul_letter(e, x)
                if f in inside and f not in to_sub:
                    to_sub[f] = to_sub[e] + 1
                    nxt.append(f)
        frontier = nxt
    # worst vertex along any geodesic from the identity, by DP in BFS order
    worst: dict = {}
    for e in sorted(inside, key=inside.__getitem__):
        w = to_sub.get(e, radius + 1)
        for p, _ in b.preds[e]:
            w = max(w, worst[p])
        worst[e] = w
    profile = {}
    for r in range(radius + 1):
        vals = [worst[h] for h in sub if inside[h] <= r]
        profile[r] = max(vals) if vals else 0
    return profile


class DistortionRow(NamedTuple):
    n: int
    ambient_upper: int
    subgroup_exact: int
    ratio: float
    capped: bool = False


def distortion_profile(torus, x, N: int) -> list[DistortionRow]:
    """Witnesses ``t^n x t^-n = phi^n(x)``: ambient length ``2n + |x|`` vs base length of ``phi^n(x)``."""
    rows = []
    base = torus.base
    for n in range(N + 1):
        w = torus.phi.image_word(n, x)
        capped = False
        try:
            sub = base.length(w)
        except CapExceeded as exc:
            sub, capped = len(exc.best), True
        amb = 2 * n + len(x)
        rows.append(DistortionRow(n, amb, sub, sub / amb, capped))
    return rows


@dataclass
class ConstantsReport:
    delta_hat: float | None = None
    K_hat: int | None = None
    D_hat: float | None = None
    epsilon_profile: dict = field(default_factory=dict)
    distortion_table: list = field(default_factory=list)
    caps: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# independent oracle for the amalgam


class MirrorAmalgam:
    """Left-acting context on right-to-left normal forms of an amalgam.

    Elements are tuples of syllables where every syllable but the first is
    the shortest element of its coset ``C e``.  Multiplication by a letter
    happens on the *left*, so this shares no normal-form code with
    :meth:`AmalgamGroup.mul_letter`; it only borrows torus arithmetic,
    edge-membership and the ``C e`` coset search.
    """

    def __init__(self, group: AmalgamGroup):
        self.group = group
        self.letters = group.letters
        self.identity = ()

    def _single(self, f, g):
        grp = self.group
        if grp.tori[f].is_identity(g):
            return ()
        p = grp.edge_membership(f, g)
        if p is not None:
            return (Syllable(LEFT, grp.c_element(LEFT, p)),)
        return (Syllable(f, g),)

    def mul_letter(self, form: tuple, code: int) -> tuple:
        """``letter * form`` (left multiplication, despite the shared name)."""
        grp = self.group
        f, letter = grp.split(code)
        torus = grp.tori[f]
        lone = torus.normalize((letter,))
        if not form:
            return self._single(f, lone)
        first = form[0]
        rest = form[1:]
        if first.factor == f:
            new = torus.mul(lone, first.value)
            if not rest:
                return self._single(f, new)
            if torus.is_identity(new):
                return rest
            p = grp.edge_membership(f, new)
            if p is None:
                return (Syllable(f, new),) + rest
            nxt = rest[0]
            merged = grp.tori[nxt.factor].mul(grp.c_element(nxt.factor, p), nxt.value)
            return (Syllable(nxt.factor, merged),) + rest[1:]
        y = first.factor
        if not rest:
            p = grp.edge_membership(y, first.value)
            if p is not None:
                return self._single(f, torus.mul(lone, grp.c_element(f, p)))
        q = grp.edge_membership(f, lone)
        if q is not None:
            merged = grp.tori[y].mul(grp.c_element(y, q), first.value)
            return (Syllable(y, merged),) + rest
        m, u = grp.coset_shortest(y, first.value)
        new = torus.mul(lone, grp.c_element(f, m))
        return (Syllable(f, new), Syllable(y, u)) + rest

    def element(self, word) -> tuple:
        form = ()
        for code in reversed(tuple(word)):
            form = self.mul_letter(form, code)
        return form
