"""Finite pointed metric spaces: validation, segments, builders, extraction."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .scalars import ONE, Scalar, ZERO, rat, rat_str


@dataclass(frozen=True)
class FiniteMetricSpace:
    """A finite pointed metric space: labels, base point index, distance matrix.

    The matrix is stored exactly (rationals). Construction checks only the
    structural shape; use :func:`validate` for the metric axioms.
    """

    labels: tuple
    base: int
    d: tuple

    def __post_init__(self):
        n = len(self.labels)
        if n < 1:
            raise ValueError("space needs at least one point")
        if len(self.d) != n or any(len(row) != n for row in self.d):
            raise ValueError("distance matrix shape does not match label count")
        if not (0 <= self.base < n):
            raise ValueError("base index out of range")

    @property
    def n(self) -> int:
        return len(self.labels)

    def dist(self, i: int, j: int) -> Scalar:
        return self.d[i][j]

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def points(self) -> range:
        return range(self.n)

    def pairs(self):
        return combinations(range(self.n), 2)

    def diameter(self) -> Scalar:
        return max((self.d[i][j] for i, j in self.pairs()), default=ZERO)

    def ball(self, center: int, radius: Scalar) -> frozenset:
        """Closed ball around a point."""
        return frozenset(p for p in self.points() if self.d[center][p] <= radius)

    def to_json(self) -> dict:
        return {
            "labels": list(self.labels),
            "base": self.base,
            "d": [[rat_str(x) for x in row] for row in self.d],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FiniteMetricSpace":
        return cls(
            labels=tuple(obj["labels"]),
            base=int(obj["base"]),
            d=tuple(tuple(rat(x) for x in row) for row in obj["d"]),
        )

    @classmethod
    def from_matrix(cls, d, labels=None, base: int = 0) -> "FiniteMetricSpace":
        n = len(d)
        if labels is None:
            labels = tuple(f"p{i}" for i in range(n))
        return cls(
            labels=tuple(labels),
            base=base,
            d=tuple(tuple(rat(x) for x in row) for row in d),
        )


@dataclass(frozen=True)
class Violation:
    kind: str  # diagonal | symmetry | positivity | triangle
    indices: tuple
    slack: Scalar


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [
                {"kind": v.kind, "indices": list(v.indices), "slack": rat_str(v.slack)}
                for v in self.violations
            ],
        }


def validate(space: FiniteMetricSpace) -> ValidationReport:
    """Report every symmetry/positivity/triangle violation with exact slack."""
    bad = []
    d = space.d
    n = space.n
    for i in range(n):
        if d[i][i] != 0:
            bad.append(Violation("diagonal", (i,), d[i][i]))
    for i, j in space.pairs():
        if d[i][j] != d[j][i]:
            bad.append(Violation("symmetry", (i, j), d[i][j] - d[j][i]))
        if d[i][j] <= 0:
            bad.append(Violation("positivity", (i, j), -d[i][j]))
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            dij = d[i][j]
            for k in range(n):
                if k == i or k == j:
                    continue
                slack = d[i][k] - dij - d[j][k]
                if slack > 0:
                    bad.append(Violation("triangle", (i, j, k), slack))
    return ValidationReport(ok=not bad, violations=tuple(bad))


def seg(space: FiniteMetricSpace, u: int, v: int, delta: Scalar) -> frozenset:
    """Points p with d(u,p) + d(v,p) < d(u,v) + delta (delta-approximate segment)."""
    if u == v:
        raise ValueError("seg endpoints must differ")
    delta = rat(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    duv = space.d[u][v]
    return frozenset(
        p for p in space.points() if space.d[u][p] + space.d[v][p] < duv + delta
    )


def check_annulus_inequality(space, eps, a, u, v, x, y):
    """Check d(u,x)+d(v,y) >= (1-eps)(d(u,v)+d(x,y)); returns (ok, exact slack)."""
    eps = rat(eps)
    if not (0 < eps < 1):
        raise ValueError("eps must be in (0,1)")
    d = space.d
    slack = d[u][x] + d[v][y] - (ONE - eps) * (d[u][v] + d[x][y])
    return slack >= 0, slack


def annulus_sweep(space: FiniteMetricSpace, eps, a):
    """Exhaustive quadruple scan of the annuli inequality hypothesis set.

    u in B(0,8a), v in B(0,8a)\\B(0,4a), x,y outside B(0,32a/eps) or inside
    B(0,a*eps). Returns (checked_count, failures).
    """
    eps = rat(eps)
    a = rat(a)
    if not (0 < eps < 1):
        raise ValueError("eps must be in (0,1)")
    if a <= 0:
        raise ValueError("a must be positive")
    base = space.base
    inner = space.ball(base, 8 * a)
    outer_cut = space.ball(base, 4 * a)
    us = sorted(inner)
    vs = sorted(inner - outer_cut)
    far = set(space.points()) - space.ball(base, 32 * a / eps)
    near = space.ball(base, a * eps)
    xs = sorted(far | near)
    checked = 0
    failures = []
    for u in us:
        for v in vs:
            for x in xs:
                for y in xs:
                    checked += 1
                    ok, slack = check_annulus_inequality(space, eps, a, u, v, x, y)
                    if not ok:
                        failures.append(((u, v, x, y), slack))
    return checked, failures


# ---------------------------------------------------------------------------
# builders


def build_example1_space(N: int) -> FiniteMetricSpace:
    """Integers 1..N with d(n,k) = 3 - |1/n - 1/k|; base is the point 1."""
    if N < 2:
        raise ValueError("N must be >= 2")
    three = rat(3)
    d = [[ZERO] * N for _ in range(N)]
    for i in range(N):
        for j in range(i + 1, N):
            val = three - abs(rat(f"1/{i + 1}") - rat(f"1/{j + 1}"))
            d[i][j] = d[j][i] = val
    return FiniteMetricSpace.from_matrix(
        d, labels=[str(i + 1) for i in range(N)], base=0
    )


def _example2_dist(kind_p, ip, kind_q, iq) -> Scalar:
    if kind_p == kind_q and ip == iq:
        return ZERO
    for (ku, iu), (kw, iw) in (((kind_p, ip), (kind_q, iq)), ((kind_q, iq), (kind_p, ip))):
        if ku == "u" and kw in ("x", "u") and iu > iw:
            return ONE
        if ku == "v" and kw in ("y", "v") and iu > iw:
            return ONE
    return rat(2)


def build_example2_space(N: int) -> FiniteMetricSpace:
    """Four families x/y/u/v of size N; 0/1/2-valued metric; base is x_1."""
    if N < 1:
        raise ValueError("N must be >= 1")
    pts = []
    for kind in ("x", "y", "u", "v"):
        for i in range(1, N + 1):
            pts.append((kind, i))
    labels = [f"{k}{i}" for k, i in pts]
    n = len(pts)
    d = [[ZERO] * n for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            val = _example2_dist(*pts[a], *pts[b])
            d[a][b] = d[b][a] = val
    return FiniteMetricSpace.from_matrix(d, labels=labels, base=0)


def example2_point(space: FiniteMetricSpace, kind: str, i: int) -> int:
    return space.index(f"{kind}{i}")


def build_two_anchor_space(N: int) -> FiniteMetricSpace:
    """Two anchors x,y at mutual distance 2; every anchor/non-anchor pair at 1.

    Base is the first non-anchor point.
    """
    if N < 3:
        raise ValueError("N must be >= 3")
    labels = ["x", "y"] + [f"p{i}" for i in range(1, N - 1)]
    d = [[ZERO] * N for _ in range(N)]
    two = rat(2)
    for a in range(N):
        for b in range(a + 1, N):
            anchors = (a < 2) + (b < 2)
            val = ONE if anchors == 1 else two
            d[a][b] = d[b][a] = val
    return FiniteMetricSpace.from_matrix(d, labels=labels, base=2)


def build_half_line_space(coords: Sequence) -> FiniteMetricSpace:
    """Points on the real half-line with |s-t|; base is the smallest coordinate."""
    cs = sorted(rat(c) for c in coords)
    if len(set(cs)) != len(cs):
        raise ValueError("coordinates must be distinct")
    n = len(cs)
    d = [[abs(cs[i] - cs[j]) for j in range(n)] for i in range(n)]
    return FiniteMetricSpace.from_matrix(
        d, labels=[rat_str(c) for c in cs], base=0
    )


def build_simplex_space(n: int, a=1) -> FiniteMetricSpace:
    """Regular simplex: all off-diagonal distances equal to a."""
    a = rat(a)
    d = [[ZERO if i == j else a for j in range(n)] for i in range(n)]
    return FiniteMetricSpace.from_matrix(d)


@dataclass(frozen=True)
class HatSpace:
    """Generated space admitting the hat-function family at exact norm one."""

    space: FiniteMetricSpace
    pairs: tuple  # ((u_i, v_i) point indices), i = 1..k
    scale: Scalar
    tolerance: Scalar


def build_hat_space(k: int, a=2) -> HatSpace:
    """2k points u_1..u_k, v_1..v_k; d(u_i,v_i) shrunk to a(i-2)/i for i >= 3.

    All other distances equal a. u_1 is the base. The pair distances are
    chosen so the hat function attains Lipschitz norm exactly one; the
    separated-pair inequalities then hold with slack a/3.
    """
    if k < 3:
        raise ValueError("k must be >= 3")
    a = rat(a)
    labels = [f"u{i}" for i in range(1, k + 1)] + [f"v{i}" for i in range(1, k + 1)]
    n = 2 * k
    d = [[ZERO if i == j else a for j in range(n)] for i in range(n)]
    for i in range(1, k + 1):
        ui, vi = i - 1, k + i - 1
        if i == 1:
            duv = a
        elif i == 2:
            duv = a / 2
        else:
            duv = a * (i - 2) / i
        d[ui][vi] = d[vi][ui] = duv
    space = FiniteMetricSpace.from_matrix(d, labels=labels, base=0)
    pairs = tuple((i - 1, k + i - 1) for i in range(1, k + 1))
    return HatSpace(space=space, pairs=pairs, scale=a, tolerance=a / 3)


@dataclass(frozen=True)
class AnnuliSpace:
    """Half-line space with pairwise disjoint annuli around geometric scales."""

    space: FiniteMetricSpace
    pairs: tuple  # (u_i, v_i) point indices
    annuli: tuple  # frozensets of point indices
    eps: tuple  # per-pair eps_i

    @property
    def k(self) -> int:
        return len(self.pairs)


def _annuli_from_scales(coords, scales, eps_list, first_full_ball):
    """Shared assembly for the synthetic annuli builders."""
    space = build_half_line_space(coords)
    pos = {rat_str(rat(c)): i for i, c in enumerate(coords)}

    def at(c):
        return pos[rat_str(rat(c))]

    pairs = []
    annuli = []
    for i, (a_i, eps_i) in enumerate(zip(scales, eps_list), start=1):
        inner = a_i * eps_i
        outer = 32 * a_i / eps_i
        if i == 1 and first_full_ball:
            members = frozenset(p for p in space.points() if space.d[space.base][p] <= outer)
            pairs.append((space.base, at(8 * a_i)))
        else:
            members = frozenset(
                p
                for p in space.points()
                if inner < space.d[space.base][p] <= outer
            )
            pairs.append((at(5 * a_i), at(8 * a_i)))
        annuli.append(members)
    return AnnuliSpace(space=space, pairs=tuple(pairs), annuli=tuple(annuli), eps=tuple(eps_list))


def build_annuli_space(k: int, eps="1/4") -> AnnuliSpace:
    """k disjoint annuli at a uniform eps, each holding one separated pair."""
    eps = rat(eps)
    if not (0 < eps < 1):
        raise ValueError("eps must be in (0,1)")
    ratio = 64 / eps / eps  # > 32/eps^2 keeps consecutive annuli disjoint
    scales = [ONE]
    for _ in range(k - 1):
        scales.append(scales[-1] * ratio)
    coords = [ZERO]
    for a_i in scales:
        coords.extend([5 * a_i, 8 * a_i])
    coords.append(64 * scales[-1] / eps)  # far point outside every annulus
    return _annuli_from_scales(coords, scales, [eps] * k, first_full_ball=False)


def build_recursion_space(k: int) -> AnnuliSpace:
    """Nested annuli with per-stage eps_i = 1/2^(i+1); u_1 is the base point."""
    eps_list = [rat(1) / (2 ** (i + 1)) for i in range(1, k + 1)]
    scales = [ONE]
    for i in range(1, k):
        # inner radius of A_{i+1} must clear the outer radius of A_i
        scales.append(scales[-1] * (2 ** (2 * i + 9)))
    coords = [ZERO]
    for i, a_i in enumerate(scales, start=1):
        if i > 1:
            coords.append(5 * a_i)
        coords.append(8 * a_i)
    coords.append(128 * scales[-1] * (2 ** k))  # far point, outside every annulus
    return _annuli_from_scales(coords, scales, eps_list, first_full_ball=True)


# ---------------------------------------------------------------------------
# sequence extraction (finite analogues of the bounded uniformly discrete case)


@dataclass(frozen=True)
class ExtractionResult:
    scale: Optional[Scalar]
    points: tuple  # point indices (equidistant mode)
    pairs: tuple  # (u, v) pairs (pairs mode)

    @property
    def empty(self) -> bool:
        return not self.points and not self.pairs


def _population_scale(space: FiniteMetricSpace, m: int) -> Optional[Scalar]:
    """Largest distance b such that some closed ball of radius b holds < m points."""
    values = sorted({space.d[i][j] for i, j in space.pairs()})
    best = None
    for b in values:
        if any(len(space.ball(c, b)) < m for c in space.points()):
            best = b
    return best


def check_equidistant_sequence(space, scale, points, tolerance) -> bool:
    scale = rat(scale)
    tolerance = rat(tolerance)
    for idx_i in range(len(points)):
        i = idx_i + 1
        lo = scale * (i - 1) / i - tolerance
        hi = scale * (i + 1) / i + tolerance
        for idx_j in range(idx_i + 1, len(points)):
            dij = space.d[points[idx_i]][points[idx_j]]
            if not (lo <= dij <= hi):
                return False
    return True


def pair_sequence_failures(space, scale, pairs, tolerance) -> list:
    """Every separated-pair inequality violation, as (kind, data) records."""
    scale = rat(scale)
    tolerance = rat(tolerance)
    bad = []
    flat = [p for uv in pairs for p in uv]
    if len(set(flat)) != len(flat):
        bad.append(("overlap", tuple(flat)))
        return bad
    for idx in range(len(pairs)):
        i = idx + 1
        u, v = pairs[idx]
        lo = scale * (i - 1) / i - tolerance
        hi = scale * (i + 1) / i + tolerance
        if not (lo <= space.d[u][v] <= hi):
            bad.append(("pair-distance", (i, u, v)))
        for later in pairs[idx + 1 :]:
            for p in later:
                if min(space.d[u][p], space.d[v][p]) < lo:
                    bad.append(("later-separation", (i, u, v, p)))
        qbound = scale * (i - 1) / (2 * i) - tolerance
        for q in space.points():
            if q in (u, v):
                continue
            if min(space.d[u][q], space.d[v][q]) < qbound:
                bad.append(("ambient-separation", (i, u, v, q)))
    return bad


def check_pair_sequence(space, scale, pairs, tolerance) -> bool:
    """Exhaustive re-check of the three separated-pair inequalities."""
    return not pair_sequence_failures(space, scale, pairs, tolerance)


def check_annuli_hypothesis(space, pairs, annuli, eps_list, tolerance=0):
    """Disjoint annuli, each containing its pair, with the quadruple inequality.

    For every i and all x, y outside A_i we need
    d(u_i,x) + d(v_i,y) >= (1-eps_i)(d(u_i,v_i) + d(x,y)) - tolerance.
    Returns (ok, failures) where failures are (kind, data) records.
    """
    tolerance = rat(tolerance)
    bad = []
    annuli = [frozenset(A) for A in annuli]
    if not (len(pairs) == len(annuli) == len(eps_list)):
        raise ValueError("pairs, annuli and eps_list must have equal length")
    for a in range(len(annuli)):
        for b in range(a + 1, len(annuli)):
            common = annuli[a] & annuli[b]
            if common:
                bad.append(("annuli-overlap", (a + 1, b + 1, tuple(sorted(common)))))
    d = space.d
    for idx, ((u, v), A, eps) in enumerate(zip(pairs, annuli, eps_list), start=1):
        eps = rat(eps)
        if u not in A or v not in A:
            bad.append(("pair-outside-annulus", (idx, u, v)))
            continue
        outside = [p for p in space.points() if p not in A]
        scale = ONE - eps
        duv = d[u][v]
        for x in outside:
            for y in outside:
                if d[u][x] + d[v][y] < scale * (duv + d[x][y]) - tolerance:
                    bad.append(("quadruple", (idx, u, v, x, y)))
    return not bad, bad


def extract_separated_pairs(
    space: FiniteMetricSpace,
    tolerance,
    mode: str = "equidistant",
    population_threshold: Optional[int] = None,
):
    """Greedy search for almost-equidistant sequences / separated pairs.

    The heuristic may miss sequences but never returns an invalid one: the
    result is re-verified exhaustively before returning. Empty result when
    nothing of length >= 2 (or >= 1 pair) is found.
    """
    tolerance = rat(tolerance)
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    if mode not in ("equidistant", "pairs"):
        raise ValueError(f"unknown mode: {mode}")
    if space.n < 2:
        return ExtractionResult(scale=None, points=(), pairs=())

    m = population_threshold if population_threshold is not None else math.ceil(space.n / 4)
    anchor = _population_scale(space, m)
    candidates = sorted({space.d[i][j] for i, j in space.pairs()})
    if anchor is not None:
        candidates.sort(key=lambda b: (abs(b - anchor), b))

    if mode == "equidistant":
        best = ()
        best_scale = None
        for a in candidates:
            seq = []
            for p in space.points():
                trial = seq + [p]
                pos = len(trial)
                lo = a * (pos - 1) / pos  # constraint index of the earlier element
                ok = True
                for idx, q in enumerate(seq):
                    i = idx + 1
                    lo_i = a * (i - 1) / i - tolerance
                    hi_i = a * (i + 1) / i + tolerance
                    if not (lo_i <= space.d[q][p] <= hi_i):
                        ok = False
                        break
                if ok:
                    seq.append(p)
            if len(seq) >= 2 and len(seq) > len(best):
                if check_equidistant_sequence(space, a, seq, tolerance):
                    best = tuple(seq)
                    best_scale = a
        if not best:
            return ExtractionResult(scale=None, points=(), pairs=())
        return ExtractionResult(scale=best_scale, points=best, pairs=())

    all_pairs = [(u, v) for u in space.points() for v in space.points() if u != v]
    best = ()
    best_scale = None
    for a in candidates:
        chosen = []
        used = set()
        for u, v in all_pairs:
            if u in used or v in used:
                continue
            trial = chosen + [(u, v)]
            if _pair_admissible(space, a, chosen, (u, v), tolerance):
                chosen.append((u, v))
                used.update((u, v))
        if len(chosen) > len(best):
            if check_pair_sequence(space, a, chosen, tolerance):
                best = tuple(chosen)
                best_scale = a
    if not best:
        return ExtractionResult(scale=None, points=(), pairs=())
    return ExtractionResult(scale=best_scale, points=(), pairs=best)


def _pair_admissible(space, a, chosen, new_pair, tolerance):
    j = len(chosen) + 1
    u, v = new_pair
    lo_j = a * (j - 1) / j - tolerance
    hi_j = a * (j + 1) / j + tolerance
    if not (lo_j <= space.d[u][v] <= hi_j):
        return False
    qbound = a * (j - 1) / (2 * j) - tolerance
    for q in space.points():
        if q in (u, v):
            continue
        if min(space.d[u][q], space.d[v][q]) < qbound:
            return False
    for idx, (ui, vi) in enumerate(chosen):
        i = idx + 1
        lo_i = a * (i - 1) / i - tolerance
        for p in (u, v):
            if min(space.d[ui][p], space.d[vi][p]) < lo_i:
                return False
    return True


def load_space(path) -> FiniteMetricSpace:
    with open(path) as fh:
        return FiniteMetricSpace.from_json(json.load(fh))
