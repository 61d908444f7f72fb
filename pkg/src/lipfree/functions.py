"""Lipschitz functions and the explicit surgeries used by the constructions."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence

from .metric import FiniteMetricSpace, check_annuli_hypothesis, pair_sequence_failures
from .scalars import ONE, Scalar, ZERO, rat, rat_str


@dataclass(frozen=True)
class LipFunction:
    """Real values on the points of a finite metric space.

    A function is *rooted* when it vanishes at the base point; raw McShane
    extensions may carry a base offset, use :meth:`rooted` to shift. The
    Lipschitz norm is cached on first access.
    """

    space: FiniteMetricSpace
    values: tuple

    def __post_init__(self):
        if len(self.values) != self.space.n:
            raise ValueError("value count does not match space size")

    @cached_property
    def norm(self) -> Scalar:
        best = ZERO
        d = self.space.d
        vals = self.values
        for i, j in self.space.pairs():
            ratio = abs(vals[i] - vals[j]) / d[i][j]
            if ratio > best:
                best = ratio
        return best

    @cached_property
    def norm_pair(self) -> Optional[tuple]:
        """A pair attaining the norm (None for constant functions)."""
        d = self.space.d
        vals = self.values
        for i, j in self.space.pairs():
            if abs(vals[i] - vals[j]) == self.norm * d[i][j] and self.norm > 0:
                return (i, j) if vals[i] >= vals[j] else (j, i)
        return None

    def __call__(self, p: int) -> Scalar:
        return self.values[p]

    @property
    def is_rooted(self) -> bool:
        return self.values[self.space.base] == 0

    def rooted(self) -> "LipFunction":
        off = self.values[self.space.base]
        if off == 0:
            return self
        return LipFunction(self.space, tuple(v - off for v in self.values))

    def molecule_value(self, u: int, v: int) -> Scalar:
        return (self.values[u] - self.values[v]) / self.space.d[u][v]

    def __add__(self, other):
        self._same_space(other)
        return LipFunction(self.space, tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other):
        self._same_space(other)
        return LipFunction(self.space, tuple(a - b for a, b in zip(self.values, other.values)))

    def __mul__(self, scalar):
        s = rat(scalar)
        return LipFunction(self.space, tuple(s * v for v in self.values))

    __rmul__ = __mul__

    def __neg__(self):
        return LipFunction(self.space, tuple(-v for v in self.values))

    def _same_space(self, other):
        if other.space is not self.space and other.space != self.space:
            raise ValueError("functions live on different spaces")

    def to_json(self, inline_space: bool = True) -> dict:
        obj = {"values": [rat_str(v) for v in self.values]}
        if inline_space:
            obj["space"] = self.space.to_json()
        return obj

    @classmethod
    def from_json(cls, obj: dict, space: Optional[FiniteMetricSpace] = None):
        if space is None:
            space = FiniteMetricSpace.from_json(obj["space"])
        return cls(space=space, values=tuple(rat(v) for v in obj["values"]))


def lip_norm(f: LipFunction) -> Scalar:
    return f.norm


def eval_molecule(f: LipFunction, m) -> Scalar:
    """f applied to a molecule; accepts a Molecule or a (u, v) pair."""
    u, v = (m.u, m.v) if hasattr(m, "u") else m
    return f.molecule_value(u, v)


def mcshane_extend(
    space: FiniteMetricSpace,
    subset: Iterable,
    values: dict,
    L,
    direction: str = "lower",
    shift_base: bool = False,
) -> LipFunction:
    """McShane-Whitney extension of an L-Lipschitz partial assignment.

    lower: pointwise-minimal extension  max_s(values[s] - L d(s, p));
    upper: pointwise-maximal extension  min_s(values[s] + L d(s, p)).
    The partial assignment is checked to be L-Lipschitz first.
    """
    subset = sorted(set(subset))
    if not subset:
        raise ValueError("subset must be non-empty")
    L = rat(L)
    vals = {s: rat(values[s]) for s in subset}
    for i, s in enumerate(subset):
        for t in subset[i + 1 :]:
            if abs(vals[s] - vals[t]) > L * space.d[s][t]:
                raise ValueError(
                    f"values are not {rat_str(L)}-Lipschitz on the subset: "
                    f"witness pair ({s}, {t})"
                )
    if direction not in ("lower", "upper"):
        raise ValueError(f"unknown direction: {direction}")
    out = []
    for p in space.points():
        if p in vals:
            out.append(vals[p])
        elif direction == "lower":
            out.append(max(vals[s] - L * space.d[s][p] for s in subset))
        else:
            out.append(min(vals[s] + L * space.d[s][p] for s in subset))
    f = LipFunction(space, tuple(out))
    return f.rooted() if shift_base else f


def flatten_at_point(g: LipFunction, u: int) -> LipFunction:
    """Replace g(u) with the minimal value compatible with g off u."""
    space = g.space
    if u == space.base:
        raise ValueError("cannot flatten at the base point")
    if g.norm > 1:
        raise ValueError("function must lie in the Lipschitz unit ball")
    new = max(g.values[v] - space.d[v][u] for v in space.points() if v != u)
    vals = list(g.values)
    vals[u] = new
    return LipFunction(space, tuple(vals))


def slice_flatten(g: LipFunction, anchors_x: Sequence, anchors_y: Sequence) -> LipFunction:
    """Raise g along x-anchors / cap along y-anchors, renormalized at base.

    h(p) = max{min_i g(y_i), max_i (g(x_i) - d(x_i, p))} + a with h(base) = 0.
    """
    if not anchors_x or len(anchors_x) != len(anchors_y):
        raise ValueError("anchor lists must be non-empty and of equal length")
    if g.norm > 1:
        raise ValueError("function must lie in the Lipschitz unit ball")
    space = g.space
    floor = min(g.values[y] for y in anchors_y)
    raw = [
        max(floor, max(g.values[x] - space.d[x][p] for x in anchors_x))
        for p in space.points()
    ]
    a = -raw[space.base]
    return LipFunction(space, tuple(v + a for v in raw))


def _example2_layout(space: FiniteMetricSpace):
    """kind/index per point of an x/y/u/v-labelled space, or None."""
    layout = []
    for lbl in space.labels:
        kind, idx = lbl[0], lbl[1:]
        if kind not in "xyuv" or not idx.isdigit():
            return None
        layout.append((kind, int(idx)))
    return layout


def example2_function(space: FiniteMetricSpace) -> LipFunction:
    """The norm-one function separating x/u from y/v (rooted at x_1)."""
    layout = _example2_layout(space)
    if layout is None:
        raise ValueError("space does not have the x/y/u/v layout")
    vals = tuple(ZERO if kind in "xu" else rat(-2) for kind, _ in layout)
    return LipFunction(space, vals)


def tail_plateau(g: LipFunction, core_size: int) -> LipFunction:
    """Extend g from the index-<=core_size core by constant tail plateaus."""
    space = g.space
    layout = _example2_layout(space)
    if layout is None:
        raise ValueError("space does not have the x/y/u/v layout")
    core = [p for p, (_, i) in enumerate(layout) if i <= core_size]
    if not core or all(i <= core_size for _, i in layout):
        raise ValueError("core must be a proper non-empty index prefix")
    core_vals = [g.values[p] for p in core]
    if any(
        abs(core_vals[a] - core_vals[b]) > space.d[core[a]][core[b]]
        for a in range(len(core))
        for b in range(a + 1, len(core))
    ):
        raise ValueError("g exceeds Lipschitz constant 1 on the core")
    a = (max(core_vals) + min(core_vals)) / 2
    out = []
    for p, (kind, i) in enumerate(layout):
        if i <= core_size:
            out.append(g.values[p])
        elif kind == "x":
            out.append(a - 1)
        elif kind == "y":
            out.append(a + 1)
        else:
            out.append(a)
    return LipFunction(space, tuple(out))


def nearest_point_function(space: FiniteMetricSpace, sites: Sequence) -> LipFunction:
    """f(p) = min over sites of d(site, p); vanishes on the sites."""
    sites = list(sites)
    if not sites:
        raise ValueError("sites must be non-empty")
    if sites[0] != space.base:
        raise ValueError("first site must be the base point")
    vals = tuple(min(space.d[s][p] for s in sites) for p in space.points())
    return LipFunction(space, vals)


@dataclass(frozen=True)
class StageRecord:
    stage: int
    lip_constant: Scalar
    constant_bound: Scalar  # 1 - 1/2^stage
    molecule_value: Scalar
    molecule_bound: Scalar  # 1 - 1/2^(stage-1)

    @property
    def ok(self) -> bool:
        return (
            self.lip_constant <= self.constant_bound
            and self.molecule_value >= self.molecule_bound
        )


def daugavet_recursive_construction(
    space: FiniteMetricSpace,
    pairs: Sequence,
    annuli: Sequence,
    tolerance=0,
):
    """Recursive min/max assignment along separated pairs, then extension.

    Stage n keeps the partial Lipschitz constant at most 1 - 1/2^n while
    pushing the n-th molecule value to at least 1 - 1/2^(n-1). The final
    function is the lower McShane extension with constant 1, so its norm is
    exactly one whenever the space has points beyond the pairs.
    """
    pairs = [tuple(p) for p in pairs]
    if pairs[0][0] != space.base:
        raise ValueError("u_1 must be the base point")
    eps_list = [rat(1) / (2 ** (i + 1)) for i in range(1, len(pairs) + 1)]
    ok, failures = check_annuli_hypothesis(space, pairs, annuli, eps_list, tolerance)
    if not ok:
        raise ValueError(f"separated-annuli hypothesis fails: {failures[0]}")

    f = {pairs[0][0]: ZERO, pairs[0][1]: ZERO}
    log = []
    half = rat("1/2")
    for n, (u_n, v_n) in enumerate(pairs, start=1):
        if n > 1:
            c = ONE - half**n
            prev = list(f)
            f[u_n] = min(f[x] + c * space.d[x][u_n] for x in prev)
            f[v_n] = max(f[x] - c * space.d[x][v_n] for x in prev + [u_n])
        defined = sorted(f)
        lipc = ZERO
        for a in range(len(defined)):
            for b in range(a + 1, len(defined)):
                p, q = defined[a], defined[b]
                ratio = abs(f[p] - f[q]) / space.d[p][q]
                if ratio > lipc:
                    lipc = ratio
        log.append(
            StageRecord(
                stage=n,
                lip_constant=lipc,
                constant_bound=ONE - half**n,
                molecule_value=(f[u_n] - f[v_n]) / space.d[u_n][v_n],
                molecule_bound=ONE - half ** (n - 1),
            )
        )
    final = mcshane_extend(space, f.keys(), f, ONE, direction="lower", shift_base=True)
    return final, tuple(log)


@dataclass(frozen=True)
class HatFamily:
    f: LipFunction
    g: dict  # index i (>= 2) -> sign-swapped companion
    scale: Scalar
    pairs: tuple


def delta_hat_family(space: FiniteMetricSpace, pairs: Sequence, a, tolerance=0) -> HatFamily:
    """Hat function f with value a(i-2)/(2i) at u_i and its swapped companions."""
    a = rat(a)
    pairs = tuple(tuple(p) for p in pairs)
    failures = pair_sequence_failures(space, a, pairs, tolerance)
    if failures:
        raise ValueError(f"separated-pair inequalities fail: {failures[0]}")

    def hat_values(swap_at: Optional[int]):
        vals = [ZERO] * space.n
        for idx, (u, v) in enumerate(pairs):
            i = idx + 1
            if i == 1:
                continue
            height = a * (i - 2) / (2 * i)
            if i == swap_at:
                vals[u], vals[v] = -height, height
            else:
                vals[u], vals[v] = height, -height
        return LipFunction(space, tuple(vals))

    f = hat_values(None)
    g = {i: hat_values(i) for i in range(2, len(pairs) + 1)}
    return HatFamily(f=f, g=g, scale=a, pairs=pairs)


def annulus_case_extension(f: LipFunction, A, u: int, v: int, eps) -> LipFunction:
    """Rescale f off A and rebuild it inside so the (u,v) molecule is nearly normed.

    Case 1 (v outside A) pins g(u) = g(v) + (1-eps) d(u,v) and extends into A;
    case 2 (v inside A) uses the inf/sup assignment. Both yield ||g|| <= 1 and
    g(m_uv) >= 1 - eps, verified before returning.
    """
    space = f.space
    eps = rat(eps)
    A = set(A)
    if u not in A:
        raise ValueError("u must belong to A")
    outside = [p for p in space.points() if p not in A]
    if not outside:
        raise ValueError("A must not cover the whole space")
    one_m_eps = ONE - eps
    for x in outside:
        for y in outside:
            ok = space.d[u][x] + space.d[v][y] >= one_m_eps * (
                space.d[u][v] + space.d[x][y]
            )
            if not ok:
                raise ValueError(f"annulus hypothesis fails at quadruple {(u, v, x, y)}")

    g = {p: one_m_eps * f.values[p] for p in outside}
    if v not in A:
        g[u] = g[v] + one_m_eps * space.d[u][v]
        out = mcshane_extend(space, g.keys(), g, ONE, direction="lower")
    else:
        g[u] = min(g[x] + space.d[x][u] for x in outside)
        for y in sorted(A):
            if y == u:
                continue
            g[y] = max(g[x] - space.d[x][y] for x in list(outside) + [u])
        out = LipFunction(space, tuple(g[p] for p in space.points()))
    out = out.rooted()
    if out.norm > 1:
        raise ValueError("extension left the Lipschitz unit ball")
    if out.molecule_value(u, v) < one_m_eps:
        raise ValueError("extension failed to norm the target molecule")
    return out


def locality_profile(f: LipFunction):
    """Per pair-distance r (ascending): the best molecule value at scale <= r."""
    if f.norm == 0:
        raise ValueError("locality profile undefined for constant functions")
    space = f.space
    radii = sorted({space.d[i][j] for i, j in space.pairs()})
    profile = []
    best = None
    idx = 0
    by_dist = sorted(space.pairs(), key=lambda ij: space.d[ij[0]][ij[1]])
    for r in radii:
        while idx < len(by_dist) and space.d[by_dist[idx][0]][by_dist[idx][1]] <= r:
            i, j = by_dist[idx]
            val = abs(f.molecule_value(i, j))
            if best is None or val > best:
                best = val
            idx += 1
        profile.append((r, best))
    return profile


def is_local(f: LipFunction, eps) -> bool:
    """True when some molecule at scale < eps nearly attains the norm."""
    eps = rat(eps)
    space = f.space
    thresh = f.norm - eps
    return any(
        space.d[i][j] < eps and abs(f.molecule_value(i, j)) > thresh
        for i, j in space.pairs()
    )
