"""Elements of the free space: molecules, norms, vertices, slice membership.

The norm of an element is computed twice on every call — as a transport
cost (primal) and as the optimum of the pairing over the Lipschitz unit
ball (dual) — and the two exact values must agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import lp
from .functions import LipFunction, mcshane_extend
from .metric import FiniteMetricSpace
from .scalars import ONE, Scalar, TWO, ZERO, rat, rat_str


@dataclass(frozen=True)
class FreeElement:
    """Finite linear combination of point evaluations, base normalized away.

    weights is a sorted tuple of (point, coefficient) with no base entry and
    no zero coefficients, so equal elements have equal representations.
    """

    space: FiniteMetricSpace
    weights: tuple

    @classmethod
    def make(cls, space: FiniteMetricSpace, weights) -> "FreeElement":
        acc = {}
        for p, w in dict(weights).items():
            if not (0 <= p < space.n):
                raise ValueError(f"point index {p} outside space")
            if p == space.base:
                continue
            w = rat(w)
            if w != 0:
                acc[p] = acc.get(p, ZERO) + w
        return cls(space=space, weights=tuple(sorted((p, w) for p, w in acc.items() if w != 0)))

    @classmethod
    def zero(cls, space: FiniteMetricSpace) -> "FreeElement":
        return cls(space=space, weights=())

    @classmethod
    def delta(cls, space: FiniteMetricSpace, p: int) -> "FreeElement":
        return cls.make(space, {p: ONE})

    def weight_dict(self) -> dict:
        return dict(self.weights)

    @property
    def support(self) -> tuple:
        return tuple(p for p, _ in self.weights)

    def is_zero(self) -> bool:
        return not self.weights

    def pairing(self, f: LipFunction) -> Scalar:
        """<self, f>; tolerates non-rooted f by pairing against f - f(base)."""
        off = f.values[f.space.base]
        return sum((w * (f.values[p] - off) for p, w in self.weights), ZERO)

    def __add__(self, other: "FreeElement") -> "FreeElement":
        self._same_space(other)
        acc = self.weight_dict()
        for p, w in other.weights:
            acc[p] = acc.get(p, ZERO) + w
        return FreeElement.make(self.space, acc)

    def __sub__(self, other: "FreeElement") -> "FreeElement":
        return self + (-ONE) * other

    def __mul__(self, scalar) -> "FreeElement":
        s = rat(scalar)
        return FreeElement.make(self.space, {p: s * w for p, w in self.weights})

    __rmul__ = __mul__

    def __neg__(self) -> "FreeElement":
        return (-ONE) * self

    def _same_space(self, other):
        if other.space is not self.space and other.space != self.space:
            raise ValueError("elements live on different spaces")

    def to_json(self) -> dict:
        labels = self.space.labels
        return {"weights": {labels[p]: rat_str(w) for p, w in self.weights}}

    @classmethod
    def from_json(cls, obj: dict, space: FiniteMetricSpace) -> "FreeElement":
        return cls.make(
            space, {space.index(lbl): rat(w) for lbl, w in obj["weights"].items()}
        )


@dataclass(frozen=True)
class Molecule:
    """(delta_u - delta_v) / d(u, v); always of norm exactly one."""

    space: FiniteMetricSpace
    u: int
    v: int

    def __post_init__(self):
        if self.u == self.v:
            raise ValueError("molecule endpoints must differ")

    @property
    def separation(self) -> Scalar:
        return self.space.d[self.u][self.v]

    def element(self) -> FreeElement:
        return FreeElement.make(self.space, lp.molecule_weights(self.space, self.u, self.v))

    def weight_dict(self) -> dict:
        return lp.molecule_weights(self.space, self.u, self.v)

    def reversed(self) -> "Molecule":
        return Molecule(self.space, self.v, self.u)


def all_molecules(space: FiniteMetricSpace):
    return tuple(
        Molecule(space, u, v)
        for u in space.points()
        for v in space.points()
        if u != v
    )


@dataclass(frozen=True)
class FreeNormResult:
    value: Scalar
    witness: LipFunction  # norming function in the Lipschitz unit ball
    plan: lp.TransportPlan


def free_norm(mu: FreeElement) -> FreeNormResult:
    """Exact norm with both certificates; primal and dual must coincide.

    Both programs run on the subspace spanned by the support and the base
    (the norm is unchanged there); the dual witness is lifted back by a
    1-Lipschitz extension, so both certificates are valid on the full space.
    """
    space = mu.space
    if mu.is_zero():
        zero_fn = LipFunction(space, (ZERO,) * space.n)
        return FreeNormResult(value=ZERO, witness=zero_fn, plan=lp.TransportPlan((), ZERO))
    pts = sorted(set(mu.support) | {space.base})
    if len(pts) == space.n:
        return _free_norm_direct(mu)
    sub = FiniteMetricSpace(
        labels=tuple(space.labels[p] for p in pts),
        base=pts.index(space.base),
        d=tuple(tuple(space.d[p][q] for q in pts) for p in pts),
    )
    pos = {p: i for i, p in enumerate(pts)}
    sub_mu = FreeElement.make(sub, {pos[p]: w for p, w in mu.weights})
    res = _free_norm_direct(sub_mu)
    lifted = mcshane_extend(
        space,
        pts,
        {p: res.witness.values[pos[p]] for p in pts},
        ONE,
        direction="lower",
    )
    flows = tuple(
        sorted((pts[p], pts[q], mass) for p, q, mass in res.plan.flows)
    )
    return FreeNormResult(
        value=res.value,
        witness=lifted,
        plan=lp.TransportPlan(flows=flows, cost=res.plan.cost),
    )


def _free_norm_direct(mu: FreeElement) -> FreeNormResult:
    plan = lp.min_cost_transport(mu.space, mu)
    sol = lp.solve_lip_ball(lp.LipBallProgram(space=mu.space, objective=mu))
    if sol.status != lp.OPTIMAL:
        raise lp.SimplexError(f"norm program unexpectedly {sol.status}")
    if sol.value != plan.cost:
        raise lp.SimplexError(
            f"duality gap: transport {rat_str(plan.cost)} vs ball {rat_str(sol.value)}"
        )
    return FreeNormResult(value=sol.value, witness=sol.argument, plan=plan)


def free_dist(mu: FreeElement, nu) -> Scalar:
    if isinstance(nu, Molecule):
        nu = nu.element()
    if isinstance(mu, Molecule):
        mu = mu.element()
    mu._same_space(nu)
    return free_norm(mu - nu).value


def molecule_distance_formula(m1: Molecule, m2: Molecule) -> Scalar:
    """(d(u,p) + d(q,v) + |d(u,v) - d(p,q)|) / max{d(u,v), d(p,q)}.

    A closed form that matches free_dist on the configurations it is used
    for here; no general equality is asserted.
    """
    if m1.space != m2.space:
        raise ValueError("molecules live on different spaces")
    d = m1.space.d
    u, v, p, q = m1.u, m1.v, m2.u, m2.v
    return (d[u][p] + d[q][v] + abs(d[u][v] - d[p][q])) / max(d[u][v], d[p][q])


def extreme_molecules(space: FiniteMetricSpace) -> tuple:
    """Molecules that are vertices of the convex hull of all molecules.

    A molecule is kept when the LP expressing it as a convex combination of
    the remaining molecules is infeasible. In finite dimension these
    vertices are the denting points of the unit ball of the free space.
    """
    mols = all_molecules(space)
    coords = [m.weight_dict() for m in mols]
    rows = [p for p in space.points() if p != space.base]
    rpos = {p: i for i, p in enumerate(rows)}
    sum_row = len(rows)
    out = []
    for i, m in enumerate(mols):
        cols = []
        for j, w in enumerate(coords):
            if j == i:
                continue
            col = sorted((rpos[p], c) for p, c in w.items())
            col.append((sum_row, ONE))
            cols.append(col)
        b = [coords[i].get(p, ZERO) for p in rows] + [ONE]
        status, _, _, _ = lp.simplex_standard(cols, b, [ZERO] * len(cols))
        if status == lp.INFEASIBLE:
            out.append(m)
    return tuple(out)


def molecules_in_slice(space: FiniteMetricSpace, f: LipFunction, alpha) -> tuple:
    """Molecules m with f(m) > 1 - alpha; f must have norm exactly one."""
    if f.norm != 1:
        raise ValueError("slice functional must have norm exactly one")
    alpha = rat(alpha)
    if not (0 < alpha <= 2):
        raise ValueError("alpha must lie in (0, 2]")
    cut = ONE - alpha
    return tuple(
        m for m in all_molecules(space) if f.molecule_value(m.u, m.v) > cut
    )


def delta_set_molecules(x: FreeElement, eps) -> tuple:
    """Molecules at distance >= 2 - eps from a norm-one element."""
    if free_norm(x).value != 1:
        raise ValueError("element must have norm exactly one")
    eps = rat(eps)
    if not (0 < eps <= 2):
        raise ValueError("eps must lie in (0, 2]")
    cut = TWO - eps
    return tuple(
        m for m in all_molecules(x.space) if free_dist(x, m.element()) >= cut
    )
