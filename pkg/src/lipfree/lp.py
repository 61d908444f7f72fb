"""Exact rational linear programming over the Lipschitz unit ball.

Two problem families share one simplex core:

* maximize a linear functional over {f : ||f||_Lip <= 1, f(base) = 0}
  with optional linear side constraints (solved through the dual, which is
  a standard-form program whose basis has one row per free variable);
* the transport (primal) realization of the free-space norm, a min-cost
  flow on the complete graph with the base point absorbing imbalance.

All pivoting is exact. The pivot rule is Dantzig with smallest-index
tie-breaking, falling back to Bland's rule after an iteration cap, so runs
are deterministic and cycle-free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .functions import LipFunction
from .metric import FiniteMetricSpace
from .scalars import ONE, Scalar, ZERO, rat

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_DANTZIG_CAP_FACTOR = 20


class SimplexError(RuntimeError):
    pass


def simplex_standard(cols, b, costs):
    """min costs.x  s.t.  sum_j x_j * cols[j] = b,  x >= 0.

    cols: sparse columns as [(row, coef), ...]. Returns
    (status, x: dict, value, duals: list per row). Two-phase revised
    simplex with an explicit basis inverse.
    """
    m = len(b)
    n = len(cols)
    b = list(b)
    cols = [list(c) for c in cols]
    # orient rows so the artificial start is feasible
    flip = [False] * m
    for r in range(m):
        if b[r] < 0:
            b[r] = -b[r]
            flip[r] = True
    if any(flip):
        cols = [
            [(r, -a if flip[r] else a) for r, a in col]
            for col in cols
        ]

    basis = list(range(n, n + m))  # artificials
    binv = [[ONE if i == j else ZERO for j in range(m)] for i in range(m)]
    xb = [rat(v) for v in b]
    art_cost = [ZERO] * n + [ONE] * m
    real_cost = [rat(c) for c in costs] + [ZERO] * m

    def column(j):
        if j < n:
            return cols[j]
        return [(j - n, ONE)]

    def run_phase(cost, allow_artificial_entering):
        cap = _DANTZIG_CAP_FACTOR * (m + n)
        iteration = 0
        in_basis = [False] * (n + m)
        for j in basis:
            in_basis[j] = True
        while True:
            iteration += 1
            if iteration > cap + 200000:
                raise SimplexError("pivot limit exceeded")
            cb = [cost[j] for j in basis]
            y = [ZERO] * m
            for i in range(m):
                ci = cb[i]
                if ci:
                    row = binv[i]
                    for r in range(m):
                        if row[r]:
                            y[r] += ci * row[r]
            entering = -1
            best_rc = ZERO
            bland = iteration > cap
            for j in range(n + m):
                if in_basis[j]:
                    continue
                if j >= n and not allow_artificial_entering:
                    continue
                rc = cost[j]
                for r, a in column(j):
                    rc -= y[r] * a
                if rc < 0:
                    if bland:
                        entering = j
                        break
                    if rc < best_rc:
                        best_rc = rc
                        entering = j
            if entering < 0:
                value = ZERO
                for i in range(m):
                    if cb[i]:
                        value += cb[i] * xb[i]
                return value, y
            dvec = [ZERO] * m
            for r, a in column(entering):
                for i in range(m):
                    if binv[i][r]:
                        dvec[i] += binv[i][r] * a
            leaving = -1
            # drive lingering artificials out first (theta stays 0)
            if not allow_artificial_entering:
                for i in range(m):
                    if basis[i] >= n and dvec[i] != 0 and xb[i] == 0:
                        leaving = i
                        break
            if leaving < 0:
                theta = None
                for i in range(m):
                    if dvec[i] > 0:
                        ratio = xb[i] / dvec[i]
                        if theta is None or ratio < theta or (
                            ratio == theta and basis[i] < basis[leaving]
                        ):
                            theta = ratio
                            leaving = i
                if leaving < 0:
                    return None, None  # unbounded
            piv = dvec[leaving]
            inv_piv = ONE / piv
            prow = binv[leaving]
            for r in range(m):
                if prow[r]:
                    prow[r] *= inv_piv
            xb[leaving] *= inv_piv
            for i in range(m):
                if i == leaving or not dvec[i]:
                    continue
                factor = dvec[i]
                row = binv[i]
                for r in range(m):
                    if prow[r]:
                        row[r] -= factor * prow[r]
                xb[i] -= factor * xb[leaving]
            in_basis[basis[leaving]] = False
            in_basis[entering] = True
            basis[leaving] = entering

    value, _ = run_phase(art_cost, allow_artificial_entering=True)
    if value is None:
        raise SimplexError("phase 1 unbounded")
    if value > 0:
        return INFEASIBLE, {}, None, None
    value, y = run_phase(real_cost, allow_artificial_entering=False)
    if value is None:
        return UNBOUNDED, {}, None, None
    x = {}
    for i in range(m):
        if basis[i] < n and xb[i] != 0:
            x[basis[i]] = xb[i]
    duals = [-yr if flip[r] else yr for r, yr in enumerate(y)]
    return OPTIMAL, x, value, duals


# ---------------------------------------------------------------------------
# Lipschitz-ball programs


@dataclass(frozen=True)
class SideConstraint:
    weights: dict  # point -> coefficient of f(point)
    relation: str  # "<=" or ">="
    bound: Scalar


@dataclass(frozen=True)
class LipBallProgram:
    space: FiniteMetricSpace
    objective: dict  # point -> coefficient (base weight ignored)
    side_constraints: tuple = ()


@dataclass(frozen=True)
class LpSolution:
    status: str
    value: Optional[Scalar]
    argument: Optional[LipFunction]
    row_duals: Optional[dict]  # primal-constraint index -> multiplier


def _as_weights(obj) -> dict:
    if hasattr(obj, "weight_dict"):
        return obj.weight_dict()
    return dict(obj)


def _check_points(space, weights):
    for p in weights:
        if not (0 <= p < space.n):
            raise ValueError(f"point index {p} outside space")


def solve_lip_ball(program: LipBallProgram) -> LpSolution:
    """Exact optimum of the objective over the Lipschitz unit ball."""
    space = program.space
    objective = _as_weights(program.objective)
    _check_points(space, objective)
    base = space.base
    vars_ = [p for p in space.points() if p != base]
    vpos = {p: i for i, p in enumerate(vars_)}
    k = len(vars_)

    rows = []  # (sparse {var: coef}, bound)
    for p, q in space.pairs():
        dpq = space.d[p][q]
        if p == base:
            rows.append(({vpos[q]: -ONE}, dpq))
            rows.append(({vpos[q]: ONE}, dpq))
        elif q == base:
            rows.append(({vpos[p]: ONE}, dpq))
            rows.append(({vpos[p]: -ONE}, dpq))
        else:
            rows.append(({vpos[p]: ONE, vpos[q]: -ONE}, dpq))
            rows.append(({vpos[p]: -ONE, vpos[q]: ONE}, dpq))
    for sc in program.side_constraints:
        weights = _as_weights(sc.weights)
        _check_points(space, weights)
        coefs = {}
        for p, w in weights.items():
            if p == base or w == 0:
                continue
            coefs[vpos[p]] = coefs.get(vpos[p], ZERO) + rat(w)
        bound = rat(sc.bound)
        if sc.relation == "<=":
            rows.append((coefs, bound))
        elif sc.relation == ">=":
            rows.append(({v: -c for v, c in coefs.items()}, -bound))
        else:
            raise ValueError(f"unknown relation: {sc.relation}")

    c = [ZERO] * k
    for p, w in objective.items():
        if p != base:
            c[vpos[p]] += rat(w)

    # dual: min bounds.y  s.t.  (row coefs)^T y = c,  y >= 0
    cols = [sorted((v, coef) for v, coef in coefs.items()) for coefs, _ in rows]
    costs = [bound for _, bound in rows]
    status, x, value, duals = simplex_standard(cols, c, costs)
    if status == INFEASIBLE:
        return LpSolution(status=UNBOUNDED, value=None, argument=None, row_duals=None)
    if status == UNBOUNDED:
        return LpSolution(status=INFEASIBLE, value=None, argument=None, row_duals=None)

    values = [ZERO] * space.n
    for i, p in enumerate(vars_):
        values[p] = duals[i]
    arg = LipFunction(space=space, values=tuple(values))
    _verify_lip_solution(space, rows, c, values, value, vars_)
    return LpSolution(status=OPTIMAL, value=value, argument=arg, row_duals=dict(x))


def _verify_lip_solution(space, rows, c, values, value, vars_):
    attained = ZERO
    for i, p in enumerate(vars_):
        if c[i]:
            attained += c[i] * values[p]
    if attained != value:
        raise SimplexError("optimal argument does not attain the LP value")
    for coefs, bound in rows:
        lhs = ZERO
        for v, coef in coefs.items():
            lhs += coef * values[vars_[v]]
        if lhs > bound:
            raise SimplexError("optimal argument violates a constraint")


# ---------------------------------------------------------------------------
# transport primal


@dataclass(frozen=True)
class TransportPlan:
    flows: tuple  # ((p, q, mass), ...) sorted by (p, q)
    cost: Scalar

    def flow_dict(self) -> dict:
        return {(p, q): mass for p, q, mass in self.flows}


def min_cost_transport(space: FiniteMetricSpace, mu) -> TransportPlan:
    """Cheapest flow realizing mu, the base point absorbing any imbalance."""
    weights = _as_weights(mu)
    _check_points(space, weights)
    base = space.base
    net = {p: ZERO for p in space.points()}
    total = ZERO
    for p, w in weights.items():
        if p == base:
            continue
        w = rat(w)
        net[p] += w
        total += w
    net[base] -= total
    if all(v == 0 for v in net.values()):
        return TransportPlan(flows=(), cost=ZERO)

    rows = [p for p in space.points() if p != base]  # drop redundant base row
    rpos = {p: i for i, p in enumerate(rows)}
    arcs = []
    cols = []
    costs = []
    for p in space.points():
        for q in space.points():
            if p == q:
                continue
            col = []
            if p != base:
                col.append((rpos[p], ONE))
            if q != base:
                col.append((rpos[q], -ONE))
            arcs.append((p, q))
            cols.append(sorted(col))
            costs.append(space.d[p][q])
    b = [net[p] for p in rows]
    status, x, value, _ = simplex_standard(cols, b, costs)
    if status != OPTIMAL:
        raise SimplexError(f"transport problem unexpectedly {status}")
    flows = sorted((arcs[j][0], arcs[j][1], mass) for j, mass in x.items())
    return TransportPlan(flows=tuple(flows), cost=value)


# ---------------------------------------------------------------------------
# pairwise-witness decomposition


@dataclass(frozen=True)
class PairMaxResult:
    status: str
    value: Optional[Scalar]
    pair: Optional[tuple]
    argument: Optional[LipFunction]
    per_pair: tuple = ()


def molecule_weights(space: FiniteMetricSpace, u: int, v: int) -> dict:
    """Weights of (delta_u - delta_v)/d(u,v), base weight dropped."""
    inv = ONE / space.d[u][v]
    w = {}
    if u != space.base:
        w[u] = inv
    if v != space.base:
        w[v] = -inv
    return w


def max_over_pairs(
    space: FiniteMetricSpace,
    base_fn: LipFunction,
    threshold,
    objective,
    keep_per_pair: bool = False,
) -> PairMaxResult:
    """Best objective value over g in the ball with some pair witnessing
    (base_fn - g)(m_pq) >= threshold.
    """
    threshold = rat(threshold)
    if threshold > 2:
        raise ValueError("threshold must be <= 2")
    objective = _as_weights(objective)
    best = None
    per_pair = []
    for p in space.points():
        for q in space.points():
            if p == q:
                continue
            fval = base_fn.molecule_value(p, q)
            if fval + ONE < threshold:
                continue  # infeasible: g(m_pq) >= -1 always
            side = SideConstraint(
                weights=molecule_weights(space, p, q),
                relation="<=",
                bound=fval - threshold,
            )
            sol = solve_lip_ball(
                LipBallProgram(space=space, objective=objective, side_constraints=(side,))
            )
            if sol.status != OPTIMAL:
                continue
            if keep_per_pair:
                per_pair.append(((p, q), sol.value))
            if best is None or sol.value > best[1]:
                best = ((p, q), sol.value, sol.argument)
    if best is None:
        return PairMaxResult(status=INFEASIBLE, value=None, pair=None, argument=None)
    return PairMaxResult(
        status=OPTIMAL,
        value=best[1],
        pair=best[0],
        argument=best[2],
        per_pair=tuple(per_pair),
    )
