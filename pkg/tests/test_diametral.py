import itertools
import random

import pytest

from lipfree.diametral import (
    SliceSpec,
    build_separated_chain,
    delta_score_free,
    greedy_packing,
    verify_separated_annuli,
    wstar_daugavet_profile,
    wstar_delta_radius,
)
from lipfree.free import Molecule, all_molecules, free_dist, free_norm
from lipfree.functions import LipFunction
from lipfree.metric import build_recursion_space, build_simplex_space
from lipfree.sampling import random_lip_function, random_space
from lipfree.scalars import ONE, ZERO, rat


class TestSliceSpec:
    def test_free_side_membership(self, triangle):
        f = free_norm(Molecule(triangle, 1, 2).element()).witness
        slc = SliceSpec(side="free", functional=f, alpha=rat("1/2"))
        assert slc.contains(Molecule(triangle, 1, 2))
        assert slc.value_at(Molecule(triangle, 1, 2)) == 1
        # the reversed molecule evaluates to -1, far outside
        assert not slc.contains(Molecule(triangle, 2, 1))

    def test_lip_side(self, triangle):
        mu = Molecule(triangle, 1, 2).element()
        slc = SliceSpec(side="lip", functional=mu, alpha=ONE)
        f = free_norm(mu).witness
        assert slc.contains(f)

    def test_rejects_bad_arguments(self, triangle):
        f = free_norm(Molecule(triangle, 1, 2).element()).witness
        with pytest.raises(ValueError):
            SliceSpec(side="weird", functional=f, alpha=ONE)
        with pytest.raises(ValueError):
            SliceSpec(side="free", functional=f, alpha=rat(3))
        with pytest.raises(ValueError):
            SliceSpec(side="free", functional=f * rat("1/2"), alpha=ONE)


class TestGreedyPacking:
    def test_zero_separation_keeps_everything(self, triangle):
        mols = all_molecules(triangle)
        rep = greedy_packing(mols, free_dist, 0)
        assert len(rep.items) == len(mols) and rep.certified

    def test_opposite_molecules_at_separation_two(self, triangle):
        mols = all_molecules(triangle)
        rep = greedy_packing(mols, free_dist, 2)
        assert rep.certified
        assert len(rep.items) >= 2
        # the reversal of the first kept molecule is 2 away, so it survives
        first = rep.items[0]
        assert any(
            (m.u, m.v) == (first.v, first.u) for m in rep.items
        )

    def test_rejects_negative_separation(self, triangle):
        with pytest.raises(ValueError):
            greedy_packing(all_molecules(triangle), free_dist, -1)


class TestSeparatedChain:
    def test_single_element_chain(self, triangle):
        center = Molecule(triangle, 1, 2).element()
        f = free_norm(center).witness
        slc = SliceSpec(side="free", functional=f, alpha=rat("1/100"))
        chain = build_separated_chain(triangle, center, slc, max_len=1)
        assert chain.elements == (center,)

    def test_chain_certifies_separation(self):
        space = build_simplex_space(5)
        center = Molecule(space, 1, 2).element()
        f = free_norm(center).witness
        slc = SliceSpec(side="free", functional=f, alpha=rat(2))
        chain = build_separated_chain(space, center, slc, alpha=rat(1), max_len=4)
        target = 2 - rat(1)
        for i, a in enumerate(chain.elements):
            assert free_norm(a).value == 1
            for b in chain.elements[i + 1 :]:
                assert free_dist(a, b) >= target
        assert chain.separation >= target or len(chain.elements) == 1

    def test_center_must_be_in_slice(self, triangle):
        f = free_norm(Molecule(triangle, 1, 2).element()).witness
        slc = SliceSpec(side="free", functional=f, alpha=rat("1/100"))
        outside = Molecule(triangle, 2, 1).element()
        with pytest.raises(ValueError):
            build_separated_chain(triangle, outside, slc)


class TestDeltaScore:
    def test_reversal_attains_two(self, triangle):
        mu = Molecule(triangle, 1, 2).element()
        f = free_norm(mu).witness
        slc = SliceSpec(side="free", functional=f, alpha=rat(2))
        score = delta_score_free(triangle, mu, slc)
        assert score.value == 2
        assert score.min_pair_distance == min(
            triangle.d[i][j] for i, j in triangle.pairs()
        )

    def test_narrow_slice_smaller_score(self, triangle):
        mu = Molecule(triangle, 1, 2).element()
        f = free_norm(mu).witness
        wide = delta_score_free(triangle, mu, SliceSpec("free", f, rat(2)))
        narrow = delta_score_free(triangle, mu, SliceSpec("free", f, rat("1/100")))
        assert narrow.value <= wide.value


def _vertex_oracle(space, f, mu, alpha):
    """Brute-force sup ||f - g|| over the dual slice by vertex enumeration.

    The feasible set lives in R^(n-1) (g(base) = 0) and is cut out by the
    Lipschitz inequalities plus the slice row; every vertex solves some
    (n-1)-subset of the rows with equality. Exact Gaussian elimination.
    """
    base = space.base
    vars_ = [p for p in space.points() if p != base]
    k = len(vars_)
    pos = {p: i for i, p in enumerate(vars_)}

    rows = []  # (coeffs, bound) meaning coeffs . g <= bound
    for p, q in space.pairs():
        co = [ZERO] * k
        if p != base:
            co[pos[p]] += ONE
        if q != base:
            co[pos[q]] -= ONE
        rows.append((tuple(co), space.d[p][q]))
        rows.append((tuple(-c for c in co), space.d[p][q]))
    slice_co = [ZERO] * k
    for p, w in mu.weight_dict().items():
        slice_co[pos[p]] -= w
    rows.append((tuple(slice_co), -(ONE - rat(alpha))))

    def solve(subset):
        # exact solve of the k x k system given by the chosen active rows
        m = [list(rows[i][0]) + [rows[i][1]] for i in subset]
        for col in range(k):
            piv = next((r for r in range(col, k) if m[r][col] != 0), None)
            if piv is None:
                return None
            m[col], m[piv] = m[piv], m[col]
            inv = ONE / m[col][col]
            m[col] = [x * inv for x in m[col]]
            for r in range(k):
                if r != col and m[r][col] != 0:
                    fac = m[r][col]
                    m[r] = [a - fac * b for a, b in zip(m[r], m[col])]
        return [m[r][k] for r in range(k)]

    best = None
    for subset in itertools.combinations(range(len(rows)), k):
        g = solve(subset)
        if g is None:
            continue
        if any(
            sum(c * x for c, x in zip(co, g)) > b for co, b in rows
        ):
            continue
        full = {p: g[pos[p]] for p in vars_}
        full[base] = ZERO
        val = max(
            (f.values[p] - full[p] - f.values[q] + full[q]) / space.d[p][q]
            for p in space.points()
            for q in space.points()
            if p != q
        )
        if best is None or val > best:
            best = val
    return best


class TestWstarRadius:
    def test_alpha_two_gives_two(self, triangle):
        mu = Molecule(triangle, 1, 2).element()
        f = free_norm(mu).witness
        res = wstar_delta_radius(triangle, f, mu, rat(2))
        assert res.value == 2
        assert res.witness.norm <= 1

    def test_monotone_in_alpha(self, triangle):
        mu = Molecule(triangle, 1, 2).element()
        f = free_norm(mu).witness
        small = wstar_delta_radius(triangle, f, mu, rat("1/4"))
        big = wstar_delta_radius(triangle, f, mu, rat(1))
        assert small.value <= big.value

    def test_membership_enforced(self, triangle):
        mu = Molecule(triangle, 1, 2).element()
        f = free_norm(mu).witness
        with pytest.raises(ValueError):
            wstar_delta_radius(triangle, -f, mu, rat("1/4"))
        # the profile variant skips the membership check
        out = wstar_daugavet_profile(triangle, -f, [(mu, rat("1/4"))])
        assert len(out) == 1

    def test_matches_vertex_enumeration_oracle(self):
        rng = random.Random(20240818)
        for _ in range(12):
            space = random_space(rng, rng.randint(2, 4))
            f = random_lip_function(rng, space)
            pts = [p for p in space.points() if p != space.base]
            u = rng.choice(pts)
            mu = Molecule(space, u, space.base).element()
            alpha = rat(rng.choice(["1/4", "1/2", "1", "3/2"]))
            try:
                res = wstar_delta_radius(
                    space, f, mu, alpha, require_membership=False
                )
            except ValueError:
                continue  # empty dual slice
            oracle = _vertex_oracle(space, f, mu, alpha)
            assert oracle == res.value


class TestVerifySeparatedAnnuli:
    def test_recursion_space_passes(self):
        rs = build_recursion_space(3)
        report = verify_separated_annuli(
            rs.space, rs.pairs, rs.annuli, rs.eps, samples=4, seed=1
        )
        assert report.overall
        assert len(report.checks) >= 5  # hypothesis + one per sample

    def test_overlap_fails_hypothesis(self):
        rs = build_recursion_space(3)
        bad = (rs.annuli[0] | rs.annuli[1],) + rs.annuli[1:]
        report = verify_separated_annuli(
            rs.space, rs.pairs, bad, rs.eps, samples=2, seed=1
        )
        assert not report.overall
        assert not report.checks[0].passed

    def test_explicit_battery(self):
        rs = build_recursion_space(3)
        outside = [
            p
            for p in rs.space.points()
            if p not in rs.annuli[0]
        ]
        m = Molecule(rs.space, outside[0], outside[1]).element()
        report = verify_separated_annuli(
            rs.space, rs.pairs, rs.annuli, rs.eps, battery=[m]
        )
        assert report.overall
