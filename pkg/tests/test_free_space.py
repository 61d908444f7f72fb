import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lipfree.free import (
    FreeElement,
    Molecule,
    all_molecules,
    delta_set_molecules,
    extreme_molecules,
    free_dist,
    free_norm,
    molecule_distance_formula,
    molecules_in_slice,
)
from lipfree.functions import LipFunction, example2_function
from lipfree.metric import (
    build_example2_space,
    build_half_line_space,
    build_simplex_space,
    example2_point,
)
from lipfree.sampling import random_free_element, random_space
from lipfree.scalars import ONE, ZERO, rat


class TestFreeElement:
    def test_normalization_drops_base_and_zeros(self, triangle):
        mu = FreeElement.make(triangle, {0: rat(5), 1: ZERO, 2: rat(2)})
        assert mu.weight_dict() == {2: rat(2)}
        assert mu.support == (2,)

    def test_zero_and_delta(self, triangle):
        assert FreeElement.zero(triangle).is_zero()
        assert FreeElement.delta(triangle, 2).weight_dict() == {2: ONE}
        # the base point delta is the zero element
        assert FreeElement.delta(triangle, triangle.base).is_zero()

    def test_pairing_is_shift_invariant(self, triangle):
        mu = FreeElement.make(triangle, {1: rat(2), 2: rat(-1)})
        f = LipFunction(triangle, (rat(7), rat(8), rat(9)))
        assert mu.pairing(f) == mu.pairing(f.rooted())

    def test_arithmetic(self, triangle):
        a = FreeElement.delta(triangle, 1)
        b = FreeElement.delta(triangle, 2)
        assert (a + b).weight_dict() == {1: ONE, 2: ONE}
        assert (a - a).is_zero()
        assert (a * rat(3)).weight_dict() == {1: rat(3)}
        assert (-a).weight_dict() == {1: -ONE}

    def test_json_round_trip(self, triangle):
        mu = FreeElement.make(triangle, {1: rat("1/3"), 2: rat("-5/7")})
        assert FreeElement.from_json(mu.to_json(), triangle) == mu


class TestFreeNorm:
    def test_molecule_norm_is_one(self, triangle):
        for m in all_molecules(triangle):
            assert free_norm(m.element()).value == 1

    def test_delta_norm_is_distance_to_base(self, line4):
        for p in line4.points():
            assert free_norm(FreeElement.delta(line4, p)).value == line4.d[0][p]

    def test_zero_norm(self, triangle):
        res = free_norm(FreeElement.zero(triangle))
        assert res.value == 0 and res.plan.cost == 0

    def test_witness_certifies(self, line4):
        mu = FreeElement.make(line4, {1: rat(2), 3: rat(-1)})
        res = free_norm(mu)
        assert res.witness.norm <= 1
        assert mu.pairing(res.witness) == res.value
        assert res.plan.cost == res.value

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=30, deadline=None)
    def test_norm_laws_random(self, seed):
        rng = random.Random(seed)
        space = random_space(rng, rng.randint(3, 7))
        mu = random_free_element(rng, space, norm_one=False)
        nu = random_free_element(rng, space, norm_one=False)
        nmu = free_norm(mu).value
        assert free_norm(mu * rat(-2)).value == 2 * nmu  # homogeneity
        assert free_norm(mu + nu).value <= nmu + free_norm(nu).value

    def test_support_restriction_lifts_witness(self):
        # support of 2 points inside a 12-point space: the lifted witness
        # must still certify on the full space
        space = build_half_line_space(list(range(12)))
        mu = FreeElement.make(space, {4: ONE, 9: -ONE})
        res = free_norm(mu)
        assert res.value == 5
        assert res.witness.norm <= 1
        assert mu.pairing(res.witness) == 5


class TestFreeDist:
    def test_symmetry_and_identity(self, triangle):
        m1, m2 = Molecule(triangle, 1, 2), Molecule(triangle, 2, 0)
        assert free_dist(m1, m2) == free_dist(m2, m1)
        assert free_dist(m1, m1) == 0

    def test_reversed_molecule_at_distance_two(self, triangle):
        m = Molecule(triangle, 1, 2)
        assert free_dist(m, m.reversed()) == 2

    def test_triangle_inequality_on_molecules(self, triangle):
        mols = all_molecules(triangle)
        for a in mols[:4]:
            for b in mols[:4]:
                for c in mols[:4]:
                    assert free_dist(a, c) <= free_dist(a, b) + free_dist(b, c)

    def test_formula_matches_on_disjoint_equal_length_pairs(self):
        space = build_example2_space(3)
        pts = [
            (example2_point(space, "x", i), example2_point(space, "y", i))
            for i in (1, 2, 3)
        ]
        mols = [Molecule(space, u, v) for u, v in pts]
        for i, a in enumerate(mols):
            for b in mols[i + 1 :]:
                lhs = free_dist(a, b)
                assert lhs == molecule_distance_formula(a, b)
                assert lhs == 2  # all four cross distances equal 2

    def test_formula_is_upper_bound_on_random_spaces(self):
        rng = random.Random(77)
        for _ in range(15):
            space = random_space(rng, 4)
            mols = all_molecules(space)
            a, b = rng.sample(mols, 2)
            assert free_dist(a, b) <= molecule_distance_formula(a, b)


class TestExtremeMolecules:
    def test_two_point_space_both_extreme(self):
        space = build_half_line_space([0, 3])
        assert len(extreme_molecules(space)) == 2

    def test_geodesic_midpoint_kills_long_molecule(self):
        space = build_half_line_space([0, 1, 2])
        ext = {(m.u, m.v) for m in extreme_molecules(space)}
        # m_02 = (1/2) m_01 + (1/2) m_12 is a proper convex combination
        assert (0, 2) not in ext and (2, 0) not in ext
        assert (0, 1) in ext and (1, 2) in ext

    def test_simplex_all_extreme(self):
        space = build_simplex_space(4)
        assert len(extreme_molecules(space)) == 12


class TestSlices:
    def test_norming_molecule_in_every_slice(self, triangle):
        f = free_norm(Molecule(triangle, 1, 2).element()).witness
        got = molecules_in_slice(triangle, f, rat("1/100"))
        assert any((m.u, m.v) == (1, 2) for m in got)

    def test_alpha_two_gives_more_than_alpha_small(self, triangle):
        f = free_norm(Molecule(triangle, 1, 2).element()).witness
        small = molecules_in_slice(triangle, f, rat("1/100"))
        big = molecules_in_slice(triangle, f, rat(2))
        assert set(small) <= set(big)

    def test_requires_norm_one(self, triangle):
        half = LipFunction(triangle, (ZERO, ONE, ZERO))  # norm 1/2
        with pytest.raises(ValueError):
            molecules_in_slice(triangle, half, rat(1))

    def test_delta_set_full_at_eps_two(self, triangle):
        x = Molecule(triangle, 1, 2).element()
        got = delta_set_molecules(x, rat(2))
        assert len(got) == len(all_molecules(triangle))

    def test_delta_set_contains_reversal(self, triangle):
        x = Molecule(triangle, 1, 2).element()
        got = delta_set_molecules(x, rat("1/10"))
        assert any((m.u, m.v) == (2, 1) for m in got)

    def test_delta_set_requires_norm_one(self, triangle):
        x = FreeElement.delta(triangle, 1)  # norm 2
        with pytest.raises(ValueError):
            delta_set_molecules(x, rat(1))


class TestCancellation:
    def test_telescoping_sum_is_zero(self, line4):
        mu = FreeElement.zero(line4)
        for p in range(3):
            m = Molecule(line4, p, p + 1)
            mu = mu + m.element() * line4.d[p][p + 1]
        # sum of d*m_{p,p+1} = delta_0 - delta_3 (rooted), norm d(0,3)
        assert free_norm(mu).value == line4.d[0][3]
        assert (mu - mu).is_zero()
