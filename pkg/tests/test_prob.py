import math

import numpy as np
import pytest

from ibap.errors import InputError, RefusalError
from ibap.prob import (
    DiscreteProbabilitySpace,
    H_A_subspace,
    MeasureFamily,
    PartitionSigmaAlgebra,
    alternating_sets,
    bickel_alpha,
    bickel_solve,
    conditional_expectation,
    imp_check,
    imp_solve,
    imp_sweep,
    interval_reduction,
    joint_space,
    marginal_subspaces,
    part_from_starting_points,
    product_space,
    tail_indicator,
    tail_predicates,
    tail_report,
    weighted_shift,
    weighted_shift_check,
)
from ibap.subspace import projector


def measurable(rng, alg):
    return rng.standard_normal(alg.n_blocks)[alg.labels]


class TestSpace:
    def test_validation(self):
        with pytest.raises(InputError):
            DiscreteProbabilitySpace([0.5, 0.6])
        with pytest.raises(InputError):
            DiscreteProbabilitySpace([1.0, 0.0])
        with pytest.raises(InputError):
            DiscreteProbabilitySpace([])

    def test_geometric_lump(self):
        sp = DiscreteProbabilitySpace.geometric(0.5, 4)
        # p_k proportional to q^k for k < N, the tail lumped into the last atom
        np.testing.assert_allclose(sp.p, [0.5, 0.25, 0.125, 0.125])

    def test_geometric_renormalize(self):
        sp = DiscreteProbabilitySpace.geometric(0.5, 3, "renormalize")
        np.testing.assert_allclose(sp.p, np.array([4, 2, 1]) / 7)

    def test_power(self):
        sp = DiscreteProbabilitySpace.power(2.0, 50, "renormalize")
        assert sp.p[0] / sp.p[1] == pytest.approx(4.0)

    def test_expectation(self):
        assert DiscreteProbabilitySpace.uniform(4).expectation([1, 2, 3, 4]) == pytest.approx(2.5)


class TestAlgebra:
    def test_partition_validation(self):
        with pytest.raises(InputError):
            PartitionSigmaAlgebra([[0, 1], [1, 2]], 3)
        with pytest.raises(InputError):
            PartitionSigmaAlgebra([[0], []], 1)

    def test_from_labels(self):
        a = PartitionSigmaAlgebra.from_labels([2, 2, 0, 1])
        assert a.blocks == ((0, 1), (2,), (3,))

    def test_measurability(self):
        a = PartitionSigmaAlgebra([[0, 1], [2]], 3)
        assert a.is_measurable([1.0, 1.0, 2.0])
        assert not a.is_measurable([1.0, 0.0, 2.0])

    def test_conditional_expectation(self):
        sp = DiscreteProbabilitySpace([0.1, 0.3, 0.6])
        a = PartitionSigmaAlgebra([[0, 1], [2]], 3)
        np.testing.assert_allclose(conditional_expectation(sp, a, [4.0, 0.0, 5.0]), [1.0, 1.0, 5.0])

    def test_conditional_expectation_is_projection(self, rng):
        sp = DiscreteProbabilitySpace(rng.dirichlet(np.ones(6)))
        a = PartitionSigmaAlgebra.from_labels([0, 1, 0, 2, 1, 2])
        l2, l20 = marginal_subspaces(sp, a)
        xi = rng.standard_normal(6)
        np.testing.assert_allclose(projector(l2) @ xi, conditional_expectation(sp, a, xi), atol=1e-13)
        # L^2_0 is L^2 minus the constants
        np.testing.assert_allclose(projector(l20) @ xi, conditional_expectation(sp, a, xi) - sp.expectation(xi), atol=1e-13)

    def test_trivial_and_discrete(self):
        assert PartitionSigmaAlgebra.trivial(4).n_blocks == 1
        assert PartitionSigmaAlgebra.discrete(4).n_blocks == 4


class TestIMP:
    def test_independent_product(self):
        sp, algs = product_space([[0.3, 0.7], [0.5, 0.25, 0.25]])
        r = imp_check(sp, algs)
        assert r.ibap and r.c == pytest.approx(1.0)

    def test_same_algebra_twice_fails(self):
        sp = DiscreteProbabilitySpace.uniform(4)
        a = PartitionSigmaAlgebra([[0, 1], [2, 3]], 4)
        assert not imp_check(sp, [a, a]).ibap

    def test_trivial_algebra_is_harmless(self):
        sp = DiscreteProbabilitySpace.uniform(3)
        a = PartitionSigmaAlgebra.discrete(3)
        assert imp_check(sp, [a, PartitionSigmaAlgebra.trivial(3)]).ibap

    def test_alternating_geometric(self):
        sp = DiscreteProbabilitySpace.geometric(0.5, 30)
        algs = [part_from_starting_points(A, 30) for A in alternating_sets(2, 30)]
        assert imp_check(sp, algs).ibap

    def test_solve_matches_conditionals(self, rng):
        sp = DiscreteProbabilitySpace.geometric(0.6, 12)
        algs = [part_from_starting_points(A, 12) for A in alternating_sets(2, 12)]
        xis = []
        for a in algs:
            x = measurable(rng, a)
            xis.append(x - sp.expectation(x) + 1.5)
        xi = imp_solve(sp, algs, xis)
        for a, x in zip(algs, xis):
            np.testing.assert_allclose(conditional_expectation(sp, a, xi), x, atol=1e-10)

    def test_solve_refuses_without_imp(self, rng):
        sp = DiscreteProbabilitySpace.uniform(4)
        a = PartitionSigmaAlgebra([[0, 1], [2, 3]], 4)
        x = np.array([1.0, 1.0, -1.0, -1.0])
        with pytest.raises(RefusalError):
            imp_solve(sp, [a, a], [x, x])

    def test_solve_unequal_means(self):
        sp = DiscreteProbabilitySpace.uniform(2)
        a = PartitionSigmaAlgebra.discrete(2)
        with pytest.raises(RefusalError):
            imp_solve(sp, [a, PartitionSigmaAlgebra.trivial(2)], [np.array([1.0, 2.0]), np.array([0.0, 0.0])])

    def test_solve_non_measurable(self):
        sp = DiscreteProbabilitySpace.uniform(2)
        t = PartitionSigmaAlgebra.trivial(2)
        with pytest.raises(InputError):
            imp_solve(sp, [t], [np.array([1.0, 2.0])])


class TestStartingPoints:
    def test_runs(self):
        a = part_from_starting_points([3, 5], 6)
        assert a.blocks == ((0, 1), (2, 3), (4, 5))

    def test_out_of_range_points_cut(self):
        assert part_from_starting_points([1, 4, 9], 5).blocks == ((0, 1, 2), (3, 4))

    def test_no_cut_warns(self):
        with pytest.warns(RuntimeWarning):
            part_from_starting_points([7], 5)

    def test_alternating_sets(self):
        assert alternating_sets(2, 7) == [[2, 4, 6], [3, 5, 7]]

    def test_H_A_with_one(self):
        sp = DiscreteProbabilitySpace.geometric(0.5, 6)
        h = H_A_subspace(sp, [1, 3], 6)
        l2, _ = marginal_subspaces(sp, part_from_starting_points([3], 6))
        assert np.allclose(projector(h), projector(l2))

    def test_H_A_without_one_drops_first_run(self):
        sp = DiscreteProbabilitySpace.geometric(0.5, 6)
        h = H_A_subspace(sp, [3, 5], 6)
        assert h.rank == 2
        assert np.allclose(h.basis[:2], 0)

    def test_tail_indicator(self):
        np.testing.assert_array_equal(tail_indicator(4, 2), [0, 1, 1, 1])


class TestTails:
    @pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
    def test_geometric_sup_ratio(self, q):
        assert tail_report(DiscreteProbabilitySpace.geometric(q, 60)).sup_ratio == pytest.approx(q, abs=1e-12)

    def test_power_ratio_tends_to_one(self):
        rep = tail_report(DiscreteProbabilitySpace.power(2.0, 200))
        assert rep.sup_ratio > 0.99

    def test_step(self):
        rep = tail_report(DiscreteProbabilitySpace.geometric(0.5, 20), step=3)
        assert rep.step_sup == pytest.approx(0.125)
        with pytest.raises(InputError):
            tail_report(DiscreteProbabilitySpace.geometric(0.5, 20), step=50)

    def test_predicates(self):
        geo = tail_predicates(DiscreteProbabilitySpace.geometric(0.5, 200))
        pw = tail_predicates(DiscreteProbabilitySpace.power(2.0, 200))
        assert geo["ratio_gap"] and geo["rk_over_pk_bounded"] and geo["step_contraction"]
        assert not (pw["ratio_gap"] or pw["rk_over_pk_bounded"] or pw["step_contraction"])

    def test_needs_two_atoms(self):
        with pytest.raises(InputError):
            tail_report(DiscreteProbabilitySpace([1.0]))


class TestShift:
    def test_identity(self):
        for N in (2, 7, 40):
            assert weighted_shift_check(DiscreteProbabilitySpace.power(2.0, N)).identity_residual < 1e-13

    def test_norm_under_renormalize(self):
        sp = DiscreteProbabilitySpace.geometric(0.25, 30, "renormalize")
        assert weighted_shift_check(sp).shift_norm == pytest.approx(0.5)

    def test_nilpotent(self):
        s = weighted_shift(DiscreteProbabilitySpace.geometric(0.5, 5))
        np.testing.assert_array_equal(np.linalg.matrix_power(s, 5), 0)

    def test_power_norm(self):
        d = weighted_shift_check(DiscreteProbabilitySpace.geometric(0.25, 30, "renormalize"), m=3)
        assert d.power_norm == pytest.approx(0.125)


class TestSweep:
    def test_power_decreases(self):
        rows = imp_sweep(MeasureFamily("power", {"s": 2.0}), [10, 20, 40])
        cs = [r.c_N for r in rows]
        assert cs[0] > cs[1] > cs[2]

    def test_geometric_stays_positive(self):
        rows = imp_sweep(MeasureFamily("geometric", {"q": 0.5}), [10, 40])
        assert all(r.imp and r.c_N > 0.2 for r in rows)
        assert rows[0].sup_ratio == pytest.approx(0.5)

    def test_unknown_family(self):
        with pytest.raises(InputError):
            MeasureFamily("cauchy").space(5)


class TestInterval:
    def test_interleaved(self):
        red = interval_reduction([[1, 3], [2, 4]], [0.4, 0.2, 0.2, 0.1, 0.1])
        assert red.sets == [[2, 4], [3, 5]]
        assert red.imp and red.overlap is None

    def test_shared_point_witness(self):
        red = interval_reduction([[1, 2], [2, 3]], [0.4, 0.3, 0.2, 0.1])
        assert not red.imp
        i, j, c = red.overlap
        assert (i, j, c) == (0, 1, 2.0)
        f = red.witness
        assert red.space.expectation(f) == pytest.approx(0.0, abs=1e-15)
        for a in red.algebras[:2]:
            np.testing.assert_allclose(conditional_expectation(red.space, a, f), f, atol=1e-15)

    def test_validation(self):
        with pytest.raises(InputError):
            interval_reduction([[2, 1]], [0.5, 0.25, 0.25])
        with pytest.raises(InputError):
            interval_reduction([[1]], [1.0])
        with pytest.raises(InputError):
            interval_reduction([[1]], [1.0, 0.0])


class TestBickel:
    def test_fixture_alpha(self):
        sp, algs = joint_space([[0.3, 0.2], [0.2, 0.3]])
        assert bickel_alpha(sp, algs) == pytest.approx(0.8, abs=1e-15)

    def test_independent_alpha_one(self):
        sp, algs = product_space([[0.2, 0.8], [0.5, 0.5]])
        assert bickel_alpha(sp, algs) == pytest.approx(1.0)

    def test_alpha_brute_force(self, rng):
        # every measurable pair (A_1, A_2) of unions of blocks
        t = rng.uniform(0.1, 1.0, (2, 3))
        sp, algs = joint_space(t / t.sum())
        best = math.inf
        for m1 in range(1, 4):
            for m2 in range(1, 8):
                a1 = np.isin(algs[0].labels, [k for k in range(2) if m1 >> k & 1])
                a2 = np.isin(algs[1].labels, [k for k in range(3) if m2 >> k & 1])
                best = min(best, sp.p[a1 & a2].sum() / (sp.p[a1].sum() * sp.p[a2].sum()))
        assert bickel_alpha(sp, algs) == pytest.approx(best, rel=1e-12)

    def test_solve_agrees_with_imp_solve(self, rng):
        sp, algs = joint_space([[0.3, 0.2], [0.2, 0.3]])
        xis = [measurable(rng, a) for a in algs]
        xis = [x - sp.expectation(x) for x in xis]
        xb = bickel_solve(sp, algs, xis)
        xi = imp_solve(sp, algs, xis)
        for a in algs:
            np.testing.assert_allclose(conditional_expectation(sp, a, xb), conditional_expectation(sp, a, xi), atol=1e-12)

    def test_zero_alpha_refused(self):
        sp, algs = joint_space([[0.5, 0.0], [0.0, 0.5]])
        assert bickel_alpha(sp, algs) == 0.0
        with pytest.raises(RefusalError):
            bickel_solve(sp, algs, [np.zeros(2), np.zeros(2)])

    def test_negative_mass(self):
        with pytest.raises(InputError):
            joint_space([[0.5, -0.1], [0.3, 0.3]])
