import math

import numpy as np
import pytest

from ibap.analysis import check_conditions, ibap_constant
from ibap.errors import InputError, RefusalError
from ibap.fixtures import lines_at_angle, random_ibap_system, random_system
from ibap.riesz import VectorFamily, combine_families, concatenate, ibap_from_families, riesz_bounds
from ibap.subspace import InnerProduct


def spanning_families(rng, system):
    fams = []
    for h in system:
        mix = rng.standard_normal((h.rank, h.rank)) + 2 * np.eye(h.rank)
        fams.append(VectorFamily(system.space, h.basis @ mix))
    return fams


class TestBounds:
    @pytest.mark.parametrize("deg", [20, 45, 70])
    def test_two_unit_vectors(self, deg):
        phi = math.radians(deg)
        fam = VectorFamily(InnerProduct(2), np.array([[1.0, math.cos(phi)], [0.0, math.sin(phi)]]))
        eps, c = riesz_bounds(fam)
        assert eps == pytest.approx(math.sqrt(1 - abs(math.cos(phi))), abs=1e-12)
        assert c == pytest.approx(math.sqrt(1 + abs(math.cos(phi))), abs=1e-12)

    def test_inequalities_hold(self, rng):
        sp = InnerProduct(5, rng.uniform(0.5, 2, 5))
        fam = VectorFamily(sp, rng.standard_normal((5, 3)))
        eps, c = riesz_bounds(fam)
        for _ in range(50):
            a = rng.standard_normal(3)
            v = sp.norm(fam.vectors @ a)
            assert eps * np.linalg.norm(a) <= v * (1 + 1e-12)
            assert v <= c * np.linalg.norm(a) * (1 + 1e-12)

    def test_overcomplete_has_zero_lower_bound(self, rng):
        eps, _ = riesz_bounds(VectorFamily(InnerProduct(2), rng.standard_normal((2, 3))))
        assert eps == 0.0

    def test_empty(self):
        with pytest.raises(InputError):
            riesz_bounds(VectorFamily(InnerProduct(2), np.zeros((2, 0))))

    def test_shape_and_labels(self):
        with pytest.raises(InputError):
            VectorFamily(InnerProduct(2), np.ones((3, 1)))
        with pytest.raises(InputError):
            VectorFamily(InnerProduct(2), np.ones((2, 2)), labels=["a"])

    def test_concatenate_labels(self):
        sp = InnerProduct(2)
        f = concatenate([VectorFamily(sp, np.eye(2)[:, :1], ["u"]), VectorFamily(sp, np.eye(2)[:, 1:], ["v"])])
        assert f.labels == ((0, "u"), (1, "v"))


class TestCombination:
    @pytest.mark.parametrize("seed", range(8))
    def test_predicted_bounds(self, seed):
        rng = np.random.default_rng(seed)
        s = random_ibap_system(rng, weighted=bool(seed % 2))
        fams = spanning_families(rng, s)
        combined, pred_eps, pred_c = combine_families(s, fams)
        eps, c = riesz_bounds(combined)
        assert eps >= pred_eps - 1e-12
        assert c <= pred_c + 1e-12

    def test_verdict_matches_conditions(self, rng):
        for k in range(40):
            s = random_system(rng)
            if not s.total_rank:
                continue
            assert ibap_from_families(s, spanning_families(rng, s)).ibap == check_conditions(s).ibap

    def test_lower_bound_on_constant(self, rng):
        s = random_ibap_system(rng, dim=7, n=3)
        v = ibap_from_families(s, spanning_families(rng, s))
        assert v.ibap and ibap_constant(s) >= v.lower_bound - 1e-12

    def test_orthonormal_families_give_c(self):
        s = lines_at_angle(math.radians(40))
        v = ibap_from_families(s, [VectorFamily(s.space, h.basis) for h in s])
        assert v.epsilon == pytest.approx(ibap_constant(s), abs=1e-12)

    def test_redundant_family_refused(self):
        s = lines_at_angle(0.7)
        u = s[0].basis
        with pytest.raises(RefusalError):
            ibap_from_families(s, [VectorFamily(s.space, np.hstack([u, 2 * u])), VectorFamily(s.space, s[1].basis)])

    def test_family_outside_subspace(self):
        s = lines_at_angle(0.7)
        with pytest.raises(InputError):
            ibap_from_families(s, [VectorFamily(s.space, s[1].basis), VectorFamily(s.space, s[1].basis)])

    def test_family_not_spanning(self, rng):
        s = random_system(rng, dim=4, n=2, ranks=[2, 1])
        with pytest.raises(InputError):
            ibap_from_families(s, [VectorFamily(s.space, s[0].basis[:, :1]), VectorFamily(s.space, s[1].basis)])

    def test_combine_refuses_dependent(self):
        s = lines_at_angle(0.0)
        with pytest.raises(RefusalError):
            combine_families(s, [VectorFamily(s.space, h.basis) for h in s])
