import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import SPLIT_FIBER, SPLIT_QUOTIENT
from nbody_regularity import (DegenerateDirection, DegenerateSubspace, DomainError, EmptyIntersection,
                              OnBlownCenter, OnSingularSet, Stratum, blowdown_split, blowdown_xi, boundary_ray,
                              clean_check, clean_check_random, gv_embed, make_subspace, ray_limit,
                              sphere_blowup_inv, sphere_blowup_map, split_point, theta, xf_coords)

XAXIS = make_subspace(2, [[1.0, 0.0]], name="Y")


class TestSplit:
    def test_example(self):
        sp = split_point(XAXIS, [3.0, 4.0])
        np.testing.assert_allclose(sp.quotient_part, SPLIT_QUOTIENT, atol=1e-15)
        np.testing.assert_allclose(sp.fiber_part, SPLIT_FIBER, atol=1e-15)

    def test_point_in_y(self):
        sp = split_point(XAXIS, [3.0, 0.0])
        np.testing.assert_allclose(sp.fiber_part, theta([3.0]))
        np.testing.assert_allclose(sp.quotient_part, theta([0.0]))

    def test_origin(self):
        sp = split_point(XAXIS, [0.0, 0.0])
        np.testing.assert_array_equal(sp.quotient_part, [1.0, 0.0])
        np.testing.assert_array_equal(sp.fiber_part, [1.0, 0.0])

    @pytest.mark.parametrize("gens", [[], [[1, 0], [0, 1]]])
    def test_degenerate(self, gens):
        with pytest.raises(DegenerateSubspace):
            split_point(make_subspace(2, gens), [1.0, 1.0])

    @settings(max_examples=100, deadline=None)
    @given(st.integers(2, 6), st.integers(0, 2**32 - 1))
    def test_roundtrip(self, n, seed):
        rng = np.random.default_rng(seed)
        y = make_subspace(n, rng.standard_normal((int(rng.integers(1, n)), n)))
        x = rng.standard_normal((5, n)) * 10 ** rng.uniform(-3, 3, size=(5, 1))
        back, ray = blowdown_split(y, split_point(y, x))
        assert not ray
        np.testing.assert_allclose(back, x, rtol=1e-10, atol=1e-10)


class TestBlowdown:
    def test_zero_quotient(self):
        x, ray = blowdown_xi(XAXIS, [0.0], [2.5])
        assert not ray
        np.testing.assert_allclose(x, [2.5, 0.0])

    def test_fiber_ray(self):
        d, ray = blowdown_xi(XAXIS, [7.0], [-3.0], fiber_is_ray=True)
        assert ray
        np.testing.assert_allclose(d, [-1.0, 0.0])

    def test_quotient_ray_needs_fiber_ray(self):
        from nbody_regularity.blowup import SplitPoint
        with pytest.raises(DomainError):
            blowdown_split(XAXIS, SplitPoint(boundary_ray([1.0]), theta([1.0])))


class TestSphereBlowup:
    def test_example(self):
        u, w = sphere_blowup_map([0.6, 0.8], [0.0])
        np.testing.assert_allclose(u, [0.6, 0.8])
        np.testing.assert_allclose(w, [1.0, 0.0])

    def test_center(self):
        with pytest.raises(OnBlownCenter):
            sphere_blowup_map([0.0, 0.0], [1.0])

    def test_inverse(self, rng):
        eta, mu = rng.standard_normal((10, 3)), rng.standard_normal((10, 2))
        e2, m2 = sphere_blowup_inv(*sphere_blowup_map(eta, mu))
        np.testing.assert_allclose(e2, eta)
        np.testing.assert_allclose(m2, mu)


class TestEmbedding:
    def test_chain_example(self, chain_lattice):
        gv = gv_embed(chain_lattice, [3.0, 4.0])
        np.testing.assert_allclose(gv.components["0"], theta([3.0, 4.0]))
        np.testing.assert_allclose(gv.components["Y"], theta([4.0]))
        assert gv.tags() == {"0": "interior", "Y": "interior"}

    def test_origin(self, r3_lattice):
        gv = gv_embed(r3_lattice, np.zeros(3))
        for name, p in gv.components.items():
            assert p[0] == 1.0 and np.all(p[1:] == 0)

    def test_ray_limit_generic(self, chain_lattice):
        gv = ray_limit(chain_lattice, [0.0, 0.0], [1.0, 1.0])
        np.testing.assert_allclose(gv.components["0"], boundary_ray([1.0, 1.0]))
        np.testing.assert_allclose(gv.components["Y"], [0.0, 1.0])
        assert set(gv.tags().values()) == {"ray"}

    def test_parallel_rays_are_separated(self, chain_lattice):
        a = ray_limit(chain_lattice, [0.0, 1.0], [1.0, 0.0])
        b = ray_limit(chain_lattice, [0.0, 2.0], [1.0, 0.0])
        assert a.tags()["Y"] == "interior"
        np.testing.assert_allclose(a.components["Y"], theta([1.0]))
        assert not np.allclose(a.components["Y"], b.components["Y"])
        np.testing.assert_allclose(a.components["0"], b.components["0"])

    def test_ray_limit_is_limit(self, r3_lattice, rng):
        base, d = rng.standard_normal(3), rng.standard_normal(3)
        lim = ray_limit(r3_lattice, base, d)
        far = gv_embed(r3_lattice, base + 1e9 * d)
        for k in lim.components:
            np.testing.assert_allclose(far.components[k], lim.components[k], atol=1e-8)

    def test_zero_direction(self, chain_lattice):
        with pytest.raises(DegenerateDirection):
            ray_limit(chain_lattice, [0.0, 0.0], [0.0, 0.0])

    def test_json_tags(self, chain_lattice):
        items = gv_embed(chain_lattice, [1.0, 2.0]).to_json()
        assert [i["member"] for i in items] == ["0", "Y"]
        np.testing.assert_allclose(items[1]["coords"], [2.0])


class TestXF:
    def test_polar_data(self, chain_lattice):
        xf = xf_coords(chain_lattice, [3.0, 4.0])
        pol = xf.polar["Y"]
        np.testing.assert_allclose(pol.foot, [3.0, 0.0])
        np.testing.assert_allclose(pol.direction, [0.0, 1.0])
        assert pol.radius == pytest.approx(4.0)
        assert xf.polar["0"].radius == pytest.approx(5.0)

    def test_on_member(self, chain_lattice):
        with pytest.raises(OnSingularSet):
            xf_coords(chain_lattice, [3.0, 0.0])


class TestClean:
    def test_spheres_of_coordinate_planes(self):
        e = np.eye(3)
        y, z = make_subspace(3, [e[0], e[1]], "Y"), make_subspace(3, [e[1], e[2]], "Z")
        rep = clean_check(Stratum("sphere", y), Stratum("sphere", z), point=[0.0, 0.0, 1.0, 0.0])
        assert rep.dim_tangent_of_intersection == 0 and rep.dim_intersection_of_tangents == 0
        assert rep.clean

    def test_auto_point(self):
        e = np.eye(3)
        y, z = make_subspace(3, [e[0], e[1]], "Y"), make_subspace(3, [e[1], e[2]], "Z")
        for p, q in itertools.product(("closure", "sphere"), repeat=2):
            assert clean_check(Stratum(p, y), Stratum(q, z)).clean

    def test_disjoint_spheres(self):
        y, z = make_subspace(2, [[1, 0]], "Y"), make_subspace(2, [[0, 1]], "Z")
        with pytest.raises(EmptyIntersection):
            clean_check(Stratum("sphere", y), Stratum("sphere", z))

    def test_bad_point(self):
        y = make_subspace(2, [[1, 0]], "Y")
        with pytest.raises(DomainError):
            clean_check(Stratum("closure", y), Stratum("closure", y), point=[0.0, 0.0, 1.0])

    def test_random_points(self, rng):
        y = make_subspace(4, rng.standard_normal((2, 4)), "Y")
        z = make_subspace(4, np.vstack([y.basis[:1], rng.standard_normal((2, 4))]), "Z")
        reps = clean_check_random(Stratum("closure", y), Stratum("closure", z), rng, count=5)
        assert len(reps) == 6 and all(r.clean for r in reps)

    def test_closure_meets_own_sphere(self):
        y = make_subspace(2, [[1, 0]], "Y")
        rep = clean_check(Stratum("closure", y), Stratum("sphere", y))
        assert rep.dim_tangent_of_intersection == 0 and rep.clean

    def test_report_dict(self):
        y = make_subspace(2, [[1, 0]], "Y")
        d = clean_check(Stratum("closure", y), Stratum("sphere", y)).to_dict()
        assert d["p"] == "closure:Y" and d["q"] == "sphere:Y" and d["clean"] is True


def test_closure_of_member_in_compactification(rng):
    """theta maps a subspace into the hull span(e0) + Y."""
    y = make_subspace(4, rng.standard_normal((2, 4)), "Y")
    hull = Stratum("closure", y).linear_hull()
    pts = theta(rng.standard_normal((20, 2)) @ y.basis)
    resid = pts - pts @ hull.projector
    assert np.max(np.abs(resid)) < 1e-14
    assert math.isclose(np.linalg.norm(pts[0]), 1.0)
