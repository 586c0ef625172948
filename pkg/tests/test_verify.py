import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import HYDROGEN_D1_AT_E1, HYDROGEN_D1_DELTA_NORM2, HYDROGEN_D1_NORM2, HYDROGEN_NORM2
from nbody_regularity import StencilTooWide, hydrogen_pair, radial_invsq_pair
from nbody_regularity.verify import (DEFAULT_EPS, Estimate, NormReport, RegularityReport, WeightedNormSpec,
                                     classify, fd_partial, fit_exponent, multi_indices, refinement_study,
                                     regularity_report, weighted_seminorm)


@pytest.fixture(scope="module")
def hydrogen():
    return hydrogen_pair()


@pytest.fixture(scope="module")
def invsq():
    return radial_invsq_pair(0.3)


class TestMultiIndices:
    @pytest.mark.parametrize("n, order, count", [(3, 0, 1), (3, 1, 3), (3, 2, 6), (3, 3, 10), (6, 2, 21)])
    def test_counts(self, n, order, count):
        idx = multi_indices(n, order)
        assert len(idx) == count == math.comb(n + order - 1, order)
        assert all(sum(a) == order for a in idx)
        assert idx == sorted(idx, reverse=True)


class TestFD:
    def test_example(self, hydrogen):
        assert fd_partial(hydrogen.u, [1.0, 0.0, 0.0], (1, 0, 0), h=1e-4) == pytest.approx(HYDROGEN_D1_AT_E1, abs=1e-8)

    def test_order_zero(self, hydrogen):
        x = np.array([0.2, 0.5, -0.1])
        assert fd_partial(hydrogen.u, x, (0, 0, 0)) == hydrogen.u(x)

    def test_mixed_symmetric(self, hydrogen):
        # both orderings share one tensor-product stencil
        x = np.array([0.4, -0.7, 0.9])
        a = fd_partial(hydrogen.u, x, (1, 1, 0), h=1e-3)
        b = fd_partial(lambda y: hydrogen.u(y[[1, 0, 2]]), x[[1, 0, 2]], (1, 1, 0), h=1e-3)
        assert a == pytest.approx(b, rel=1e-12)

    def test_stencil_too_wide(self, hydrogen):
        with pytest.raises(StencilTooWide):
            fd_partial(hydrogen.u, [1e-3, 0.0, 0.0], (2, 0, 0), h=1e-3, F=hydrogen.F)

    def test_default_step_respects_singular_set(self, hydrogen):
        x = [2e-4, 0.0, 0.0]
        val = fd_partial(hydrogen.u, x, (1, 0, 0), F=hydrogen.F)
        assert val == pytest.approx(hydrogen.u.partial((1, 0, 0), np.array(x)), rel=1e-6)

    def test_bad_step(self, hydrogen):
        with pytest.raises(ValueError):
            fd_partial(hydrogen.u, [1.0, 0.0, 0.0], (1, 0, 0), h=0.0)

    @pytest.mark.parametrize("alpha", [(1, 0, 0), (0, 1, 0), (2, 0, 0), (1, 1, 0), (0, 1, 1)])
    def test_second_order_convergence(self, hydrogen, alpha):
        x = np.array([0.8, 0.5, -0.6])
        exact = hydrogen.u.partial(alpha, x)
        hs = np.array([0.08, 0.04, 0.02, 0.01])
        err = [abs(fd_partial(hydrogen.u, x, alpha, h=h) - exact) for h in hs]
        order = np.polyfit(np.log(hs), np.log(err), 1)[0]
        assert 1.8 <= order <= 2.2

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.3, 5.0), st.integers(0, 2), st.integers(1, 2))
    def test_matches_analytic(self, r, axis, order):
        u = hydrogen_pair().u
        x = np.array([0.6, -0.48, 0.64]) * r
        alpha = [0, 0, 0]
        alpha[axis] = order
        assert fd_partial(u, x, alpha, h=1e-4) == pytest.approx(u.partial(tuple(alpha), x), rel=1e-5, abs=1e-8)


class TestNormSpec:
    @pytest.mark.parametrize("kw", [{"eps": 0.0}, {"alpha": (5, 0, 0)}, {"weight": "bogus"}])
    def test_rejects(self, kw):
        args = {"alpha": (0, 0, 0), **kw}
        with pytest.raises(ValueError):
            WeightedNormSpec(**args)

    def test_only_l2(self):
        with pytest.raises(NotImplementedError):
            WeightedNormSpec((0, 0, 0), p=1)


class TestSeminorm:
    def test_hydrogen_l2(self, hydrogen):
        est = weighted_seminorm(hydrogen.u, hydrogen.F, WeightedNormSpec((0, 0, 0), weight="none", eps=1e-6))
        assert est.value == pytest.approx(HYDROGEN_NORM2, rel=1e-2)
        assert est.method == "grid" and not est.inconclusive

    def test_grid_is_accurate(self, hydrogen):
        est = weighted_seminorm(hydrogen.u, hydrogen.F, WeightedNormSpec((1, 0, 0), weight="none", eps=1e-7))
        assert est.value == pytest.approx(HYDROGEN_D1_NORM2, rel=1e-5)
        est = weighted_seminorm(hydrogen.u, hydrogen.F, WeightedNormSpec((1, 0, 0), weight="delta", eps=1e-7))
        assert est.value == pytest.approx(HYDROGEN_D1_DELTA_NORM2, rel=1e-5)

    def test_zero_function(self, hydrogen):
        est = weighted_seminorm(lambda x: np.zeros(np.shape(x)[:-1]), hydrogen.F, WeightedNormSpec((0, 0, 0)))
        assert est.value == 0.0

    def test_qmc_agrees_with_grid(self, hydrogen):
        spec = dict(alpha=(1, 0, 0), weight="delta", eps=1e-4)
        grid = weighted_seminorm(hydrogen.u, hydrogen.F, WeightedNormSpec(**spec, method="grid"))
        qmc = weighted_seminorm(hydrogen.u, hydrogen.F, WeightedNormSpec(**spec, method="qmc", samples=2**14))
        assert qmc.method == "qmc"
        assert abs(qmc.value - grid.value) < 4 * qmc.error + 1e-3 * grid.value

    def test_qmc_deterministic(self, hydrogen):
        spec = WeightedNormSpec((0, 0, 0), weight="none", method="qmc", samples=2**12, seed=3)
        assert weighted_seminorm(hydrogen.u, hydrogen.F, spec) == weighted_seminorm(hydrogen.u, hydrogen.F, spec)

    def test_order3_weighted_stable(self, hydrogen):
        vals = [weighted_seminorm(hydrogen.u, hydrogen.F, WeightedNormSpec((3, 0, 0), eps=e)).value
                for e in (1e-3, 5e-4)]
        assert vals[1] == pytest.approx(vals[0], rel=1e-2)

    def test_grid_needs_point_lattice(self, r6_lattice):
        with pytest.raises(ValueError):
            weighted_seminorm(lambda x: np.ones(np.shape(x)[:-1]), r6_lattice,
                              WeightedNormSpec((0,) * 6, method="grid"))

    def test_inconclusive_flag(self):
        assert Estimate(1.0, 0.5, "qmc", 10).inconclusive
        assert not Estimate(1.0, 1e-4, "qmc", 10).inconclusive


class TestClassify:
    def test_fit(self):
        eps = [1e-2, 1e-3, 1e-4, 1e-5]
        assert fit_exponent(eps, [e**-0.7 for e in eps]) == pytest.approx(-0.7)
        assert math.isnan(fit_exponent(eps, [1.0, 0.0, 1.0, 1.0]))

    @pytest.mark.parametrize("est, expo, verdict", [
        ([1.0, 1.0, 1.0, 1.0], 0.0, "finite"),
        ([1.0, 10.0, 100.0, 1000.0], -1.0, "divergent"),
        ([1.0, 10.0, 5.0, 1000.0], -1.0, "inconclusive"),
        ([1.0, 1.0, 1.0, 1.1], 0.05, "inconclusive"),
        ([1.0], 0.0, "inconclusive"),
    ])
    def test_verdicts(self, est, expo, verdict):
        assert classify(est, expo) == verdict


class TestRefinement:
    def test_hydrogen_order3_divergent(self, hydrogen):
        rep = refinement_study(hydrogen.u, hydrogen.F, (3, 0, 0), "none")
        assert rep.verdict == "divergent"
        assert rep.exponent == pytest.approx(-1.0, abs=0.15)

    def test_invsq_unweighted(self, invsq):
        rep = refinement_study(invsq.u, invsq.F, (2, 0, 0), "none")
        assert rep.verdict == "divergent"
        assert rep.exponent == pytest.approx(-0.4, abs=0.1)

    def test_invsq_weighted(self, invsq):
        rep = refinement_study(invsq.u, invsq.F, (2, 0, 0), "delta")
        assert rep.verdict == "finite" and abs(rep.exponent) < 0.1

    def test_estimates_monotone_in_eps(self, hydrogen):
        rep = refinement_study(hydrogen.u, hydrogen.F, (2, 0, 0), "none")
        assert np.all(np.diff(rep.estimates) >= 0)

    @pytest.mark.parametrize("ladder", [(1e-2, 1e-3, 1e-4), (1e-2, 1e-3, 1e-3, 1e-4), (2.0, 1e-1, 1e-2, 1e-3)])
    def test_bad_ladder(self, hydrogen, ladder):
        with pytest.raises(ValueError):
            refinement_study(hydrogen.u, hydrogen.F, (0, 0, 0), eps_ladder=ladder)

    def test_dict_roundtrip(self, hydrogen):
        rep = refinement_study(hydrogen.u, hydrogen.F, (1, 0, 0), case="hydrogen")
        assert NormReport.from_dict(json.loads(json.dumps(rep.to_dict()))) == rep


@pytest.fixture(scope="module")
def report():
    return regularity_report(hydrogen_pair(), kmax=3)


class TestRegularityReport:
    def test_counts(self, report):
        assert len(report.weighted) == len(report.unweighted) == 20
        assert report.weighted[0].eps == list(DEFAULT_EPS)

    def test_hydrogen_verdicts(self, report):
        assert report.weighted_all_finite
        for r in report.unweighted:
            assert r.verdict == ("divergent" if sum(r.alpha) == 3 else "finite"), r.alpha

    def test_json_roundtrip(self, report):
        d = json.loads(json.dumps(report.to_dict()))
        assert d["schema_version"] == 1
        assert RegularityReport.from_dict(d) == report

    def test_deterministic(self, report):
        again = regularity_report(hydrogen_pair(), kmax=3)
        assert json.dumps(again.to_dict(), sort_keys=True) == json.dumps(report.to_dict(), sort_keys=True)

    def test_kmax_limit(self):
        with pytest.raises(ValueError):
            regularity_report(hydrogen_pair(), kmax=5)

    def test_qmc_on_chain_lattice(self, chain_lattice):
        # a smooth Gaussian has finite norms on any lattice
        def gauss(x):
            return np.exp(-np.sum(np.asarray(x) ** 2, axis=-1))

        rep = refinement_study(gauss, chain_lattice, (0, 0), "delta", samples=2**13)
        assert rep.method == "qmc" and rep.verdict == "finite"
