import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from agraal.errors import CapabilityError
from agraal.linalg import RngStream, draw_normal, draw_uniform
from agraal.prox import (
    BallIndicator,
    BlockSum,
    BoxIndicator,
    CustomProx,
    DiagonalMetric,
    HyperplaneIndicator,
    L1Norm,
    NonnegIndicator,
    ZeroFunction,
    check_prox_inequality,
    project_ball,
    project_hyperplane,
    project_nonneg,
    prox_l1,
    prox_metric,
)
from oracles import soft_threshold_1d

finite = st.floats(-1e3, 1e3, allow_nan=False)


def vec(n):
    return arrays(np.float64, n, elements=finite)


def normals(seed, n, k):
    rng = RngStream(seed)
    return [draw_normal(rng, 0.0, 3.0, n) for _ in range(k)]


class TestL1:
    def test_gamma_zero_is_identity(self):
        z = np.array([1.5, -2.0, 0.0])
        np.testing.assert_array_equal(prox_l1(z, 1.0, 0.0), z)

    def test_example(self):
        np.testing.assert_array_equal(prox_l1(np.array([3.0, -0.5, 0.0]), 1.0, 1.0), [2.0, 0.0, 0.0])

    @settings(max_examples=50)
    @given(vec(6))
    def test_full_shrinkage(self, z):
        t = float(np.abs(z).max()) + 1.0
        assert np.all(prox_l1(z, t, 1.0) == 0.0)

    @settings(max_examples=100)
    @given(vec(5), st.floats(0.01, 10), st.floats(0, 10))
    def test_matches_scalar_minimization(self, z, tau, gamma):
        expected = [soft_threshold_1d(zi, tau * gamma) for zi in z]
        np.testing.assert_allclose(prox_l1(z, tau, gamma), expected, rtol=1e-12, atol=1e-12)

    @settings(max_examples=100)
    @given(vec(4), vec(4), st.floats(0.01, 5))
    def test_firmly_nonexpansive(self, z, w, t):
        p, q = prox_l1(z, t, 1.0), prox_l1(w, t, 1.0)
        d = p - q
        assert d @ d <= d @ (z - w) + 1e-12 * (1 + abs(d @ (z - w)))

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            prox_l1(np.ones(2), 0.0, 1.0)
        with pytest.raises(ValueError):
            prox_l1(np.ones(2), 1.0, -1.0)
        with pytest.raises(ValueError):
            L1Norm(-0.1)


class TestProjections:
    def test_nonneg_examples(self):
        np.testing.assert_array_equal(project_nonneg([-1.0, 2.0]), [0.0, 2.0])
        z = np.array([0.0, 3.0, 1e-300])
        np.testing.assert_array_equal(project_nonneg(z), z)

    def test_ball_examples(self):
        c = np.array([1.0, -2.0])
        np.testing.assert_array_equal(project_ball(c, c, 0.5), c)
        np.testing.assert_allclose(project_ball(np.array([2.0, 0.0]), np.zeros(2), 1.0), [1.0, 0.0])

    def test_ball_keeps_center_offset(self):
        out = project_ball(np.array([10.0, 5.0]), np.array([7.0, 5.0]), 1.0)
        np.testing.assert_allclose(out, [8.0, 5.0])

    def test_hyperplane_examples(self):
        np.testing.assert_allclose(project_hyperplane(np.array([3.0, 4.0]), np.array([1.0, 0.0]), 0.0), [0.0, 4.0])
        a = np.array([1.0, 2.0])
        z = np.array([1.0, 1.0])
        np.testing.assert_array_equal(project_hyperplane(z, a, 3.0), z)

    def test_hyperplane_zero_normal(self):
        with pytest.raises(ValueError):
            project_hyperplane(np.ones(2), np.zeros(2), 1.0)

    @settings(max_examples=100)
    @given(vec(5), vec(5), st.floats(-100, 100))
    def test_hyperplane_residual(self, z, a, b):
        if np.linalg.norm(a) < 1e-3:
            a = a + 1.0
        out = project_hyperplane(z, a, b)
        scale = np.linalg.norm(a) * (np.linalg.norm(z) + np.linalg.norm(out)) + abs(b) + 1.0
        assert abs(a @ out - b) <= 1e-10 * scale

    @settings(max_examples=100)
    @given(vec(3), vec(3), st.floats(0.1, 100))
    def test_ball_feasible(self, z, c, r):
        out = project_ball(z, c, r)
        assert np.linalg.norm(out - c) <= r + 1e-12 * (1 + r + np.linalg.norm(c))

    @pytest.mark.parametrize(
        "project",
        [
            project_nonneg,
            lambda z: project_ball(z, np.arange(6.0), 2.5),
            lambda z: project_hyperplane(z, np.array([1.0, -2.0, 0.5, 0.0, 3.0, 1.0]), 4.0),
            BoxIndicator(-1.0, np.linspace(0, 2, 6)).prox,
        ],
        ids=["nonneg", "ball", "hyperplane", "box"],
    )
    def test_idempotent_and_nonexpansive(self, project):
        rng = RngStream(21)
        for _ in range(1000):
            z = draw_normal(rng, 0.0, 5.0, 6)
            w = draw_normal(rng, 0.0, 5.0, 6)
            pz, pw = project(z), project(w)
            np.testing.assert_allclose(project(pz), pz, rtol=0, atol=1e-12 * (1 + np.abs(pz).max()))
            assert np.linalg.norm(pz - pw) <= np.linalg.norm(z - w) + 1e-12


def shipped_prox_ops(n=6):
    return {
        "zero": ZeroFunction(),
        "l1": L1Norm(0.7),
        "nonneg": NonnegIndicator(),
        "box": BoxIndicator(-np.ones(n), 2 * np.ones(n)),
        "ball": BallIndicator(np.linspace(-1, 1, n), 1.5),
        "hyperplane": HyperplaneIndicator(np.arange(1.0, n + 1), 2.0),
        "block": BlockSum([L1Norm(0.3), NonnegIndicator()], [n // 2, n - n // 2]),
    }


class TestProxInequality:
    def test_zero_function_exact(self):
        z = np.array([1.0, -2.0])
        probes = normals(1, 2, 20)
        xbar = ZeroFunction().prox(z)
        assert check_prox_inequality(ZeroFunction(), z, probes) == max(-float((xbar - z) @ (x - xbar)) for x in probes)
        assert check_prox_inequality(ZeroFunction(), z, probes) == 0.0

    def test_probe_at_prox_point(self):
        g = L1Norm(1.0)
        z = np.array([3.0, -0.2])
        assert check_prox_inequality(g, z, [g.prox(z)]) == 0.0

    def test_l1_random_probes(self):
        g = L1Norm(0.5)
        rng = RngStream(4)
        for _ in range(10):
            z = draw_normal(rng, 0.0, 2.0, 8)
            assert check_prox_inequality(g, z, normals(5, 8, 100), tau=1.3) <= 1e-9

    @pytest.mark.parametrize("name", list(shipped_prox_ops()))
    def test_every_shipped_prox(self, name):
        g = shipped_prox_ops()[name]
        rng = RngStream(17)
        z = draw_normal(rng, 0.0, 3.0, 6)
        # feasible probes: project random points onto dom g
        probes = [g.project_domain(draw_normal(rng, 0.0, 3.0, 6)) for _ in range(1000)]
        for tau in (0.3, 1.0, 4.0):
            assert check_prox_inequality(g, z, probes, tau=tau) <= 1e-9

    def test_needs_values(self):
        with pytest.raises(CapabilityError):
            check_prox_inequality(CustomProx(lambda z, t: z), np.ones(2), [np.zeros(2)])


class TestIndicatorValues:
    def test_feasibility_tolerance(self):
        g = NonnegIndicator()
        assert g.value(np.array([0.0, 1.0])) == 0.0
        assert g.value(np.array([-1e-12, 1.0])) == 0.0
        assert g.value(np.array([-1e-3, 1.0])) == np.inf

    def test_hyperplane_value(self):
        g = HyperplaneIndicator(np.array([1.0, 1.0]), 1.0)
        assert g.value(np.array([0.5, 0.5])) == 0.0
        assert g.value(np.array([1.0, 1.0])) == np.inf


class TestMetricProx:
    @pytest.mark.parametrize("name", ["zero", "l1", "nonneg", "box", "hyperplane", "block"])
    def test_unit_weights_bitwise(self, name):
        g = shipped_prox_ops()[name]
        for z in normals(2, 6, 20):
            assert prox_metric(g, z, 0.7, DiagonalMetric.identity(6)).tobytes() == g.prox(z, 0.7).tobytes()

    def test_zero_function_any_weights(self):
        z = np.array([1.0, -4.0, 2.5])
        np.testing.assert_array_equal(prox_metric(ZeroFunction(), z, 2.0, [0.1, 5.0, 3.0]), z)

    def test_weighted_l1_example(self):
        assert prox_metric(L1Norm(1.0), np.array([3.0]), 1.0, [2.0])[0] == pytest.approx(2.5)

    @settings(max_examples=100)
    @given(vec(4), arrays(np.float64, 4, elements=st.floats(0.05, 20)), st.floats(0.05, 5))
    def test_weighted_l1_coordinatewise(self, z, w, tau):
        out = prox_metric(L1Norm(0.8), z, tau, w)
        expected = [soft_threshold_1d(zi, tau * 0.8 / wi) for zi, wi in zip(z, w)]
        np.testing.assert_allclose(out, expected, rtol=1e-12, atol=1e-10)

    def test_weighted_hyperplane_kkt(self):
        a, b = np.array([1.0, -2.0, 3.0]), 1.5
        w = np.array([0.5, 2.0, 4.0])
        z = np.array([2.0, 1.0, -1.0])
        x = prox_metric(HyperplaneIndicator(a, b), z, 1.0, w)
        assert a @ x == pytest.approx(b, abs=1e-12)
        # optimality: W (x - z) is parallel to a
        r = w * (x - z)
        assert np.linalg.norm(r - (r @ a) / (a @ a) * a) <= 1e-12

    def test_weighted_box_is_clip(self):
        g = BoxIndicator(0.0, 1.0)
        z = np.array([-1.0, 0.5, 3.0])
        np.testing.assert_array_equal(prox_metric(g, z, 1.0, [3.0, 0.2, 7.0]), [0.0, 0.5, 1.0])

    def test_ball_has_no_metric_prox(self):
        with pytest.raises(CapabilityError):
            prox_metric(BallIndicator(np.zeros(2), 1.0), np.ones(2), 1.0, [1.0, 2.0])

    def test_weights_must_be_positive(self):
        with pytest.raises(ValueError):
            DiagonalMetric(np.array([1.0, 0.0]))
        with pytest.raises(ValueError):
            DiagonalMetric(np.array([1.0, -2.0]))

    def test_metric_norm(self):
        M = DiagonalMetric(np.array([1.0, 4.0]))
        assert (M * DiagonalMetric.identity(2)).sqnorm(np.array([1.0, 1.0])) == 5.0


class TestTauScaling:
    @settings(max_examples=50)
    @given(vec(4), st.floats(0.1, 10))
    def test_l1_scaling(self, z, tau):
        np.testing.assert_allclose(L1Norm(2.0).prox(z, tau), prox_l1(z, tau, 2.0), rtol=0, atol=0)
        np.testing.assert_allclose(L1Norm(2.0).prox(z, tau), L1Norm(2.0 * tau).prox(z, 1.0), rtol=1e-12, atol=1e-9)

    def test_outputs_in_domain(self):
        for name, g in shipped_prox_ops().items():
            for z in normals(9, 6, 30):
                assert g.value(g.prox(z, 2.0)) < np.inf, name
