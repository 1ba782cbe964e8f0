import numpy as np
import pytest

from retfield.domains import Ball, Box
from retfield.quadrature import build_rule
from retfield.sources import (
    DifferentiatedGaussianPulse,
    GaussianEnvelope,
    SineSquaredPulse,
    SourceModel,
    TruncatedGaussianEnvelope,
    make_envelope,
    make_profile,
)


def gaussian_source(sigma=0.1, tau=4.0, amplitude=1.0, domain_sigmas=8.0):
    return SourceModel(
        envelope=GaussianEnvelope(center=(0, 0, 0), sigma=sigma),
        profile=SineSquaredPulse(t_on=1.0, tau=tau),
        polarization=(0, 0, 1),
        amplitude=amplitude,
        domain=Ball(center=(0, 0, 0), radius=domain_sigmas * sigma),
    )


def gauss_legendre_time_integral(fn, a, b, n=200):
    """Independent high-order quadrature for time primitives."""
    x, w = np.polynomial.legendre.leggauss(n)
    t = a + 0.5 * (b - a) * (x + 1.0)
    return 0.5 * (b - a) * np.sum(w * fn(t))


class TestSineSquaredPulse:
    def setup_method(self):
        self.p = SineSquaredPulse(t_on=1.0, tau=4.0)

    def test_exactly_zero_outside_support(self):
        for t in (-5.0, 0.0, 1.0, 5.0, 12.0):
            assert self.p.value(t) == 0.0
            assert self.p.derivative(t) == 0.0

    def test_unit_peak_at_center(self):
        assert self.p.value(3.0) == pytest.approx(1.0)
        assert self.p.derivative(3.0) == pytest.approx(0.0, abs=1e-15)

    def test_primitive_boundaries(self):
        assert self.p.primitive(1.0) == 0.0
        assert self.p.primitive(0.0) == 0.0
        # Full burst integrates to exactly tau/2.
        assert self.p.primitive(5.0) == 2.0
        assert self.p.primitive(100.0) == 2.0

    def test_primitive_nondecreasing(self):
        t = np.linspace(-1, 7, 500)
        prim = self.p.primitive(t)
        assert np.all(np.diff(prim) >= -1e-15)

    def test_primitive_derivative_matches_value(self):
        rng = np.random.default_rng(31)
        t = rng.uniform(1.05, 4.95, 200)
        h = 1e-6
        fd = (self.p.primitive(t + h) - self.p.primitive(t - h)) / (2 * h)
        np.testing.assert_allclose(fd, self.p.value(t), rtol=1e-8, atol=1e-10)

    def test_derivative_matches_finite_difference(self):
        rng = np.random.default_rng(32)
        t = rng.uniform(1.05, 4.95, 200)
        h = 1e-6
        fd = (self.p.value(t + h) - self.p.value(t - h)) / (2 * h)
        np.testing.assert_allclose(fd, self.p.derivative(t), rtol=1e-7, atol=1e-9)

    def test_primitive_matches_numeric_integration(self):
        for t_end in (1.7, 2.9, 4.2, 6.0):
            # integrand vanishes beyond the support; integrate only the
            # smooth part so the oracle keeps spectral accuracy
            expected = gauss_legendre_time_integral(self.p.value, 1.0, min(t_end, 5.0))
            assert self.p.primitive(t_end) == pytest.approx(expected, rel=1e-9)


class TestDifferentiatedGaussianPulse:
    def setup_method(self):
        self.p = DifferentiatedGaussianPulse(t_on=0.0, tau=16.0)

    def test_exactly_zero_outside_support(self):
        for t in (-1.0, 0.0, 16.0, 20.0):
            assert self.p.value(t) == 0.0
            assert self.p.derivative(t) == 0.0
            assert self.p.primitive(t) == 0.0

    def test_antisymmetric_about_center(self):
        t = np.linspace(0.5, 7.5, 40)
        np.testing.assert_allclose(self.p.value(8 + t), -self.p.value(8 - t), atol=1e-15)

    def test_primitive_peaks_at_center_and_returns_to_zero(self):
        assert self.p.primitive(8.0) == pytest.approx(self.p.width, rel=1e-12)
        assert abs(self.p.primitive(15.999)) < 1e-12
        assert self.p.primitive(16.0) == 0.0

    def test_primitive_matches_numeric_integration(self):
        for t_end in (6.0, 8.0, 9.5, 14.0):
            expected = gauss_legendre_time_integral(self.p.value, 0.0, t_end, n=400)
            assert self.p.primitive(t_end) == pytest.approx(expected, rel=1e-9)

    def test_primitive_nondecreasing_where_value_nonnegative(self):
        t = np.linspace(-1.0, 18.0, 800)
        rising = (self.p.value(t[:-1]) >= 0.0) & (self.p.value(t[1:]) >= 0.0)
        assert np.all(np.diff(self.p.primitive(t))[rising] >= -1e-15)

    def test_derivative_matches_finite_difference(self):
        rng = np.random.default_rng(33)
        t = rng.uniform(1.0, 15.0, 200)
        h = 1e-6
        fd = (self.p.value(t + h) - self.p.value(t - h)) / (2 * h)
        np.testing.assert_allclose(fd, self.p.derivative(t), rtol=1e-7, atol=1e-9)


class TestEnvelopes:
    def test_gaussian_nonnegative_and_unit_peak(self):
        env = GaussianEnvelope(center=(1, 2, 3), sigma=0.5)
        rng = np.random.default_rng(41)
        pts = rng.uniform(-2, 5, size=(500, 3))
        assert np.all(env.value(pts) >= 0.0)
        assert env.value((1, 2, 3)) == 1.0

    def test_gradient_matches_finite_difference(self):
        env = GaussianEnvelope(center=(0.2, -0.1, 0.4), sigma=0.7)
        rng = np.random.default_rng(42)
        h = 1e-6
        for p in rng.uniform(-1.5, 2.0, size=(100, 3)):
            fd = np.array(
                [
                    (env.value(p + h * np.eye(3)[k]) - env.value(p - h * np.eye(3)[k]))
                    / (2 * h)
                    for k in range(3)
                ]
            )
            np.testing.assert_allclose(env.gradient(p), fd, rtol=1e-6, atol=1e-10)

    def test_hessian_matches_finite_difference_of_gradient(self):
        env = GaussianEnvelope(center=(0, 0, 0), sigma=0.6)
        rng = np.random.default_rng(43)
        h = 1e-6
        for p in rng.uniform(-1.2, 1.2, size=(100, 3)):
            fd = np.array(
                [
                    (env.gradient(p + h * np.eye(3)[k]) - env.gradient(p - h * np.eye(3)[k]))
                    / (2 * h)
                    for k in range(3)
                ]
            )
            np.testing.assert_allclose(env.hessian(p), fd, rtol=1e-6, atol=1e-9)

    def test_hessian_at_center_is_isotropic(self):
        env = GaussianEnvelope(center=(0, 0, 0), sigma=0.25)
        np.testing.assert_allclose(
            env.hessian((0.0, 0.0, 0.0)), -np.eye(3) / 0.25**2, rtol=1e-13
        )

    def test_truncated_vanishes_outside_cut(self):
        env = TruncatedGaussianEnvelope(center=(0, 0, 0), sigma=1.0, cut_radius=1.0)
        assert env.value((1.5, 0, 0)) == 0.0
        np.testing.assert_array_equal(env.gradient((0, 2.0, 0)), np.zeros(3))
        np.testing.assert_array_equal(env.hessian((0, 0, -3.0)), np.zeros((3, 3)))
        # inside the cut it is the plain Gaussian
        smooth = GaussianEnvelope(center=(0, 0, 0), sigma=1.0)
        p = (0.3, 0.2, -0.4)
        assert env.value(p) == smooth.value(p)

    def test_truncated_integral_approaches_full(self):
        full = GaussianEnvelope(center=(0, 0, 0), sigma=0.5)
        cut = TruncatedGaussianEnvelope(center=(0, 0, 0), sigma=0.5, cut_radius=5.0)
        assert cut.integral() == pytest.approx(full.integral(), rel=1e-6)

    def test_truncated_integral_matches_quadrature(self):
        env = TruncatedGaussianEnvelope(center=(0, 0, 0), sigma=0.5, cut_radius=0.5)
        rule = build_rule(Ball(center=(0, 0, 0), radius=0.5), 20)
        numeric = float(np.sum(rule.weights * env.value(rule.nodes)))
        assert env.integral() == pytest.approx(numeric, rel=1e-10)

    def test_make_envelope_dispatch(self):
        assert isinstance(make_envelope("gaussian", (0, 0, 0), 1.0), GaussianEnvelope)
        assert isinstance(
            make_envelope("truncated-gaussian", (0, 0, 0), 1.0, 2.0),
            TruncatedGaussianEnvelope,
        )
        with pytest.raises(ValueError):
            make_envelope("boxcar", (0, 0, 0), 1.0)
        with pytest.raises(ValueError, match="cut radius"):
            make_envelope("truncated-gaussian", (0, 0, 0), 1.0)


class TestSourceModel:
    def test_rejects_non_unit_polarization(self):
        with pytest.raises(ValueError, match="unit"):
            SourceModel(
                envelope=GaussianEnvelope(center=(0, 0, 0), sigma=1.0),
                profile=SineSquaredPulse(t_on=0.0, tau=1.0),
                polarization=(0, 0, 2),
                amplitude=1.0,
                domain=Ball(center=(0, 0, 0), radius=8.0),
            )

    def test_current_zero_before_switch_on(self):
        src = gaussian_source()
        np.testing.assert_array_equal(src.current((0.05, 0, 0), 0.0), np.zeros(3))
        np.testing.assert_array_equal(src.current_time_derivative((0.05, 0, 0), 0.9), np.zeros(3))
        np.testing.assert_array_equal(src.current_time_primitive((0.05, 0, 0), 1.0), np.zeros(3))

    def test_current_at_center_and_peak(self):
        src = gaussian_source(amplitude=2.5)
        # peak of the sine-squared burst reaches exactly 1
        np.testing.assert_allclose(src.current((0, 0, 0), 3.0), [0, 0, 2.5])

    def test_current_decay_far_outside_envelope(self):
        src = gaussian_source(sigma=0.1)
        value = src.current((1.0, 0, 0), 3.0)  # 10 sigma out
        assert np.linalg.norm(value) < np.exp(-50) * 1.001

    def test_separability(self):
        src = gaussian_source()
        rng = np.random.default_rng(51)
        for _ in range(50):
            xp = rng.uniform(-0.3, 0.3, 3)
            t1, t2 = rng.uniform(1.0, 5.0, 2)
            lhs = src.current(xp, t1) * src.profile.value(t2)
            rhs = src.current(xp, t2) * src.profile.value(t1)
            np.testing.assert_allclose(lhs, rhs, atol=1e-15)

    def test_time_derivative_matches_finite_difference(self):
        src = gaussian_source()
        rng = np.random.default_rng(52)
        h = 1e-6
        for _ in range(100):
            xp = rng.uniform(-0.4, 0.4, 3)
            tp = rng.uniform(1.1, 4.9)
            fd = (src.current(xp, tp + h) - src.current(xp, tp - h)) / (2 * h)
            np.testing.assert_allclose(
                src.current_time_derivative(xp, tp), fd, rtol=1e-7, atol=1e-9
            )

    def test_time_primitive_matches_numeric_integration(self):
        src = gaussian_source()
        rng = np.random.default_rng(53)
        for _ in range(20):
            xp = rng.uniform(-0.3, 0.3, 3)
            tp = rng.uniform(1.2, 6.0)
            expected = np.array(
                [
                    gauss_legendre_time_integral(
                        lambda t: np.array([src.current(xp, ti)[k] for ti in np.atleast_1d(t)]),
                        1.0,
                        min(tp, 5.0),
                    )
                    for k in range(3)
                ]
            )
            np.testing.assert_allclose(
                src.current_time_primitive(xp, tp), expected, rtol=1e-9, atol=1e-14
            )

    def test_charge_density_zero_at_center_and_before_onset(self):
        src = gaussian_source()
        assert src.charge_density((0.0, 0.0, 0.0), 3.0) == pytest.approx(0.0, abs=1e-16)
        assert src.charge_density((0.1, 0.1, 0.1), 0.5) == 0.0

    def test_total_charge_vanishes(self):
        # Quadrature oracle: the divergence theorem forces zero net charge
        # up to boundary leakage.
        src = gaussian_source(domain_sigmas=10.0)
        rule = build_rule(src.domain, 24)
        rho = src.charge_density(rule.nodes, 3.0)
        total = float(np.sum(rule.weights * rho))
        scale = float(np.sum(rule.weights * np.abs(rho)))
        assert abs(total) < 1e-12 * scale

    def test_charge_gradient_matches_finite_difference(self):
        src = gaussian_source()
        rng = np.random.default_rng(54)
        h = 1e-6
        for _ in range(100):
            xp = rng.uniform(-0.4, 0.4, 3)
            tp = rng.uniform(1.1, 6.0)
            fd = np.array(
                [
                    (
                        src.charge_density(xp + h * np.eye(3)[k], tp)
                        - src.charge_density(xp - h * np.eye(3)[k], tp)
                    )
                    / (2 * h)
                    for k in range(3)
                ]
            )
            np.testing.assert_allclose(src.charge_gradient(xp, tp), fd, rtol=1e-6, atol=1e-9)

    def test_charge_gradient_parallel_to_polarization_at_center(self):
        src = gaussian_source()
        grad = src.charge_gradient((0.0, 0.0, 0.0), 3.0)
        assert abs(grad[0]) < 1e-16 and abs(grad[1]) < 1e-16
        assert grad[2] != 0.0

    def test_continuity_equation(self):
        src = gaussian_source()
        rng = np.random.default_rng(55)
        h = 1e-6
        scale = abs(src.amplitude)
        for _ in range(1000):
            xp = rng.uniform(-0.5, 0.5, 3)
            tp = rng.uniform(0.5, 6.5)
            drho_dt = (
                src.charge_density(xp, tp + h) - src.charge_density(xp, tp - h)
            ) / (2 * h)
            residual = drho_dt + src.current_divergence(xp, tp)
            assert abs(residual) < 1e-6 * scale

    def test_compact_temporal_support_is_exact(self):
        src = gaussian_source()
        rng = np.random.default_rng(56)
        for _ in range(200):
            xp = rng.uniform(-0.5, 0.5, 3)
            tp = rng.uniform(-3.0, 1.0)
            assert np.all(src.current(xp, tp) == 0.0)
            assert np.all(src.current_time_derivative(xp, tp) == 0.0)
            assert src.charge_density(xp, tp) == 0.0
            assert np.all(src.charge_gradient(xp, tp) == 0.0)


class TestBoundaryLeakage:
    def test_smooth_gaussian_is_tiny(self):
        src = gaussian_source(domain_sigmas=8.0)
        assert src.boundary_leakage() < 1e-13

    def test_truncated_at_one_sigma(self):
        sigma = 0.2
        src = SourceModel(
            envelope=TruncatedGaussianEnvelope(
                center=(0, 0, 0), sigma=sigma, cut_radius=sigma
            ),
            profile=SineSquaredPulse(t_on=0.0, tau=1.0),
            polarization=(0, 0, 1),
            amplitude=1.0,
            domain=Ball(center=(0, 0, 0), radius=sigma),
        )
        assert src.boundary_leakage() == pytest.approx(np.exp(-0.5), rel=1e-9)

    def test_zero_amplitude_source(self):
        src = gaussian_source(amplitude=0.0)
        assert src.boundary_leakage() == 0.0

    def test_box_domain(self):
        sigma = 0.1
        src = SourceModel(
            envelope=GaussianEnvelope(center=(0, 0, 0), sigma=sigma),
            profile=SineSquaredPulse(t_on=0.0, tau=1.0),
            polarization=(0, 0, 1),
            amplitude=1.0,
            domain=Box(lo=(-8 * sigma,) * 3, hi=(8 * sigma,) * 3),
        )
        assert src.boundary_leakage() < 1e-13


class TestFactories:
    def test_make_profile(self):
        assert isinstance(make_profile("sine-squared", 0.0, 1.0), SineSquaredPulse)
        assert isinstance(
            make_profile("differentiated-gaussian", 0.0, 1.0), DifferentiatedGaussianPulse
        )
        with pytest.raises(ValueError, match="unknown pulse"):
            make_profile("square", 0.0, 1.0)

    @pytest.mark.parametrize("tau", [0.0, -1.0])
    def test_rejects_bad_duration(self, tau):
        with pytest.raises(ValueError):
            SineSquaredPulse(t_on=0.0, tau=tau)
