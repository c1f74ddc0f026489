import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from tchar.distributions import (
    QFamilyParams,
    StudentTParams,
    exponential,
    fit_qfamily,
    normal,
    qfam_pdf_at_u,
    qfam_quantile,
    qfam_quantile_derivative,
    qfamily,
    sample,
    student_t,
    t_cdf,
    uniform,
    z_distribution,
    z_pdf,
)
from tchar.errors import DomainError
from tchar.numerics import integrate

T2_C = math.sqrt(2.0) / 4.0


class TestStudentT:
    def test_t2_density_at_zero(self):
        assert float(student_t(2).pdf(0.0)) == 1.0 / (2.0 * math.sqrt(2.0))

    def test_t2_cdf_closed_form(self):
        x = np.linspace(-30, 30, 601)
        ref = 0.5 * (1.0 + x / np.sqrt(2.0 + x * x))
        np.testing.assert_allclose(student_t(2).cdf(x), ref, rtol=1e-14, atol=1e-16)
        assert float(student_t(2).cdf(1.0)) == pytest.approx(0.7886751345948129, rel=1e-15)

    @pytest.mark.parametrize("nu", [1.0, 2.0, 2.5, 3.0, 5.0, 8.0, 30.0])
    def test_against_scipy(self, nu):
        x = np.linspace(-50, 50, 401)
        d = student_t(nu, 0.4, 1.7)
        ref = stats.t(nu, loc=0.4, scale=1.7)
        np.testing.assert_allclose(d.pdf(x), ref.pdf(x), rtol=1e-12)
        np.testing.assert_allclose(d.cdf(x), ref.cdf(x), rtol=1e-12)
        np.testing.assert_allclose(d.sf(x), ref.sf(x), rtol=1e-12)

    @pytest.mark.parametrize("nu, z", [(3.0, -1e8), (5.0, -1e40), (2.5, -1e100), (4.0, 1e6)])
    def test_tail_precision(self, nu, z):
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 40
        zz = mpmath.mpf(-abs(z))
        ref = mpmath.betainc(nu / 2, 0.5, 0, nu / (nu + zz * zz), regularized=True) / 2
        d = student_t(nu)
        got = d.cdf(z) if z < 0 else d.sf(z)
        assert got == pytest.approx(float(ref), rel=1e-12)

    @settings(max_examples=300, deadline=None)
    @given(st.sampled_from([1.0, 2.0, 3.0, 4.5, 7.0]), st.floats(1e-250, 0.5))
    def test_quantile_roundtrip(self, nu, p):
        d = student_t(nu, -1.0, 2.0)
        assert float(d.cdf(d.quantile(p))) == pytest.approx(p, rel=1e-10)
        assert float(d.sf(d.isf(p))) == pytest.approx(p, rel=1e-10)

    def test_quantile_symmetry(self):
        u = np.linspace(0.01, 0.99, 99)
        d = student_t(3)
        np.testing.assert_allclose(d.quantile(u), -d.quantile(1 - u), atol=1e-12)
        np.testing.assert_allclose(d.isf(1 - u), d.quantile(u), atol=1e-12)

    def test_invalid(self):
        with pytest.raises(DomainError):
            StudentTParams(0.5)
        with pytest.raises(DomainError):
            StudentTParams(3.0, sigma=0.0)
        with pytest.raises(DomainError):
            student_t(3).quantile(1.0)

    def test_tail_indices(self):
        d = student_t(3)
        assert d.has_first_moment and d.has_second_moment and not d.has_moment(3)
        assert not student_t(2).has_second_moment


class TestZ:
    @pytest.mark.parametrize("nu", [3, 4, 6, 8])
    def test_moments(self, nu):
        for r, exact in ((0, 1.0), (1, 0.0), (2, 1.0)):
            res = integrate(lambda x: x**r * z_pdf(nu, x), (-math.inf, math.inf), 1e-13, 1e-15, vectorized=True)
            assert res.value == pytest.approx(exact, abs=1e-9)

    def test_nu3_peak(self):
        assert z_pdf(3, 0.0) == pytest.approx(2.0 / math.pi, rel=1e-15)

    def test_model_is_rescaled_t(self):
        z = z_distribution(5)
        x = np.linspace(-6, 6, 25)
        s = math.sqrt(3.0 / 5.0)
        np.testing.assert_allclose(z.cdf(x), stats.t(5, scale=s).cdf(x), rtol=1e-12)
        np.testing.assert_allclose(z.pdf(x), z_pdf(5, x), rtol=1e-13)

    def test_needs_nu_above_two(self):
        with pytest.raises(DomainError):
            z_pdf(2.0, 0.0)


class TestQFamily:
    def test_quantile_formula(self):
        p = QFamilyParams(0.3, 1.5, 2.0)
        u = np.array([0.01, 0.3, 0.77])
        ref = 1.5 * (u - 0.3) / (0.3 * 0.7 * (1 - u) ** 0.3 * u**0.7) + 2.0
        np.testing.assert_allclose(qfam_quantile(p, u), ref, rtol=1e-14)

    def test_median_point(self):
        # Q(lambda) = d
        assert float(qfam_quantile(QFamilyParams(0.3, 1.0, 4.0), 0.3)) == 4.0

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.02, 0.98), st.floats(0.1, 5.0), st.floats(-5, 5), st.floats(1e-200, 1 - 1e-12))
    def test_cdf_roundtrip(self, lam, c, d, u):
        q = qfamily(lam, c, d)
        x = float(q.quantile(u))
        assert float(q.cdf(x)) == pytest.approx(u, rel=1e-9, abs=1e-300)

    @pytest.mark.parametrize("lam", [0.1, 0.5, 0.9])
    def test_tail_roundtrip(self, lam):
        q = qfamily(lam, 1.0, 0.0)
        for v in (1e-12, 1e-50, 1e-200):
            assert float(q.sf(q.isf(v))) == pytest.approx(v, rel=1e-12)
            assert float(q.cdf(q.quantile(v))) == pytest.approx(v, rel=1e-12)

    def test_density_is_reciprocal_quantile_slope(self):
        p = QFamilyParams(0.4, 0.8, 0.0)
        u = np.array([0.05, 0.4, 0.9])
        h = 1e-6
        slope = (qfam_quantile(p, u + h) - qfam_quantile(p, u - h)) / (2 * h)
        np.testing.assert_allclose(qfam_quantile_derivative(p, u), slope, rtol=1e-7)
        np.testing.assert_allclose(qfam_pdf_at_u(p, u), 1.0 / slope, rtol=1e-7)

    def test_density_integrates_to_one(self):
        q = qfamily(0.3, 1.0, 0.0)
        res = integrate(q.pdf, (-math.inf, math.inf), 1e-11, 1e-14, vectorized=True, scale=1.0)
        assert res.value == pytest.approx(1.0, abs=1e-9)

    def test_t2_membership(self):
        q = qfamily(0.5, T2_C, 0.0)
        x = np.linspace(-50, 50, 1001)
        np.testing.assert_allclose(q.cdf(x), student_t(2).cdf(x), rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(q.pdf(x), student_t(2).pdf(x), rtol=1e-10)

    def test_t2_cdf_inverts_exactly(self):
        # the t2 cdf used here inverts exactly through the lambda = 1/2 quantile
        x = np.linspace(-10, 10, 201)
        u = t_cdf(StudentTParams(2.0), x)
        np.testing.assert_allclose(qfam_quantile(QFamilyParams(0.5, T2_C), u), x, atol=1e-12)

    def test_tail_indices(self):
        q = qfamily(0.3, 1.0)
        assert q.lower_tail_index == pytest.approx(1 / 0.7)
        assert q.upper_tail_index == pytest.approx(1 / 0.3)
        assert q.has_moment(2, "above") and not q.has_moment(2, "below")

    @pytest.mark.parametrize("lam, c", [(0.0, 1.0), (1.0, 1.0), (1.2, 1.0), (0.5, 0.0), (0.5, -1.0)])
    def test_invalid(self, lam, c):
        with pytest.raises(DomainError):
            qfamily(lam, c)


class TestControls:
    def test_normal(self):
        d = normal(1.0, 2.0)
        x = np.linspace(-20, 20, 81)
        np.testing.assert_allclose(d.cdf(x), stats.norm(1, 2).cdf(x), rtol=1e-13)
        np.testing.assert_allclose(d.sf(x), stats.norm(1, 2).sf(x), rtol=1e-13)
        np.testing.assert_allclose(d.quantile(d.cdf(x[20:60])), x[20:60], rtol=1e-12, atol=1e-12)

    def test_uniform(self):
        d = uniform(-1.0, 3.0)
        assert float(d.cdf(0.0)) == 0.25 and float(d.pdf(5.0)) == 0.0
        assert float(d.quantile(0.5)) == 1.0 and float(d.isf(0.25)) == 2.0

    def test_exponential_mean_zero(self):
        d = exponential(1.0, -1.0)
        res = integrate(lambda x: x * d.pdf(x), (-1.0, math.inf), vectorized=True)
        assert res.value == pytest.approx(0.0, abs=1e-12)
        assert float(d.isf(1e-300)) == pytest.approx(-1 + 300 * math.log(10), rel=1e-14)


class TestSampling:
    def test_deterministic(self):
        a = sample(student_t(3), 1000, seed=42)
        b = sample(student_t(3), 1000, seed=42)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, sample(student_t(3), 1000, seed=42, stream=1))

    @pytest.mark.parametrize("dist, ref", [
        (student_t(2), stats.t(2)),
        (student_t(3, 1.0, 0.5), stats.t(3, 1.0, 0.5)),
        (normal(), stats.norm()),
        (exponential(2.0), stats.expon(scale=0.5)),
    ])
    def test_distribution(self, dist, ref):
        x = sample(dist, 20000, seed=3)
        assert stats.kstest(x, ref.cdf).pvalue > 1e-3

    def test_qfamily_against_cdf(self):
        q = qfamily(0.3, 1.0, 0.0)
        x = sample(q, 20000, seed=5)
        assert stats.kstest(x, q.cdf).pvalue > 1e-3

    def test_bad_count(self):
        with pytest.raises(DomainError):
            sample(normal(), 0, seed=1)


class TestFit:
    U = np.linspace(0.01, 0.99, 99)

    @pytest.mark.parametrize("true", [QFamilyParams(0.3, 1.0, 0.0), QFamilyParams(0.8, 2.0, -1.0)])
    def test_self_fit(self, true):
        fit = fit_qfamily(qfamily(true.lam, true.c, true.d), self.U, QFamilyParams(0.5, 1.0, 0.0))
        assert fit.lam == pytest.approx(true.lam, abs=1e-6)
        assert fit.c == pytest.approx(true.c, abs=1e-6)
        assert fit.d == pytest.approx(true.d, abs=1e-6)

    def test_t2(self):
        fit = fit_qfamily(student_t(2), self.U, QFamilyParams(0.4, 1.0, 0.5))
        assert (fit.lam, fit.c, fit.d) == pytest.approx((0.5, T2_C, 0.0), abs=1e-6)

    def test_small_grid(self):
        with pytest.raises(DomainError):
            fit_qfamily(student_t(2), [0.2, 0.5, 0.8], QFamilyParams(0.5, 1.0))
