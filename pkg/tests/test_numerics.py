import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from tchar.errors import BracketError, DomainError, QuadratureError
from tchar.numerics import (
    Interval,
    integrate,
    invert_monotone,
    log_gamma,
    minimize,
    regularized_incomplete_beta,
)


class TestInterval:
    def test_rejects_reversed(self):
        with pytest.raises(DomainError):
            Interval(1.0, 0.0)

    def test_rejects_nan(self):
        with pytest.raises(DomainError):
            Interval(math.nan, 1.0)

    def test_contains_and_finite(self):
        iv = Interval(-math.inf, 2.0)
        assert 1.0 in iv and 3.0 not in iv
        assert not iv.is_finite
        assert Interval(0.0, 1.0).is_finite


class TestIntegrate:
    @pytest.mark.parametrize(
        "f, dom, exact",
        [
            (lambda x: np.exp(-x * x), (-math.inf, math.inf), math.sqrt(math.pi)),
            (lambda x: np.exp(-x), (0.0, math.inf), 1.0),
            (lambda x: 1.0 / (1.0 + x * x), (-math.inf, math.inf), math.pi),
            (lambda x: np.exp(x), (-math.inf, 0.0), 1.0),
            (np.sqrt, (0.0, 1.0), 2.0 / 3.0),
            (lambda x: np.log(x), (0.0, 1.0), -1.0),
            (np.cos, (0.0, 100.0), math.sin(100.0)),
        ],
    )
    def test_known_integrals(self, f, dom, exact):
        res = integrate(f, dom, 1e-12, 1e-14, vectorized=True)
        assert res.value == pytest.approx(exact, rel=1e-11, abs=1e-13)
        assert res.error_estimate < 1e-10
        assert res.evaluations > 0

    def test_scalar_callable(self):
        res = integrate(lambda x: x**3, (0.0, 2.0))
        assert res.value == pytest.approx(4.0, rel=1e-13)

    def test_breakpoint_kink(self):
        res = integrate(np.abs, (-1.0, 3.0), vectorized=True, points=[0.0])
        assert res.value == pytest.approx(5.0, rel=1e-14)

    def test_power_law_tail(self):
        # t_3 density tail: slow algebraic decay
        res = integrate(lambda x: 1.0 / (1.0 + x * x) ** 2, (0.0, math.inf), 1e-12, vectorized=True)
        assert res.value == pytest.approx(math.pi / 4.0, rel=1e-11)

    def test_center_and_scale(self):
        f = lambda x: np.exp(-0.5 * ((x - 1e3) / 1e-2) ** 2)
        res = integrate(f, (-math.inf, math.inf), 1e-10, vectorized=True, center=1e3, scale=1e-2)
        assert res.value == pytest.approx(1e-2 * math.sqrt(2 * math.pi), rel=1e-9)

    def test_divergent_raises(self):
        with pytest.raises(QuadratureError):
            integrate(lambda x: 1.0 / x, (0.0, 1.0), vectorized=True, max_evaluations=20_000)

    def test_nonfinite_raises(self):
        with pytest.raises(QuadratureError):
            integrate(lambda x: np.full_like(x, np.nan), (0.0, 1.0), vectorized=True)

    def test_bad_tolerance(self):
        with pytest.raises(DomainError):
            integrate(np.sin, (0.0, 1.0), rel_tol=0.0)

    def test_cancellation_stops_at_roundoff(self):
        # large positive and negative halves; the result is tiny
        f = lambda x: np.where(x < 0, -1.0, 1.0) * np.exp(-np.abs(x)) + 1e-3 * np.exp(-x * x)
        res = integrate(f, (-math.inf, math.inf), 1e-14, 1e-300, vectorized=True, points=[0.0])
        assert res.value == pytest.approx(1e-3 * math.sqrt(math.pi), rel=1e-9)


class TestSpecial:
    @given(st.floats(0.01, 200.0))
    def test_log_gamma(self, x):
        assert log_gamma(x) == pytest.approx(special.gammaln(x), rel=1e-13, abs=1e-13)

    def test_log_gamma_domain(self):
        with pytest.raises(DomainError):
            log_gamma(0.0)

    @settings(max_examples=200)
    @given(st.floats(0.05, 50.0), st.floats(0.05, 50.0), st.floats(0.0, 1.0).filter(lambda v: v == 0 or v > 1e-300))
    def test_incomplete_beta_matches_scipy(self, a, b, x):
        ours = regularized_incomplete_beta(a, b, x)
        ref = special.betainc(a, b, x)
        assert ours == pytest.approx(ref, rel=1e-11, abs=1e-300)

    @pytest.mark.parametrize("a, b, x", [(0.5, 2.0, 5e-324), (3.0, 0.5, 1e-200), (0.5, 0.5, 1 - 1e-12), (40.0, 3.0, 0.93)])
    def test_incomplete_beta_matches_mpmath(self, a, b, x):
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 50
        ref = float(mpmath.betainc(a, b, 0, mpmath.mpf(x), regularized=True))
        assert regularized_incomplete_beta(a, b, x) == pytest.approx(ref, rel=1e-12)

    def test_incomplete_beta_vectorized_and_edges(self):
        x = np.array([0.0, 0.25, 1.0])
        out = regularized_incomplete_beta(2.0, 3.0, x)
        assert out.shape == (3,)
        assert out[0] == 0.0 and out[2] == 1.0
        # I_x(2, 3) = 1 - (1-x)^3 (1 + 3x)
        assert out[1] == pytest.approx(1 - 0.75**3 * (1 + 0.75), rel=1e-14)

    @pytest.mark.parametrize("a, b, x", [(0.0, 1.0, 0.5), (1.0, -1.0, 0.5), (1.0, 1.0, 1.5)])
    def test_incomplete_beta_domain(self, a, b, x):
        with pytest.raises(DomainError):
            regularized_incomplete_beta(a, b, x)


class TestInvertMonotone:
    def test_expanding_bracket(self):
        x = invert_monotone(lambda t: t**3, 1e6, (0.0, 1.0))
        assert x == pytest.approx(100.0, rel=1e-12)

    def test_bracket_moves_right(self):
        x = invert_monotone(lambda t: -math.exp(-t), -0.25, (0.0, 1.0))
        assert x == pytest.approx(math.log(4.0), rel=1e-12)

    def test_unreachable_target(self):
        with pytest.raises(BracketError):
            invert_monotone(math.atan, 2.0, (0.0, 1.0), max_doublings=20)


class TestMinimize:
    def test_rosenbrock(self):
        f = lambda v: (1 - v[0]) ** 2 + 100 * (v[1] - v[0] ** 2) ** 2
        x = minimize(f, [-1.2, 1.0], tol=1e-14)
        assert np.allclose(x, [1.0, 1.0], atol=1e-6)

    def test_quadratic_3d(self):
        target = np.array([0.3, -2.0, 5.0])
        x = minimize(lambda v: float(np.sum((v - target) ** 2)), np.zeros(3), tol=1e-14)
        assert np.allclose(x, target, atol=1e-7)
