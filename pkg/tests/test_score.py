import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robustmean.errors import DomainError, ParameterError
from robustmean.score import HUBER, ScoreFunction, psi, rho, smoothed_huber, validate_assumption1

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
SCORES = [HUBER, smoothed_huber(1.5), smoothed_huber(2.0), smoothed_huber(1.2, transition_hi=1.5)]


class TestHuberValues:
    def test_psi_examples(self):
        assert psi(HUBER, 0.5) == 0.5
        assert psi(HUBER, 3.0) == 1.0
        assert psi(HUBER, -0.25) == -0.25

    def test_rho_examples(self):
        assert rho(HUBER, 0.0) == 0.0
        assert rho(HUBER, 1.0) == 0.5
        assert rho(HUBER, -3.0) == 2.5

    def test_sup_norm(self):
        assert HUBER.sup_norm == 1.0
        assert smoothed_huber(1.7).sup_norm == 1.7

    def test_default_smoothed_is_huber(self):
        z = np.linspace(-5, 5, 1001)
        np.testing.assert_array_equal(smoothed_huber().psi(z), HUBER.psi(z))

    def test_nonfinite_rejected(self):
        with pytest.raises(DomainError):
            HUBER.psi(np.array([0.0, np.nan]))


class TestConstruction:
    def test_huber_with_plateau_rejected(self):
        with pytest.raises(ParameterError):
            ScoreFunction("huber", psi_max=1.5)

    def test_plateau_beyond_lipschitz_rejected(self):
        # reaching 2.5 over a unit band would need slope > 1
        with pytest.raises(ParameterError):
            smoothed_huber(2.5)

    def test_roundtrip(self):
        s = smoothed_huber(1.4, 1.8)
        assert ScoreFunction.from_dict(s.to_dict()) == s


class TestScoreInvariants:
    def test_huber_exact(self):
        rep = validate_assumption1(HUBER, 1e-3)
        assert rep.passed(0.0), rep.violations

    @pytest.mark.parametrize("s", SCORES[1:], ids=lambda s: f"psi_max={s.psi_max}")
    def test_smoothed_within_1e12(self, s):
        rep = validate_assumption1(s, 1e-3)
        assert rep.max_violation <= 1e-12, rep.violations

    def test_broken_score_flagged(self):
        rep = validate_assumption1(lambda z: 2 * z)
        assert rep.violations["lipschitz"] > 0
        assert rep.violations["identity"] > 0

    def test_unbounded_identity_flagged(self):
        rep = validate_assumption1(lambda z: z)
        assert rep.violations["bounded"] > 0
        assert rep.violations["saturation"] > 0

    @pytest.mark.parametrize("s", SCORES)
    def test_rho_derivative_matches_psi(self, s):
        z = np.linspace(-4, 4, 801)
        h = 1e-5
        num = (s.rho(z + h) - s.rho(z - h)) / (2 * h)
        # where psi' jumps, the central difference is off by up to h/4
        kinks = np.isin(np.abs(z), [s.transition_lo, s.transition_hi])
        np.testing.assert_allclose(num[~kinks], s.psi(z)[~kinks], atol=1e-6)
        np.testing.assert_allclose(num[kinks], s.psi(z)[kinks], atol=h / 4 + 1e-9)

    @pytest.mark.parametrize("s", SCORES)
    def test_rho_convex_even(self, s):
        z = np.linspace(-6, 6, 1201)
        r = s.rho(z)
        np.testing.assert_allclose(r, s.rho(-z), atol=1e-13)
        assert np.all(np.diff(r, 2) >= -1e-12)


class TestProperties:
    @given(finite, finite)
    @settings(max_examples=200, deadline=None)
    def test_lipschitz_and_odd(self, a, b):
        for s in SCORES:
            pa, pb = float(s.psi(a)), float(s.psi(b))
            assert abs(pa - pb) <= abs(a - b) * (1 + 1e-12) + 1e-12
            assert float(s.psi(-a)) == -pa
            assert abs(pa) <= 2

    @given(st.lists(finite, min_size=2, max_size=50))
    @settings(max_examples=100, deadline=None)
    def test_variance_contraction(self, ys):
        y = np.array(ys)
        for s in SCORES:
            assert np.var(s.psi(y)) <= np.var(y) + 1e-9
