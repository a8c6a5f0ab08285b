import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from went_beta import oracle, posterior
from went_beta.errors import DomainError
from went_beta.models import PosteriorSpec, RegimeRule, Standardization

mp.mp.dps = 40


@st.composite
def specs(draw, max_n=2000):
    n = draw(st.integers(min_value=1, max_value=max_n))
    x = draw(st.integers(min_value=0, max_value=n))
    return PosteriorSpec(n, x)


class TestModels:
    def test_shape(self):
        spec = PosteriorSpec(10, 3)
        assert (spec.a, spec.b) == (4, 8)

    @pytest.mark.parametrize("n,x", [(-1, 0), (5, 6), (5, -1), (2.5, 1)])
    def test_invalid_spec(self, n, x):
        with pytest.raises(DomainError):
            PosteriorSpec(n, x)

    @pytest.mark.parametrize(
        "rule,n,x",
        [
            (RegimeRule("alpha", 0.3), 1000, 300),
            (RegimeRule("alpha", 0.3), 10, 3),
            (RegimeRule("beta_power", 0.5), 10**6, 1000),
            (RegimeRule("fixed_x", 2), 50, 2),
            (RegimeRule("fixed_gap", 2), 50, 48),
        ],
    )
    def test_regime_x(self, rule, n, x):
        # 0.3 * 10 = 2.9999999999999996 in floating point; the floor is tolerant
        assert rule.x_for(n) == x

    @pytest.mark.parametrize("kind,param", [("alpha", 0.0), ("alpha", 1.0), ("beta_power", 1.5), ("fixed_x", -1), ("other", 1)])
    def test_invalid_regime(self, kind, param):
        with pytest.raises(DomainError):
            RegimeRule(kind, param)

    def test_invalid_standardization(self):
        with pytest.raises(DomainError):
            Standardization(0.0, 0.0)


class TestDensity:
    def test_log_pdf_value(self):
        spec = PosteriorSpec(10, 3)
        want = float(mp.log(11 * mp.binomial(10, 3) * mp.mpf("0.2") ** 3 * mp.mpf("0.8") ** 7))
        assert posterior.log_pdf(spec, 0.2) == pytest.approx(want, rel=1e-14)

    def test_log_pdf_vectorized(self):
        spec = PosteriorSpec(10, 3)
        ps = np.array([0.1, 0.5, 0.9])
        got = posterior.log_pdf(spec, ps)
        assert got.shape == (3,)
        assert got[1] == pytest.approx(posterior.log_pdf(spec, 0.5))

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1])
    def test_log_pdf_domain(self, p):
        with pytest.raises(DomainError):
            posterior.log_pdf(PosteriorSpec(4, 2), p)

    def test_normalized(self):
        spec = PosteriorSpec(30, 7)
        c = posterior.log_norm_constant(spec)
        total = oracle.integrate(lambda p, q: np.exp(c + 7 * np.log(p) + 23 * np.log(q))).value
        assert total == pytest.approx(1.0, rel=1e-12)


class TestMoments:
    def test_mean_variance(self):
        spec = PosteriorSpec(10, 3)
        assert posterior.mean(spec) == pytest.approx(4 / 12)
        assert posterior.variance(spec) == pytest.approx(4 * 8 / (13 * 144))

    @pytest.mark.parametrize("k", [1, 2, 3, 4, 6])
    def test_central_moment_against_mpmath(self, k):
        spec = PosteriorSpec(200, 50)
        c = mp.mpf(50) / 200
        # exact binomial sum over E[Z**j] = (51)_j / (202)_j
        want = mp.fsum(mp.binomial(k, j) * (-c) ** (k - j) * mp.rf(51, j) / mp.rf(202, j) for j in range(k + 1))
        got = posterior.central_moment(spec, k, 0.25)
        assert got == pytest.approx(float(want), rel=1e-12, abs=1e-17)

    def test_raw_moment_oracle(self):
        spec = PosteriorSpec(40, 13)
        assert posterior.raw_moment(spec, 3) == pytest.approx(oracle.raw_moment_oracle(spec, 3), rel=1e-12)

    def test_2f1_requires_x(self):
        with pytest.raises(DomainError):
            posterior.central_moment_2f1(PosteriorSpec(10, 0), 2)

    def test_invalid_order(self):
        with pytest.raises(DomainError):
            posterior.central_moment(PosteriorSpec(10, 3), 0, 0.3)
        with pytest.raises(DomainError):
            posterior.raw_moment(PosteriorSpec(10, 3), -1)

    @settings(max_examples=60, deadline=None)
    @given(specs(), st.integers(min_value=1, max_value=8))
    def test_two_moment_forms_agree(self, spec, k):
        if spec.x == 0:
            return
        a = posterior.central_moment(spec, k, spec.x / spec.n)
        b = posterior.central_moment_2f1(spec, k)
        # the expansion terms are bounded by 2**k, which sets the rounding floor
        assert a == pytest.approx(b, rel=1e-9, abs=1e-14 * 2**k)

    @settings(max_examples=60, deadline=None)
    @given(specs())
    def test_variance_is_second_central_moment(self, spec):
        assert posterior.central_moment(spec, 2, posterior.mean(spec)) == pytest.approx(
            posterior.variance(spec), rel=1e-9
        )

    @settings(max_examples=40, deadline=None)
    @given(specs(), st.integers(min_value=1, max_value=10))
    def test_raw_moments_decrease(self, spec, j):
        assert 0.0 < posterior.raw_moment(spec, j + 1) <= posterior.raw_moment(spec, j)


class TestStandardization:
    def test_alpha(self):
        std = posterior.standardization_for(RegimeRule("alpha", 0.5), 100)
        assert std.shift == 0.5
        assert std.scale == pytest.approx(20.0)

    def test_beta_power(self):
        std = posterior.standardization_for(RegimeRule("beta_power", 0.5), 10**6)
        assert std.shift == pytest.approx(1e-3)
        assert std.scale == pytest.approx(10**4.5)

    def test_fixed(self):
        assert posterior.standardization_for(RegimeRule("fixed_x", 2), 100) == Standardization(0.0, 100.0)
        assert posterior.standardization_for(RegimeRule("fixed_gap", 2), 100) == Standardization(1.0, 100.0)

    @pytest.mark.parametrize("k", [2, 4])
    def test_standardized_moments_approach_gaussian(self, k):
        rule = RegimeRule("alpha", 0.3)
        n = 10**6
        got = posterior.standardized_moment(rule.spec(n), posterior.standardization_for(rule, n), k)
        assert got == pytest.approx(math.prod(range(k - 1, 0, -2)), rel=1e-2)

    def test_kl_decreases(self):
        rule = RegimeRule("alpha", 0.5)
        kls = [
            posterior.kl_to_standard_gaussian(rule.spec(n), posterior.standardization_for(rule, n))
            for n in (10, 100, 1000, 10000)
        ]
        assert all(k >= 0 for k in kls)
        assert all(b < a for a, b in zip(kls, kls[1:]))
        assert kls[-1] < 1e-3

    def test_kl_value(self):
        # mpmath reference for n = 20, x = 10
        spec = PosteriorSpec(20, 10)
        std = posterior.standardization_for(RegimeRule("alpha", 0.5), 20)
        c = mp.log(21 * mp.binomial(20, 10))
        s = mp.mpf(std.scale)

        def integrand(p):
            lf = c + 10 * mp.log(p) + 10 * mp.log(1 - p)
            return mp.exp(lf) * (lf - mp.log(s) + mp.log(2 * mp.pi) / 2 + (s * (p - mp.mpf(1) / 2)) ** 2 / 2)

        want = float(mp.quad(integrand, [0, 0.5, 1]))
        assert posterior.kl_to_standard_gaussian(spec, std) == pytest.approx(want, rel=1e-9)
