import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special, stats as sps

from corrhub.expfam import (
    GlobalFamily, LocalFamily, cdf_global, cdf_local, kl_divergence, kl_global, kl_local,
    logpdf_global, logpdf_local, loglr_global, loglr_local, mle_global, mle_local,
    p0_inverse, sample_global, sample_local,
)
from corrhub.specialfn import ln_beta, p0, t_integral


@pytest.fixture(scope="module")
def local_fam():
    return LocalFamily(100, 10)


@pytest.fixture(scope="module")
def global_fam():
    return GlobalFamily(100, 10)


def ref_density(y, param, p, n, global_law=False):
    """Density written out from scratch with scipy's incomplete beta."""
    a = (n - 2) / 2
    b = math.exp(special.betaln(a, 0.5))
    tail = special.betainc(a, 0.5, 1 - y * y)
    if global_law:
        const, scale = p * (p - 1) / b, p * (p - 1) / 2
    else:
        const, scale = 2 * (p - 1) / b, p - 1
    return param * const * (1 - y * y) ** ((n - 4) / 2) * math.exp(-param * scale * tail)


class TestLogLR:
    def test_at_zero(self, local_fam):
        # V = 0 gives P_0 = 1 and z = p - 1
        assert loglr_local(0.0, 2.0, local_fam) == pytest.approx(math.log(2) - 99, abs=1e-12)

    def test_at_one(self, local_fam):
        assert loglr_local(1.0, 3.0, local_fam) == pytest.approx(math.log(3), abs=1e-15)

    def test_unit_param_is_zero(self, local_fam, global_fam):
        ys = np.linspace(0, 1, 11)
        assert np.all(loglr_local(ys, 1.0, local_fam) == 0)
        assert np.all(loglr_global(ys, 1.0, global_fam) == 0)

    @pytest.mark.parametrize("y", [0.3, 0.7, 0.9, 0.99])
    @pytest.mark.parametrize("param", [0.4, 2.0, 17.0])
    def test_is_density_difference(self, local_fam, global_fam, y, param):
        assert loglr_local(y, param, local_fam) == pytest.approx(
            logpdf_local(y, param, local_fam) - logpdf_local(y, 1.0, local_fam), abs=1e-10)
        assert loglr_global(y, param, global_fam) == pytest.approx(
            logpdf_global(y, param, global_fam) - logpdf_global(y, 1.0, global_fam), abs=1e-10)

    def test_domain(self, local_fam):
        with pytest.raises(ValueError):
            loglr_local(0.5, 0.0, local_fam)
        with pytest.raises(ValueError):
            logpdf_local(0.0, 1.0, local_fam)


class TestDensity:
    @pytest.mark.parametrize("y", [0.5, 0.8, 0.9])
    @pytest.mark.parametrize("p,n", [(100, 10), (20, 7)])
    def test_matches_reference(self, y, p, n):
        fl, fg = LocalFamily(p, n), GlobalFamily(p, n)
        assert math.exp(logpdf_local(y, 2.5, fl)) == pytest.approx(ref_density(y, 2.5, p, n), rel=1e-10)
        assert math.exp(logpdf_global(y, 2.5, fg)) == pytest.approx(
            ref_density(y, 2.5, p, n, True), rel=1e-10)

    def test_global_uses_t(self, global_fam):
        # the global exponent is theta (D/2) T(u) with D = 2p(p-1)/B
        d = 2 * 100 * 99 / math.exp(ln_beta(4, 0.5))
        for u in (0.6, 0.9):
            assert global_fam.stat(u) == pytest.approx(d / 2 * t_integral(u, 10), rel=1e-12)

    @pytest.mark.parametrize("param", [1.0, 3.0, 17.0])
    def test_mass_plus_atom_is_one(self, local_fam, global_fam, param):
        for fam, logpdf in ((local_fam, logpdf_local), (global_fam, logpdf_global)):
            mass, _ = integrate.quad(lambda y: math.exp(logpdf(y, param, fam)), 0, 1,
                                     points=[0.8, 0.9, 0.95], limit=400, epsabs=1e-13)
            atom = math.exp(-param * fam.scale)
            assert mass + atom == pytest.approx(1.0, abs=1e-9)

    def test_mode_in_band(self, local_fam):
        ys = np.linspace(0.01, 0.999, 5000)
        assert 0.55 < ys[np.argmax(logpdf_local(ys, 1.0, local_fam))] < 0.95

    @pytest.mark.parametrize("rho", [0.5, 0.7, 0.8, 0.9])
    def test_cdf_is_integrated_density(self, local_fam, global_fam, rho):
        for fam, logpdf, cdf in ((local_fam, logpdf_local, cdf_local),
                                 (global_fam, logpdf_global, cdf_global)):
            mass, _ = integrate.quad(lambda y: math.exp(logpdf(y, 2.0, fam)), 0, rho, limit=400,
                                     epsabs=1e-13)
            assert math.exp(-2.0 * fam.scale) + mass == pytest.approx(cdf(rho, 2.0, fam), abs=1e-8)


class TestMLE:
    def test_examples(self, local_fam):
        assert mle_local([0.02, 0.02], LocalFamily(51, 10)) == pytest.approx(1.0)
        assert mle_local([1 / 99, 1 / 99, 1 / 99], local_fam) == pytest.approx(1.0)
        assert mle_local([0.0, 0.0], local_fam) == math.inf

    def test_global_divides_by_half_beta(self, global_fam):
        half_b = 0.5 * math.exp(ln_beta(4, 0.5))
        target = 2 / (100 * 99)
        assert mle_global([target * half_b], global_fam) == pytest.approx(1.0, rel=1e-12)

    def test_empty(self, local_fam):
        with pytest.raises(ValueError):
            mle_local([], local_fam)

    @pytest.mark.parametrize("J", [1.0, 3.0, 8.0])
    def test_recovers_parameter(self, local_fam, J):
        ys = sample_local(J, local_fam, 4000, np.random.default_rng(int(J * 10)))
        est = mle_local(p0(ys, 10), local_fam)
        assert abs(est - J) < 4 * J / math.sqrt(4000)

    @settings(max_examples=40, deadline=None)
    @given(z=st.lists(st.floats(1e-3, 5.0), min_size=1, max_size=30),
           factor=st.floats(0.5, 2.0).filter(lambda f: abs(f - 1) > 1e-3))
    def test_maximises_likelihood(self, z, factor):
        fam = LocalFamily(11, 10)
        pv = np.asarray(z) / fam.scale
        j_hat = mle_local(pv, fam)
        ll = lambda j: len(z) * math.log(j) - j * math.fsum(z)
        assert ll(j_hat) >= ll(j_hat * factor) - 1e-9


class TestSufficientStatistic:
    @pytest.mark.parametrize("J", [1.0, 2.56, 5.88, 17.0])
    def test_exponential_law(self, local_fam, J):
        ys = sample_local(J, local_fam, 20000, np.random.default_rng(11))
        z = local_fam.stat(ys)
        assert sps.kstest(z, "expon", args=(0, 1 / J)).pvalue > 0.01
        assert abs(z.mean() - 1 / J) < 4 / (J * math.sqrt(z.size))

    def test_global_law(self, global_fam):
        us = sample_global(2.0, global_fam, 20000, np.random.default_rng(12))
        assert sps.kstest(global_fam.stat(us), "expon", args=(0, 0.5)).pvalue > 0.01

    def test_inverse_round_trip(self):
        rho = np.linspace(0.0, 0.999, 200)
        back = p0_inverse(p0(rho, 10), 10)
        assert np.max(np.abs(back - rho)) < 1e-10


class TestKL:
    def test_closed_form_values(self):
        assert kl_divergence(1.0) == 0.0
        assert kl_local(2.0) == pytest.approx(math.log(2) - 0.5)
        assert kl_global is kl_local

    @pytest.mark.parametrize("x", [2.0, 5.88, 17.0, 0.3])
    def test_quadrature(self, local_fam, x):
        def integrand(y):
            fx = ref_density(y, x, 100, 10)
            if fx == 0.0:
                return 0.0
            return fx * math.log(fx / ref_density(y, 1.0, 100, 10))

        val, _ = integrate.quad(integrand, 0, 1, points=[0.7, 0.85, 0.95, 0.99], limit=500,
                                epsabs=1e-13, epsrel=1e-13)
        # the atom at 0 carries mass exp(-x (p-1)) with ratio x exp(-(x-1)(p-1))
        w0 = math.exp(-x * 99)
        val += w0 * (math.log(x) - (x - 1) * 99)
        assert abs(val - kl_divergence(x)) <= 1e-8

    @settings(max_examples=100)
    @given(st.floats(1e-3, 1e3))
    def test_non_negative(self, x):
        assert kl_divergence(x) >= 0
