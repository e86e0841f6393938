
import numpy as np
import pytest
from scipy.integrate import quad

from oracles import count_slope_sign_changes
from qsd_sr import (
    DomainError,
    ModelParams,
    boundary_flux_identity,
    build_solution,
    cdf,
    mean,
    mode,
    moments,
    pdf,
    speed_density,
    variance,
)

SWEEP = [(mu, A) for mu in (0.5, 1.0, 1.5) for A in (5.0, 20.0, 100.0)]


def quad_pdf(sol, lo, hi):
    val, _ = quad(lambda x: pdf(x, sol), lo, hi, epsabs=1e-11, epsrel=1e-11, limit=400)
    return val


class TestBuildSolution:
    def test_denominator_positive_sweep(self):
        for mu, A in SWEEP:
            sol = build_solution(ModelParams(mu=mu, A=A))
            assert sol.denom > 0.0, (mu, A)

    def test_denominator_limit_one(self):
        sol = build_solution(ModelParams(mu=1.0, A=10000.0))
        assert abs(sol.denom - 1.0) < 1e-2

    def test_cdf_at_threshold_is_one(self, sol_mu1_A20):
        assert cdf(20.0, sol_mu1_A20) == 1.0
        assert cdf(19.999999999, sol_mu1_A20) == pytest.approx(1.0, abs=1e-6)


class TestPdf:
    def test_boundary_values(self, sol_mu1_A20):
        assert pdf(0.0, sol_mu1_A20) == 0.0
        assert pdf(-3.0, sol_mu1_A20) == 0.0
        assert pdf(25.0, sol_mu1_A20) == 0.0
        assert abs(pdf(20.0, sol_mu1_A20)) < 1e-9  # eigen-equation residual

    def test_vanishes_continuously_at_zero(self, sol_mu1_A20):
        assert pdf(1e-4, sol_mu1_A20) < 1e-300
        assert pdf(0.05, sol_mu1_A20) < 1e-12

    def test_normalization(self, sol_mu1_A20):
        assert abs(quad_pdf(sol_mu1_A20, 0.0, 20.0) - 1.0) < 1e-8

    def test_normalization_large_threshold_sweep(self):
        # at A = 1000 the mass sits far below the threshold, so hint the
        # quadrature at the stationary-law scale 1/mu^2
        for mu in (0.5, 1.0, 1.5):
            sol = build_solution(ModelParams(mu=mu, A=1000.0))
            xstar = 1.0 / mu**2
            total, _ = quad(
                lambda x: pdf(x, sol), 0.0, 1000.0,
                points=[xstar, 10.0 * xstar, 100.0 * xstar],
                epsabs=1e-11, epsrel=1e-11, limit=500,
            )
            assert abs(total - 1.0) < 1e-8, mu

    def test_positive_inside(self, sol_mu1_A20):
        for x in np.linspace(0.2, 19.8, 200):
            assert pdf(float(x), sol_mu1_A20) > 0.0, x


class TestCdf:
    def test_boundaries(self, sol_mu1_A20):
        assert cdf(0.0, sol_mu1_A20) == 0.0
        assert cdf(-1.0, sol_mu1_A20) == 0.0
        assert cdf(20.0, sol_mu1_A20) == 1.0
        assert cdf(50.0, sol_mu1_A20) == 1.0

    def test_matches_pdf_integral(self, sol_mu1_A20):
        assert abs(cdf(10.0, sol_mu1_A20) - quad_pdf(sol_mu1_A20, 0.0, 10.0)) < 1e-8

    def test_derivative_matches_pdf(self, sol_mu1_A20):
        h = 2e-4
        for x in (1.0, 3.0, 10.0, 18.0):
            fd = (cdf(x + h, sol_mu1_A20) - cdf(x - h, sol_mu1_A20)) / (2.0 * h)
            assert fd == pytest.approx(pdf(x, sol_mu1_A20), abs=1e-6 * 0.1, rel=1e-5)

    def test_monotone_on_grid(self, sol_mu1_A20):
        xs = np.linspace(0.0, 20.0, 10_000)
        vals = [cdf(float(x), sol_mu1_A20) for x in xs]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


class TestUnimodality:
    def test_single_slope_sign_change(self, sol_mu1_A20):
        xs = np.linspace(0.0, 20.0, 10_000)
        vals = [pdf(float(x), sol_mu1_A20) for x in xs]
        assert count_slope_sign_changes(vals) == 1

    def test_stationary_limit(self):
        # sup |pdf - stationary density| on [0.1, 10] decreases along A
        sups = []
        for A in (1e2, 1e3, 1e4):
            p = ModelParams(mu=1.0, A=A)
            sol = build_solution(p)
            xs = np.linspace(0.1, 10.0, 300)
            sups.append(
                max(abs(pdf(float(x), sol) - speed_density(float(x), p)) for x in xs)
            )
        assert sups[0] > sups[1] > sups[2]


class TestMoments:
    def test_recurrence_residual(self, sol_mu1_A20):
        lam = sol_mu1_A20.se.lam
        A = 20.0
        ms = moments(sol_mu1_A20, 20)
        for n in range(1, 21):
            resid = ms[n] * (0.5 * n * (n - 1) - lam) + n * ms[n - 1] + lam * A**n
            scale = abs(lam) * A**n
            assert abs(resid) < 1e-12 * scale, n

    def test_first_moment_closed_form(self, sol_mu1_A20):
        ms = moments(sol_mu1_A20, 1)
        assert ms[1] == pytest.approx(mean(sol_mu1_A20), rel=1e-13)
        assert mean(sol_mu1_A20) == pytest.approx(20.0 + 1.0 / sol_mu1_A20.se.lam, rel=1e-15)

    def test_variance_closed_form(self, sol_mu1_A20):
        ms = moments(sol_mu1_A20, 2)
        assert ms[2] - ms[1] ** 2 == pytest.approx(variance(sol_mu1_A20), rel=1e-12)
        assert variance(sol_mu1_A20) >= 0.0

    def test_against_quadrature(self, sol_mu1_A20):
        for n in range(1, 6):
            mq, _ = quad(
                lambda x: x**n * pdf(x, sol_mu1_A20), 0.0, 20.0,
                epsabs=1e-12, epsrel=1e-10, limit=400,
            )
            assert moments(sol_mu1_A20, n)[n] == pytest.approx(mq, rel=1e-6), n

    def test_range_and_bounds(self, sol_mu1_A20):
        ms = moments(sol_mu1_A20, 10)
        assert ms[0] == 1.0
        for n in range(1, 11):
            assert 0.0 < ms[n] < 20.0**n

    def test_order_cap(self, sol_mu1_A20):
        moments(sol_mu1_A20, 50)
        with pytest.raises(DomainError):
            moments(sol_mu1_A20, 51)
        with pytest.raises(DomainError):
            moments(sol_mu1_A20, -1)


class TestMode:
    def test_derivative_vanishes(self, sol_mu1_A20):
        xt = mode(sol_mu1_A20)
        h = 1e-4
        fd = (pdf(xt + h, sol_mu1_A20) - pdf(xt - h, sol_mu1_A20)) / (2.0 * h)
        scale = pdf(xt, sol_mu1_A20)
        assert abs(fd) < 1e-6 * scale

    def test_limit_large_threshold(self):
        sol = build_solution(ModelParams(mu=1.0, A=10000.0))
        assert abs(mode(sol) - 1.0) <= 0.05

    def test_matches_dense_argmax(self, sol_mu1_A20):
        xs = np.linspace(0.0, 20.0, 100_000)
        vals = np.array([pdf(float(x), sol_mu1_A20) for x in xs])
        x_star = xs[int(np.argmax(vals))]
        assert abs(mode(sol_mu1_A20) - x_star) <= xs[1] - xs[0]

    def test_inside_interval_sweep(self):
        for mu, A in SWEEP:
            sol = build_solution(ModelParams(mu=mu, A=A))
            xt = mode(sol)
            assert 0.0 < xt < A, (mu, A)


class TestBoundaryFlux:
    def test_matches_eigenvalue(self, sol_mu1_A20):
        flux = boundary_flux_identity(sol_mu1_A20)
        lam = sol_mu1_A20.se.lam
        assert abs(flux - lam) / abs(lam) < 1e-5
        assert flux < 0.0  # density decreasing at the absorbing threshold

    def test_flat_at_origin(self, sol_mu1_A20):
        # companion check: the density leaves the origin with zero slope
        h = 1e-3
        fd = (pdf(0.2 + h, sol_mu1_A20) - pdf(0.2 - h, sol_mu1_A20)) / (2.0 * h)
        fd0 = (pdf(0.02 + h, sol_mu1_A20) - pdf(0.02 - h, sol_mu1_A20)) / (2.0 * h)
        assert abs(fd0) < abs(fd)
        assert abs(fd0) < 1e-10
