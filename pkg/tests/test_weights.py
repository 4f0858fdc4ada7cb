"""Weight families: closed-form branches, certificates, quadratic weights."""

import numpy as np
import pytest

from kdvlab.errors import PropertyViolated
from kdvlab.weights import (
    TimeProfile,
    build_quadratic_weight,
    build_truncated_exp,
    certificate_grid,
    certify_weight,
)


@pytest.fixture(scope="module")
def w_beta1_n10():
    return build_truncated_exp(1.0, 10)


def test_exact_exponential_branch(w_beta1_n10):
    x = np.linspace(-8.0, 10.0, 50)
    assert np.allclose(w_beta1_n10.value(x), np.exp(x), rtol=1e-14)


def test_affine_branch_slope(w_beta1_n10):
    v = w_beta1_n10.value(np.array([12.0, 15.0]))
    slope = (v[1] - v[0]) / 3.0
    assert slope == pytest.approx(np.exp(10.0), rel=1e-12)


def test_derivative_on_exponential_branch(w_beta1_n10):
    # w' = beta*w there, so the j = 1 ratio is exactly beta
    x = np.linspace(-5.0, 9.5, 20)
    assert np.allclose(w_beta1_n10.deriv(x, 1), np.exp(x), rtol=1e-14)
    assert np.allclose(w_beta1_n10.deriv(x, 3), np.exp(x), rtol=1e-14)


def test_monotone_convergence_in_N():
    x = np.array([15.0])
    vals = [build_truncated_exp(1.0, N).value(x)[0] for N in (5, 8, 12, 16)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert vals[-1] <= np.exp(15.0)
    assert build_truncated_exp(1.0, 16).value(x)[0] == pytest.approx(
        np.exp(15.0), rel=1e-12
    )


def test_envelope_everywhere():
    w = build_truncated_exp(0.5, 7)
    x = certificate_grid(7)
    assert np.all(w.value(x) <= np.exp(0.5 * x) * (1 + 1e-12))
    assert np.all(w.value(x) >= 0.0)
    assert np.all(w.deriv(x, 1) >= 0.0)


def test_certificate_constants_reasonable(w_beta1_n10):
    cert = certify_weight(w_beta1_n10)
    assert cert.first_ratio == pytest.approx(1.0, rel=1e-10)
    assert cert.growth == pytest.approx(1.0, rel=1e-10)
    assert all(v > 0 for v in cert.deriv_ratio.values())


@pytest.mark.parametrize("beta", [0.25, 1.0, 2.0])
def test_certificate_drift_under_N(beta):
    c10 = certify_weight(build_truncated_exp(beta, 10))
    c40 = certify_weight(build_truncated_exp(beta, 40))
    pairs = [(c10.first_ratio, c40.first_ratio), (c10.growth, c40.growth)]
    pairs += [(c10.deriv_ratio[j], c40.deriv_ratio[j]) for j in c10.deriv_ratio]
    for a, b in pairs:
        assert abs(b - a) <= 0.10 * abs(a)


def test_bounded_variant_is_bounded():
    w = build_truncated_exp(0.5, 6, variant="bounded")
    x = np.array([10.0, 40.0, 200.0, 2000.0])
    vals = w.value(x)
    assert np.all(np.isfinite(vals))
    # the tail integral converges: far values agree to the cap
    assert vals[-1] - vals[-2] <= 1e-8 * vals[-1]
    assert np.all(np.diff(vals) >= 0)


def test_validation():
    with pytest.raises(ValueError):
        build_truncated_exp(-1.0, 5)
    with pytest.raises(ValueError):
        build_truncated_exp(1.0, 0)
    with pytest.raises(ValueError):
        build_truncated_exp(1.0, 5, variant="nope")


def test_certifier_catches_violations(w_beta1_n10):
    class Broken:
        beta = 1.0
        N = 10

        def value(self, x):
            return -np.ones_like(x)

        def deriv(self, x, j=1):
            return np.ones_like(x)

    with pytest.raises(PropertyViolated):
        certify_weight(Broken())


# -- quadratic space-time weights --------------------------------------------


def test_quadratic_weight_at_t0():
    qw = build_quadratic_weight(9.0, 3.0)
    x = np.linspace(-12, 12, 25)
    assert np.allclose(qw.psi(x, 0.0), 9.0 * x ** 2 / 9.0, atol=1e-12)


def test_quadratic_weight_linear_structure():
    qw = build_quadratic_weight(4.0, 2.0)
    x = np.linspace(-10, 10, 11)
    assert np.abs(qw.psi_xxx(x, 0.4)).max() == 0.0
    assert np.allclose(qw.psi_xx(x, 0.4), 2 * 4.0 / 4.0)
    assert np.allclose(qw.B_x(x, 0.4), -2 * 4.0 / 4.0)


def test_quadratic_weight_band_bounds():
    # where 1 <= x/R + p(t) <= 5, alpha <= psi <= 25 alpha
    alpha, R = 7.0, 3.0
    qw = build_quadratic_weight(alpha, R)
    rng = np.random.default_rng(1)
    t = rng.uniform(0, 1, 400)
    x = rng.uniform(-6 * R, 6 * R, 400)
    ray = qw.ray(x, t)
    band = (ray >= 1.0) & (ray <= 5.0)
    psi = qw.psi(x, t)[band]
    assert np.all(psi >= alpha - 1e-12)
    assert np.all(psi <= 25 * alpha + 1e-12)


def test_quadratic_weight_finite_differences():
    qw = build_quadratic_weight(9.0, 3.0)
    rng = np.random.default_rng(2)
    h = 1e-6
    for _ in range(30):
        x, t = rng.uniform(-5, 5), rng.uniform(0.05, 0.95)
        fd_x = (qw.psi(x + h, t) - qw.psi(x - h, t)) / (2 * h)
        fd_t = (qw.psi(x, t + h) - qw.psi(x, t - h)) / (2 * h)
        fd_tx = (qw.psi_t(x + h, t) - qw.psi_t(x - h, t)) / (2 * h)
        assert abs(fd_x - qw.psi_x(x, t)) <= 1e-8 * max(1.0, abs(fd_x))
        assert abs(fd_t - qw.psi_t(x, t)) <= 1e-6 * max(1.0, abs(fd_t))
        assert abs(fd_tx - qw.psi_tx(x, t)) <= 1e-6 * max(1.0, abs(fd_tx))


def test_time_profile_shape():
    prof = TimeProfile(r=1.0 / 3.0, height=4.0)
    assert prof(0.0) == 0.0
    assert prof(1.0) == 0.0
    assert prof(0.5) == pytest.approx(4.0)
    t = np.linspace(0, 1, 101)
    assert np.all(prof(t) >= 0.0)
    assert np.all(prof(t) <= 4.0 + 1e-12)
    # derivative vanishes on the plateau and at the ends
    assert abs(prof.deriv(0.5)) < 1e-14
    assert abs(prof.deriv(0.0)) < 1e-14


def test_profile_must_vanish_at_ends():
    # a valid non-default profile passes
    build_quadratic_weight(1.0, 2.0, profile=TimeProfile(r=0.2, height=1.0))

    # one that does not vanish at the ends is rejected
    class Lifted:
        def __call__(self, t):
            return np.asarray(t, float) * 0 + 1.0

        def deriv(self, t, order=1):
            return np.zeros_like(np.asarray(t, float))

    from kdvlab.weights import QuadraticWeight

    with pytest.raises(ValueError):
        QuadraticWeight(alpha=1.0, R=2.0, profile=Lifted(), profile_deriv=Lifted().deriv)
