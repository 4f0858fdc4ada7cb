"""Weighted-inverse multipliers: dual routes, kernels, grid operator, scans."""

import numpy as np
import pytest

from kdvlab.errors import DegenerateTau, GridTooCoarse, PoleHit
from kdvlab.multipliers import (
    MultiplierParams,
    apply_weighted_inverse,
    bound_scan,
    default_scan_x_grid,
    dual_route_samples,
    forward_symbol,
    grid_frequencies,
    inverse_kernel,
    kernel_quadrature,
    multiplier_direct,
    multiplier_partial_fractions,
    norm_l1x_l2t,
    norm_linfx_l2t,
    partial_fraction_residues,
    roots_of_unity,
)


def test_params_validation():
    with pytest.raises(ValueError):
        MultiplierParams(4, 0, 3.0)
    with pytest.raises(ValueError):
        MultiplierParams(5, 5, 3.0)
    with pytest.raises(ValueError):
        MultiplierParams(5, 0, 2.0)


def test_base_multiplier_at_origin():
    # (i lam)^5 = i lam^5, so -i/(0 - i lam^5) = lam^-5, purely real
    p = MultiplierParams(5, 0, 2.5)
    val = multiplier_direct(0.0, 1e-300, p)
    assert val == pytest.approx(2.5 ** -5)
    assert abs(val.imag) < 1e-300


def test_large_lambda_decay():
    vals = [abs(multiplier_direct(1.0, 3.0, MultiplierParams(5, 0, lam)))
            for lam in (4.0, 8.0, 16.0)]
    # magnitude shrinks like lam^-n
    assert vals[0] / vals[1] == pytest.approx(2 ** 5, rel=0.2)
    assert vals[1] / vals[2] == pytest.approx(2 ** 5, rel=0.1)


def test_conjugate_symmetry():
    p = MultiplierParams(7, 3, 4.2)
    for xi, tau in [(0.7, 2.3), (-4.0, -11.0), (9.1, 0.4)]:
        a = multiplier_direct(-xi, -tau, p)
        b = np.conj(multiplier_direct(xi, tau, p))
        assert a == pytest.approx(b, rel=1e-14)


def test_j_zero_reduction():
    p0 = MultiplierParams(5, 0, 3.0)
    p2 = MultiplierParams(5, 2, 3.0)
    xi, tau = 1.3, -4.0
    base = multiplier_direct(xi, tau, p0)
    assert multiplier_direct(xi, tau, p2) == pytest.approx(
        (1j * xi - 3.0) ** 2 * base, rel=1e-14
    )


def test_pole_hit():
    # xi + i lam on the ray arg = pi/5 makes (xi + i lam)^5 real
    lam = 3.0
    xi = lam / np.tan(np.pi / 5)
    tau = ((xi ** 2 + lam ** 2) ** 2.5) * np.cos(np.pi)  # = -|z|^5
    with pytest.raises(PoleHit):
        multiplier_direct(xi, tau, MultiplierParams(5, 0, lam))


def test_dual_route_agreement_bulk():
    for n in (5, 7):
        pts = dual_route_samples(n, 5000, seed=n)
        for xi, tau, lam, j in pts:
            p = MultiplierParams(n, j, lam)
            a = multiplier_direct(xi, tau, p)
            b = multiplier_partial_fractions(xi, tau, p)
            assert abs(a - b) <= 1e-12 * abs(a)


def test_residue_sums():
    for n in (5, 7):
        r = roots_of_unity(n)
        for j in range(n):
            c = partial_fraction_residues(MultiplierParams(n, j, 3.0))
            total = c.sum()
            target = -1.0 if j == n - 1 else 0.0
            assert abs(total - target) <= 1e-13
            assert abs((c * r ** (n - 1 - j)).sum() + 1.0) <= 1e-13


def test_correction_bound_near_top_order():
    # |m_(n-1) - i^n/(xi+i lam)| <= 2/|xi+i lam|^(n+1) for |tau| <= 1
    xi = np.linspace(-40, 40, 801)
    for lam in (2.5, 5.0, 20.0):
        p = MultiplierParams(5, 4, lam)
        z = xi + 1j * lam
        for tau in (-1.0, -0.3, 1e-9, 0.6, 1.0):
            lhs = np.abs(multiplier_direct(xi, tau, p) - (1j ** 5) / z)
            assert np.all(lhs <= 2 / np.abs(z) ** 6 + 1e-18)


def test_kernel_bounded_and_degenerate():
    x = default_scan_x_grid()
    p = MultiplierParams(5, 2, 2.5)
    ev = inverse_kernel(7.7, p, x)
    assert np.all(np.isfinite(ev.values))
    assert ev.sup_abs() <= 1.5
    # engineered degeneracy: lam = tau^(1/5) sin(2 pi / 5)
    b1 = np.sin(2 * np.pi / 5)
    tau_bad = (2.5 / b1) ** 5
    with pytest.raises(DegenerateTau):
        inverse_kernel(tau_bad, p, x)
    with pytest.raises(DegenerateTau):
        inverse_kernel(0.0, p, x)


def test_kernel_against_quadrature_oracle():
    rng = np.random.default_rng(12)
    x_grid = default_scan_x_grid()
    for _ in range(5):
        n = 5
        j = int(rng.integers(0, n - 1))
        lam = float(rng.uniform(2.4, 8.0))
        tau = float(rng.uniform(1.5, 20.0) * rng.choice([-1.0, 1.0]))
        p = MultiplierParams(n, j, lam)
        scale = inverse_kernel(tau, p, x_grid).sup_abs()
        for x in (-2.0, -0.5, 0.4, 1.7):
            closed = inverse_kernel(tau, p, np.array([x])).values[0]
            oracle = kernel_quadrature(tau, p, x)
            assert abs(closed - oracle) <= 1e-6 * (scale + abs(closed))


def test_bound_scan_slack():
    taus = [-1000.0, -100.0, -20.0, -5.0, -1.5, 1.5, 5.0, 20.0, 100.0, 1000.0]
    lams = [2.5, 5.0, 10.0, 25.0, 50.0, 100.0]
    report = bound_scan(5, range(5), lams, taus, default_scan_x_grid())
    assert report.slack() <= 2.0
    assert all(np.isfinite(r.sup_abs_kernel) for r in report.rows)


def test_bound_scan_empty():
    report = bound_scan(5, range(5), [2.5], [], default_scan_x_grid())
    assert report.rows == []
    assert np.isnan(report.slack())


def _grid_fields(mx, mt, lx, lt):
    x = -lx / 2 + lx * np.arange(mx) / mx
    t = lt * np.arange(mt) / mt
    return np.meshgrid(x, t, indexing="ij")


def test_weighted_inverse_round_trip_small():
    p = MultiplierParams(5, 0, 2.5)
    mx, mt, lx, lt = 2 ** 10, 2 ** 6, 60.0, 1.0
    X, T = _grid_fields(mx, mt, lx, lt)
    f = np.exp(-(X ** 2) / 4) * np.sin(np.pi * T) ** 2 * np.exp(-((T - 0.5) ** 2) / 0.05)
    xi, tau = grid_frequencies(mx, mt, lx, lt)
    h = np.fft.ifft2(forward_symbol(xi[:, None], tau[None, :], p) * np.fft.fft2(f))
    g = apply_weighted_inverse(h, p, lx, lt)
    assert np.linalg.norm(g - f) <= 1e-6 * np.linalg.norm(f)


def test_weighted_inverse_zero():
    p = MultiplierParams(5, 0, 2.5)
    out = apply_weighted_inverse(np.zeros((64, 16), complex), p, 10.0)
    assert np.abs(out).max() == 0.0


def test_weighted_inverse_variation_guard():
    # a length-1 domain with 8 points jumps whole decades of |m_0| per sample
    p = MultiplierParams(5, 0, 2.5)
    with pytest.raises(GridTooCoarse):
        apply_weighted_inverse(np.ones((8, 8), complex), p, 1.0,
                               variation_limit=50.0)


def test_mixed_norm_ratio_stability():
    mx, mt, lx, lt = 2 ** 9, 2 ** 6, 40.0, 1.0
    X, T = _grid_fields(mx, mt, lx, lt)
    dx, dt = lx / mx, lt / mt
    family = [
        np.exp(-X ** 2) * np.sin(2 * np.pi * T),
        np.exp(-((X - 3) ** 2) / 2) * np.sin(4 * np.pi * T) ** 2,
        np.exp(-X ** 2 / 9) * np.cos(2 * np.pi * T) * np.sin(np.pi * T),
    ]
    lams = (2.5, 5.0, 10.0, 100.0)
    for h in family:
        ratios = []
        for lam in lams:
            p = MultiplierParams(5, 0, lam)
            g = apply_weighted_inverse(h.astype(complex), p, lx, lt)
            ratios.append(norm_linfx_l2t(g, dx, dt) / norm_l1x_l2t(h, dx, dt))
        assert all(np.isfinite(r) for r in ratios)
        # one-sided bound: the smallest lambda dominates, no growth beyond it
        assert max(ratios) <= ratios[0] * 1.05
