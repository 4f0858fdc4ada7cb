"""Frequency multipliers of the exponentially weighted evolution inverse.

Conjugating the linear flow d/dt + (-1)^(k+1) d^n/dx^n by e^(lambda x) turns
d/dx into (d/dx - lambda); the inverse of the conjugated operator acts in
frequency space by

    m_0(xi, tau) = -i / (tau - (xi + i lambda)^n),

and its j-th weighted derivative by m_j = -i^(j+1) (xi + i lambda)^j / (tau -
(xi + i lambda)^n) = (i xi - lambda)^j m_0.  Two independent evaluation routes
are provided: the direct rational function, and a partial-fraction sum over
the n-th roots of unity r_l,

    m_j = -i^(j+1) t^(j+1-n) sum_l c_l / (xi + i lambda - t r_l),

with t the real odd n-th root of tau and c_l = -1 / (n r_l^(n-j-1)).  Taking
the inverse transform in xi (convention: g^(xi) = int g e^(-i xi x) dx) turns
each partial fraction into a one-sided exponential

    G(x) = i e^(i t a_l x) e^(mu_l x) [x >= 0, mu_l < 0] - (same)[x < 0, mu_l > 0]

with mu_l = lambda - t b_l and r_l = a_l + i b_l, giving a closed-form kernel
bounded uniformly in x.  Values of tau with some mu_l = 0 are degenerate and
excluded by a relative threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Sequence, Tuple

import numpy as np
from scipy.integrate import quad

from .errors import DegenerateTau, GridTooCoarse, PoleHit

DEGENERACY_RTOL = 1e-8


@dataclass(frozen=True)
class MultiplierParams:
    n: int
    j: int
    lam: float

    def __post_init__(self):
        if self.n < 3 or self.n % 2 == 0:
            raise ValueError(f"n must be odd and >= 3, got {self.n}")
        if not 0 <= self.j <= self.n - 1:
            raise ValueError(f"j must be in 0..{self.n - 1}, got {self.j}")
        if not self.lam > 2:
            raise ValueError(f"lambda must exceed 2, got {self.lam}")

    @property
    def k(self) -> int:
        return (self.n - 1) // 2


def roots_of_unity(n: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(n) / n)


def real_odd_root(tau, n: int):
    """Real n-th root of tau for odd n (sign-preserving)."""
    tau = np.asarray(tau, dtype=float)
    return np.sign(tau) * np.abs(tau) ** (1.0 / n)


def multiplier_direct(xi, tau, p: MultiplierParams):
    """m_j by the direct rational formula.  Raises PoleHit at a vanishing denominator."""
    xi = np.asarray(xi, dtype=float)
    tau = np.asarray(tau, dtype=float)
    z = xi + 1j * p.lam
    den = tau - z ** p.n
    scale = np.abs(tau) + np.abs(z) ** p.n
    if np.any(np.abs(den) <= 1e-14 * scale):
        raise PoleHit("multiplier denominator vanished; perturb the sample point")
    return (-(1j ** (p.j + 1))) * z ** p.j / den


def weighted_derivative_factor(xi, p: MultiplierParams):
    """(i xi - lambda)^j, the factor relating m_j to m_0."""
    return (1j * np.asarray(xi, dtype=float) - p.lam) ** p.j


def partial_fraction_residues(p: MultiplierParams) -> np.ndarray:
    """c_l = -1 / (n r_l^(n-j-1)) over the n-th roots of unity."""
    r = roots_of_unity(p.n)
    return -1.0 / (p.n * r ** (p.n - p.j - 1))


def multiplier_partial_fractions(xi, tau, p: MultiplierParams):
    """m_j by the roots-of-unity route.  Requires tau != 0."""
    xi = np.asarray(xi, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if np.any(tau == 0):
        raise ValueError("partial-fraction route needs tau != 0")
    t = real_odd_root(tau, p.n)
    r = roots_of_unity(p.n)
    c = partial_fraction_residues(p)
    den = (xi[..., None] + 1j * p.lam) - t[..., None] * r
    series = np.sum(c / den, axis=-1)
    return (-(1j ** (p.j + 1))) * t ** (p.j + 1 - p.n) * series


def dual_route_samples(n: int, count: int, seed: int):
    """Random non-degenerate (xi, tau, lambda, j) points for route comparison.

    tau is drawn so that |theta| = |xi + i lambda| / |tau|^(1/n) stays of
    order one (the regime the kernel decomposition operates in; for
    |theta| >> 1 the partial fractions cancel to machine depth and no finite
    precision can compare the routes).  Points closer than 1% relative to a
    pole of the symbol are rejected as degenerate.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        j = int(rng.integers(0, n))
        lam = float(rng.uniform(2.05, 100.0))
        xi = float(rng.uniform(-50.0, 50.0))
        s = float(rng.uniform(0.2, 5.0) * rng.choice([-1.0, 1.0]))
        z = xi + 1j * lam
        tau = s * abs(z) ** n
        if abs(tau - z ** n) < 1e-2 * (abs(tau) + abs(z) ** n):
            continue
        out.append((xi, tau, lam, j))
    return out


def _check_degenerate(t: float, p: MultiplierParams) -> np.ndarray:
    b = roots_of_unity(p.n).imag
    mu = p.lam - t * b
    scale = np.maximum(np.abs(p.lam), np.abs(t * b))
    if np.any(np.abs(mu) <= DEGENERACY_RTOL * scale):
        raise DegenerateTau(f"lambda - tau^(1/n) b_l ~ 0 at tau^(1/n) = {t}")
    return mu


@dataclass
class KernelEval:
    tau: float
    x: np.ndarray
    values: np.ndarray

    def sup_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


def inverse_kernel(tau: float, p: MultiplierParams, x) -> KernelEval:
    """Closed-form inverse transform of m_j(., tau) on an x grid."""
    if tau == 0:
        raise DegenerateTau("tau = 0 has no partial-fraction kernel")
    x = np.asarray(x, dtype=float)
    t = float(real_odd_root(tau, p.n))
    mu = _check_degenerate(t, p)
    r = roots_of_unity(p.n)
    c = partial_fraction_residues(p)
    side = np.where(
        mu[None, :] < 0,
        (x[:, None] >= 0).astype(float),
        -(x[:, None] < 0).astype(float),
    )
    # exponentiate only on the active one-sided branch; the other side would overflow
    exponent = np.where(side != 0.0, np.outer(x, mu), -np.inf)
    phase = np.exp(1j * t * np.outer(x, r.real))
    terms = 1j * phase * np.exp(exponent) * side
    values = (-(1j ** (p.j + 1))) * t ** (p.j + 1 - p.n) * (terms @ c)
    return KernelEval(tau=tau, x=x, values=values)


def kernel_quadrature(tau: float, p: MultiplierParams, x: float,
                      rtol: float = 1e-10) -> complex:
    """Oracle: direct oscillatory quadrature of (1/2pi) int m_j e^(i xi x) dxi.

    Only sensible for j <= n-2 (the integrand must be absolutely integrable).
    """
    if p.j > p.n - 2:
        raise ValueError("quadrature oracle requires j <= n-2")

    def m(xi):
        return multiplier_direct(xi, tau, p)

    if x == 0.0:
        re = quad(lambda s: m(s).real, -np.inf, np.inf, epsabs=0, epsrel=rtol, limit=400)[0]
        im = quad(lambda s: m(s).imag, -np.inf, np.inf, epsabs=0, epsrel=rtol, limit=400)[0]
        return (re + 1j * im) / (2 * np.pi)

    # fold to [0, inf): integrand becomes (m(s)+m(-s))cos(sx) + i(m(s)-m(-s))sin(sx)
    def even(s):
        return m(s) + m(-s)

    def odd(s):
        return m(s) - m(-s)

    # infinite Fourier-weighted quadrature is absolute-tolerance driven
    opts = dict(epsabs=1e-12, limit=800)
    parts = [
        quad(lambda s: even(s).real, 0, np.inf, weight="cos", wvar=x, **opts)[0],
        1j * quad(lambda s: even(s).imag, 0, np.inf, weight="cos", wvar=x, **opts)[0],
        1j * quad(lambda s: odd(s).real, 0, np.inf, weight="sin", wvar=x, **opts)[0],
        -quad(lambda s: odd(s).imag, 0, np.inf, weight="sin", wvar=x, **opts)[0],
    ]
    return sum(parts) / (2 * np.pi)


# -- grid operator -----------------------------------------------------------


def forward_symbol(xi, tau, p: MultiplierParams):
    """Symbol of the conjugated forward operator: i tau + (-1)^(k+1)(i xi - lambda)^n."""
    sign = (-1) ** (p.k + 1)
    return 1j * np.asarray(tau, float) + sign * (1j * np.asarray(xi, float) - p.lam) ** p.n


def inverse_symbol(xi, tau, p: MultiplierParams):
    z = np.asarray(xi, float) + 1j * p.lam
    return -1j / (np.asarray(tau, float) - z ** p.n)


def grid_frequencies(mx: int, mt: int, length_x: float, length_t: float):
    xi = 2 * np.pi * np.fft.fftfreq(mx, d=length_x / mx)
    tau = 2 * np.pi * np.fft.fftfreq(mt, d=length_t / mt)
    return xi, tau


def apply_weighted_inverse(h: np.ndarray, p: MultiplierParams, length_x: float,
                           length_t: float = 1.0,
                           variation_limit: float = 1e4) -> np.ndarray:
    """Invert the conjugated evolution operator on a periodic (x, t) grid.

    h is sampled as h[ix, it].  GridTooCoarse is raised when |m_0| jumps by
    more than variation_limit between adjacent xi samples, which signals an
    unresolved near-resonance.
    """
    mx, mt = h.shape
    xi, tau = grid_frequencies(mx, mt, length_x, length_t)
    sym = inverse_symbol(xi[:, None], tau[None, :], p)
    mag = np.abs(sym)
    ratio = np.maximum(mag[1:, :], 1e-300) / np.maximum(mag[:-1, :], 1e-300)
    worst = max(ratio.max(), (1.0 / ratio).max())
    if worst > variation_limit:
        raise GridTooCoarse(
            f"multiplier varies by {worst:.3g} between xi samples (> {variation_limit:g})"
        )
    return np.fft.ifft2(np.fft.fft2(h) * sym)


# -- discrete mixed norms ----------------------------------------------------


def norm_l1x_l2t(f: np.ndarray, dx: float, dt: float) -> float:
    return float(np.sum(np.sqrt(np.sum(np.abs(f) ** 2, axis=1) * dt)) * dx)


def norm_linfx_l2t(f: np.ndarray, dx: float, dt: float) -> float:
    return float(np.max(np.sqrt(np.sum(np.abs(f) ** 2, axis=1) * dt)))


# -- scans -------------------------------------------------------------------


@dataclass
class ScanRow:
    lam: float
    tau: float
    j: int
    sup_abs_kernel: float


@dataclass
class ScanReport:
    rows: List[ScanRow] = field(default_factory=list)
    skipped: List[Tuple[float, float]] = field(default_factory=list)

    def family_sup(self, lam: float) -> float:
        vals = [r.sup_abs_kernel for r in self.rows if r.lam == lam]
        return max(vals) if vals else float("nan")

    def slack(self) -> float:
        lams = sorted({r.lam for r in self.rows})
        sups = [self.family_sup(l) for l in lams]
        if not sups:
            return float("nan")
        return max(sups) / min(sups)


def bound_scan(n: int, js: Iterable[int], lams: Sequence[float],
               taus: Sequence[float], x) -> ScanReport:
    """Empirical kernel sup over an (x, tau) grid, per (lambda, tau, j).

    Degenerate (lambda, tau) pairs are skipped and recorded.  The family
    constant C_emp(lambda) aggregates the sup over tau, x and all requested j.
    """
    report = ScanReport()
    x = np.asarray(x, dtype=float)
    for lam in lams:
        for tau in taus:
            sups = {}
            try:
                for j in js:
                    p = MultiplierParams(n=n, j=j, lam=lam)
                    sups[j] = inverse_kernel(tau, p, x).sup_abs()
            except DegenerateTau:
                report.skipped.append((lam, tau))
                continue
            for j, s in sups.items():
                report.rows.append(ScanRow(lam=lam, tau=tau, j=j, sup_abs_kernel=s))
    return report


def default_scan_x_grid() -> np.ndarray:
    """Symmetric grid log-dense near 0 so one-sided kernels are sampled at their peak."""
    pos = np.geomspace(1e-5, 10.0, 200)
    return np.concatenate([-pos[::-1], [0.0], pos])
