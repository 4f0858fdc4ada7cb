"""Periodic pseudospectral solver for the hierarchy flows.

State is a real field on a uniform periodic grid.  Time stepping is
integrating-factor RK4: the linear symbol of d/dt u + s * d^n/dx^n u = ...
is purely imaginary for odd n, the propagator exp(i phase) is applied
exactly, and classical RK4 advances the nonlinear part.  Every product in
the nonlinearity P = sum a_{d,m} u^(m_1) ... u^(m_d) is formed pairwise in
physical space with a hard spectral cutoff applied after each multiply
(2/3-rule by default, or an absolute mode cutoff so runs at different grid
sizes share one active band).  Derivatives inside P are spectral.

The torus stands in for the line: initial data must decay far below the
seam, and experiment drivers monitor seam contamination separately.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import BlowUp, ConfigError, Unresolved
from .hierarchy import EquationSpec

RK4_IMAG_LIMIT = 2.82  # stability interval of classical RK4 on the imaginary axis
MAX_SIMULATED_ORDER = 7  # dt for n = 9 would be impractically small


@dataclass
class SpectralField:
    """Real periodic grid sample of u(., t)."""

    values: np.ndarray
    x_lo: float
    length: float
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        m = self.values.shape[0]
        if m & (m - 1) or m < 4:
            raise ValueError(f"grid size must be a power of two >= 4, got {m}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    @property
    def M(self) -> int:
        return self.values.shape[0]

    @property
    def dx(self) -> float:
        return self.length / self.M

    @property
    def x(self) -> np.ndarray:
        return self.x_lo + self.length * np.arange(self.M) / self.M

    def copy_with(self, values: np.ndarray, time: float) -> "SpectralField":
        return SpectralField(values=values.copy(), x_lo=self.x_lo,
                             length=self.length, time=time)


@dataclass
class SolverConfig:
    eq: EquationSpec
    dt: float
    t_end: float
    dealias: float = 2.0 / 3.0
    cutoff_mode: Optional[int] = None  # absolute active-band cutoff (mode index)
    filter_tail: bool = False          # optional smooth damping of the band edge
    snapshot_times: Optional[Sequence[float]] = None
    blowup_limit: float = 1e6
    tail_threshold: float = 1e-5
    check_every: int = 50

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= 0:
            raise ConfigError("dt and t_end must be positive")
        if not 0 < self.dealias <= 1:
            raise ConfigError("dealias fraction must lie in (0, 1]")
        if self.eq.n > MAX_SIMULATED_ORDER:
            raise ConfigError(
                f"simulation supports order <= {MAX_SIMULATED_ORDER}, got n = {self.eq.n}"
            )


def _active_cutoff(cfg: SolverConfig, M: int) -> int:
    half = M // 2
    cut = int(np.floor(cfg.dealias * half))
    if cfg.cutoff_mode is not None:
        cut = min(cut, int(cfg.cutoff_mode))
    return max(2, min(cut, half - 1))  # always drop Nyquist


def _stability_estimate(cfg: SolverConfig, u0: SpectralField) -> float:
    """dt * max over monomials of |a| amp^(d-1) kappa_cut^(max m)."""
    amp = float(np.max(np.abs(u0.values))) or 1.0
    kcut = 2 * np.pi * _active_cutoff(cfg, u0.M) / u0.length
    worst = 0.0
    for (d, m), a in cfg.eq.nonlinearity.items():
        worst = max(worst, abs(float(a)) * amp ** (d - 1) * kcut ** (m[-1] if m else 0))
    return cfg.dt * worst


def _tail_fraction(u_hat: np.ndarray, cut: int) -> float:
    band = np.arange(u_hat.shape[0]) <= cut
    tail_lo = int(np.floor(0.75 * cut))
    total = float(np.sum(np.abs(u_hat[band]) ** 2))
    tail = float(np.sum(np.abs(u_hat[tail_lo:cut + 1]) ** 2))
    return tail / total if total > 0 else 0.0


def evolve(u0: SpectralField, cfg: SolverConfig) -> List[SpectralField]:
    """Integrate the flow and return snapshots (always including t_end)."""
    est = _stability_estimate(cfg, u0)
    if est > RK4_IMAG_LIMIT:
        raise ConfigError(
            f"dt outside the explicit stability envelope: dt*max-symbol = {est:.3g}"
        )
    M = u0.M
    n = cfg.eq.n
    k = cfg.eq.k
    kappa = 2 * np.pi * np.fft.rfftfreq(M, d=u0.dx)
    cut = _active_cutoff(cfg, M)
    mask = (np.arange(kappa.shape[0]) <= cut).astype(float)
    if cfg.filter_tail:
        # smooth roll-off inside the top quarter of the active band
        idx = np.arange(kappa.shape[0])
        edge = np.exp(-36.0 * np.clip((idx / cut - 0.75) / 0.25, 0.0, None) ** 8)
        mask = mask * edge

    u_hat = np.fft.rfft(u0.values)
    if _tail_fraction(u_hat, cut) > cfg.tail_threshold:
        raise Unresolved("initial data has spectral mass at the active-band edge")
    u_hat *= mask

    # d/dt u = -linear_sign (i kappa)^n u + nonlinear; (i kappa)^n = i(-1)^k kappa^n
    phase_rate = -cfg.eq.linear_sign * (-1) ** k * kappa ** n
    e_full = np.exp(1j * phase_rate * cfg.dt)
    e_half = np.exp(1j * phase_rate * (cfg.dt / 2.0))

    orders = sorted({m for (_, ms) in cfg.eq.nonlinearity for m in ms})
    table = [(float(a), m) for (d, m), a in sorted(cfg.eq.nonlinearity.items())]

    def nonlinear(v_hat: np.ndarray) -> np.ndarray:
        if not table:
            return np.zeros_like(v_hat)
        phys = {m: np.fft.irfft((1j * kappa) ** m * v_hat) for m in orders}
        out = np.zeros_like(v_hat)
        for a, m in table:
            acc = phys[m[0]]
            acc_hat = None
            for mi in m[1:]:
                acc_hat = np.fft.rfft(acc * phys[mi]) * mask
                acc = np.fft.irfft(acc_hat)
            if acc_hat is None:  # degree-1 monomial cannot occur, but stay safe
                acc_hat = np.fft.rfft(acc) * mask
            out += a * acc_hat
        return -out

    steps = int(round(cfg.t_end / cfg.dt))
    if abs(steps * cfg.dt - cfg.t_end) > 1e-9 * cfg.t_end:
        raise ConfigError("t_end must be an integer number of steps")
    want = sorted(set(cfg.snapshot_times or [cfg.t_end]))
    snap_steps = {}
    for t_s in want:
        s = int(round(t_s / cfg.dt))
        if not 0 <= s <= steps:
            raise ConfigError(f"snapshot time {t_s} outside [0, t_end]")
        snap_steps[s] = t_s

    snapshots: List[SpectralField] = []
    if 0 in snap_steps:
        snapshots.append(u0.copy_with(np.fft.irfft(u_hat), 0.0))

    for step in range(1, steps + 1):
        k1 = nonlinear(u_hat)
        k2 = nonlinear(e_half * (u_hat + 0.5 * cfg.dt * k1))
        k3 = nonlinear(e_half * u_hat + 0.5 * cfg.dt * k2)
        k4 = nonlinear(e_full * u_hat + cfg.dt * e_half * k3)
        u_hat = (e_full * u_hat
                 + cfg.dt / 6.0 * (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4))
        if step % cfg.check_every == 0 or step in snap_steps:
            vals = np.fft.irfft(u_hat)
            if not np.all(np.isfinite(vals)) or np.max(np.abs(vals)) > cfg.blowup_limit:
                raise BlowUp(f"|u| exceeded {cfg.blowup_limit:g} at t = {step * cfg.dt:g}")
            if _tail_fraction(u_hat, cut) > cfg.tail_threshold:
                raise Unresolved(f"spectral tail above threshold at t = {step * cfg.dt:g}")
            if step in snap_steps:
                snapshots.append(u0.copy_with(vals, snap_steps[step]))
    return snapshots


def spectral_derivative(u: SpectralField, m: int) -> np.ndarray:
    kappa = 2 * np.pi * np.fft.rfftfreq(u.M, d=u.dx)
    return np.fft.irfft((1j * kappa) ** m * np.fft.rfft(u.values))


def weighted_norm(u: SpectralField, weight: Callable | np.ndarray,
                  power: int = 2) -> float:
    """Riemann sum of weight * u^power over the grid."""
    w = weight(u.x) if callable(weight) else np.asarray(weight, float)
    return float(np.sum(w * u.values ** power) * u.dx)


def interpolation_diagnostic(u: SpectralField, alpha: float, j: int, n: int) -> float:
    """Weighted L2 norm of the j-th derivative with weight (1+x_+)^(alpha(1-j/(n+1)))."""
    if j > n + 1:
        raise ValueError("diagnostic defined for j <= n + 1")
    du = spectral_derivative(u, j) if j else u.values
    xplus = np.maximum(u.x, 0.0)
    w = (1.0 + xplus) ** (alpha * (1.0 - j / (n + 1.0)))
    return float(np.sqrt(np.sum((w * du) ** 2) * u.dx))


def linear_equation(k: int) -> EquationSpec:
    """The flow with P = 0 in the stored sign convention."""
    return EquationSpec(k=k, parity_applied=k % 2 == 0,
                        linear_sign=(-1) ** (k + 1), nonlinearity={})


def soliton(x: np.ndarray, speed: float, t: float = 0.0, center: float = 0.0) -> np.ndarray:
    """Travelling-wave solution 3 v sech^2(sqrt(v)(x - c - v t)/2) of the k=1 flow."""
    arg = np.sqrt(speed) * (x - center - speed * t) / 2.0
    return 3.0 * speed / np.cosh(arg) ** 2


def peak_position(u: SpectralField) -> float:
    """Sub-grid peak location by quadratic interpolation around the max sample."""
    i = int(np.argmax(u.values))
    ym, y0, yp = (u.values[(i - 1) % u.M], u.values[i], u.values[(i + 1) % u.M])
    denom = ym - 2 * y0 + yp
    shift = 0.5 * (ym - yp) / denom if denom else 0.0
    return u.x_lo + ((i + shift) % u.M) * u.dx
