"""Numerical and symbolic experiments on the hierarchy flows.

Decay preservation: evolve two nearby solutions of one flow, track the
exponentially weighted mass W(t) = int e^(beta x) w^2 dx of their difference,
fit the best exponential (Gronwall) rate, and watch the periodic seam so the
torus stays a faithful proxy for the line.

Lower-estimate probe: from a difference trajectory, compare the L2 mass of w
on a fixed space-time rectangle against the derivative energy

    A_R(w) = int_0^1 int_R^(R+1) sum_{j<n} (d^j w)^2 dx dt

on distant windows [R, R+1], reporting log A_R against R^gamma.  The probe is
report-only: the inequality it scans contains unknown constants.

Difference nonlinearity: for P = sum a_{d,m} prod u^(m_i), the telescoping

    prod x_i - prod y_i = sum_i y_1 ... y_{i-1} (x_i - y_i) x_{i+1} ... x_d

splits P(z1) - P(z2) into sum_j F_j d^j w with F_j polynomial in the jets of
u1 and u2; the split is verified exactly in rational arithmetic and only F_0
may carry a factor of top order n-2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import SeamContamination
from .hierarchy import EquationSpec
from .pde import SolverConfig, SpectralField, evolve, spectral_derivative, weighted_norm

Orders = Tuple[int, ...]


# -- two-jet exact polynomials ------------------------------------------------


class TwoJetPoly:
    """Polynomial in the jets of two fields; keys (orders_1, orders_2)."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean: Dict[Tuple[Orders, Orders], Fraction] = {}
        if terms:
            for (k1, k2), c in terms.items():
                c = Fraction(c)
                if c:
                    key = (tuple(sorted(k1)), tuple(sorted(k2)))
                    s = clean.get(key, Fraction(0)) + c
                    if s:
                        clean[key] = s
                    else:
                        clean.pop(key, None)
        self.terms = clean

    @staticmethod
    def monomial(coeff, orders1: Orders = (), orders2: Orders = ()) -> "TwoJetPoly":
        return TwoJetPoly({(tuple(orders1), tuple(orders2)): Fraction(coeff)})

    def __add__(self, other: "TwoJetPoly") -> "TwoJetPoly":
        out = dict(self.terms)
        for key, c in other.terms.items():
            s = out.get(key, Fraction(0)) + c
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        res = TwoJetPoly()
        res.terms = out
        return res

    def __sub__(self, other: "TwoJetPoly") -> "TwoJetPoly":
        res = TwoJetPoly()
        res.terms = {k: -c for k, c in other.terms.items()}
        return self + res

    def __mul__(self, other: "TwoJetPoly") -> "TwoJetPoly":
        out: Dict[Tuple[Orders, Orders], Fraction] = {}
        for (a1, a2), ca in self.terms.items():
            for (b1, b2), cb in other.terms.items():
                key = (tuple(sorted(a1 + b1)), tuple(sorted(a2 + b2)))
                s = out.get(key, Fraction(0)) + ca * cb
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        res = TwoJetPoly()
        res.terms = out
        return res

    def __eq__(self, other) -> bool:
        return isinstance(other, TwoJetPoly) and self.terms == other.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def max_order(self) -> int:
        tops = [max(k1 + k2) for (k1, k2) in self.terms if k1 + k2]
        return max(tops) if tops else -1


@dataclass
class DifferenceSplit:
    eq: EquationSpec
    F: Dict[int, TwoJetPoly]
    exact: bool
    top_order_carriers: List[int]  # j whose F_j contains an order-(n-2) jet


def difference_nonlinearity(eq: EquationSpec) -> DifferenceSplit:
    """Telescoping split of P(z1) - P(z2) into sum_j F_j d^j w, verified exactly."""
    F: Dict[int, TwoJetPoly] = {}
    for (d, m), a in eq.nonlinearity.items():
        for i in range(d):
            factors = TwoJetPoly.monomial(a)
            for idx in range(i):
                factors = factors * TwoJetPoly.monomial(1, (), (m[idx],))
            for idx in range(i + 1, d):
                factors = factors * TwoJetPoly.monomial(1, (m[idx],), ())
            j = m[i]
            F[j] = F.get(j, TwoJetPoly()) + factors
    # reconstruction oracle: substitute d^j w = u1_j - u2_j and compare
    recon = TwoJetPoly()
    for j, fj in F.items():
        w_j = TwoJetPoly.monomial(1, (j,), ()) - TwoJetPoly.monomial(1, (), (j,))
        recon = recon + fj * w_j
    direct = TwoJetPoly()
    for (d, m), a in eq.nonlinearity.items():
        m1 = TwoJetPoly.monomial(a, tuple(m), ())
        m2 = TwoJetPoly.monomial(a, (), tuple(m))
        direct = direct + (m1 - m2)
    exact = recon == direct
    carriers = [j for j, fj in F.items() if fj.max_order() >= eq.n - 2]
    return DifferenceSplit(eq=eq, F=F, exact=exact,
                           top_order_carriers=sorted(carriers))


# -- decay experiment ----------------------------------------------------------


@dataclass
class DecayRun:
    eq: EquationSpec
    u1_0: SpectralField
    u2_0: SpectralField
    beta: float
    dt: float
    t_end: float = 1.0
    snapshot_times: Optional[Sequence[float]] = None
    cutoff_mode: Optional[int] = None
    seam_width: float = 4.0
    seam_tol: float = 1e-3
    rate_fit_t_min: float = 0.1


@dataclass
class DecayReport:
    times: np.ndarray
    weighted_mass: np.ndarray       # W(t) = int e^(beta x) w^2
    rate: float                     # best-fit exponential rate
    seam_fraction: np.ndarray
    w_snapshots: List[SpectralField] = field(repr=False, default_factory=list)

    def mass_ratio(self) -> float:
        w0 = self.weighted_mass[0]
        return float(np.max(self.weighted_mass) / w0) if w0 > 0 else 0.0


def _seam_fraction(w: SpectralField, weight_vals: np.ndarray, width: float) -> float:
    x = w.x
    window = x >= (x[-1] - width)
    dens = weight_vals * w.values ** 2
    total = float(np.sum(dens) * w.dx)
    if total <= 0:
        return 0.0
    return float(np.sum(dens[window]) * w.dx) / total


def run_decay(run: DecayRun) -> DecayReport:
    """Evolve both fields, difference them per snapshot, fit the Gronwall rate."""
    if run.u1_0.M != run.u2_0.M or run.u1_0.length != run.u2_0.length:
        raise ValueError("both initial fields must share one grid")
    wanted = run.snapshot_times
    if wanted is None:
        wanted = np.round(np.linspace(0, run.t_end, 11), 12)
    times = sorted({float(t) for t in wanted})
    weight_vals = np.exp(run.beta * run.u1_0.x)

    w0 = run.u1_0.copy_with(run.u1_0.values - run.u2_0.values, 0.0)
    if np.any(np.abs(w0.values)):
        dens0 = weight_vals * w0.values ** 2
        if np.max(dens0[w0.x >= w0.x[-1] - run.seam_width]) > 1e-12 * np.max(dens0):
            raise SeamContamination("initial weighted difference reaches the seam")

    cfg = dict(dt=run.dt, t_end=run.t_end, snapshot_times=times,
               cutoff_mode=run.cutoff_mode)
    traj1 = evolve(run.u1_0, SolverConfig(eq=run.eq, **cfg))
    traj2 = evolve(run.u2_0, SolverConfig(eq=run.eq, **cfg))

    w_snaps, masses, fracs = [], [], []
    for f1, f2 in zip(traj1, traj2):
        w = f1.copy_with(f1.values - f2.values, f1.time)
        w_snaps.append(w)
        masses.append(weighted_norm(w, weight_vals))
        frac = _seam_fraction(w, weight_vals, run.seam_width)
        fracs.append(frac)
        if frac > run.seam_tol:
            raise SeamContamination(
                f"weighted seam fraction {frac:.3g} at t = {w.time:g}"
            )
    masses = np.asarray(masses)
    times = np.asarray([f.time for f in traj1])
    rate = 0.0
    if masses[0] > 0:
        sel = times >= run.rate_fit_t_min
        if np.any(sel):
            rate = float(np.max(np.log(masses[sel] / masses[0]) / times[sel]))
    return DecayReport(times=times, weighted_mass=masses, rate=rate,
                       seam_fraction=np.asarray(fracs), w_snapshots=w_snaps)


def make_decay_pair(M: int = 2048, length: float = 256.0, x_lo: float = -224.0,
                    amplitude: float = 0.3, eps: float = 1e-3,
                    center1: float = -15.0, width1: float = 3.0,
                    center2: float = -5.0, width2: float = 3.0):
    """Documented initial-data recipe: a bump and its sech-perturbed neighbor.

    The perturbation decays like e^(-2|x|/width2), so the weighted difference
    mass is finite for any beta < 4/width2 by construction.  The domain is
    deliberately lopsided: the flows radiate leftward, and the long left arm
    keeps wrapped radiation from reaching the high-weight side within t <= 1
    (group speeds ~5 kappa^4 with the active spectral content below kappa ~ 2.5).
    """
    x = x_lo + length * np.arange(M) / M
    u1 = amplitude / np.cosh((x - center1) / width1) ** 2
    u2 = u1 + eps / np.cosh((x - center2) / width2) ** 2
    return (SpectralField(u1, x_lo, length), SpectralField(u2, x_lo, length))


def mirrored_weighted_series(report: DecayReport, beta: float = 1.0) -> np.ndarray:
    """Weighted series of the reflected, time-reversed difference.

    Reflecting x -> -x and t -> t_end - t sends the e^(beta x) series into the
    e^(-beta x) series of the mirrored field; by change of variables it equals
    the original series read backwards, which the caller can assert.
    """
    out = []
    for w in reversed(report.w_snapshots):
        mirrored = w.values[::-1]
        x_mirr = -w.x[::-1]
        out.append(float(np.sum(np.exp(-beta * x_mirr) * mirrored ** 2) * w.dx))
    return np.asarray(out)


# -- lower-estimate probe -------------------------------------------------------


@dataclass
class LowerEstimateProbe:
    w_snapshots: List[SpectralField]
    n: int
    r: float                       # time margin of the rectangle
    R_values: Sequence[float]
    vacuous_rtol: float = 1e-13


@dataclass
class ProbeRow:
    R: float
    A_R: float
    R_pow_gamma: float
    log_A_R: float
    implied_constant: float
    vacuous: bool


@dataclass
class ProbeReport:
    w_norm_Q: float
    gamma: float
    rows: List[ProbeRow]


_trapezoid = getattr(np, "trapezoid", None) or np.trapz


def _time_integrate(times: np.ndarray, values: np.ndarray, lo: float, hi: float) -> float:
    sel = (times >= lo - 1e-12) & (times <= hi + 1e-12)
    if np.sum(sel) < 2:
        raise ValueError("need at least two snapshots inside the time window")
    return float(_trapezoid(values[sel], times[sel]))


def run_lower_probe(probe: LowerEstimateProbe, gamma: float) -> ProbeReport:
    """Tabulate the distant derivative energy against the rectangle mass."""
    if not 0 < probe.r < 0.5:
        raise ValueError("r must lie in (0, 1/2)")
    snaps = probe.w_snapshots
    times = np.asarray([w.time for w in snaps])
    t_end = times[-1]
    x = snaps[0].x
    dx = snaps[0].dx

    in_Q = (x >= 0.0) & (x <= 1.0)
    q_series = np.asarray([np.sum(w.values[in_Q] ** 2) * dx for w in snaps])
    w_norm_q = np.sqrt(_time_integrate(times, q_series, probe.r * t_end,
                                       (1 - probe.r) * t_end))
    if w_norm_q == 0.0:
        raise ValueError("difference vanishes on the sampled rectangle")

    # sum over j < n of (d^j w)^2, per snapshot
    energies = []
    for w in snaps:
        dens = w.values ** 2
        for j in range(1, probe.n):
            dens = dens + spectral_derivative(w, j) ** 2
        energies.append(dens)
    mean_energy = float(np.mean([np.sum(e) * dx for e in energies])) / snaps[0].length

    rows = []
    for R in probe.R_values:
        window = (x >= R) & (x <= R + 1.0)
        series = np.asarray([np.sum(e[window]) * dx for e in energies])
        a_r = _time_integrate(times, series, 0.0, t_end)
        vacuous = a_r <= probe.vacuous_rtol * max(mean_energy, 1e-300)
        rpg = float(R) ** gamma
        log_a = float(np.log(a_r)) if a_r > 0 else float("-inf")
        implied = (np.log(w_norm_q) - log_a) / rpg if a_r > 0 else float("inf")
        rows.append(ProbeRow(R=float(R), A_R=a_r, R_pow_gamma=rpg, log_A_R=log_a,
                             implied_constant=float(implied), vacuous=bool(vacuous)))
    return ProbeReport(w_norm_Q=w_norm_q, gamma=float(gamma), rows=rows)
