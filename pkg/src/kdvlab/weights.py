"""Weight constructions with machine-checkable property certificates.

Two families live here.

Truncated exponential weights: with a smooth nonincreasing cutoff phi~ (1 on
(-inf, 0], 0 on [1, inf)) and phi = phi~(x - N), define

    theta(x) = phi * beta e^(beta x) + (1 - phi) * beta e^(beta N)
    w_N(x)   = integral of theta from -inf to x,

so w_N(x) = e^(beta x) exactly for x <= N, grows affinely with slope
beta e^(beta N) beyond N + 1, and increases pointwise to e^(beta x) with N.
The certified properties: 0 <= w_N <= e^(beta x), monotonicity, derivative
domination |w^(j)| <= C_j w', growth control w <= C (1 + x_+) w', all with
constants independent of N.  A "bounded" variant replaces the constant branch
of theta by beta e^(-beta(x - 2N)), making the weight bounded.

Quadratic space-time weights: psi(x, t) = alpha (x/R + p(t))^2 with a smooth
time profile p; psi_xxx vanishes identically, psi_xx = 2 alpha / R^2 is
constant, and the first-order coefficient B = -psi_x is linear in x.  These
are the weights the operator expansions in `opalg` are built around.

The cutoff and its derivatives (needed up to the equation order) come from a
symbolically differentiated exp(-1/s) partition, evaluated through lambdified
expressions on the transition band only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
import sympy as sp
from scipy.integrate import quad

from .errors import PropertyViolated

MAX_DERIVATIVE_ORDER = 9


class SmoothStep:
    """C-infinity nonincreasing step: 1 on (-inf, 0], 0 on [1, inf).

    Uses g(s) = exp(-1/s) and step(s) = g(1-s) / (g(s) + g(1-s)) on (0, 1).
    Derivatives are generated symbolically once and cached as numpy callables.
    """

    def __init__(self, max_order: int = MAX_DERIVATIVE_ORDER):
        self._s = sp.Symbol("s", positive=True)
        g = sp.exp(-1 / self._s)
        gm = sp.exp(-1 / (1 - self._s))
        self.max_order = max_order
        # lazily extended: high-order expressions are large, build on demand
        self._exprs: List = [gm / (g + gm)]
        self._fns: List[Callable] = [sp.lambdify(self._s, self._exprs[0], "numpy")]

    def _fn(self, order: int) -> Callable:
        if order > self.max_order:
            raise ValueError(f"derivative order {order} beyond maximum {self.max_order}")
        while len(self._fns) <= order:
            nxt = sp.diff(self._exprs[-1], self._s)
            self._exprs.append(nxt)
            self._fns.append(sp.lambdify(self._s, nxt, "numpy"))
        return self._fns[order]

    def __call__(self, x, order: int = 0):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        if order == 0:
            out[x <= 0.0] = 1.0
        inside = (x > 0.0) & (x < 1.0)
        if np.any(inside):
            out[inside] = self._fn(order)(x[inside])
        return out


_DEFAULT_STEP: Optional[SmoothStep] = None


def default_step() -> SmoothStep:
    global _DEFAULT_STEP
    if _DEFAULT_STEP is None:
        _DEFAULT_STEP = SmoothStep()
    return _DEFAULT_STEP


@dataclass
class TruncatedExpWeight:
    """Weight w_N with closed-form branches and a quadrature transition band."""

    beta: float
    N: int
    variant: str = "affine"  # or "bounded"
    step: SmoothStep = field(default_factory=default_step, repr=False)

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.variant not in ("affine", "bounded"):
            raise ValueError(f"unknown variant {self.variant!r}")
        self._transition_value_cache: Dict[float, float] = {}

    # theta = w' and its derivatives ------------------------------------

    def _second_branch(self, x, order: int):
        """Derivatives of the x >= N branch of theta."""
        b, N = self.beta, self.N
        if self.variant == "affine":
            const = b * np.exp(b * N)
            return const * np.ones_like(x) if order == 0 else np.zeros_like(x)
        return b * (-b) ** order * np.exp(-b * (np.asarray(x) - 2 * N))

    def theta(self, x, order: int = 0):
        """order-th derivative of theta (so w^(order+1))."""
        x = np.asarray(x, dtype=float)
        b, N = self.beta, self.N
        out = np.empty_like(x)
        left = x <= N
        right = x >= N + 1
        mid = ~(left | right)
        out[left] = b ** (order + 1) * np.exp(b * x[left])
        out[right] = self._second_branch(x[right], order)
        if np.any(mid):
            xm = x[mid]
            s = xm - N
            total = np.zeros_like(xm)
            # Leibniz over theta = step * A(x) + (1 - step) * B(x)
            for i in range(order + 1):
                binom = int(sp.binomial(order, i))
                step_i = self.step(s, i)
                a_part = b ** (order - i + 1) * np.exp(b * xm)
                b_part = self._second_branch(xm, order - i)
                if i == 0:
                    total += step_i * a_part + (1.0 - step_i) * b_part
                else:
                    total += binom * step_i * (a_part - b_part)
            out[mid] = total
        return out

    # w itself ------------------------------------------------------------

    def _transition_integral(self, pts: np.ndarray) -> np.ndarray:
        """integral of theta over [N, p] for each p in [N, N+1], adaptive to 1e-12.

        Integrated segment by segment over the sorted points so repeated
        certificate sweeps stay cheap; segment results are cached.
        """

        def theta_scalar(t):
            return float(self.theta(np.array([t]))[0])

        order = np.argsort(pts)
        vals = np.empty_like(pts)
        acc, prev = 0.0, float(self.N)
        for idx in order:
            p = float(pts[idx])
            key = (round(prev, 15), round(p, 15))
            if key not in self._transition_value_cache:
                self._transition_value_cache[key] = quad(
                    theta_scalar, prev, p, epsabs=1e-12, epsrel=1e-12, limit=200
                )[0]
            acc += self._transition_value_cache[key]
            vals[idx] = acc
            prev = p
        return vals

    def _value_at_transition_end(self) -> float:
        return float(
            np.exp(self.beta * self.N)
            + self._transition_integral(np.array([self.N + 1.0]))[0]
        )

    def value(self, x):
        x = np.asarray(x, dtype=float)
        b, N = self.beta, self.N
        out = np.empty_like(x)
        left = x <= N
        right = x >= N + 1
        mid = ~(left | right)
        out[left] = np.exp(b * x[left])
        if np.any(mid):
            out[mid] = np.exp(b * N) + self._transition_integral(x[mid])
        if np.any(right):
            end = self._value_at_transition_end()
            if self.variant == "affine":
                out[right] = end + b * np.exp(b * N) * (x[right] - (N + 1))
            else:
                # integral of beta e^(-beta(x - 2N)) from N+1 to x
                out[right] = end + np.exp(2 * b * N) * (
                    np.exp(-b * (N + 1)) - np.exp(-b * x[right])
                )
        return out

    def deriv(self, x, j: int = 1):
        """j-th derivative of the weight, j >= 1."""
        if j < 1:
            raise ValueError("use value() for the weight itself")
        if j - 1 > self.step.max_order:
            raise ValueError(f"derivative order {j} beyond cached maximum")
        return self.theta(x, j - 1)


def build_truncated_exp(beta: float, N: int, variant: str = "affine",
                        step: Optional[SmoothStep] = None) -> TruncatedExpWeight:
    if step is None:
        step = default_step()
    return TruncatedExpWeight(beta=beta, N=N, variant=variant, step=step)


def certificate_grid(N: int) -> np.ndarray:
    """Sample grid straddling every regime transition: [-10, 4N] plus a dense band."""
    neg = np.linspace(-10.0, 0.0, 41)
    core = np.linspace(0.0, max(N - 1.0, 1.0), 160)
    band = np.linspace(N - 0.5, N + 1.5, 301)
    tail_hi = max(4.0 * N, N + 2.0)
    tail = np.geomspace(N + 1.5, tail_hi, 120)
    return np.unique(np.concatenate([neg, core, band, tail]))


@dataclass
class WeightCertificate:
    beta: float
    N: int
    deriv_ratio: Dict[int, float]   # C_j = sup |w^(j)| / w'
    first_ratio: float              # sup w' / w
    growth: float                   # sup w / ((1 + x_+) w')
    envelope_ok: bool               # 0 <= w <= e^(beta x) everywhere sampled
    monotone_ok: bool               # theta >= 0 everywhere sampled

    def as_rows(self) -> List[dict]:
        rows = [
            {"constant": "first_ratio", "value": self.first_ratio},
            {"constant": "growth", "value": self.growth},
        ]
        for j in sorted(self.deriv_ratio):
            rows.append({"constant": f"deriv_ratio_{j}", "value": self.deriv_ratio[j]})
        return rows


def certify_weight(w: TruncatedExpWeight, grid: Optional[np.ndarray] = None,
                   max_order: int = 5) -> WeightCertificate:
    """Empirical constants for the weight properties; raises on violations."""
    if grid is None:
        grid = certificate_grid(w.N)
    x = np.asarray(grid, dtype=float)
    val = w.value(x)
    wp = w.deriv(x, 1)
    if np.any(wp < -1e-15):
        raise PropertyViolated("weight derivative negative on the sample grid")
    if np.any(val < -1e-15):
        raise PropertyViolated("weight negative on the sample grid")
    envelope = val <= np.exp(w.beta * x) * (1 + 1e-12) + 1e-300
    if not np.all(envelope):
        raise PropertyViolated("weight exceeds its exponential envelope")
    floor = 1e-300
    ratios: Dict[int, float] = {}
    for j in range(2, max_order + 1):
        ratios[j] = float(np.max(np.abs(w.deriv(x, j)) / np.maximum(wp, floor)))
    first_ratio = float(np.max(wp / np.maximum(val, floor)))
    xplus = np.maximum(x, 0.0)
    growth = float(np.max(val / np.maximum((1.0 + xplus) * wp, floor)))
    return WeightCertificate(
        beta=w.beta, N=w.N, deriv_ratio=ratios, first_ratio=first_ratio,
        growth=growth, envelope_ok=True, monotone_ok=True,
    )


# -- quadratic space-time weights --------------------------------------------


class TimeProfile:
    """Smooth profile on [0, 1]: zero at both ends, plateau `height` on [r, 1-r].

    Rises on [r/2, r] and falls on [1-r, 1-r/2]; both ramps are rescaled
    copies of the smooth step, so all derivatives come from the chain rule
    with a linear inner function.
    """

    def __init__(self, r: float = 1.0 / 3.0, height: float = 4.0,
                 step: Optional[SmoothStep] = None):
        if not 0 < r < 0.5:
            raise ValueError("r must lie in (0, 1/2)")
        self.r = r
        self.height = height
        self.step = step or default_step()

    def _args(self, t):
        scale = 2.0 / self.r
        g_up = (self.r - np.asarray(t, float)) * scale      # 1 -> 0 over the rise
        g_down = (np.asarray(t, float) - (1.0 - self.r)) * scale  # 0 -> 1 over the fall
        return g_up, g_down, scale

    def __call__(self, t):
        g_up, g_down, _ = self._args(t)
        return self.height * self.step(g_up) * self.step(g_down)

    def deriv(self, t, order: int = 1):
        # variation supports of the two ramps are disjoint for r < 1/2
        g_up, g_down, scale = self._args(t)
        up_part = self.step(g_up, order) * (-scale) ** order * self.step(g_down)
        down_part = self.step(g_down, order) * scale ** order * self.step(g_up)
        return self.height * (up_part + down_part)


@dataclass
class QuadraticWeight:
    """psi(x, t) = alpha (x/R + p(t))^2 and the exact derivatives used downstream."""

    alpha: float
    R: float
    profile: Callable = None
    profile_deriv: Callable = None

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.R <= 1:
            raise ValueError("R must exceed 1")
        if self.profile is None:
            prof = TimeProfile()
            self.profile = prof
            self.profile_deriv = prof.deriv
        elif self.profile_deriv is None:
            raise ValueError("a custom profile needs its derivative evaluator")
        p0 = float(np.asarray(self.profile(0.0)))
        p1 = float(np.asarray(self.profile(1.0)))
        if abs(p0) > 1e-14 or abs(p1) > 1e-14:
            raise ValueError("time profile must vanish at t = 0 and t = 1")

    def ray(self, x, t):
        """x/R + p(t), the moving coordinate."""
        return np.asarray(x, float) / self.R + self.profile(t)

    def psi(self, x, t):
        return self.alpha * self.ray(x, t) ** 2

    def psi_x(self, x, t):
        return 2.0 * self.alpha * self.ray(x, t) / self.R

    def psi_xx(self, x, t):
        return 2.0 * self.alpha / self.R ** 2 * np.ones_like(np.asarray(x, float))

    def psi_xxx(self, x, t):
        return np.zeros_like(np.asarray(x, float))

    def psi_t(self, x, t):
        return 2.0 * self.alpha * self.ray(x, t) * self.profile_deriv(t, 1)

    def psi_tx(self, x, t):
        return 2.0 * self.alpha * self.profile_deriv(t, 1) / self.R \
            * np.ones_like(np.asarray(x, float))

    def B(self, x, t):
        return -self.psi_x(x, t)

    def B_x(self, x, t):
        return -self.psi_xx(x, t)


def build_quadratic_weight(alpha: float, R: float,
                           profile: Optional[TimeProfile] = None) -> QuadraticWeight:
    if profile is None:
        return QuadraticWeight(alpha=alpha, R=R)
    return QuadraticWeight(alpha=alpha, R=R, profile=profile,
                           profile_deriv=profile.deriv)
