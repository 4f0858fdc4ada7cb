"""Exact combinatorial coefficients of the operator-pairing expansion.

The cross pairings of the even/odd operator classes reduce to one family of
integers indexed by odd n and 0 <= j <= n-1.  Three independent routes are
implemented and must agree bit-exactly:

  * coeff_sum        -- the defining signed double-binomial sum,
  * coeff_closed     -- the closed form n * binom(n-1, j),
  * coeff_generating -- coefficients of t^(2j+1) in h'(1), where
        h(x) = (1/4)((1+tx)^n + (1-tx)^n)((1+t/x)^n - (1-t/x)^n)
    expanded by raw polynomial multiplication (no binomial shortcuts).

gamma_exponent evaluates the two-branch growth exponent used by the
lower-estimate probe; the second branch carries a strict "+epsilon" marker
that is never folded into the rational base value.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Dict, List, Tuple


def _check_nj(n: int, j: int) -> None:
    if n < 3 or n % 2 == 0:
        raise ValueError(f"n must be odd and >= 3, got {n}")
    if not 0 <= j <= n - 1:
        raise ValueError(f"j must be in 0..{n - 1}, got {j}")


def coeff_sum(n: int, j: int) -> int:
    """Signed sum (-1)^j sum_{k1+k2=j} (2k2+1-2k1) C(n,2k1) C(n,2k2+1)."""
    _check_nj(n, j)
    k = (n - 1) // 2
    total = 0
    for k1 in range(0, min(j, k) + 1):
        k2 = j - k1
        if not 0 <= k2 <= k:
            continue
        total += (2 * k2 + 1 - 2 * k1) * comb(n, 2 * k1) * comb(n, 2 * k2 + 1)
    return (-1) ** j * total


def coeff_closed(n: int, j: int) -> int:
    _check_nj(n, j)
    return n * comb(n - 1, j)


# Bivariate Laurent polynomials over the integers: {(t_pow, x_pow): coeff}.
_Poly2 = Dict[Tuple[int, int], int]


def _p2_mul(a: _Poly2, b: _Poly2) -> _Poly2:
    out: _Poly2 = {}
    for (ta, xa), ca in a.items():
        for (tb, xb), cb in b.items():
            key = (ta + tb, xa + xb)
            s = out.get(key, 0) + ca * cb
            if s:
                out[key] = s
            else:
                out.pop(key, None)
    return out


def _p2_pow(base: _Poly2, n: int) -> _Poly2:
    out: _Poly2 = {(0, 0): 1}
    for _ in range(n):
        out = _p2_mul(out, base)
    return out


def coeff_generating(n: int) -> List[int]:
    """All coefficients j = 0..n-1 extracted from the generating polynomial.

    Builds h by repeated multiplication, differentiates in x, evaluates at
    x = 1, and reads off h'(1) = sum_j (-1)^(j+1) A_j t^(2j+1).
    """
    if n < 3 or n % 2 == 0:
        raise ValueError(f"n must be odd and >= 3, got {n}")
    plus_x = _p2_pow({(0, 0): 1, (1, 1): 1}, n)    # (1 + t x)^n
    minus_x = _p2_pow({(0, 0): 1, (1, 1): -1}, n)  # (1 - t x)^n
    plus_inv = _p2_pow({(0, 0): 1, (1, -1): 1}, n)   # (1 + t/x)^n
    minus_inv = _p2_pow({(0, 0): 1, (1, -1): -1}, n)  # (1 - t/x)^n
    even = {k: ca + minus_x.get(k, 0) for k, ca in plus_x.items()}
    even.update({k: c for k, c in minus_x.items() if k not in plus_x})
    odd = {k: c - minus_inv.get(k, 0) for k, c in plus_inv.items()}
    odd.update({k: -c for k, c in minus_inv.items() if k not in plus_inv})
    h4 = _p2_mul({k: c for k, c in even.items() if c},
                 {k: c for k, c in odd.items() if c})
    # 4 h'(1): d/dx x^e = e x^(e-1), then x = 1
    by_t: Dict[int, int] = {}
    for (tp, xp), c in h4.items():
        if xp:
            by_t[tp] = by_t.get(tp, 0) + xp * c
    coeffs = []
    for j in range(n):
        raw = by_t.get(2 * j + 1, 0)
        if raw % 4:
            raise ArithmeticError("generating polynomial coefficient not divisible by 4")
        coeffs.append((-1) ** (j + 1) * (raw // 4))
    return coeffs


@dataclass(frozen=True)
class GammaExponent:
    """Growth exponent with an explicit strict-inequality marker.

    strict=True means the exponent family is "base + epsilon for every
    epsilon > 0"; the epsilon is carried separately, never merged into base.
    """

    base: Fraction
    epsilon: Fraction
    strict: bool

    @property
    def value(self) -> Fraction:
        return self.base + self.epsilon

    def __str__(self) -> str:
        if self.strict:
            suffix = f" + {self.epsilon}" if self.epsilon else "+"
            return f"{self.base}{suffix}"
        return str(self.base)


def gamma_exponent(n: int, p: int, epsilon: Fraction = Fraction(0)) -> GammaExponent:
    """Two-branch exponent: n/(n-1) for p <= (n-1)/2, else 2(n-p)/(2(n-p)-1)+eps."""
    if n < 5 or n % 2 == 0:
        raise ValueError(f"n must be odd and >= 5, got {n}")
    if not 0 <= p <= n - 1:
        raise ValueError(f"p must be in 0..{n - 1}, got {p}")
    epsilon = Fraction(epsilon)
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    k = (n - 1) // 2
    if p <= k:
        return GammaExponent(Fraction(n, n - 1), Fraction(0), False)
    q = n - p
    return GammaExponent(Fraction(2 * q, 2 * q - 1), epsilon, True)


def exponent_table(n: int, epsilon: Fraction = Fraction(0)) -> List[GammaExponent]:
    return [gamma_exponent(n, p, epsilon) for p in range(n)]


def identity_holds(n: int) -> bool:
    """All three routes agree for every j at this n."""
    gen = coeff_generating(n)
    return all(
        coeff_sum(n, j) == coeff_closed(n, j) == gen[j] for j in range(n)
    )
