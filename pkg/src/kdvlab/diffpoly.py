"""Exact differential-polynomial ring in the jet variables u, u_x, u_xx, ...

A monomial is a finite multiset of derivative orders: the sorted tuple
(m_1, ..., m_d) stands for (d/dx)^{m_1}u * ... * (d/dx)^{m_d}u, and the empty
tuple is the constant monomial.  A polynomial maps each such tuple to an exact
rational coefficient; zero coefficients are never stored, so equality is plain
term-map equality.  Nothing in this module touches floating point.

Core operations: ring arithmetic, the total x-derivative, the Euler
(variational) operator E(f) = sum_j (-d/dx)^j df/du_j (which annihilates
exactly the total derivatives), formal integration by leading-monomial
elimination, and the third-order recursion operator
J(g) = g_xxx + (2/3) u g_x + (1/3) u_x g used to generate the hierarchy.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple, Union

from .errors import NotExact

Orders = Tuple[int, ...]
Rat = Union[int, Fraction]


class DiffPoly:
    """Immutable-by-convention sparse differential polynomial."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Orders, Rat] | None = None):
        clean: Dict[Orders, Fraction] = {}
        if terms:
            for orders, coeff in terms.items():
                key = tuple(sorted(int(m) for m in orders))
                if any(m < 0 for m in key):
                    raise ValueError(f"negative derivative order in {key}")
                c = Fraction(coeff)
                if c:
                    c = clean.get(key, Fraction(0)) + c
                    if c:
                        clean[key] = c
                    else:
                        clean.pop(key, None)
        self.terms = clean

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero() -> "DiffPoly":
        return DiffPoly()

    @staticmethod
    def const(c: Rat) -> "DiffPoly":
        return DiffPoly({(): Fraction(c)})

    @staticmethod
    def jet(m: int) -> "DiffPoly":
        """The single jet variable (d/dx)^m u."""
        return DiffPoly({(m,): Fraction(1)})

    @staticmethod
    def monomial(coeff: Rat, orders: Iterable[int]) -> "DiffPoly":
        return DiffPoly({tuple(orders): Fraction(coeff)})

    # -- ring structure ------------------------------------------------------

    def __add__(self, other: "DiffPoly") -> "DiffPoly":
        out = dict(self.terms)
        for key, c in other.terms.items():
            s = out.get(key, Fraction(0)) + c
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        res = DiffPoly.zero()
        res.terms = out
        return res

    def __neg__(self) -> "DiffPoly":
        res = DiffPoly.zero()
        res.terms = {k: -c for k, c in self.terms.items()}
        return res

    def __sub__(self, other: "DiffPoly") -> "DiffPoly":
        return self + (-other)

    def __mul__(self, other: Union["DiffPoly", Rat]) -> "DiffPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        out: Dict[Orders, Fraction] = {}
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                key = tuple(sorted(ka + kb))
                s = out.get(key, Fraction(0)) + ca * cb
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        res = DiffPoly.zero()
        res.terms = out
        return res

    def __rmul__(self, other: Rat) -> "DiffPoly":
        return self.scale(other)

    def scale(self, c: Rat) -> "DiffPoly":
        c = Fraction(c)
        if not c:
            return DiffPoly.zero()
        res = DiffPoly.zero()
        res.terms = {k: v * c for k, v in self.terms.items()}
        return res

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DiffPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            return "DiffPoly(0)"
        return "DiffPoly(" + ", ".join(
            f"{c}:{k}" for k, c in sorted(self.terms.items())
        ) + ")"

    # -- structure queries ---------------------------------------------------

    def constant_term(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def max_order(self) -> int:
        """Highest derivative order appearing; -1 for constants and zero."""
        orders = [k[-1] for k in self.terms if k]
        return max(orders) if orders else -1

    def degrees(self) -> set:
        return {len(k) for k in self.terms}

    # -- serialization (one term per line: "num/den : m_1 m_2 ... m_d") ------

    def to_text(self) -> str:
        lines = []
        for key in sorted(self.terms):
            c = self.terms[key]
            orders = " ".join(str(m) for m in key)
            lines.append(f"{c.numerator}/{c.denominator} : {orders}".rstrip())
        return "\n".join(lines)

    @staticmethod
    def from_text(text: str) -> "DiffPoly":
        terms: Dict[Orders, Fraction] = {}
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            coeff_part, _, orders_part = line.partition(":")
            num, _, den = coeff_part.strip().partition("/")
            key = tuple(sorted(int(m) for m in orders_part.split()))
            terms[key] = Fraction(int(num), int(den or "1"))
        return DiffPoly(terms)


def total_derivative(a: DiffPoly) -> DiffPoly:
    """Total x-derivative: Leibniz rule over the factors of each monomial."""
    out: Dict[Orders, Fraction] = {}
    for key, c in a.terms.items():
        for i, m in enumerate(key):
            # skip duplicate positions: differentiate each distinct order once
            # with multiplicity, not once per repeated factor
            if i > 0 and key[i - 1] == m:
                continue
            mult = key.count(m)
            new = tuple(sorted(key[:i] + (m + 1,) + key[i + 1:]))
            s = out.get(new, Fraction(0)) + c * mult
            if s:
                out[new] = s
            else:
                out.pop(new, None)
    res = DiffPoly.zero()
    res.terms = out
    return res


def partial_jet(a: DiffPoly, j: int) -> DiffPoly:
    """Partial derivative with respect to the jet variable u_j."""
    out: Dict[Orders, Fraction] = {}
    for key, c in a.terms.items():
        mult = key.count(j)
        if not mult:
            continue
        lst = list(key)
        lst.remove(j)
        new = tuple(lst)
        s = out.get(new, Fraction(0)) + c * mult
        if s:
            out[new] = s
        else:
            out.pop(new, None)
    res = DiffPoly.zero()
    res.terms = out
    return res


def euler_operator(a: DiffPoly) -> DiffPoly:
    """Variational derivative E(f) = sum_j (-d/dx)^j df/du_j.

    E(f) = 0 exactly when f is a total x-derivative plus a constant.
    """
    top = a.max_order()
    result = DiffPoly.zero()
    for j in range(top + 1):
        term = partial_jet(a, j)
        for _ in range(j):
            term = total_derivative(term)
        result = result + (term if j % 2 == 0 else -term)
    return result


def _lead_key(orders: Orders):
    return (orders[-1] if orders else -1, len(orders), orders)


def integrate_total_derivative(a: DiffPoly) -> DiffPoly:
    """Formal antiderivative: g with total_derivative(g) = a, zero constant.

    Requires euler_operator(a) = 0.  Works by stripping the leading monomial
    (ordered by max order, then degree, then lexicographic) and subtracting
    the total derivative of its antecedent, which strictly lowers the leading
    key at every step.
    """
    if euler_operator(a):
        raise NotExact("variational derivative is nonzero; not a total x-derivative")
    g = DiffPoly.zero()
    rem = a
    while rem:
        key = max(rem.terms, key=_lead_key)
        coeff = rem.terms[key]
        top = key[-1] if key else -1
        if top <= 0:
            # a nonzero constant, or a pure power of u, has no antecedent
            raise NotExact(f"remainder {coeff}:{key} is not a total x-derivative")
        if key.count(top) > 1:
            raise NotExact(f"leading monomial {key} has repeated top order")
        ant = tuple(sorted(key[:-1] + (top - 1,)))
        mult = ant.count(top - 1)
        piece = DiffPoly.monomial(coeff / mult, ant)
        g = g + piece
        rem = rem - total_derivative(piece)
    return g


def lenard_operator(g: DiffPoly) -> DiffPoly:
    """Third-order recursion operator J(g) = g_xxx + (2/3) u g_x + (1/3) u_x g."""
    u = DiffPoly.jet(0)
    ux = DiffPoly.jet(1)
    gx = total_derivative(g)
    gxxx = total_derivative(total_derivative(gx))
    return gxxx + u * gx * Fraction(2, 3) + ux * g * Fraction(1, 3)
